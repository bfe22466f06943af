#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cluesum/errors.hpp"

namespace cluesum {

struct Token {
  std::string surface;
  std::string normalized;  // lowercase(surface)
};

struct Sentence {
  int index = 0;
  std::vector<Token> tokens;
  std::string text;  // raw slice this sentence was built from
};

struct Document {
  std::vector<Sentence> sentences;
  std::string language;  // "en", "zh", ...
};

/// One article paired with its reference summary in a different language.
struct CLSPair {
  Document doc;
  std::string reference;  // target-language summary text
  std::string id;
  std::string target_language;
};

using TokenSet = std::unordered_set<std::string>;

std::string lowercase_ascii(const std::string& s);
std::vector<std::string> utf8_chars(const std::string& s);
bool is_punctuation(const std::string& tok);
bool is_zh(const std::string& lang);

/// en: whitespace split, then detach leading/trailing punctuation unless the
/// chunk is a known abbreviation. zh: one token per character, ASCII
/// alphanumeric runs kept whole. Empty text yields an empty list.
std::vector<Token> tokenize(const std::string& text, const std::string& lang,
                            const TokenSet& abbreviations = {});

/// Splits on ., !, ? (en; only when followed by whitespace or end of text,
/// and the preceding word is not an abbreviation) or on 。！？ (zh). The
/// delimiter stays with its sentence; text without a delimiter becomes a
/// single sentence. Throws EmptyInput for whitespace-only text.
std::vector<Sentence> split_sentences(const std::string& text, const std::string& lang,
                                      const TokenSet& abbreviations = {});

/// Loads a JSONL corpus. Each line is an object with keys
/// "id", "doc", "summary", "src_lang", "tgt_lang".
std::vector<CLSPair> load_cls_corpus(const std::string& path,
                                     const TokenSet& abbreviations = {});

/// One token per line (stopword and abbreviation lists). Missing file -> IoError.
TokenSet load_token_set(const std::string& path);

struct Vocabulary {
  enum class Side { Source, Target };

  Side side = Side::Source;
  std::vector<std::string> tokens;           // token_of, position == id
  std::unordered_map<std::string, int> ids;  // id_of

  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;

  static const std::string& pad_token();
  static const std::string& unk_token();
  static const std::string& bos_token();
  static const std::string& eos_token();
  static const std::string& sep_token();

  int size() const { return static_cast<int>(tokens.size()); }
  /// Id of `tok`, or kUnk when absent.
  int lookup(const std::string& tok) const;
  /// Id of `tok`, or -1 when absent.
  int find(const std::string& tok) const;
  /// Id of the clue separator token, or -1 when the vocabulary has none.
  int sep_id() const { return find(sep_token()); }
  const std::string& token_of(int id) const;
};

/// Builds a vocabulary over normalized tokens (document side or reference
/// side). Tokens are ranked by frequency, ties broken lexicographically;
/// tokens below min_freq are dropped and the total size is capped at
/// max_size. The four specials take ids 0..3 and the clue separator token is
/// appended after the corpus tokens when there is room for it.
Vocabulary build_vocab(const std::vector<CLSPair>& corpus, Vocabulary::Side side,
                       int max_size, int min_freq);

/// One token per line, in id order.
void save_vocab(const Vocabulary& v, const std::string& path);
Vocabulary load_vocab(const std::string& path, Vocabulary::Side side);

/// Word translation table: normalized source token -> (target token, prob).
/// Probabilities for each source token sum to 1.
struct BilingualLexicon {
  std::map<std::string, std::vector<std::pair<std::string, double>>> entries;

  bool contains(const std::string& src) const { return entries.count(src) > 0; }
  const std::vector<std::pair<std::string, double>>* find(const std::string& src) const;
};

/// Loads a TSV lexicon ("src<TAB>tgt<TAB>prob"). Keys are normalized to
/// lowercase; duplicate (src,tgt) rows keep the max probability (warned);
/// per-source probabilities are renormalized to sum to 1.
BilingualLexicon load_lexicon(const std::string& path,
                              std::vector<std::string>* warnings = nullptr);

}  // namespace cluesum
