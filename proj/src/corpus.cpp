#include "cluesum/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cluesum {

namespace {

const std::string kPunctAscii = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

const std::unordered_set<std::string>& cjk_punct() {
  static const std::unordered_set<std::string> set = {
      "。", "！", "？", "，", "、", "；", "：", "“", "”", "‘", "’",
      "（", "）", "《", "》", "〈", "〉", "【", "】", "「", "」",
      "『", "』", "…", "—", "～", "·", "．"};
  return set;
}

bool is_ascii_alnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool all_ws(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return is_ws(c); });
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_ws(s[b])) ++b;
  while (e > b && is_ws(s[e - 1])) --e;
  return s.substr(b, e - b);
}

Token make_token(std::string surface) {
  Token t;
  t.normalized = lowercase_ascii(surface);
  t.surface = std::move(surface);
  return t;
}

// en chunk: peel leading and trailing punctuation into their own tokens,
// stopping whenever the remaining chunk is a known abbreviation.
void emit_en_chunk(const std::string& chunk, const TokenSet& abbrevs,
                   std::vector<Token>& out) {
  std::vector<std::string> chars = utf8_chars(chunk);
  std::size_t b = 0, e = chars.size();
  std::vector<std::string> lead, trail;

  auto rest = [&]() {
    std::string s;
    for (std::size_t i = b; i < e; ++i) s += chars[i];
    return s;
  };

  while (b < e && is_punctuation(chars[b]) && !abbrevs.count(rest())) {
    lead.push_back(chars[b]);
    ++b;
  }
  while (e > b && is_punctuation(chars[e - 1]) && !abbrevs.count(rest())) {
    trail.insert(trail.begin(), chars[e - 1]);
    --e;
  }

  for (auto& p : lead) out.push_back(make_token(p));
  std::string core = rest();
  if (!core.empty()) out.push_back(make_token(core));
  for (auto& p : trail) out.push_back(make_token(p));
}

std::vector<Token> tokenize_en(const std::string& text, const TokenSet& abbrevs) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ws(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_ws(text[j])) ++j;
    if (j > i) emit_en_chunk(text.substr(i, j - i), abbrevs, out);
    i = j;
  }
  return out;
}

std::vector<Token> tokenize_zh(const std::string& text) {
  std::vector<Token> out;
  std::string ascii_run;
  auto flush = [&]() {
    if (!ascii_run.empty()) {
      out.push_back(make_token(ascii_run));
      ascii_run.clear();
    }
  };
  for (const std::string& ch : utf8_chars(text)) {
    if (ch.size() == 1) {
      char c = ch[0];
      if (is_ws(c)) {
        flush();
      } else if (is_ascii_alnum(c)) {
        ascii_run += c;
      } else {  // ASCII punctuation and symbols: single token
        flush();
        out.push_back(make_token(ch));
      }
    } else {
      flush();
      out.push_back(make_token(ch));
    }
  }
  flush();
  return out;
}

// Word immediately preceding byte position `end` (exclusive), extended back
// to the previous whitespace. Used for abbreviation checks at '.'.
std::string word_ending_at(const std::string& text, std::size_t end) {
  std::size_t b = end;
  while (b > 0 && !is_ws(text[b - 1])) --b;
  return text.substr(b, end - b);
}

}  // namespace

std::string lowercase_ascii(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> utf8_chars(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if ((c & 0x80u) == 0)
      len = 1;
    else if ((c & 0xE0u) == 0xC0u)
      len = 2;
    else if ((c & 0xF0u) == 0xE0u)
      len = 3;
    else if ((c & 0xF8u) == 0xF0u)
      len = 4;
    if (i + len > s.size()) len = 1;  // tolerate truncated sequences
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

bool is_punctuation(const std::string& tok) {
  if (tok.empty()) return false;
  bool all = true;
  for (const std::string& ch : utf8_chars(tok)) {
    if (ch.size() == 1) {
      if (kPunctAscii.find(ch[0]) == std::string::npos) {
        all = false;
        break;
      }
    } else if (!cjk_punct().count(ch)) {
      all = false;
      break;
    }
  }
  return all;
}

bool is_zh(const std::string& lang) { return lang.rfind("zh", 0) == 0; }

std::vector<Token> tokenize(const std::string& text, const std::string& lang,
                            const TokenSet& abbrevs) {
  if (is_zh(lang)) return tokenize_zh(text);
  return tokenize_en(text, abbrevs);
}

std::vector<Sentence> split_sentences(const std::string& text, const std::string& lang,
                                      const TokenSet& abbrevs) {
  if (text.empty() || all_ws(text)) throw EmptyInput("empty text");

  std::vector<std::string> slices;
  if (is_zh(lang)) {
    static const std::unordered_set<std::string> delims = {"。", "！", "？"};
    std::string cur;
    for (const std::string& ch : utf8_chars(text)) {
      cur += ch;
      if (delims.count(ch)) {
        slices.push_back(cur);
        cur.clear();
      }
    }
    if (!cur.empty()) slices.push_back(cur);
  } else {
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
      char c = text[i];
      if (c != '.' && c != '!' && c != '?') continue;
      bool at_end = (i + 1 == text.size());
      if (!at_end && !is_ws(text[i + 1])) continue;  // e.g. "U.S." internal dot
      if (c == '.' && abbrevs.count(word_ending_at(text, i + 1))) continue;
      slices.push_back(text.substr(start, i + 1 - start));
      start = i + 1;
    }
    if (start < text.size()) slices.push_back(text.substr(start));
  }

  std::vector<Sentence> out;
  for (const std::string& raw : slices) {
    std::string t = trim(raw);
    if (t.empty()) continue;
    Sentence s;
    s.index = static_cast<int>(out.size());
    s.text = t;
    s.tokens = tokenize(t, lang, abbrevs);
    if (s.tokens.empty()) continue;
    out.push_back(std::move(s));
  }
  if (out.empty()) throw EmptyInput("no sentences in text");
  return out;
}

std::vector<CLSPair> load_cls_corpus(const std::string& path, const TokenSet& abbrevs) {
  std::ifstream in(path);
  if (!in.is_open()) throw IoError("cannot open corpus file: " + path);

  std::vector<CLSPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (all_ws(line)) continue;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(lineno, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(lineno, "expected a JSON object");

    for (const char* key : {"id", "doc", "summary", "src_lang", "tgt_lang"}) {
      if (!j.contains(key))
        throw SchemaError(lineno, std::string("missing key \"") + key + "\"");
    }

    auto as_string = [&](const char* key) -> std::string {
      const auto& v = j.at(key);
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number_integer()) return std::to_string(v.get<long long>());
      throw SchemaError(lineno, std::string("key \"") + key + "\" must be a string");
    };

    CLSPair p;
    p.id = as_string("id");
    p.reference = as_string("summary");
    std::string src_lang = as_string("src_lang");
    p.target_language = as_string("tgt_lang");
    if (src_lang == p.target_language)
      throw SchemaError(lineno, "src_lang and tgt_lang must differ");

    std::string doc_text = as_string("doc");
    try {
      p.doc.sentences = split_sentences(doc_text, src_lang, abbrevs);
    } catch (const EmptyInput&) {
      throw SchemaError(lineno, "\"doc\" is empty");
    }
    p.doc.language = src_lang;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

TokenSet load_token_set(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw IoError("cannot open token list: " + path);
  TokenSet out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (!t.empty()) out.insert(t);
  }
  return out;
}

const std::string& Vocabulary::pad_token() {
  static const std::string t = "<pad>";
  return t;
}
const std::string& Vocabulary::unk_token() {
  static const std::string t = "<unk>";
  return t;
}
const std::string& Vocabulary::bos_token() {
  static const std::string t = "<bos>";
  return t;
}
const std::string& Vocabulary::eos_token() {
  static const std::string t = "<eos>";
  return t;
}
const std::string& Vocabulary::sep_token() {
  static const std::string t = "<sep>";
  return t;
}

int Vocabulary::lookup(const std::string& tok) const {
  auto it = ids.find(tok);
  return it == ids.end() ? kUnk : it->second;
}

int Vocabulary::find(const std::string& tok) const {
  auto it = ids.find(tok);
  return it == ids.end() ? -1 : it->second;
}

const std::string& Vocabulary::token_of(int id) const {
  if (id < 0 || id >= size()) throw ValueError("token id out of range: " + std::to_string(id));
  return tokens[static_cast<std::size_t>(id)];
}

namespace {

Vocabulary vocab_from_tokens(std::vector<std::string> toks, Vocabulary::Side side) {
  Vocabulary v;
  v.side = side;
  v.tokens = std::move(toks);
  for (int i = 0; i < v.size(); ++i) v.ids[v.tokens[static_cast<std::size_t>(i)]] = i;
  return v;
}

}  // namespace

Vocabulary build_vocab(const std::vector<CLSPair>& corpus, Vocabulary::Side side,
                       int max_size, int min_freq) {
  if (max_size < 4) throw ValueError("max_size must be >= 4");
  if (corpus.empty()) throw EmptyInput("empty corpus");

  std::map<std::string, long> freq;  // ordered: lexicographic tie-break for free
  for (const CLSPair& p : corpus) {
    if (side == Vocabulary::Side::Source) {
      for (const Sentence& s : p.doc.sentences)
        for (const Token& t : s.tokens) ++freq[t.normalized];
    } else {
      for (const Token& t : tokenize(p.reference, p.target_language)) ++freq[t.normalized];
    }
  }

  std::vector<std::pair<std::string, long>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> toks = {Vocabulary::pad_token(), Vocabulary::unk_token(),
                                   Vocabulary::bos_token(), Vocabulary::eos_token()};
  // Reserve one slot for the clue separator when it fits.
  bool add_sep = max_size >= 5;
  std::size_t budget = static_cast<std::size_t>(max_size) - toks.size() - (add_sep ? 1 : 0);
  for (const auto& [tok, count] : ranked) {
    if (toks.size() - 4 >= budget) break;
    if (count < min_freq) continue;
    if (tok == Vocabulary::sep_token()) continue;  // always appended last
    toks.push_back(tok);
  }
  if (add_sep) toks.push_back(Vocabulary::sep_token());
  return vocab_from_tokens(std::move(toks), side);
}

void save_vocab(const Vocabulary& v, const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) throw IoError("cannot write vocabulary: " + path);
  for (const std::string& t : v.tokens) out << t << "\n";
}

Vocabulary load_vocab(const std::string& path, Vocabulary::Side side) {
  std::ifstream in(path);
  if (!in.is_open()) throw IoError("cannot open vocabulary: " + path);
  std::vector<std::string> toks;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    toks.push_back(line);
  }
  while (!toks.empty() && toks.back().empty()) toks.pop_back();
  if (toks.size() < 4) throw ValueError("vocabulary too small: " + path);
  return vocab_from_tokens(std::move(toks), side);
}

const std::vector<std::pair<std::string, double>>* BilingualLexicon::find(
    const std::string& src) const {
  auto it = entries.find(src);
  return it == entries.end() ? nullptr : &it->second;
}

BilingualLexicon load_lexicon(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in.is_open()) throw IoError("cannot open lexicon: " + path);

  // src -> tgt -> prob, with first-seen target order preserved per source.
  std::map<std::string, std::vector<std::pair<std::string, double>>> acc;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (all_ws(line)) continue;

    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw ParseError(lineno, "expected src<TAB>tgt<TAB>prob");

    std::string src = lowercase_ascii(trim(line.substr(0, t1)));
    std::string tgt = trim(line.substr(t1 + 1, t2 - t1 - 1));
    std::string prob_s = trim(line.substr(t2 + 1));
    if (src.empty() || tgt.empty()) throw ParseError(lineno, "empty src or tgt");

    double prob = 0.0;
    try {
      std::size_t pos = 0;
      prob = std::stod(prob_s, &pos);
      if (pos != prob_s.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad probability: " + prob_s);
    }
    if (prob < 0.0 || prob > 1.0)
      throw ValueError("line " + std::to_string(lineno) +
                       ": probability outside [0,1]: " + prob_s);

    auto& targets = acc[src];
    auto it = std::find_if(targets.begin(), targets.end(),
                           [&](const auto& p) { return p.first == tgt; });
    if (it != targets.end()) {
      if (warnings)
        warnings->push_back("duplicate entry " + src + " -> " + tgt +
                            " at line " + std::to_string(lineno) + "; keeping max");
      it->second = std::max(it->second, prob);
    } else {
      targets.emplace_back(tgt, prob);
    }
  }

  BilingualLexicon lex;
  for (auto& [src, targets] : acc) {
    double sum = 0.0;
    for (const auto& [tgt, p] : targets) sum += p;
    if (sum <= 0.0) {
      double u = 1.0 / static_cast<double>(targets.size());
      for (auto& [tgt, p] : targets) p = u;
    } else {
      for (auto& [tgt, p] : targets) p /= sum;
    }
    lex.entries[src] = std::move(targets);
  }
  return lex;
}

}  // namespace cluesum
