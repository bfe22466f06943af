#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "cluesum/corpus.hpp"
#include "json.hpp"

namespace cluesum {

struct PrfScore {
  double p = 0.0, r = 0.0, f = 0.0;
};

struct MatchStats {
  long overlap = 0;
  long hyp_units = 0;
  long ref_units = 0;
};

/// ROUGE-N F1 over word n-grams, or character n-grams when char_level is
/// set (whitespace removed first). Overlap is the clipped multiset
/// intersection count.
PrfScore rouge_n(const std::string& hyp, const std::string& ref, int n, bool char_level);

/// ROUGE-L F1 from the longest common subsequence over tokens (or
/// characters when char_level).
PrfScore rouge_l(const std::string& hyp, const std::string& ref, bool char_level);

/// Optional synonym table for the meteor matcher pipeline: any two tokens
/// sharing a group match.
struct SynonymTable {
  std::unordered_map<std::string, int> group_of;

  bool related(const std::string& a, const std::string& b) const;
  /// One group per line, tokens separated by whitespace.
  static SynonymTable load(const std::string& path);
};

struct MeteorParams {
  double alpha = 0.9;
  double gamma = 0.5;
  double theta = 3.0;
  const SynonymTable* synonyms = nullptr;  // optional third matcher stage
};

/// METEOR with staged matchers (exact, stem, optional synonyms) and the
/// fragmentation penalty gamma * (chunks / matches)^theta.
double meteor(const std::string& hyp, const std::string& ref, const MeteorParams& params);

/// Light rule-based English suffix stripper used by the stem matcher.
std::string light_stem(const std::string& word);

/// Static word embedding table ("token v1 v2 ... vd" per line). Tokens
/// missing from the table get a deterministic hash-seeded fallback vector.
struct EmbeddingTable {
  int dim = 64;
  std::unordered_map<std::string, std::vector<double>> vectors;

  std::vector<double> lookup(const std::string& token) const;
  static EmbeddingTable load(const std::string& path);
};

/// Relaxed word-mover score: each word travels to its nearest counterpart,
/// frequency weighted; distance is the max of the two directional
/// relaxations and the score is 1/(1+distance).
double relaxed_wmd(const std::string& hyp, const std::string& ref,
                   const EmbeddingTable& embeddings, bool char_level = false);

struct PairScores {
  std::string id;
  PrfScore r1, r2, rl;
  double meteor = 0.0;
  double rwmd = 0.0;
};

struct EvalReport {
  std::vector<PairScores> pairs;
  PairScores mean;  // arithmetic means over pairs

  nlohmann::json to_json() const;
  std::string to_table() const;
};

/// Scores each (hyp, ref) pair and aggregates corpus means.
EvalReport evaluate_pairs(const std::vector<std::pair<std::string, std::string>>& hyp_ref,
                          const std::vector<std::string>& ids, bool char_level,
                          const MeteorParams& meteor_params,
                          const EmbeddingTable& embeddings);

struct LengthBucket {
  long lo = 0;
  long hi = -1;  // -1: unbounded
  int count = 0;
  double mean_rouge_l = 0.0;  // meaningless when count == 0
  bool has_delta = false;
  double delta = 0.0;  // vs the first bucket
};

struct LengthReport {
  std::vector<LengthBucket> buckets;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

/// Buckets pairs by source token count into [0,b1), [b1,b2), ..., [bn,inf)
/// and reports mean ROUGE-L F1 per bucket plus the delta against the first
/// bucket. Boundaries must be strictly increasing; empty buckets carry no
/// delta (n/a).
LengthReport make_length_report(const std::vector<CLSPair>& corpus,
                                const std::map<std::string, std::string>& hyp_by_id,
                                const std::vector<long>& boundaries, bool char_level);

}  // namespace cluesum
