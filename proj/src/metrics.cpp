#include "cluesum/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace cluesum {

namespace {

std::vector<std::string> metric_units(const std::string& text, bool char_level) {
  std::vector<std::string> out;
  if (char_level) {
    for (const std::string& ch : utf8_chars(text)) {
      if (ch.size() == 1 && std::isspace(static_cast<unsigned char>(ch[0]))) continue;
      out.push_back(ch);
    }
  } else {
    for (const Token& t : tokenize(text, "en")) out.push_back(t.normalized);
  }
  return out;
}

PrfScore prf(double overlap, double hyp_units, double ref_units) {
  PrfScore s;
  if (hyp_units <= 0.0 || ref_units <= 0.0) return s;
  s.p = overlap / hyp_units;
  s.r = overlap / ref_units;
  if (s.p + s.r > 0.0) s.f = 2.0 * s.p * s.r / (s.p + s.r);
  return s;
}

std::map<std::vector<std::string>, long> ngram_counts(const std::vector<std::string>& units,
                                                      int n) {
  std::map<std::vector<std::string>, long> counts;
  if (static_cast<int>(units.size()) < n) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= units.size(); ++i)
    ++counts[std::vector<std::string>(units.begin() + static_cast<long>(i),
                                      units.begin() + static_cast<long>(i) + n)];
  return counts;
}

}  // namespace

PrfScore rouge_n(const std::string& hyp, const std::string& ref, int n, bool char_level) {
  if (n < 1) throw ValueError("n must be >= 1");
  auto hyp_counts = ngram_counts(metric_units(hyp, char_level), n);
  auto ref_counts = ngram_counts(metric_units(ref, char_level), n);

  long hyp_total = 0, ref_total = 0, overlap = 0;
  for (const auto& [g, c] : hyp_counts) hyp_total += c;
  for (const auto& [g, c] : ref_counts) ref_total += c;
  for (const auto& [g, c] : hyp_counts) {
    auto it = ref_counts.find(g);
    if (it != ref_counts.end()) overlap += std::min(c, it->second);
  }
  return prf(double(overlap), double(hyp_total), double(ref_total));
}

PrfScore rouge_l(const std::string& hyp, const std::string& ref, bool char_level) {
  std::vector<std::string> h = metric_units(hyp, char_level);
  std::vector<std::string> r = metric_units(ref, char_level);
  if (h.empty() || r.empty()) return {};

  std::vector<std::vector<long>> dp(h.size() + 1, std::vector<long>(r.size() + 1, 0));
  for (std::size_t i = 1; i <= h.size(); ++i) {
    for (std::size_t j = 1; j <= r.size(); ++j) {
      if (h[i - 1] == r[j - 1])
        dp[i][j] = dp[i - 1][j - 1] + 1;
      else
        dp[i][j] = std::max(dp[i - 1][j], dp[i][j - 1]);
    }
  }
  return prf(double(dp[h.size()][r.size()]), double(h.size()), double(r.size()));
}

bool SynonymTable::related(const std::string& a, const std::string& b) const {
  auto ia = group_of.find(a);
  if (ia == group_of.end()) return false;
  auto ib = group_of.find(b);
  return ib != group_of.end() && ia->second == ib->second;
}

SynonymTable SynonymTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw IoError("cannot open synonym table: " + path);
  SynonymTable t;
  std::string line;
  int group = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    bool any = false;
    while (ss >> tok) {
      t.group_of[lowercase_ascii(tok)] = group;
      any = true;
    }
    if (any) ++group;
  }
  return t;
}

std::string light_stem(const std::string& word) {
  std::string w = word;
  auto ends = [&](const char* suf) {
    std::size_t n = std::string(suf).size();
    return w.size() >= n && w.compare(w.size() - n, n, suf) == 0;
  };
  if (ends("sses")) {
    w.resize(w.size() - 2);  // -> ss
  } else if (ends("ies") && w.size() >= 4) {
    w.resize(w.size() - 3);
    w += 'y';
  } else if (ends("ss")) {
    // keep
  } else if (ends("s") && w.size() >= 3) {
    w.pop_back();
  }
  if (ends("ed") && w.size() >= 4) {
    w.resize(w.size() - 2);
  } else if (ends("ing") && w.size() >= 5) {
    w.resize(w.size() - 3);
  }
  if (ends("ly") && w.size() >= 5) w.resize(w.size() - 2);
  return w;
}

namespace {

// One possible match for a hypothesis position within one matcher stage.
struct MatchCandidates {
  int hyp_pos = 0;
  int class_id = 0;  // equivalence class under the stage matcher
  std::vector<int> ref_candidates;
};

// Minimize chunk count among maximum-cardinality stage alignments with
// bounded exhaustive search. Per equivalence class the match count is fixed
// (min of free occurrence counts on either side); a hypothesis position may
// stay unmatched only while its class quota remains reachable. Beyond the
// node budget the first (diagonal-greedy) completion found wins.
class AlignmentSearch {
 public:
  AlignmentSearch(std::vector<MatchCandidates> cands, std::vector<char> ref_used,
                  std::map<int, int> base, std::vector<int> quota)
      : cands_(std::move(cands)),
        ref_used_(std::move(ref_used)),
        base_(std::move(base)),
        quota_(std::move(quota)),
        matched_(quota_.size(), 0),
        remaining_(quota_.size(), 0) {
    for (const auto& mc : cands_) ++remaining_[static_cast<std::size_t>(mc.class_id)];
  }

  std::map<int, int> run() {
    best_chunks_ = std::numeric_limits<int>::max();
    current_ = base_;
    recurse(0);
    return best_;
  }

 private:
  static int chunk_count(const std::map<int, int>& pairs) {
    int chunks = 0;
    int prev_h = -10, prev_r = -10;
    for (const auto& [h, r] : pairs) {  // ordered by hyp position
      if (h != prev_h + 1 || r != prev_r + 1) ++chunks;
      prev_h = h;
      prev_r = r;
    }
    return chunks;
  }

  void recurse(std::size_t idx) {
    if (nodes_ > kNodeBudget && best_chunks_ != std::numeric_limits<int>::max()) return;
    ++nodes_;
    if (idx == cands_.size()) {
      int c = chunk_count(current_);
      if (c < best_chunks_) {
        best_chunks_ = c;
        best_ = current_;
      }
      return;
    }
    const MatchCandidates& mc = cands_[idx];
    std::size_t cls = static_cast<std::size_t>(mc.class_id);
    --remaining_[cls];

    // Try the diagonal continuation first so the first completion is the
    // greedy one.
    std::vector<int> order = mc.ref_candidates;
    auto prev = current_.find(mc.hyp_pos - 1);
    if (prev != current_.end()) {
      int want = prev->second + 1;
      auto it = std::find(order.begin(), order.end(), want);
      if (it != order.end()) std::iter_swap(order.begin(), it);
    }
    if (matched_[cls] < quota_[cls]) {
      for (int r : order) {
        if (ref_used_[static_cast<std::size_t>(r)]) continue;
        ref_used_[static_cast<std::size_t>(r)] = 1;
        current_[mc.hyp_pos] = r;
        ++matched_[cls];
        recurse(idx + 1);
        --matched_[cls];
        current_.erase(mc.hyp_pos);
        ref_used_[static_cast<std::size_t>(r)] = 0;
      }
    }
    // Skipping is legal only while the class quota stays reachable.
    if (remaining_[cls] >= quota_[cls] - matched_[cls]) recurse(idx + 1);
    ++remaining_[cls];
  }

  static constexpr long kNodeBudget = 200000;
  std::vector<MatchCandidates> cands_;
  std::vector<char> ref_used_;
  std::map<int, int> base_;
  std::vector<int> quota_;
  std::vector<int> matched_, remaining_;
  std::map<int, int> current_, best_;
  int best_chunks_ = 0;
  long nodes_ = 0;
};

}  // namespace

double meteor(const std::string& hyp, const std::string& ref, const MeteorParams& params) {
  std::vector<std::string> h = metric_units(hyp, false);
  std::vector<std::string> r = metric_units(ref, false);
  if (h.empty() || r.empty()) return 0.0;

  enum Stage { kExact = 0, kStem = 1, kSynonym = 2 };
  auto stage_match = [&](Stage st, const std::string& a, const std::string& b) {
    switch (st) {
      case kExact: return a == b;
      case kStem: return light_stem(a) == light_stem(b);
      case kSynonym: return params.synonyms && params.synonyms->related(a, b);
    }
    return false;
  };

  std::map<int, int> aligned;  // hyp pos -> ref pos
  std::vector<char> hyp_used(h.size(), 0), ref_used(r.size(), 0);

  // Stage class key: the matcher's equivalence class of a token.
  auto class_key = [&](Stage st, const std::string& tok) -> std::string {
    switch (st) {
      case kExact: return tok;
      case kStem: return light_stem(tok);
      case kSynonym: {
        if (!params.synonyms) return "";
        auto it = params.synonyms->group_of.find(tok);
        return it == params.synonyms->group_of.end() ? ""
                                                     : "#" + std::to_string(it->second);
      }
    }
    return "";
  };

  int n_stages = params.synonyms ? 3 : 2;
  for (int st = 0; st < n_stages; ++st) {
    Stage stage = static_cast<Stage>(st);
    // Candidates for every still-unmatched hypothesis token in this stage.
    std::map<std::string, int> class_ids;
    std::vector<int> hyp_per_class, ref_per_class;
    auto intern = [&](const std::string& key) {
      auto [it, inserted] = class_ids.emplace(key, static_cast<int>(class_ids.size()));
      if (inserted) {
        hyp_per_class.push_back(0);
        ref_per_class.push_back(0);
      }
      return it->second;
    };

    std::vector<MatchCandidates> cands;
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (hyp_used[i]) continue;
      MatchCandidates mc;
      mc.hyp_pos = static_cast<int>(i);
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (ref_used[j]) continue;
        if (stage_match(stage, h[i], r[j])) mc.ref_candidates.push_back(static_cast<int>(j));
      }
      if (!mc.ref_candidates.empty()) {
        mc.class_id = intern(class_key(stage, h[i]));
        ++hyp_per_class[static_cast<std::size_t>(mc.class_id)];
        cands.push_back(std::move(mc));
      }
    }
    if (cands.empty()) continue;
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (ref_used[j]) continue;
      std::string key = class_key(stage, r[j]);
      auto it = class_ids.find(key);
      if (it != class_ids.end()) ++ref_per_class[static_cast<std::size_t>(it->second)];
    }
    std::vector<int> quota(class_ids.size());
    for (std::size_t c = 0; c < quota.size(); ++c)
      quota[c] = std::min(hyp_per_class[c], ref_per_class[c]);

    AlignmentSearch search(std::move(cands), ref_used, aligned, std::move(quota));
    std::map<int, int> result = search.run();
    for (const auto& [hp, rp] : result) {
      if (aligned.count(hp)) continue;
      aligned[hp] = rp;
      hyp_used[static_cast<std::size_t>(hp)] = 1;
      ref_used[static_cast<std::size_t>(rp)] = 1;
    }
  }

  long m = static_cast<long>(aligned.size());
  if (m == 0) return 0.0;

  double pm = double(m) / double(h.size());
  double rm = double(m) / double(r.size());
  double fm = pm * rm / (params.alpha * pm + (1.0 - params.alpha) * rm);

  int chunks = 0;
  {
    int prev_h = -10, prev_r = -10;
    for (const auto& [hp, rp] : aligned) {
      if (hp != prev_h + 1 || rp != prev_r + 1) ++chunks;
      prev_h = hp;
      prev_r = rp;
    }
  }
  double penalty = params.gamma * std::pow(double(chunks) / double(m), params.theta);
  return (1.0 - penalty) * fm;
}

std::vector<double> EmbeddingTable::lookup(const std::string& token) const {
  auto it = vectors.find(token);
  if (it != vectors.end()) return it->second;
  // FNV-1a hash of the token seeds a splitmix64 stream; portable and
  // deterministic for out-of-vocabulary tokens.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : token) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::vector<double> v(static_cast<std::size_t>(dim));
  std::uint64_t x = h;
  for (double& d : v) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    d = static_cast<double>(z >> 11) * 0x1.0p-53 - 0.5;
  }
  return v;
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw IoError("cannot open embedding table: " + path);
  EmbeddingTable t;
  t.dim = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (v.empty()) throw ParseError(lineno, "embedding row has no values");
    if (t.dim == 0)
      t.dim = static_cast<int>(v.size());
    else if (static_cast<int>(v.size()) != t.dim)
      throw ParseError(lineno, "inconsistent embedding dimension");
    t.vectors[tok] = std::move(v);
  }
  if (t.dim == 0) t.dim = 64;
  return t;
}

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

// frequency-weighted one-directional relaxation
double directional_rwmd(const std::map<std::string, double>& from,
                        const std::map<std::string, double>& to,
                        const EmbeddingTable& emb) {
  double total = 0.0;
  for (const auto& [w, f] : from) {
    std::vector<double> ew = emb.lookup(w);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [w2, f2] : to) best = std::min(best, euclidean(ew, emb.lookup(w2)));
    total += f * best;
  }
  return total;
}

std::map<std::string, double> word_freqs(const std::string& text, bool char_level) {
  std::map<std::string, double> freq;
  auto units = metric_units(text, char_level);
  for (const auto& u : units) freq[u] += 1.0;
  for (auto& [w, f] : freq) f /= static_cast<double>(units.size());
  return freq;
}

}  // namespace

double relaxed_wmd(const std::string& hyp, const std::string& ref,
                   const EmbeddingTable& embeddings, bool char_level) {
  auto fh = word_freqs(hyp, char_level);
  auto fr = word_freqs(ref, char_level);
  if (fh.empty() || fr.empty()) return 0.0;
  double d = std::max(directional_rwmd(fh, fr, embeddings),
                      directional_rwmd(fr, fh, embeddings));
  return 1.0 / (1.0 + d);
}

nlohmann::json EvalReport::to_json() const {
  auto prf_json = [](const PrfScore& s) {
    return nlohmann::json{{"p", s.p}, {"r", s.r}, {"f", s.f}};
  };
  auto pair_json = [&](const PairScores& s) {
    return nlohmann::json{{"id", s.id},
                          {"rouge1", prf_json(s.r1)},
                          {"rouge2", prf_json(s.r2)},
                          {"rougeL", prf_json(s.rl)},
                          {"meteor", s.meteor},
                          {"rwmd", s.rwmd}};
  };
  nlohmann::json j;
  j["pairs"] = nlohmann::json::array();
  for (const auto& p : pairs) j["pairs"].push_back(pair_json(p));
  nlohmann::json m = pair_json(mean);
  m.erase("id");
  j["mean"] = m;
  return j;
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  os << std::left << std::setw(16) << "id" << std::right << std::setw(9) << "R1-F"
     << std::setw(9) << "R2-F" << std::setw(9) << "RL-F" << std::setw(9) << "METEOR"
     << std::setw(9) << "RWMD" << "\n";
  auto row = [&](const std::string& id, const PairScores& s) {
    os << std::left << std::setw(16) << id << std::right << std::fixed
       << std::setprecision(4) << std::setw(9) << s.r1.f << std::setw(9) << s.r2.f
       << std::setw(9) << s.rl.f << std::setw(9) << s.meteor << std::setw(9) << s.rwmd
       << "\n";
    os.unsetf(std::ios::fixed);
  };
  for (const auto& p : pairs) row(p.id, p);
  row("MEAN", mean);
  return os.str();
}

nlohmann::json LengthReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : buckets) {
    nlohmann::json jb;
    jb["lo"] = b.lo;
    if (b.hi >= 0)
      jb["hi"] = b.hi;
    else
      jb["hi"] = nullptr;
    jb["count"] = b.count;
    if (b.count > 0)
      jb["rouge_l"] = b.mean_rouge_l;
    else
      jb["rouge_l"] = nullptr;
    if (b.has_delta)
      jb["delta"] = b.delta;
    else
      jb["delta"] = nullptr;
    arr.push_back(jb);
  }
  return nlohmann::json{{"buckets", arr}};
}

std::string LengthReport::to_table() const {
  std::ostringstream os;
  os << std::left << std::setw(14) << "bucket" << std::right << std::setw(8) << "count"
     << std::setw(10) << "RL-F" << std::setw(10) << "delta" << "\n";
  for (const auto& b : buckets) {
    std::string range = "[" + std::to_string(b.lo) + "," +
                        (b.hi >= 0 ? std::to_string(b.hi) : "inf") + ")";
    os << std::left << std::setw(14) << range << std::right << std::setw(8) << b.count;
    if (b.count > 0) {
      os << std::fixed << std::setprecision(4) << std::setw(10) << b.mean_rouge_l;
      os.unsetf(std::ios::fixed);
    } else {
      os << std::setw(10) << "n/a";
    }
    if (b.has_delta) {
      os << std::fixed << std::setprecision(4) << std::setw(10) << b.delta;
      os.unsetf(std::ios::fixed);
    } else {
      os << std::setw(10) << "n/a";
    }
    os << "\n";
  }
  return os.str();
}

LengthReport make_length_report(const std::vector<CLSPair>& corpus,
                                const std::map<std::string, std::string>& hyp_by_id,
                                const std::vector<long>& boundaries, bool char_level) {
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (boundaries[i] <= boundaries[i - 1])
      throw ValueError("bucket boundaries must be strictly increasing");

  LengthReport rep;
  rep.buckets.resize(boundaries.size() + 1);
  for (std::size_t b = 0; b < rep.buckets.size(); ++b) {
    rep.buckets[b].lo = b == 0 ? 0 : boundaries[b - 1];
    rep.buckets[b].hi = b < boundaries.size() ? boundaries[b] : -1;
  }

  std::vector<double> sums(rep.buckets.size(), 0.0);
  for (const CLSPair& p : corpus) {
    long len = 0;
    for (const Sentence& s : p.doc.sentences) len += static_cast<long>(s.tokens.size());
    std::size_t b = 0;
    while (b < boundaries.size() && len >= boundaries[b]) ++b;

    auto it = hyp_by_id.find(p.id);
    if (it == hyp_by_id.end()) throw ValueError("no hypothesis for pair id " + p.id);
    PrfScore rl = rouge_l(it->second, p.reference, char_level);
    sums[b] += rl.f;
    ++rep.buckets[b].count;
  }

  for (std::size_t b = 0; b < rep.buckets.size(); ++b)
    if (rep.buckets[b].count > 0)
      rep.buckets[b].mean_rouge_l = sums[b] / rep.buckets[b].count;

  if (rep.buckets[0].count > 0) {
    double base = rep.buckets[0].mean_rouge_l;
    for (auto& bucket : rep.buckets) {
      if (bucket.count > 0) {
        bucket.has_delta = true;
        bucket.delta = bucket.mean_rouge_l - base;
      }
    }
  }
  return rep;
}

EvalReport evaluate_pairs(const std::vector<std::pair<std::string, std::string>>& hyp_ref,
                          const std::vector<std::string>& ids, bool char_level,
                          const MeteorParams& meteor_params,
                          const EmbeddingTable& embeddings) {
  EvalReport rep;
  for (std::size_t i = 0; i < hyp_ref.size(); ++i) {
    const auto& [hyp, ref] = hyp_ref[i];
    PairScores s;
    s.id = i < ids.size() ? ids[i] : std::to_string(i);
    s.r1 = rouge_n(hyp, ref, 1, char_level);
    s.r2 = rouge_n(hyp, ref, 2, char_level);
    s.rl = rouge_l(hyp, ref, char_level);
    s.meteor = meteor(hyp, ref, meteor_params);
    s.rwmd = relaxed_wmd(hyp, ref, embeddings, char_level);
    rep.pairs.push_back(std::move(s));
  }
  if (!rep.pairs.empty()) {
    auto& m = rep.mean;
    for (const auto& p : rep.pairs) {
      m.r1.p += p.r1.p; m.r1.r += p.r1.r; m.r1.f += p.r1.f;
      m.r2.p += p.r2.p; m.r2.r += p.r2.r; m.r2.f += p.r2.f;
      m.rl.p += p.rl.p; m.rl.r += p.rl.r; m.rl.f += p.rl.f;
      m.meteor += p.meteor;
      m.rwmd += p.rwmd;
    }
    double n = static_cast<double>(rep.pairs.size());
    m.r1.p /= n; m.r1.r /= n; m.r1.f /= n;
    m.r2.p /= n; m.r2.r /= n; m.r2.f /= n;
    m.rl.p /= n; m.rl.r /= n; m.rl.f /= n;
    m.meteor /= n;
    m.rwmd /= n;
  }
  return rep;
}

}  // namespace cluesum
