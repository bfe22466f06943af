#include "cluesum/training.hpp"

#include <algorithm>
#include <cmath>

namespace cluesum {

void TrainConfig::validate() const {
  if (batch_tokens < 1 || warmup < 1 || max_steps < 1) throw ConfigError("train sizes must be positive");
  if (lr_base <= 0.0 || eps <= 0.0) throw ConfigError("lr_base and eps must be positive");
  if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0)
    throw ConfigError("adam betas must be in (0,1)");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
}

void BeamConfig::validate() const {
  if (width < 1) throw ConfigError("beam width must be >= 1");
  if (max_len < 1) throw ConfigError("max_len must be >= 1");
}

ParamSet init_params(const ModelConfig& cfg, std::uint64_t seed) {
  ParamSet p = ParamSet::build(cfg);
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    // portable uniform from the raw 64-bit stream
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  };

  auto ends_with = [](const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
  };

  for (auto& [name, m] : p.tensors) {  // std::map order: deterministic
    if (ends_with(name, ".gain")) {
      std::fill(m.data.begin(), m.data.end(), 1.0);
    } else if (ends_with(name, ".bias") || ends_with(name, ".b1") || ends_with(name, ".b2")) {
      std::fill(m.data.begin(), m.data.end(), 0.0);
    } else {
      double bound = std::sqrt(6.0 / (m.rows + m.cols));
      for (double& v : m.data) v = uniform(-bound, bound);
    }
  }
  return p;
}

double lr_schedule(const TrainConfig& tcfg, const ModelConfig& mcfg, long step) {
  double t = static_cast<double>(std::max<long>(step, 1));
  double w = static_cast<double>(tcfg.warmup);
  return tcfg.lr_base * std::pow(static_cast<double>(mcfg.d_model), -0.5) *
         std::min(1.0 / std::sqrt(t), t / (w * std::sqrt(w)));
}

void adam_step(ParamSet& params, AdamState& state, long step, double lr,
               const TrainConfig& cfg) {
  // validate all gradients before touching any parameter
  for (const auto& [name, g] : params.grads)
    if (!g.finite()) throw NumericError(name, "non-finite gradient; step aborted");

  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));

  for (auto& [name, tensor] : params.tensors) {
    const ad::Matrix& g = params.grads.at(name);
    auto [it, inserted] = state.moments.try_emplace(
        name, std::make_pair(ad::Matrix(tensor.rows, tensor.cols),
                             ad::Matrix(tensor.rows, tensor.cols)));
    ad::Matrix& m = it->second.first;
    ad::Matrix& v = it->second.second;
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
      v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
      double mhat = m.data[i] / bc1;
      double vhat = v.data[i] / bc2;
      tensor.data[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    if (!tensor.finite()) throw NumericError(name, "non-finite parameter after update");
  }
}

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t x = a + 0x9e3779b97f4a7c15ull * (b + 1) + 0x85ebca6bull * (c + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

TrainResult train(const std::vector<CLSPair>& corpus, const BilingualLexicon& lexicon,
                  ModelConfig model_cfg, const TrainConfig& tcfg,
                  const ClueConfig& clue_cfg, const TokenSet& stopwords,
                  int vocab_max_size, int vocab_min_freq,
                  const std::function<void(const StepLog&)>& on_step,
                  const std::function<void(long, const TrainResult&)>& on_checkpoint) {
  if (corpus.empty()) throw EmptyInput("empty training corpus");
  tcfg.validate();

  TrainResult result;
  result.src_vocab = build_vocab(corpus, Vocabulary::Side::Source, vocab_max_size, vocab_min_freq);
  result.tgt_vocab = build_vocab(corpus, Vocabulary::Side::Target, vocab_max_size, vocab_min_freq);
  model_cfg.src_vocab = result.src_vocab.size();
  model_cfg.tgt_vocab = result.tgt_vocab.size();
  model_cfg.validate();

  // clue/graph artifacts are deterministic: cache them once per pair
  std::vector<PairArtifacts> arts;
  arts.reserve(corpus.size());
  for (const CLSPair& p : corpus)
    arts.push_back(build_artifacts(p, clue_cfg, stopwords, result.src_vocab,
                                   result.tgt_vocab, lexicon, model_cfg));

  result.params = init_params(model_cfg, tcfg.seed);
  AdamState state;

  std::size_t cursor = 0;
  for (long step = 1; step <= tcfg.max_steps; ++step) {
    // assemble a batch under the token budget (at least one pair)
    std::vector<std::size_t> batch;
    long tokens = 0;
    while (batch.empty() ||
           (tokens < tcfg.batch_tokens && batch.size() < arts.size())) {
      const PairArtifacts& a = arts[cursor];
      long cost = a.src_token_count + a.tgt_token_count;
      if (!batch.empty() && tokens + cost > tcfg.batch_tokens) break;
      batch.push_back(cursor);
      tokens += cost;
      cursor = (cursor + 1) % arts.size();
    }

    result.params.zero_grads();
    double nll_total = 0.0;
    long positions = 0;
    for (std::size_t idx : batch) positions += arts[idx].tgt_token_count;

    for (std::size_t idx : batch) {
      Forward fwd(model_cfg, result.params, model_cfg.dropout > 0.0,
                  mix_seed(tcfg.seed, static_cast<std::uint64_t>(step), idx));
      ad::Var probs = fwd.sequence_distributions(arts[idx]);
      std::vector<int> gold(arts[idx].ref_ids.begin() + 1, arts[idx].ref_ids.end());
      auto [total, count] = fwd.nll_sum(probs, gold);
      nll_total += fwd.tape.value(total).at(0, 0);
      fwd.accumulate_grads(total, 1.0 / static_cast<double>(positions));
      (void)count;
    }

    double lr = lr_schedule(tcfg, model_cfg, step);
    adam_step(result.params, state, step, lr, tcfg);

    StepLog log{step, nll_total / static_cast<double>(positions), lr, positions};
    result.log.push_back(log);
    if (on_step) on_step(log);
    if (on_checkpoint && tcfg.checkpoint_every > 0 && step % tcfg.checkpoint_every == 0)
      on_checkpoint(step, result);
  }
  return result;
}

double length_penalty(int len, double alpha) {
  return std::pow((5.0 + static_cast<double>(len)) / 6.0, alpha);
}

namespace {

struct DecodeContext {
  ad::Matrix graph_states;
  ad::Matrix clue_states;
};

DecodeContext encode_once(const PairArtifacts& art, ParamSet& params,
                          const ModelConfig& cfg) {
  Forward fwd(cfg, params);
  DecodeContext ctx;
  ctx.graph_states = fwd.tape.value(fwd.encode_graph(art));
  ctx.clue_states = fwd.tape.value(fwd.encode_clues(art.clue_ids));
  return ctx;
}

/// Mixture distribution over the next token given the prefix.
std::vector<double> next_distribution(const DecodeContext& ctx, const PairArtifacts& art,
                                      const std::vector<int>& prefix, ParamSet& params,
                                      const ModelConfig& cfg) {
  Forward fwd(cfg, params);
  ad::Var zg = fwd.tape.constant(ctx.graph_states);
  ad::Var zc = fwd.tape.constant(ctx.clue_states);
  Forward::Decoded dec = fwd.decode(prefix, zg, zc);
  ad::Var p = fwd.translation_gate(dec.hidden);
  ad::Var pn = fwd.neural_probs(dec.hidden);
  ad::Var probs = fwd.mix(dec.alpha, p, pn, art.lex_rows, art.lex_cov);
  return fwd.tape.value(probs).row(static_cast<int>(prefix.size()) - 1);
}

struct Hypothesis {
  std::vector<int> ids;  // starts with BOS
  double logp = 0.0;
  bool finished = false;

  int generated_len() const { return static_cast<int>(ids.size()) - 1; }
};

std::vector<int> strip_markers(const std::vector<int>& ids) {
  std::vector<int> out;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    if (ids[i] == Vocabulary::kEos) break;
    out.push_back(ids[i]);
  }
  return out;
}

}  // namespace

std::vector<int> beam_search(const PairArtifacts& art, ParamSet& params,
                             const ModelConfig& cfg, const BeamConfig& bcfg) {
  bcfg.validate();
  DecodeContext ctx = encode_once(art, params, cfg);

  std::vector<Hypothesis> active = {{{Vocabulary::kBos}, 0.0, false}};
  std::vector<Hypothesis> finished;

  for (int step = 0; step < bcfg.max_len && !active.empty(); ++step) {
    struct Candidate {
      std::size_t beam;
      int token;
      double logp;
    };
    std::vector<Candidate> cands;
    for (std::size_t b = 0; b < active.size(); ++b) {
      std::vector<double> dist = next_distribution(ctx, art, active[b].ids, params, cfg);
      // top `width` tokens of this beam suffice: the global top-width pool
      // can take at most width from one beam
      std::vector<int> order(dist.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
      std::size_t keep = std::min<std::size_t>(order.size(), static_cast<std::size_t>(bcfg.width));
      std::partial_sort(order.begin(), order.begin() + static_cast<long>(keep), order.end(),
                        [&](int x, int y) {
                          if (dist[static_cast<std::size_t>(x)] != dist[static_cast<std::size_t>(y)])
                            return dist[static_cast<std::size_t>(x)] > dist[static_cast<std::size_t>(y)];
                          return x < y;
                        });
      for (std::size_t k = 0; k < keep; ++k)
        cands.push_back({b, order[k],
                         active[b].logp + std::log(dist[static_cast<std::size_t>(order[k])])});
    }

    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.logp != b.logp) return a.logp > b.logp;
      if (a.token != b.token) return a.token < b.token;
      return a.beam < b.beam;
    });

    std::vector<Hypothesis> next;
    for (const Candidate& c : cands) {
      if (static_cast<int>(next.size()) >= bcfg.width) break;
      Hypothesis h = active[c.beam];
      h.ids.push_back(c.token);
      h.logp = c.logp;
      if (c.token == Vocabulary::kEos) {
        h.finished = true;
        finished.push_back(h);
      } else {
        next.push_back(std::move(h));
      }
    }
    active = std::move(next);
  }

  auto normalized = [&](const Hypothesis& h) {
    return h.logp / length_penalty(std::max(h.generated_len(), 1), bcfg.length_penalty);
  };
  const std::vector<Hypothesis>& pool = finished.empty() ? active : finished;
  if (pool.empty()) return {};
  const Hypothesis* best = &pool.front();
  for (const Hypothesis& h : pool)
    if (normalized(h) > normalized(*best)) best = &h;
  return strip_markers(best->ids);
}

std::vector<int> greedy_decode(const PairArtifacts& art, ParamSet& params,
                               const ModelConfig& cfg, int max_len) {
  DecodeContext ctx = encode_once(art, params, cfg);
  std::vector<int> ids = {Vocabulary::kBos};
  for (int step = 0; step < max_len; ++step) {
    std::vector<double> dist = next_distribution(ctx, art, ids, params, cfg);
    int best = 0;
    for (std::size_t w = 1; w < dist.size(); ++w)
      if (dist[w] > dist[static_cast<std::size_t>(best)]) best = static_cast<int>(w);
    ids.push_back(best);
    if (best == Vocabulary::kEos) break;
  }
  return strip_markers(ids);
}

double teacher_forced_accuracy(const std::vector<PairArtifacts>& arts, ParamSet& params,
                               const ModelConfig& cfg) {
  long correct = 0, total = 0;
  for (const PairArtifacts& art : arts) {
    ad::Matrix probs = forward_distributions(art, params, cfg);
    for (int t = 0; t < probs.rows; ++t) {
      int gold = art.ref_ids[static_cast<std::size_t>(t) + 1];
      int best = 0;
      for (int w = 1; w < probs.cols; ++w)
        if (probs.at(t, w) > probs.at(t, best)) best = w;
      correct += (best == gold) ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace cluesum
