#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cluesum/model.hpp"

namespace cluesum {

struct TrainConfig {
  int batch_tokens = 1024;  // token budget per step (source + target)
  double lr_base = 2.0;     // multiplier on the inverse-sqrt schedule
  int warmup = 4000;
  double beta1 = 0.9;
  double beta2 = 0.998;
  double eps = 1e-9;
  int max_steps = 1000;
  std::uint64_t seed = 42;
  int checkpoint_every = 0;  // 0: final checkpoint only

  void validate() const;
};

struct BeamConfig {
  int width = 4;
  double length_penalty = 0.6;
  int max_len = 64;

  void validate() const;
};

/// Xavier-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases, unit
/// layer-norm gains. Deterministic for a given seed.
ParamSet init_params(const ModelConfig& cfg, std::uint64_t seed);

struct AdamState {
  std::map<std::string, std::pair<ad::Matrix, ad::Matrix>> moments;  // m, v
};

/// Inverse-square-root schedule with linear warmup:
///   lr(t) = lr_base * d_model^-0.5 * min(t^-0.5, t * warmup^-1.5)
double lr_schedule(const TrainConfig& tcfg, const ModelConfig& mcfg, long step);

/// One bias-corrected Adam update from params.grads. Throws NumericError
/// naming the offending tensor on non-finite gradients.
void adam_step(ParamSet& params, AdamState& state, long step, double lr,
               const TrainConfig& cfg);

struct StepLog {
  long step = 0;
  double loss = 0.0;
  double lr = 0.0;
  long tokens = 0;
};

struct TrainResult {
  ParamSet params;
  Vocabulary src_vocab;
  Vocabulary tgt_vocab;
  std::vector<StepLog> log;
};

/// Full training loop: builds vocabularies, caches per-pair artifacts,
/// batches by token budget, and runs forward/backward + Adam for
/// max_steps. on_step fires per step; on_checkpoint fires every
/// checkpoint_every steps (and is never called when checkpoint_every == 0).
TrainResult train(const std::vector<CLSPair>& corpus, const BilingualLexicon& lexicon,
                  ModelConfig model_cfg, const TrainConfig& tcfg,
                  const ClueConfig& clue_cfg, const TokenSet& stopwords,
                  int vocab_max_size, int vocab_min_freq,
                  const std::function<void(const StepLog&)>& on_step = {},
                  const std::function<void(long, const TrainResult&)>& on_checkpoint = {});

/// ((5 + len) / 6)^alpha
double length_penalty(int len, double alpha);

/// Width-w beam search over the mixture distribution. Hypotheses are scored
/// by log-prob / length_penalty; returns the best finished hypothesis
/// (best unfinished when none finished), as target token ids without
/// BOS/EOS.
std::vector<int> beam_search(const PairArtifacts& art, ParamSet& params,
                             const ModelConfig& cfg, const BeamConfig& bcfg);

/// Greedy argmax decoding (reference for the width-1 equivalence).
std::vector<int> greedy_decode(const PairArtifacts& art, ParamSet& params,
                               const ModelConfig& cfg, int max_len);

/// Fraction of teacher-forced positions where argmax P equals the gold id.
double teacher_forced_accuracy(const std::vector<PairArtifacts>& arts, ParamSet& params,
                               const ModelConfig& cfg);

}  // namespace cluesum
