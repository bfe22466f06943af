#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cluesum/article_graph.hpp"
#include "cluesum/autodiff.hpp"
#include "cluesum/clue_extract.hpp"
#include "cluesum/corpus.hpp"

namespace cluesum {

struct ModelConfig {
  int d_model = 512;
  int d_ff = 2048;
  int enc_layers = 6;
  int dec_layers = 6;
  int enc_heads = 8;
  int gat_layers = 1;
  int gat_heads = 3;
  double dropout = 0.1;
  int max_positions = 512;
  int src_vocab = 0;  // set from the vocabularies before building params
  int tgt_vocab = 0;
  double leaky_slope = 0.2;

  /// Throws ConfigError on invalid combinations (d_model must be divisible
  /// by enc_heads and gat_heads, dims positive, dropout in [0,1)).
  void validate() const;
};

/// All learnable tensors, keyed by name. Shapes are a pure function of
/// ModelConfig (see build()).
struct ParamSet {
  std::map<std::string, ad::Matrix> tensors;
  std::map<std::string, ad::Matrix> grads;

  ad::Matrix& t(const std::string& name);
  const ad::Matrix& t(const std::string& name) const;
  void zero_grads();

  /// Allocates every tensor (zero-filled) for the given config.
  static ParamSet build(const ModelConfig& cfg);
};

struct EncoderOutput {
  ad::Matrix graph_states;  // [#vertices, d_model]
  ad::Matrix clue_states;   // [#clue tokens, d_model]
};

struct DecoderState {
  ad::Matrix hidden;          // [t_steps, d_model]
  ad::Matrix clue_attention;  // [t_steps, #clue tokens], head-averaged final layer
};

/// Everything derived from one pair that the network consumes: clues, the
/// pruned article graph, vertex token ids, the clue token sequence with
/// separators, lexicon rows mapped onto the target vocabulary, and the
/// teacher-forcing reference ids.
struct PairArtifacts {
  std::string id;
  ClueSet clues;
  ArticleGraph graph;
  std::vector<std::vector<int>> vertex_tokens;  // per surviving vertex
  ad::Matrix adj_mask;                          // [nv,nv], self loops included
  std::vector<int> clue_ids;
  std::vector<std::string> clue_tokens;  // normalized, "<sep>" between clues
  ad::Matrix lex_rows;                   // [#clue tokens, tgt_vocab]
  ad::Matrix lex_cov;                    // [#clue tokens, 1], 1 if lexicon covers
  std::vector<int> ref_ids;              // BOS ... EOS
  long src_token_count = 0;
  long tgt_token_count = 0;  // predicted positions
};

PairArtifacts build_artifacts(const CLSPair& pair, const ClueConfig& clue_cfg,
                              const TokenSet& stopwords, const Vocabulary& src,
                              const Vocabulary& tgt, const BilingualLexicon& lexicon,
                              const ModelConfig& cfg,
                              std::vector<std::string>* run_log = nullptr);

enum class GatMode { Concat, Average };

/// One forward construction over a fresh tape. Parameters are bound lazily;
/// after backward() the harvested gradients accumulate into ParamSet::grads.
class Forward {
 public:
  Forward(const ModelConfig& cfg, ParamSet& params, bool train_mode = false,
          std::uint64_t dropout_seed = 0);

  ad::Var embed_vertex(const std::vector<int>& token_ids);
  ad::Var encode_graph(const PairArtifacts& art);
  ad::Var encode_clues(const std::vector<int>& clue_ids);

  struct Decoded {
    ad::Var hidden;
    ad::Var alpha;
  };
  Decoded decode(const std::vector<int>& tgt_input, ad::Var graph_states,
                 ad::Var clue_states);

  ad::Var translation_gate(ad::Var hidden);  // [T,1] in (0,1)
  ad::Var neural_probs(ad::Var hidden);      // [T,tgt_vocab]
  ad::Var mix(ad::Var alpha, ad::Var p_trans, ad::Var neural, const ad::Matrix& lex_rows,
              const ad::Matrix& lex_cov);
  /// Mixture distribution over all teacher-forced steps of a pair.
  ad::Var sequence_distributions(const PairArtifacts& art);

  /// (sum of -log P(gold), #positions)
  std::pair<ad::Var, int> nll_sum(ad::Var probs, const std::vector<int>& gold);

  /// backward + grads[name] += scale * d loss / d tensor
  void accumulate_grads(ad::Var loss, double scale = 1.0);

  ad::Var gat_layer_var(ad::Var features, const ad::Matrix& adj_mask, int layer,
                        GatMode mode, std::vector<ad::Var>* head_attention = nullptr);

  ad::Tape tape;

 private:
  ad::Var param(const std::string& name);
  ad::Var mha(ad::Var q_in, ad::Var kv_in, const std::string& prefix,
              const ad::Matrix* mask, ad::Var* attn_avg);
  ad::Var ffn(ad::Var x, const std::string& prefix);
  ad::Var add_norm(ad::Var x, ad::Var sublayer, const std::string& ln_prefix);
  ad::Var positional(int len);
  ad::Var maybe_dropout(ad::Var x);

  const ModelConfig& cfg_;
  ParamSet& params_;
  bool train_;
  std::mt19937_64 rng_;
  std::map<std::string, ad::Var> bound_;
};

// ---- plain-value operation surface ----

/// Eq-style vertex embedding: word embeddings + positional encoding, one
/// self-attention block, mean pooling. Over-length sentences are truncated
/// (recorded in run_log).
ad::Matrix embed_vertex(const std::vector<int>& token_ids, ParamSet& params,
                        const ModelConfig& cfg, std::vector<std::string>* run_log = nullptr);

/// One graph-attention layer over `features` with the given neighbor lists
/// (self loops required). Optionally returns the per-head attention
/// matrices.
ad::Matrix gat_layer(const ad::Matrix& features,
                     const std::vector<std::vector<int>>& neighbors, ParamSet& params,
                     const ModelConfig& cfg, int layer, GatMode mode,
                     std::vector<ad::Matrix>* head_attention = nullptr);

ad::Matrix graph_encode(const ArticleGraph& graph, const Document& doc,
                        const Vocabulary& src, ParamSet& params, const ModelConfig& cfg,
                        std::vector<std::string>* run_log = nullptr);

ad::Matrix clue_encode(const std::vector<int>& clue_ids, ParamSet& params,
                       const ModelConfig& cfg);

struct DecodeStepOut {
  std::vector<double> hidden;  // last H_dec row
  std::vector<double> alpha;   // last clue-attention row
  std::vector<double> logits;  // neural logits over the target vocabulary
};
DecodeStepOut decode_step(const std::vector<int>& prev_target_ids,
                          const EncoderOutput& enc, ParamSet& params,
                          const ModelConfig& cfg);

/// p_trans = sigmoid(W2 (W1 h + b1) + b2)
double translation_gate(const std::vector<double>& hidden, const ParamSet& params);

/// Mixture distribution over the target vocabulary:
///   P(w) = p_trans * sum_{covered i} alpha_i * P_T(src_i => w)
///        + (1 - p_trans * covered_mass) * P_N(w)
/// Clue tokens without a lexicon entry route their attention mass to the
/// neural branch; lexicon targets outside the vocabulary collapse to UNK.
std::vector<double> mix_distribution(const std::vector<double>& neural, double p_trans,
                                     const std::vector<double>& alpha,
                                     const std::vector<std::string>& clue_src_tokens,
                                     const BilingualLexicon& lexicon,
                                     const Vocabulary& tgt_vocab);

/// Teacher-forced mixture distributions for every step, [T, tgt_vocab].
ad::Matrix forward_distributions(const PairArtifacts& art, ParamSet& params,
                                 const ModelConfig& cfg);

/// Mean token NLL; when with_grads is set, d(mean)/d(theta) accumulates
/// into params.grads.
double forward_loss(const PairArtifacts& art, ParamSet& params, const ModelConfig& cfg,
                    bool with_grads, bool train_mode = false,
                    std::uint64_t dropout_seed = 0);

std::string detokenize(const std::vector<int>& ids, const Vocabulary& tgt,
                       const std::string& tgt_lang);

}  // namespace cluesum
