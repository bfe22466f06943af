#include "cluesum/model.hpp"

#include <algorithm>
#include <cmath>

namespace cluesum {

void ModelConfig::validate() const {
  if (d_model < 1 || d_ff < 1 || enc_layers < 1 || dec_layers < 1 || enc_heads < 1 ||
      gat_layers < 1 || gat_heads < 1 || max_positions < 1)
    throw ConfigError("model dimensions must be >= 1");
  if (d_model % enc_heads != 0)
    throw ConfigError("d_model must be divisible by enc_heads");
  if (d_model % gat_heads != 0)
    throw ConfigError("d_model must be divisible by gat_heads");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0,1)");
  if (src_vocab < 4 || tgt_vocab < 4) throw ConfigError("vocabulary sizes must be >= 4");
}

ad::Matrix& ParamSet::t(const std::string& name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw ValueError("unknown parameter tensor: " + name);
  return it->second;
}

const ad::Matrix& ParamSet::t(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw ValueError("unknown parameter tensor: " + name);
  return it->second;
}

void ParamSet::zero_grads() {
  for (auto& [name, g] : grads) std::fill(g.data.begin(), g.data.end(), 0.0);
}

namespace {

void add_attention_block(ParamSet& p, const std::string& prefix, int d) {
  p.tensors[prefix + ".wq"] = ad::Matrix(d, d);
  p.tensors[prefix + ".wk"] = ad::Matrix(d, d);
  p.tensors[prefix + ".wv"] = ad::Matrix(d, d);
  p.tensors[prefix + ".wo"] = ad::Matrix(d, d);
}

void add_ffn_block(ParamSet& p, const std::string& prefix, int d, int d_ff) {
  p.tensors[prefix + ".w1"] = ad::Matrix(d, d_ff);
  p.tensors[prefix + ".b1"] = ad::Matrix(1, d_ff);
  p.tensors[prefix + ".w2"] = ad::Matrix(d_ff, d);
  p.tensors[prefix + ".b2"] = ad::Matrix(1, d);
}

void add_layer_norm(ParamSet& p, const std::string& prefix, int d) {
  p.tensors[prefix + ".gain"] = ad::Matrix(1, d);
  p.tensors[prefix + ".bias"] = ad::Matrix(1, d);
}

}  // namespace

ParamSet ParamSet::build(const ModelConfig& cfg) {
  cfg.validate();
  ParamSet p;
  const int d = cfg.d_model;

  p.tensors["src_embed"] = ad::Matrix(cfg.src_vocab, d);
  p.tensors["tgt_embed"] = ad::Matrix(cfg.tgt_vocab, d);

  add_attention_block(p, "vemb.attn", d);

  for (int l = 0; l < cfg.gat_layers; ++l) {
    bool final_layer = (l == cfg.gat_layers - 1);
    int d_out = final_layer ? d : d / cfg.gat_heads;
    for (int f = 0; f < cfg.gat_heads; ++f) {
      std::string pre = "gat.l" + std::to_string(l) + ".h" + std::to_string(f);
      p.tensors[pre + ".w"] = ad::Matrix(d, d_out);
      p.tensors[pre + ".a1"] = ad::Matrix(d_out, 1);
      p.tensors[pre + ".a2"] = ad::Matrix(d_out, 1);
    }
  }
  add_ffn_block(p, "genc.ffn", d, cfg.d_ff);
  add_layer_norm(p, "genc.ln", d);

  for (int l = 0; l < cfg.enc_layers; ++l) {
    std::string pre = "cenc.l" + std::to_string(l);
    add_attention_block(p, pre + ".attn", d);
    add_layer_norm(p, pre + ".ln1", d);
    add_ffn_block(p, pre + ".ffn", d, cfg.d_ff);
    add_layer_norm(p, pre + ".ln2", d);
  }

  for (int l = 0; l < cfg.dec_layers; ++l) {
    std::string pre = "dec.l" + std::to_string(l);
    add_attention_block(p, pre + ".self", d);
    add_layer_norm(p, pre + ".ln1", d);
    add_attention_block(p, pre + ".xgraph", d);
    add_layer_norm(p, pre + ".ln2", d);
    add_attention_block(p, pre + ".xclue", d);
    add_layer_norm(p, pre + ".ln3", d);
    add_ffn_block(p, pre + ".ffn", d, cfg.d_ff);
    add_layer_norm(p, pre + ".ln4", d);
  }

  p.tensors["gate.w1"] = ad::Matrix(d, d);
  p.tensors["gate.b1"] = ad::Matrix(1, d);
  p.tensors["gate.w2"] = ad::Matrix(d, 1);
  p.tensors["gate.b2"] = ad::Matrix(1, 1);

  p.tensors["out_proj"] = ad::Matrix(d, cfg.tgt_vocab);

  for (const auto& [name, m] : p.tensors) p.grads[name] = ad::Matrix(m.rows, m.cols);
  return p;
}

PairArtifacts build_artifacts(const CLSPair& pair, const ClueConfig& clue_cfg,
                              const TokenSet& stopwords, const Vocabulary& src,
                              const Vocabulary& tgt, const BilingualLexicon& lexicon,
                              const ModelConfig& cfg, std::vector<std::string>* run_log) {
  if (cfg.src_vocab != src.size() || cfg.tgt_vocab != tgt.size())
    throw ConfigError("model vocab sizes do not match vocabularies");
  int sep = src.sep_id();
  if (sep < 0) throw ConfigError("source vocabulary lacks the clue separator token");

  auto log = [&](const std::string& msg) {
    if (run_log) run_log->push_back(msg);
  };

  PairArtifacts art;
  art.id = pair.id;
  art.clues = extract_clues(pair.doc, clue_cfg, stopwords);
  art.graph = build_article_graph(pair.doc, art.clues);

  for (const auto& v : art.graph.vertices) {
    const Sentence& s = pair.doc.sentences[static_cast<std::size_t>(v.sentence_index)];
    std::vector<int> ids;
    for (const Token& t : s.tokens) ids.push_back(src.lookup(t.normalized));
    if (static_cast<int>(ids.size()) > cfg.max_positions) {
      log("pair " + pair.id + ": sentence " + std::to_string(v.sentence_index) +
          " truncated to " + std::to_string(cfg.max_positions) + " tokens");
      ids.resize(static_cast<std::size_t>(cfg.max_positions));
    }
    art.vertex_tokens.push_back(std::move(ids));
    art.src_token_count += static_cast<long>(s.tokens.size());
  }

  auto adj = art.graph.adjacency_with_self_loops();
  int nv = art.graph.vertex_count();
  art.adj_mask = ad::Matrix(nv, nv, 0.0);
  for (int i = 0; i < nv; ++i)
    for (int j : adj[static_cast<std::size_t>(i)]) art.adj_mask.at(i, j) = 1.0;

  // Clue sequence: clues in rank order, separator between them; an empty
  // clue set becomes a single separator so both encoders stay non-empty.
  for (std::size_t c = 0; c < art.clues.clues.size(); ++c) {
    if (c > 0) art.clue_tokens.push_back(Vocabulary::sep_token());
    for (const std::string& tok : art.clues.clues[c].tokens) art.clue_tokens.push_back(tok);
  }
  if (art.clue_tokens.empty()) art.clue_tokens.push_back(Vocabulary::sep_token());
  if (static_cast<int>(art.clue_tokens.size()) > cfg.max_positions) {
    log("pair " + pair.id + ": clue sequence truncated to " +
        std::to_string(cfg.max_positions) + " tokens");
    art.clue_tokens.resize(static_cast<std::size_t>(cfg.max_positions));
  }
  for (const std::string& tok : art.clue_tokens) art.clue_ids.push_back(src.lookup(tok));

  int nc = static_cast<int>(art.clue_tokens.size());
  art.lex_rows = ad::Matrix(nc, tgt.size(), 0.0);
  art.lex_cov = ad::Matrix(nc, 1, 0.0);
  for (int i = 0; i < nc; ++i) {
    const auto* targets = lexicon.find(art.clue_tokens[static_cast<std::size_t>(i)]);
    if (!targets) continue;
    art.lex_cov.at(i, 0) = 1.0;
    for (const auto& [tgt_tok, prob] : *targets)
      art.lex_rows.at(i, tgt.lookup(tgt_tok)) += prob;
  }

  std::vector<Token> ref_toks = tokenize(pair.reference, pair.target_language);
  if (static_cast<int>(ref_toks.size()) > cfg.max_positions - 2) {
    log("pair " + pair.id + ": reference truncated to " +
        std::to_string(cfg.max_positions - 2) + " tokens");
    ref_toks.resize(static_cast<std::size_t>(cfg.max_positions - 2));
  }
  art.ref_ids.push_back(Vocabulary::kBos);
  for (const Token& t : ref_toks) art.ref_ids.push_back(tgt.lookup(t.normalized));
  art.ref_ids.push_back(Vocabulary::kEos);
  art.tgt_token_count = static_cast<long>(art.ref_ids.size()) - 1;
  return art;
}

Forward::Forward(const ModelConfig& cfg, ParamSet& params, bool train_mode,
                 std::uint64_t dropout_seed)
    : cfg_(cfg), params_(params), train_(train_mode), rng_(dropout_seed) {
  cfg.validate();
}

ad::Var Forward::param(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  ad::Var v = tape.leaf(params_.t(name), true);
  bound_[name] = v;
  return v;
}

ad::Var Forward::positional(int len) {
  ad::Matrix pe(len, cfg_.d_model, 0.0);
  for (int pos = 0; pos < len; ++pos) {
    for (int j = 0; j < cfg_.d_model; ++j) {
      double exponent = static_cast<double>(2 * (j / 2)) / cfg_.d_model;
      double angle = pos / std::pow(10000.0, exponent);
      pe.at(pos, j) = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return tape.constant(std::move(pe));
}

ad::Var Forward::maybe_dropout(ad::Var x) {
  if (!train_ || cfg_.dropout <= 0.0) return x;
  return tape.dropout(x, cfg_.dropout, rng_);
}

ad::Var Forward::mha(ad::Var q_in, ad::Var kv_in, const std::string& prefix,
                     const ad::Matrix* mask, ad::Var* attn_avg) {
  const int h = cfg_.enc_heads;
  const int dk = cfg_.d_model / h;
  ad::Var Q = tape.matmul(q_in, param(prefix + ".wq"));
  ad::Var K = tape.matmul(kv_in, param(prefix + ".wk"));
  ad::Var V = tape.matmul(kv_in, param(prefix + ".wv"));
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  std::vector<ad::Var> heads;
  ad::Var attn_sum;
  for (int i = 0; i < h; ++i) {
    ad::Var Qh = tape.slice_cols(Q, i * dk, (i + 1) * dk);
    ad::Var Kh = tape.slice_cols(K, i * dk, (i + 1) * dk);
    ad::Var Vh = tape.slice_cols(V, i * dk, (i + 1) * dk);
    ad::Var scores = tape.scale(tape.matmul(Qh, tape.transpose(Kh)), scale);
    ad::Var A = tape.row_softmax(scores, mask);
    if (attn_avg) attn_sum = attn_sum.valid() ? tape.add(attn_sum, A) : A;
    heads.push_back(tape.matmul(A, Vh));
  }
  if (attn_avg) *attn_avg = tape.scale(attn_sum, 1.0 / h);
  return tape.matmul(tape.concat_cols(heads), param(prefix + ".wo"));
}

ad::Var Forward::ffn(ad::Var x, const std::string& prefix) {
  ad::Var hidden = tape.relu(
      tape.add_row_broadcast(tape.matmul(x, param(prefix + ".w1")), param(prefix + ".b1")));
  return tape.add_row_broadcast(tape.matmul(hidden, param(prefix + ".w2")),
                                param(prefix + ".b2"));
}

ad::Var Forward::add_norm(ad::Var x, ad::Var sublayer, const std::string& ln_prefix) {
  return tape.layer_norm(tape.add(x, maybe_dropout(sublayer)), param(ln_prefix + ".gain"),
                         param(ln_prefix + ".bias"));
}

ad::Var Forward::embed_vertex(const std::vector<int>& token_ids) {
  std::vector<int> ids = token_ids;
  if (static_cast<int>(ids.size()) > cfg_.max_positions)
    ids.resize(static_cast<std::size_t>(cfg_.max_positions));
  ad::Var X = tape.add(tape.rows_gather(param("src_embed"), ids),
                       positional(static_cast<int>(ids.size())));
  ad::Var attended = mha(X, X, "vemb.attn", nullptr, nullptr);
  return tape.mean_rows(attended);
}

ad::Var Forward::gat_layer_var(ad::Var features, const ad::Matrix& adj_mask, int layer,
                               GatMode mode, std::vector<ad::Var>* head_attention) {
  std::vector<ad::Var> outs;
  ad::Var sum;
  for (int f = 0; f < cfg_.gat_heads; ++f) {
    std::string pre = "gat.l" + std::to_string(layer) + ".h" + std::to_string(f);
    ad::Var S = tape.matmul(features, param(pre + ".w"));
    ad::Var u = tape.matmul(S, param(pre + ".a1"));
    ad::Var v = tape.matmul(S, param(pre + ".a2"));
    ad::Var logits = tape.leaky_relu(tape.outer_sum(u, v), cfg_.leaky_slope);
    ad::Var A = tape.row_softmax(logits, &adj_mask);
    if (head_attention) head_attention->push_back(A);
    ad::Var hf = tape.matmul(A, S);
    if (mode == GatMode::Concat)
      outs.push_back(tape.elu(hf));
    else
      sum = sum.valid() ? tape.add(sum, hf) : hf;
  }
  if (mode == GatMode::Concat) return tape.concat_cols(outs);
  return tape.elu(tape.scale(sum, 1.0 / cfg_.gat_heads));
}

ad::Var Forward::encode_graph(const PairArtifacts& art) {
  std::vector<ad::Var> rows;
  rows.reserve(art.vertex_tokens.size());
  for (const auto& toks : art.vertex_tokens) rows.push_back(embed_vertex(toks));
  ad::Var H = tape.concat_rows(rows);
  for (int l = 0; l < cfg_.gat_layers; ++l) {
    GatMode mode = (l == cfg_.gat_layers - 1) ? GatMode::Average : GatMode::Concat;
    H = gat_layer_var(H, art.adj_mask, l, mode, nullptr);
  }
  return tape.layer_norm(tape.add(H, ffn(H, "genc.ffn")), param("genc.ln.gain"),
                         param("genc.ln.bias"));
}

ad::Var Forward::encode_clues(const std::vector<int>& clue_ids) {
  ad::Var X = tape.add(tape.rows_gather(param("src_embed"), clue_ids),
                       positional(static_cast<int>(clue_ids.size())));
  X = maybe_dropout(X);
  for (int l = 0; l < cfg_.enc_layers; ++l) {
    std::string pre = "cenc.l" + std::to_string(l);
    X = add_norm(X, mha(X, X, pre + ".attn", nullptr, nullptr), pre + ".ln1");
    X = add_norm(X, ffn(X, pre + ".ffn"), pre + ".ln2");
  }
  return X;
}

Forward::Decoded Forward::decode(const std::vector<int>& tgt_input, ad::Var graph_states,
                                 ad::Var clue_states) {
  const int T = static_cast<int>(tgt_input.size());
  ad::Var X = tape.add(tape.rows_gather(param("tgt_embed"), tgt_input), positional(T));
  X = maybe_dropout(X);

  ad::Matrix causal(T, T, 0.0);
  for (int i = 0; i < T; ++i)
    for (int j = 0; j <= i; ++j) causal.at(i, j) = 1.0;

  ad::Var alpha;
  for (int l = 0; l < cfg_.dec_layers; ++l) {
    std::string pre = "dec.l" + std::to_string(l);
    X = add_norm(X, mha(X, X, pre + ".self", &causal, nullptr), pre + ".ln1");
    X = add_norm(X, mha(X, graph_states, pre + ".xgraph", nullptr, nullptr), pre + ".ln2");
    ad::Var* want_alpha = (l == cfg_.dec_layers - 1) ? &alpha : nullptr;
    X = add_norm(X, mha(X, clue_states, pre + ".xclue", nullptr, want_alpha), pre + ".ln3");
    X = add_norm(X, ffn(X, pre + ".ffn"), pre + ".ln4");
  }
  return {X, alpha};
}

ad::Var Forward::translation_gate(ad::Var hidden) {
  ad::Var t1 = tape.add_row_broadcast(tape.matmul(hidden, param("gate.w1")), param("gate.b1"));
  ad::Var s = tape.add_row_broadcast(tape.matmul(t1, param("gate.w2")), param("gate.b2"));
  return tape.sigmoid(s);
}

ad::Var Forward::neural_probs(ad::Var hidden) {
  return tape.row_softmax(tape.matmul(hidden, param("out_proj")));
}

ad::Var Forward::mix(ad::Var alpha, ad::Var p_trans, ad::Var neural,
                     const ad::Matrix& lex_rows, const ad::Matrix& lex_cov) {
  const int T = tape.value(alpha).rows;
  ad::Var trans = tape.matmul(alpha, tape.constant(lex_rows));     // [T,Vt]
  ad::Var covered = tape.matmul(alpha, tape.constant(lex_cov));    // [T,1]
  ad::Var pm = tape.mul(p_trans, covered);
  ad::Var neural_weight =
      tape.add(tape.constant(ad::Matrix(T, 1, 1.0)), tape.scale(pm, -1.0));
  return tape.add(tape.mul_col_broadcast(trans, p_trans),
                  tape.mul_col_broadcast(neural, neural_weight));
}

ad::Var Forward::sequence_distributions(const PairArtifacts& art) {
  ad::Var zg = encode_graph(art);
  ad::Var zc = encode_clues(art.clue_ids);
  std::vector<int> input(art.ref_ids.begin(), art.ref_ids.end() - 1);
  Decoded dec = decode(input, zg, zc);
  ad::Var p = translation_gate(dec.hidden);
  ad::Var pn = neural_probs(dec.hidden);
  return mix(dec.alpha, p, pn, art.lex_rows, art.lex_cov);
}

std::pair<ad::Var, int> Forward::nll_sum(ad::Var probs, const std::vector<int>& gold) {
  std::vector<std::pair<int, int>> rc;
  rc.reserve(gold.size());
  for (std::size_t t = 0; t < gold.size(); ++t)
    rc.emplace_back(static_cast<int>(t), gold[t]);
  ad::Var picks = tape.gather_entries(probs, std::move(rc));
  ad::Var total = tape.sum_all(tape.log(picks));
  return {tape.scale(total, -1.0), static_cast<int>(gold.size())};
}

void Forward::accumulate_grads(ad::Var loss, double scale) {
  tape.backward(loss);
  for (const auto& [name, var] : bound_) {
    const ad::Matrix& g = tape.grad(var);
    ad::Matrix& acc = params_.grads.at(name);
    for (std::size_t i = 0; i < g.size(); ++i) acc.data[i] += scale * g.data[i];
  }
}

// ---- plain-value operation surface ----

ad::Matrix embed_vertex(const std::vector<int>& token_ids, ParamSet& params,
                        const ModelConfig& cfg, std::vector<std::string>* run_log) {
  if (run_log && static_cast<int>(token_ids.size()) > cfg.max_positions)
    run_log->push_back("sentence truncated to " + std::to_string(cfg.max_positions) +
                       " tokens");
  Forward fwd(cfg, params);
  return fwd.tape.value(fwd.embed_vertex(token_ids));
}

ad::Matrix gat_layer(const ad::Matrix& features,
                     const std::vector<std::vector<int>>& neighbors, ParamSet& params,
                     const ModelConfig& cfg, int layer, GatMode mode,
                     std::vector<ad::Matrix>* head_attention) {
  const int n = features.rows;
  if (static_cast<int>(neighbors.size()) != n)
    throw ValueError("neighbor list size mismatch");
  ad::Matrix mask(n, n, 0.0);
  for (int i = 0; i < n; ++i) {
    bool self_seen = false;
    for (int j : neighbors[static_cast<std::size_t>(i)]) {
      if (j < 0 || j >= n) throw ValueError("neighbor index out of range");
      if (j == i) self_seen = true;
      mask.at(i, j) = 1.0;
    }
    if (!self_seen) throw ValueError("vertex " + std::to_string(i) + " lacks a self loop");
  }
  Forward fwd(cfg, params);
  std::vector<ad::Var> attn_vars;
  ad::Var out = fwd.gat_layer_var(fwd.tape.constant(features), mask, layer, mode,
                                  head_attention ? &attn_vars : nullptr);
  if (head_attention)
    for (ad::Var a : attn_vars) head_attention->push_back(fwd.tape.value(a));
  return fwd.tape.value(out);
}

ad::Matrix graph_encode(const ArticleGraph& graph, const Document& doc,
                        const Vocabulary& src, ParamSet& params, const ModelConfig& cfg,
                        std::vector<std::string>* run_log) {
  PairArtifacts art;
  art.graph = graph;
  for (const auto& v : graph.vertices) {
    const Sentence& s = doc.sentences[static_cast<std::size_t>(v.sentence_index)];
    std::vector<int> ids;
    for (const Token& t : s.tokens) ids.push_back(src.lookup(t.normalized));
    if (static_cast<int>(ids.size()) > cfg.max_positions) {
      if (run_log)
        run_log->push_back("sentence " + std::to_string(v.sentence_index) +
                           " truncated to " + std::to_string(cfg.max_positions) + " tokens");
      ids.resize(static_cast<std::size_t>(cfg.max_positions));
    }
    art.vertex_tokens.push_back(std::move(ids));
  }
  auto adj = graph.adjacency_with_self_loops();
  int nv = graph.vertex_count();
  art.adj_mask = ad::Matrix(nv, nv, 0.0);
  for (int i = 0; i < nv; ++i)
    for (int j : adj[static_cast<std::size_t>(i)]) art.adj_mask.at(i, j) = 1.0;

  Forward fwd(cfg, params);
  return fwd.tape.value(fwd.encode_graph(art));
}

ad::Matrix clue_encode(const std::vector<int>& clue_ids, ParamSet& params,
                       const ModelConfig& cfg) {
  std::vector<int> ids = clue_ids;
  if (ids.empty()) ids.push_back(Vocabulary::kUnk);
  if (static_cast<int>(ids.size()) > cfg.max_positions)
    ids.resize(static_cast<std::size_t>(cfg.max_positions));
  Forward fwd(cfg, params);
  return fwd.tape.value(fwd.encode_clues(ids));
}

DecodeStepOut decode_step(const std::vector<int>& prev_target_ids,
                          const EncoderOutput& enc, ParamSet& params,
                          const ModelConfig& cfg) {
  if (prev_target_ids.empty() || prev_target_ids.front() != Vocabulary::kBos)
    throw ValueError("decoder input must start with BOS");
  Forward fwd(cfg, params);
  ad::Var zg = fwd.tape.constant(enc.graph_states);
  ad::Var zc = fwd.tape.constant(enc.clue_states);
  Forward::Decoded dec = fwd.decode(prev_target_ids, zg, zc);
  ad::Var logits = fwd.tape.matmul(dec.hidden, fwd.tape.leaf(params.t("out_proj"), false));

  int last = static_cast<int>(prev_target_ids.size()) - 1;
  DecodeStepOut out;
  out.hidden = fwd.tape.value(dec.hidden).row(last);
  out.alpha = fwd.tape.value(dec.alpha).row(last);
  out.logits = fwd.tape.value(logits).row(last);
  return out;
}

double translation_gate(const std::vector<double>& hidden, const ParamSet& params) {
  const ad::Matrix& w1 = params.t("gate.w1");
  const ad::Matrix& b1 = params.t("gate.b1");
  const ad::Matrix& w2 = params.t("gate.w2");
  const ad::Matrix& b2 = params.t("gate.b2");
  if (static_cast<int>(hidden.size()) != w1.rows)
    throw ValueError("gate input dimension mismatch");
  for (double v : hidden)
    if (!std::isfinite(v)) throw ValueError("gate input must be finite");

  std::vector<double> t1(static_cast<std::size_t>(w1.cols), 0.0);
  for (int j = 0; j < w1.cols; ++j) {
    double acc = b1.at(0, j);
    for (int i = 0; i < w1.rows; ++i) acc += hidden[static_cast<std::size_t>(i)] * w1.at(i, j);
    t1[static_cast<std::size_t>(j)] = acc;
  }
  double s = b2.at(0, 0);
  for (int i = 0; i < w2.rows; ++i) s += t1[static_cast<std::size_t>(i)] * w2.at(i, 0);
  return 1.0 / (1.0 + std::exp(-s));
}

std::vector<double> mix_distribution(const std::vector<double>& neural, double p_trans,
                                     const std::vector<double>& alpha,
                                     const std::vector<std::string>& clue_src_tokens,
                                     const BilingualLexicon& lexicon,
                                     const Vocabulary& tgt_vocab) {
  if (alpha.size() != clue_src_tokens.size())
    throw ValueError("alpha / clue token count mismatch");
  if (static_cast<int>(neural.size()) != tgt_vocab.size())
    throw ValueError("neural distribution size mismatch");

  std::vector<double> trans(neural.size(), 0.0);
  double covered = 0.0;
  for (std::size_t i = 0; i < clue_src_tokens.size(); ++i) {
    const auto* targets = lexicon.find(clue_src_tokens[i]);
    if (!targets) continue;  // uncovered mass stays with the neural branch
    covered += alpha[i];
    for (const auto& [tgt_tok, prob] : *targets)
      trans[static_cast<std::size_t>(tgt_vocab.lookup(tgt_tok))] += alpha[i] * prob;
  }

  std::vector<double> out(neural.size());
  double neural_weight = 1.0 - p_trans * covered;
  for (std::size_t w = 0; w < out.size(); ++w)
    out[w] = p_trans * trans[w] + neural_weight * neural[w];
  return out;
}

ad::Matrix forward_distributions(const PairArtifacts& art, ParamSet& params,
                                 const ModelConfig& cfg) {
  Forward fwd(cfg, params);
  return fwd.tape.value(fwd.sequence_distributions(art));
}

double forward_loss(const PairArtifacts& art, ParamSet& params, const ModelConfig& cfg,
                    bool with_grads, bool train_mode, std::uint64_t dropout_seed) {
  Forward fwd(cfg, params, train_mode, dropout_seed);
  ad::Var probs = fwd.sequence_distributions(art);
  std::vector<int> gold(art.ref_ids.begin() + 1, art.ref_ids.end());
  auto [total, count] = fwd.nll_sum(probs, gold);
  ad::Var mean = fwd.tape.scale(total, 1.0 / count);
  if (with_grads) fwd.accumulate_grads(mean);
  return fwd.tape.value(mean).at(0, 0);
}

std::string detokenize(const std::vector<int>& ids, const Vocabulary& tgt,
                       const std::string& tgt_lang) {
  std::string out;
  bool zh = is_zh(tgt_lang);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::string& tok = tgt.token_of(ids[i]);
    if (!zh && i > 0) out += ' ';
    out += tok;
  }
  return out;
}

}  // namespace cluesum
