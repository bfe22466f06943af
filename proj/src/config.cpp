#include "cluesum/config.hpp"

#include <fstream>
#include <set>

namespace cluesum {

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& j, const std::string& path) : j_(j), path_(path) {
    if (!j.is_object()) throw ConfigError("config section " + path + " must be an object");
  }

  ~Section() = default;

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key " + path_ + key + " has the wrong type");
    }
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key: " + path_ + key);
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

void apply_config_json(RunConfig& cfg, const json& j) {
  Section root(j, "");
  root.get("seed", cfg.seed);

  if (const json* m = root.sub("model")) {
    Section s(*m, "model.");
    s.get("d_model", cfg.model.d_model);
    s.get("d_ff", cfg.model.d_ff);
    s.get("enc_layers", cfg.model.enc_layers);
    s.get("dec_layers", cfg.model.dec_layers);
    s.get("enc_heads", cfg.model.enc_heads);
    s.get("gat_layers", cfg.model.gat_layers);
    s.get("gat_heads", cfg.model.gat_heads);
    s.get("dropout", cfg.model.dropout);
    s.get("max_positions", cfg.model.max_positions);
    s.get("leaky_slope", cfg.model.leaky_slope);
    s.finish();
  }
  if (const json* c = root.sub("clue")) {
    Section s(*c, "clue.");
    s.get("window", cfg.clue.window);
    s.get("damping", cfg.clue.damping);
    s.get("tol", cfg.clue.tol);
    s.get("max_iter", cfg.clue.max_iter);
    s.get("top_ratio", cfg.clue.top_ratio);
    s.get("max_clues", cfg.clue.max_clues);
    s.finish();
  }
  if (const json* t = root.sub("train")) {
    Section s(*t, "train.");
    s.get("batch_tokens", cfg.train.batch_tokens);
    s.get("lr_base", cfg.train.lr_base);
    s.get("warmup", cfg.train.warmup);
    s.get("beta1", cfg.train.beta1);
    s.get("beta2", cfg.train.beta2);
    s.get("eps", cfg.train.eps);
    s.get("max_steps", cfg.train.max_steps);
    s.get("checkpoint_every", cfg.train.checkpoint_every);
    s.finish();
  }
  if (const json* b = root.sub("beam")) {
    Section s(*b, "beam.");
    s.get("width", cfg.beam.width);
    s.get("length_penalty", cfg.beam.length_penalty);
    s.get("max_len", cfg.beam.max_len);
    s.finish();
  }
  if (const json* v = root.sub("vocab")) {
    Section s(*v, "vocab.");
    s.get("max_size", cfg.vocab.max_size);
    s.get("min_freq", cfg.vocab.min_freq);
    s.finish();
  }
  if (const json* e = root.sub("extractive")) {
    Section s(*e, "extractive.");
    s.get("k", cfg.extractive.k);
    s.get("lexrank_threshold", cfg.extractive.lexrank_threshold);
    s.finish();
  }
  if (const json* m = root.sub("meteor")) {
    Section s(*m, "meteor.");
    s.get("alpha", cfg.meteor.alpha);
    s.get("gamma", cfg.meteor.gamma);
    s.get("theta", cfg.meteor.theta);
    s.finish();
  }
  if (const json* p = root.sub("paths")) {
    Section s(*p, "paths.");
    s.get("stopwords_en", cfg.paths.stopwords_en);
    s.get("stopwords_zh", cfg.paths.stopwords_zh);
    s.get("abbreviations", cfg.paths.abbreviations);
    s.get("synonyms", cfg.paths.synonyms);
    s.get("embeddings", cfg.paths.embeddings);
    s.finish();
  }
  root.finish();

  // keep the single-seed contract: training inherits the global seed
  cfg.train.seed = cfg.seed;
}

RunConfig load_run_config(const std::string& path) {
  RunConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in.is_open()) throw IoError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  apply_config_json(cfg, j);
  return cfg;
}

TokenSet load_stopwords(const RunConfig& cfg, const std::string& lang) {
  const std::string& path = is_zh(lang) ? cfg.paths.stopwords_zh : cfg.paths.stopwords_en;
  if (path.empty()) return {};
  return load_token_set(path);
}

}  // namespace cluesum
