#pragma once

#include <cstdint>
#include <string>

#include "cluesum/clue_extract.hpp"
#include "cluesum/model.hpp"
#include "cluesum/training.hpp"
#include "json.hpp"

namespace cluesum {

/// Merged view of every tunable, loadable from a JSON file. Unknown keys are
/// rejected; precedence is CLI flag > config file > default.
struct RunConfig {
  std::uint64_t seed = 42;

  ModelConfig model;
  ClueConfig clue;
  TrainConfig train;
  BeamConfig beam;

  struct VocabConfig {
    int max_size = 50000;
    int min_freq = 1;
  } vocab;

  struct ExtractiveCfg {
    int k = 3;
    double lexrank_threshold = 0.1;
  } extractive;

  struct MeteorCfg {
    double alpha = 0.9;
    double gamma = 0.5;
    double theta = 3.0;
  } meteor;

  struct Paths {
    std::string stopwords_en = "data/stopwords_en.txt";
    std::string stopwords_zh = "data/stopwords_zh.txt";
    std::string abbreviations = "data/abbreviations_en.txt";
    std::string synonyms;    // optional meteor synonym table
    std::string embeddings;  // optional static embedding table
  } paths;
};

/// Applies a JSON object onto cfg. Throws ConfigError on unknown keys
/// (reported with their path) or type mismatches.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j);

/// Defaults when path is empty, otherwise defaults + the file contents.
RunConfig load_run_config(const std::string& path);

/// Stopword set for the language tag; empty path -> empty set.
TokenSet load_stopwords(const RunConfig& cfg, const std::string& lang);

}  // namespace cluesum
