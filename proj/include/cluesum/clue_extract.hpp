#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cluesum/corpus.hpp"

namespace cluesum {

/// Co-occurrence graph over candidate keyword tokens of one document.
struct WordGraph {
  int window = 4;
  std::vector<std::string> nodes;  // sorted unique normalized tokens
  std::unordered_map<std::string, int> node_index;
  std::map<std::pair<int, int>, int> edges;  // (i<j) -> co-occurrence count

  bool has_node(const std::string& tok) const { return node_index.count(tok) > 0; }
};

/// A keyword or keyphrase with its accumulated rank score.
struct Clue {
  std::vector<std::string> tokens;  // normalized
  double score = 0.0;
};

/// Clues ranked by score (descending); ties by first occurrence position.
struct ClueSet {
  std::vector<Clue> clues;

  bool empty() const { return clues.empty(); }
  std::size_t size() const { return clues.size(); }
};

struct ClueConfig {
  int window = 4;
  double damping = 0.85;
  double tol = 1e-6;
  int max_iter = 100;
  double top_ratio = 1.0 / 3.0;
  int max_clues = 20;
};

/// Nodes are unique non-stopword, non-punctuation normalized tokens. An edge
/// joins two nodes when they co-occur within `window` token positions inside
/// the same sentence; windowing uses original token positions, before any
/// filtering. Edge weight is the co-occurrence count.
WordGraph build_word_graph(const Document& doc, int window, const TokenSet& stopwords);

/// Weighted PageRank used by all rankers:
///   S(v) = (1-d) + d * sum_{u in adj(v)} w(u,v) / W(u) * S(u)
/// starting from all ones, stopping when the max per-node change drops below
/// tol or after max_iter sweeps. `adj` lists (neighbor, weight) pairs.
std::vector<double> weighted_pagerank(
    const std::vector<std::vector<std::pair<int, double>>>& adj, double damping,
    double tol, int max_iter);

/// PageRank over a WordGraph, keyed by node token.
std::map<std::string, double> pagerank(const WordGraph& graph, double damping,
                                       double tol, int max_iter);

/// TextRank keyword extraction with adjacent-keyword phrase merging. Takes
/// the top ceil(top_ratio * |nodes|) tokens (capped at max_clues), merges
/// keywords adjacent in the original text into multi-token clues scored by
/// the sum of member scores, dedupes, and ranks.
ClueSet extract_clues(const Document& doc, const ClueConfig& cfg,
                      const TokenSet& stopwords);

}  // namespace cluesum
