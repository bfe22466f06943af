#pragma once

#include <string>
#include <vector>

#include "cluesum/clue_extract.hpp"
#include "cluesum/corpus.hpp"
#include "json.hpp"

namespace cluesum {

/// Sentence graph: one vertex per surviving sentence, an edge between
/// sentences that share at least one clue. Weights:
///   self_loop  = number of distinct clues contained in the sentence
///   edge w     = number of distinct clues shared by both sentences
///   weight     = self_loop + sum of incident edge weights
/// Vertices whose weight is 0 are pruned; if pruning would remove every
/// vertex the unpruned graph is returned with uniform self-loops of 1 and
/// `fallback` set.
struct ArticleGraph {
  struct Vertex {
    int sentence_index = 0;
    int self_loop = 0;  // omega_ii
    int weight = 0;     // omega(v_i)
  };
  struct Edge {
    int i = 0, j = 0;  // sentence indices, i < j
    int w = 0;
  };

  std::vector<Vertex> vertices;  // ascending sentence_index
  std::vector<Edge> edges;
  bool fallback = false;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  /// Position of sentence_index in `vertices`, or -1.
  int vertex_pos(int sentence_index) const;
  /// Neighbor positions per vertex position, self included.
  std::vector<std::vector<int>> adjacency_with_self_loops() const;
};

/// Whether the clue's token sequence occurs contiguously in the sentence
/// (normalized tokens on both sides).
bool sentence_contains_clue(const Sentence& s, const Clue& c);

ArticleGraph build_article_graph(const Document& doc, const ClueSet& clues);

/// Sentence indices sorted by vertex weight (descending), ties by smaller
/// sentence index first.
std::vector<int> rank_sentences(const ArticleGraph& graph);

enum class ExtractMethod { Agc, TextRank, LexRank };

ExtractMethod parse_extract_method(const std::string& name);
std::string extract_method_name(ExtractMethod m);

struct ExtractiveConfig {
  ExtractMethod method = ExtractMethod::Agc;
  int k = 3;
  double lexrank_threshold = 0.1;
  ClueConfig clue;
};

/// Top-k sentences by the chosen ranker, emitted in original document
/// order. k larger than the candidate count returns all candidates.
std::vector<Sentence> extract_summary(const Document& doc, const ExtractiveConfig& cfg,
                                      const TokenSet& stopwords);

nlohmann::json graph_to_json(const ArticleGraph& g);

}  // namespace cluesum
