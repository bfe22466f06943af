#include "cluesum/clue_extract.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cluesum {

namespace {

bool is_candidate(const Token& t, const TokenSet& stopwords) {
  return !t.normalized.empty() && !stopwords.count(t.normalized) &&
         !is_punctuation(t.normalized);
}

}  // namespace

WordGraph build_word_graph(const Document& doc, int window, const TokenSet& stopwords) {
  if (window < 2) throw ValueError("window must be >= 2");

  WordGraph g;
  g.window = window;

  std::set<std::string> nodes;
  for (const Sentence& s : doc.sentences)
    for (const Token& t : s.tokens)
      if (is_candidate(t, stopwords)) nodes.insert(t.normalized);
  g.nodes.assign(nodes.begin(), nodes.end());
  for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i)
    g.node_index[g.nodes[static_cast<std::size_t>(i)]] = i;

  for (const Sentence& s : doc.sentences) {
    const auto& toks = s.tokens;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (!is_candidate(toks[i], stopwords)) continue;
      int a = g.node_index.at(toks[i].normalized);
      // windowing over original positions: partner within window-1 tokens
      std::size_t lim = std::min(toks.size(), i + static_cast<std::size_t>(window));
      for (std::size_t j = i + 1; j < lim; ++j) {
        if (!is_candidate(toks[j], stopwords)) continue;
        int b = g.node_index.at(toks[j].normalized);
        if (a == b) continue;
        auto key = std::minmax(a, b);
        ++g.edges[{key.first, key.second}];
      }
    }
  }
  return g;
}

std::vector<double> weighted_pagerank(
    const std::vector<std::vector<std::pair<int, double>>>& adj, double damping,
    double tol, int max_iter) {
  if (damping <= 0.0 || damping >= 1.0) throw ValueError("damping must be in (0,1)");
  if (tol <= 0.0) throw ValueError("tol must be positive");

  std::size_t n = adj.size();
  std::vector<double> wsum(n, 0.0);
  for (std::size_t u = 0; u < n; ++u)
    for (const auto& [v, w] : adj[u]) wsum[u] += w;

  std::vector<double> score(n, 1.0), next(n, 0.0);
  for (int iter = 0; iter < max_iter; ++iter) {
    double max_delta = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      double acc = 0.0;
      for (const auto& [u, w] : adj[v]) {
        if (wsum[static_cast<std::size_t>(u)] <= 0.0) continue;
        acc += w / wsum[static_cast<std::size_t>(u)] * score[static_cast<std::size_t>(u)];
      }
      next[v] = (1.0 - damping) + damping * acc;
      max_delta = std::max(max_delta, std::fabs(next[v] - score[v]));
    }
    score.swap(next);
    if (max_delta < tol) break;
  }
  return score;
}

std::map<std::string, double> pagerank(const WordGraph& graph, double damping,
                                       double tol, int max_iter) {
  std::size_t n = graph.nodes.size();
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const auto& [key, count] : graph.edges) {
    adj[static_cast<std::size_t>(key.first)].emplace_back(key.second, double(count));
    adj[static_cast<std::size_t>(key.second)].emplace_back(key.first, double(count));
  }
  std::vector<double> score = weighted_pagerank(adj, damping, tol, max_iter);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < n; ++i) out[graph.nodes[i]] = score[i];
  return out;
}

ClueSet extract_clues(const Document& doc, const ClueConfig& cfg,
                      const TokenSet& stopwords) {
  if (cfg.top_ratio <= 0.0 || cfg.top_ratio > 1.0)
    throw ValueError("top_ratio must be in (0,1]");

  WordGraph graph = build_word_graph(doc, cfg.window, stopwords);
  if (graph.nodes.empty()) return {};
  std::map<std::string, double> score =
      pagerank(graph, cfg.damping, cfg.tol, cfg.max_iter);

  // First occurrence position of each node, document-wide.
  std::unordered_map<std::string, int> first_pos;
  {
    int pos = 0;
    for (const Sentence& s : doc.sentences) {
      for (const Token& t : s.tokens) {
        if (graph.has_node(t.normalized) && !first_pos.count(t.normalized))
          first_pos[t.normalized] = pos;
        ++pos;
      }
    }
  }

  int top_n = static_cast<int>(
      std::ceil(cfg.top_ratio * static_cast<double>(graph.nodes.size())));
  top_n = std::min(top_n, cfg.max_clues);
  top_n = std::min<int>(top_n, static_cast<int>(graph.nodes.size()));

  std::vector<std::string> ranked = graph.nodes;
  std::sort(ranked.begin(), ranked.end(), [&](const std::string& a, const std::string& b) {
    double sa = score.at(a), sb = score.at(b);
    if (sa != sb) return sa > sb;
    int pa = first_pos.at(a), pb = first_pos.at(b);
    if (pa != pb) return pa < pb;
    return a < b;
  });
  TokenSet selected(ranked.begin(), ranked.begin() + top_n);

  // Merge keywords adjacent in the original text into phrase clues.
  struct Candidate {
    std::vector<std::string> tokens;
    double score = 0.0;
    int first_pos = 0;
  };
  std::vector<Candidate> cands;
  std::set<std::vector<std::string>> seen;
  int pos = 0;
  for (const Sentence& s : doc.sentences) {
    std::size_t i = 0;
    while (i < s.tokens.size()) {
      if (!selected.count(s.tokens[i].normalized)) {
        ++i;
        ++pos;
        continue;
      }
      Candidate c;
      c.first_pos = pos;
      while (i < s.tokens.size() && selected.count(s.tokens[i].normalized)) {
        c.tokens.push_back(s.tokens[i].normalized);
        c.score += score.at(s.tokens[i].normalized);
        ++i;
        ++pos;
      }
      if (seen.insert(c.tokens).second) cands.push_back(std::move(c));
    }
  }

  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.first_pos < b.first_pos;
  });

  ClueSet out;
  for (const Candidate& c : cands) {
    if (static_cast<int>(out.clues.size()) >= cfg.max_clues) break;
    out.clues.push_back({c.tokens, c.score});
  }
  return out;
}

}  // namespace cluesum
