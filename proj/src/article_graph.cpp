#include "cluesum/article_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace cluesum {

int ArticleGraph::vertex_pos(int sentence_index) const {
  for (int i = 0; i < vertex_count(); ++i)
    if (vertices[static_cast<std::size_t>(i)].sentence_index == sentence_index) return i;
  return -1;
}

std::vector<std::vector<int>> ArticleGraph::adjacency_with_self_loops() const {
  std::vector<std::vector<int>> adj(vertices.size());
  for (int i = 0; i < vertex_count(); ++i) adj[static_cast<std::size_t>(i)].push_back(i);
  for (const Edge& e : edges) {
    int a = vertex_pos(e.i), b = vertex_pos(e.j);
    if (a < 0 || b < 0) continue;
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

bool sentence_contains_clue(const Sentence& s, const Clue& c) {
  if (c.tokens.empty() || c.tokens.size() > s.tokens.size()) return false;
  for (std::size_t i = 0; i + c.tokens.size() <= s.tokens.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < c.tokens.size(); ++j) {
      if (s.tokens[i + j].normalized != c.tokens[j]) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

ArticleGraph build_article_graph(const Document& doc, const ClueSet& clues) {
  if (doc.sentences.empty()) throw EmptyInput("document has no sentences");

  const int n = static_cast<int>(doc.sentences.size());
  // clue sets per sentence, by clue index
  std::vector<std::set<int>> contained(static_cast<std::size_t>(n));
  for (int si = 0; si < n; ++si)
    for (int ci = 0; ci < static_cast<int>(clues.clues.size()); ++ci)
      if (sentence_contains_clue(doc.sentences[static_cast<std::size_t>(si)],
                                 clues.clues[static_cast<std::size_t>(ci)]))
        contained[static_cast<std::size_t>(si)].insert(ci);

  std::vector<int> self_loop(static_cast<std::size_t>(n), 0);
  for (int si = 0; si < n; ++si)
    self_loop[static_cast<std::size_t>(si)] =
        static_cast<int>(contained[static_cast<std::size_t>(si)].size());

  std::vector<ArticleGraph::Edge> edges;
  std::vector<int> weight = self_loop;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      std::vector<int> common;
      std::set_intersection(contained[static_cast<std::size_t>(i)].begin(),
                            contained[static_cast<std::size_t>(i)].end(),
                            contained[static_cast<std::size_t>(j)].begin(),
                            contained[static_cast<std::size_t>(j)].end(),
                            std::back_inserter(common));
      if (!common.empty()) {
        int w = static_cast<int>(common.size());
        edges.push_back({i, j, w});
        weight[static_cast<std::size_t>(i)] += w;
        weight[static_cast<std::size_t>(j)] += w;
      }
    }
  }

  bool any_survives = std::any_of(weight.begin(), weight.end(), [](int w) { return w > 0; });

  ArticleGraph g;
  if (!any_survives) {
    // clue-free article: keep every sentence with a uniform unit self-loop
    g.fallback = true;
    for (int i = 0; i < n; ++i) g.vertices.push_back({i, 1, 1});
    return g;
  }

  for (int i = 0; i < n; ++i) {
    if (weight[static_cast<std::size_t>(i)] > 0)
      g.vertices.push_back(
          {i, self_loop[static_cast<std::size_t>(i)], weight[static_cast<std::size_t>(i)]});
  }
  g.edges = std::move(edges);  // endpoints always survive: an edge implies weight > 0
  return g;
}

std::vector<int> rank_sentences(const ArticleGraph& graph) {
  if (graph.vertices.empty()) throw EmptyInput("empty article graph");
  std::vector<ArticleGraph::Vertex> vs = graph.vertices;
  std::sort(vs.begin(), vs.end(), [](const auto& a, const auto& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.sentence_index < b.sentence_index;
  });
  std::vector<int> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(v.sentence_index);
  return out;
}

ExtractMethod parse_extract_method(const std::string& name) {
  if (name == "agc") return ExtractMethod::Agc;
  if (name == "textrank") return ExtractMethod::TextRank;
  if (name == "lexrank") return ExtractMethod::LexRank;
  throw ValueError("unknown extraction method: " + name);
}

std::string extract_method_name(ExtractMethod m) {
  switch (m) {
    case ExtractMethod::Agc: return "agc";
    case ExtractMethod::TextRank: return "textrank";
    case ExtractMethod::LexRank: return "lexrank";
  }
  return "?";
}

namespace {

// score per sentence index; excluded sentences get no entry
using ScoreMap = std::map<int, double>;

ScoreMap textrank_scores(const Document& doc, const ClueConfig& cfg) {
  const int n = static_cast<int>(doc.sentences.size());
  std::vector<int> idx;  // sentences of length >= 2
  for (int i = 0; i < n; ++i)
    if (doc.sentences[static_cast<std::size_t>(i)].tokens.size() >= 2) idx.push_back(i);

  std::vector<std::set<std::string>> words(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (const Token& t : doc.sentences[static_cast<std::size_t>(idx[a])].tokens)
      words[a].insert(t.normalized);

  std::vector<std::vector<std::pair<int, double>>> adj(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      std::vector<std::string> common;
      std::set_intersection(words[a].begin(), words[a].end(), words[b].begin(),
                            words[b].end(), std::back_inserter(common));
      if (common.empty()) continue;
      double denom =
          std::log(double(doc.sentences[static_cast<std::size_t>(idx[a])].tokens.size())) +
          std::log(double(doc.sentences[static_cast<std::size_t>(idx[b])].tokens.size()));
      if (denom <= 0.0) continue;
      double sim = static_cast<double>(common.size()) / denom;
      adj[a].emplace_back(static_cast<int>(b), sim);
      adj[b].emplace_back(static_cast<int>(a), sim);
    }
  }

  std::vector<double> s = weighted_pagerank(adj, cfg.damping, cfg.tol, cfg.max_iter);
  ScoreMap out;
  for (std::size_t a = 0; a < idx.size(); ++a) out[idx[a]] = s[a];
  return out;
}

ScoreMap lexrank_scores(const Document& doc, double threshold, const ClueConfig& cfg) {
  const int n = static_cast<int>(doc.sentences.size());
  std::vector<std::unordered_map<std::string, double>> tf(static_cast<std::size_t>(n));
  std::unordered_map<std::string, int> df;
  for (int i = 0; i < n; ++i) {
    std::set<std::string> uniq;
    for (const Token& t : doc.sentences[static_cast<std::size_t>(i)].tokens) {
      tf[static_cast<std::size_t>(i)][t.normalized] += 1.0;
      uniq.insert(t.normalized);
    }
    for (const auto& w : uniq) ++df[w];
  }
  std::unordered_map<std::string, double> idf;
  for (const auto& [w, d] : df) idf[w] = std::log(static_cast<double>(n) / d);

  auto norm = [&](int i) {
    double acc = 0.0;
    for (const auto& [w, f] : tf[static_cast<std::size_t>(i)]) {
      double x = f * idf.at(w);
      acc += x * x;
    }
    return std::sqrt(acc);
  };
  std::vector<double> norms(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) norms[static_cast<std::size_t>(i)] = norm(i);

  std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double ni = norms[static_cast<std::size_t>(i)], nj = norms[static_cast<std::size_t>(j)];
      if (ni <= 0.0 || nj <= 0.0) continue;
      double dot = 0.0;
      for (const auto& [w, f] : tf[static_cast<std::size_t>(i)]) {
        auto it = tf[static_cast<std::size_t>(j)].find(w);
        if (it == tf[static_cast<std::size_t>(j)].end()) continue;
        double wi = idf.at(w);
        dot += f * wi * it->second * wi;
      }
      double cos = dot / (ni * nj);
      if (cos >= threshold) {
        adj[static_cast<std::size_t>(i)].emplace_back(j, cos);
        adj[static_cast<std::size_t>(j)].emplace_back(i, cos);
      }
    }
  }

  std::vector<double> s = weighted_pagerank(adj, cfg.damping, cfg.tol, cfg.max_iter);
  ScoreMap out;
  for (int i = 0; i < n; ++i) out[i] = s[static_cast<std::size_t>(i)];
  return out;
}

std::vector<Sentence> pick_top_k(const Document& doc, const std::vector<int>& ranked,
                                 int k) {
  std::vector<int> chosen(ranked.begin(),
                          ranked.begin() + std::min<std::size_t>(ranked.size(),
                                                                 static_cast<std::size_t>(k)));
  std::sort(chosen.begin(), chosen.end());
  std::vector<Sentence> out;
  for (int idx : chosen) out.push_back(doc.sentences[static_cast<std::size_t>(idx)]);
  return out;
}

std::vector<int> rank_by_scores(const ScoreMap& scores) {
  std::vector<std::pair<int, double>> v(scores.begin(), scores.end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<int> out;
  out.reserve(v.size());
  for (const auto& [i, s] : v) out.push_back(i);
  return out;
}

}  // namespace

std::vector<Sentence> extract_summary(const Document& doc, const ExtractiveConfig& cfg,
                                      const TokenSet& stopwords) {
  if (cfg.k < 1) throw ValueError("k must be >= 1");
  if (doc.sentences.empty()) throw EmptyInput("document has no sentences");

  std::vector<int> ranked;
  switch (cfg.method) {
    case ExtractMethod::Agc: {
      ClueSet clues = extract_clues(doc, cfg.clue, stopwords);
      ArticleGraph g = build_article_graph(doc, clues);
      ranked = rank_sentences(g);
      break;
    }
    case ExtractMethod::TextRank: {
      ScoreMap scores = textrank_scores(doc, cfg.clue);
      ranked = rank_by_scores(scores);
      // sentences excluded from the graph rank last, in document order
      for (int i = 0; i < static_cast<int>(doc.sentences.size()); ++i)
        if (!scores.count(i)) ranked.push_back(i);
      break;
    }
    case ExtractMethod::LexRank: {
      ranked = rank_by_scores(lexrank_scores(doc, cfg.lexrank_threshold, cfg.clue));
      break;
    }
  }
  return pick_top_k(doc, ranked, cfg.k);
}

nlohmann::json graph_to_json(const ArticleGraph& g) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const auto& v : g.vertices)
    j["vertices"].push_back({{"idx", v.sentence_index}, {"self", v.self_loop},
                             {"weight", v.weight}});
  j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges) j["edges"].push_back({e.i, e.j, e.w});
  j["fallback"] = g.fallback;
  return j;
}

}  // namespace cluesum
