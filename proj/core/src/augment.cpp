#include "saug/augment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "saug/sampling.hpp"
#include "saug/tensor.hpp"

namespace saug {

void AugmentConfig::validate() const {
  if (!(hub_drop_threshold > 0.0 && hub_drop_threshold < 1.0))
    throw std::invalid_argument("AugmentConfig: L must lie in (0,1)");
  if (strategy == Strategy::kThreshold && !(threshold_p > 0.0 && threshold_p < 1.0))
    throw std::invalid_argument("AugmentConfig: P must lie in (0,1)");
  if (strategy == Strategy::kTopQ && top_q < 1)
    throw std::invalid_argument("AugmentConfig: Q must be >= 1");
  if (chunk_rows < 1) throw std::invalid_argument("AugmentConfig: chunk_rows must be >= 1");
}

GraphDelta EdgeEditPlan::to_delta() const {
  GraphDelta d;
  for (const auto& e : removals) d.removed_edges.push_back(canonical_edge(e.u, e.v));
  for (const auto& e : additions) d.added_edges.push_back(canonical_edge(e.u, e.v));
  return d;
}

void save_plan(const EdgeEditPlan& plan, const std::filesystem::path& file) {
  std::ofstream f(file);
  if (!f) throw std::runtime_error("cannot write " + file.string());
  auto line = [&](const char* op, const ScoredEdit& e) {
    nlohmann::json j{{"op", op}, {"u", e.u}, {"v", e.v}, {"score", e.score}};
    f << j.dump() << '\n';
  };
  for (const auto& e : plan.removals) line("remove", e);
  for (const auto& e : plan.additions) line("add", e);
}

EdgeEditPlan load_plan(const std::filesystem::path& file) {
  std::ifstream f(file);
  if (!f) throw std::runtime_error("cannot open " + file.string());
  EdgeEditPlan plan;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    ScoredEdit e{j.at("u").get<NodeId>(), j.at("v").get<NodeId>(), j.at("score").get<double>()};
    if (j.at("op") == "remove")
      plan.removals.push_back(e);
    else if (j.at("op") == "add")
      plan.additions.push_back(e);
    else
      throw std::runtime_error("plan file: unknown op in '" + line + "'");
  }
  return plan;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::int64_t i = 0; i < logits.rows(); ++i) {
    const double* row = logits.row(i);
    double mx = row[0];
    for (std::int64_t j = 1; j < logits.cols(); ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::int64_t j = 0; j < logits.cols(); ++j) z += std::exp(row[j] - mx);
    for (std::int64_t j = 0; j < logits.cols(); ++j) p(i, j) = std::exp(row[j] - mx) / z;
  }
  return p;
}

namespace {

double row_dot(const Matrix& m, NodeId a, NodeId b) {
  const double* x = m.row(a);
  const double* y = m.row(b);
  double s = 0.0;
  for (std::int64_t j = 0; j < m.cols(); ++j) s += x[j] * y[j];
  return s;
}

double pair_score(const Matrix& label_probs, const Matrix& z_link, NodeId i, NodeId j) {
  return row_dot(label_probs, i, j) * ad::sigmoid(row_dot(z_link, i, j));
}

bool both_protected(const ProtectedMask& protect, NodeId u, NodeId v) {
  return !protect.empty() && protect[u] && protect[v];
}

}  // namespace

SimilarityScores hub_similarity(const EmbeddingPair& emb, const Graph& g,
                                const NodePartition& part, NodeId hub) {
  if (!part.is_hub(hub))
    throw std::invalid_argument("hub_similarity: node " + std::to_string(hub) + " is not a hub");
  if (g.degree(hub) == 0)
    throw std::invalid_argument("hub_similarity: hub " + std::to_string(hub) + " is isolated");
  const Matrix label_probs = softmax_rows(emb.z_label);
  SimilarityScores out;
  out.owner = hub;
  for (NodeId j : g.neighbors(hub)) {
    out.candidates.push_back(j);
    out.scores.push_back(pair_score(label_probs, emb.z_link, hub, j));
  }
  return out;
}

EdgeEditPlan denoise_hubs(const EmbeddingPair& emb, const Graph& g, const NodePartition& part,
                          double drop_threshold, const ProtectedMask& protect) {
  if (!(drop_threshold > 0.0 && drop_threshold < 1.0))
    throw std::invalid_argument("denoise_hubs: L must lie in (0,1)");
  const Matrix label_probs = softmax_rows(emb.z_label);

  // Each hub keeps its single best edge (ties: lowest neighbor id) no matter
  // how low it scores, so a hub can never be denoised into isolation.
  std::set<EdgePair> retained;
  std::set<EdgePair> flagged;  // the score is symmetric, so dedup by edge
  std::vector<ScoredEdit> candidates;
  for (NodeId hub : part.hubs) {
    if (g.degree(hub) == 0) continue;
    NodeId best = -1;
    double best_score = -1.0;
    for (NodeId j : g.neighbors(hub)) {
      const double s = pair_score(label_probs, emb.z_link, hub, j);
      if (s > best_score) {
        best_score = s;
        best = j;
      }
      if (s < drop_threshold) {
        auto e = canonical_edge(hub, j);
        if (flagged.insert(e).second) candidates.push_back({e.first, e.second, s});
      }
    }
    retained.insert(canonical_edge(hub, best));
  }

  // noisiest first; live degree floor keeps every endpoint attached
  std::sort(candidates.begin(), candidates.end(), [](const ScoredEdit& a, const ScoredEdit& b) {
    if (a.score != b.score) return a.score < b.score;
    return std::tie(a.u, a.v) < std::tie(b.u, b.v);
  });
  std::vector<std::int64_t> degree(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) degree[v] = g.degree(v);

  EdgeEditPlan plan;
  for (const auto& e : candidates) {
    if (retained.contains({e.u, e.v})) continue;
    if (both_protected(protect, e.u, e.v)) continue;
    if (degree[e.u] <= 1 || degree[e.v] <= 1) continue;
    degree[e.u]--;
    degree[e.v]--;
    plan.removals.push_back(e);
  }
  return plan;
}

void tail_similarity_chunked(const EmbeddingPair& emb, const Graph& g,
                             const NodePartition& part, std::int64_t chunk_rows,
                             const SimilaritySink& sink) {
  if (chunk_rows < 1) throw std::invalid_argument("tail_similarity_chunked: chunk_rows >= 1");
  const NodeId n = g.num_nodes();
  const Matrix label_probs = softmax_rows(emb.z_label);
  const auto& tails = part.tails;
  const auto t = static_cast<std::int64_t>(tails.size());

  for (std::int64_t begin = 0; begin < t; begin += chunk_rows) {
    const std::int64_t end = std::min(begin + chunk_rows, t);
    const std::int64_t rows = end - begin;
    // dense row-block of scores against all nodes
    Matrix block(rows, n);
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < rows; ++r) {
      const NodeId i = tails[begin + r];
      for (NodeId j = 0; j < n; ++j)
        block(r, j) = pair_score(label_probs, emb.z_link, i, j);
    }
    for (std::int64_t r = 0; r < rows; ++r) {
      const NodeId i = tails[begin + r];
      SimilarityScores s;
      s.owner = i;
      auto nb = g.neighbors(i);
      for (NodeId j = 0; j < n; ++j) {
        if (j == i) continue;
        if (std::binary_search(nb.begin(), nb.end(), j)) continue;
        s.candidates.push_back(j);
        s.scores.push_back(block(r, j));
      }
      sink(s);
    }
  }
}

EdgeEditPlan discover_tails(const EmbeddingPair& emb, const Graph& g, const NodePartition& part,
                            const AugmentConfig& cfg, const ProtectedMask& protect) {
  cfg.validate();
  EdgeEditPlan plan;
  std::set<EdgePair> emitted;
  auto consume = [&](const SimilarityScores& s) {
    std::vector<std::size_t> picks;
    if (cfg.strategy == AugmentConfig::Strategy::kThreshold) {
      for (std::size_t k = 0; k < s.candidates.size(); ++k)
        if (s.scores[k] >= cfg.threshold_p) picks.push_back(k);
    } else {
      picks.resize(s.candidates.size());
      for (std::size_t k = 0; k < picks.size(); ++k) picks[k] = k;
      const auto q = std::min<std::size_t>(cfg.top_q, picks.size());
      std::partial_sort(picks.begin(), picks.begin() + q, picks.end(),
                        [&](std::size_t a, std::size_t b) {
                          if (s.scores[a] != s.scores[b]) return s.scores[a] > s.scores[b];
                          return s.candidates[a] < s.candidates[b];
                        });
      picks.resize(q);
    }
    for (std::size_t k : picks) {
      const NodeId j = s.candidates[k];
      if (both_protected(protect, s.owner, j)) continue;
      auto e = canonical_edge(s.owner, j);
      if (emitted.insert(e).second) plan.additions.push_back({e.first, e.second, s.scores[k]});
    }
  };
  tail_similarity_chunked(emb, g, part, cfg.chunk_rows, consume);
  return plan;
}

std::pair<Graph, EdgeEditPlan> augment(const Graph& g, const EmbeddingPair& emb,
                                       const NodePartition& part, const AugmentConfig& cfg,
                                       const ProtectedMask& protect) {
  cfg.validate();
  if (emb.z_link.rows() != g.num_nodes() || emb.z_label.rows() != g.num_nodes())
    throw std::invalid_argument("augment: embeddings were not computed on this graph");
  EdgeEditPlan plan;
  if (cfg.enable_denoise) plan = denoise_hubs(emb, g, part, cfg.hub_drop_threshold, protect);
  if (cfg.enable_discover) {
    EdgeEditPlan adds = discover_tails(emb, g, part, cfg, protect);
    plan.additions = std::move(adds.additions);
  }
  Graph out = apply_delta(g, plan.to_delta());
  return {std::move(out), std::move(plan)};
}

Graph random_drop_baseline(const Graph& g, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw std::invalid_argument("random_drop_baseline: rate must lie in [0,1)");
  auto edges = g.edge_list();
  const auto k = static_cast<std::int64_t>(rate * static_cast<double>(edges.size()));
  std::mt19937_64 rng(seed);
  std::shuffle(edges.begin(), edges.end(), rng);
  GraphDelta d;
  d.removed_edges.assign(edges.begin(), edges.begin() + k);
  return apply_delta(g, d);
}

}  // namespace saug
