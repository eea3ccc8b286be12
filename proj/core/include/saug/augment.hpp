#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "saug/encoders.hpp"
#include "saug/graph.hpp"
#include "saug/pagerank.hpp"

namespace saug {

/// Calibrated pairwise similarity from the two pretrained embeddings:
///   score(i,j) = <softmax(z_label_i), softmax(z_label_j)> * sigmoid(<z_link_i, z_link_j>)
/// The label factor lies in (0,1], the link factor in (0,1), so scores are
/// strictly inside (0,1) and the L / P thresholds are meaningful.
struct SimilarityScores {
  NodeId owner = -1;
  std::vector<NodeId> candidates;
  std::vector<double> scores;  // aligned with candidates
};

struct AugmentConfig {
  double hub_drop_threshold = 0.1;  // L in (0,1)
  enum class Strategy { kThreshold, kTopQ };
  Strategy strategy = Strategy::kThreshold;
  double threshold_p = 0.8;   // P in (0,1), threshold mode
  std::int64_t top_q = 8;     // Q >= 1, topQ mode
  std::int64_t chunk_rows = 256;
  // ablation toggles; both on = full selective augmentation
  bool enable_denoise = true;
  bool enable_discover = true;

  void validate() const;
};

struct ScoredEdit {
  NodeId u = -1;
  NodeId v = -1;
  double score = 0.0;
};

/// Ordered edit plan: removals (hub denoising) then additions (tail
/// discovery), each justified by its similarity score.
struct EdgeEditPlan {
  std::vector<ScoredEdit> removals;
  std::vector<ScoredEdit> additions;

  GraphDelta to_delta() const;
};

void save_plan(const EdgeEditPlan& plan, const std::filesystem::path& file);
EdgeEditPlan load_plan(const std::filesystem::path& file);

/// Per-node mask of nodes whose induced subgraph must stay untouched
/// (validation/test nodes under the strict protocol); empty = no protection.
using ProtectedMask = std::vector<std::uint8_t>;

/// Row-softmax of z_label, shared by the similarity routines.
Matrix softmax_rows(const Matrix& logits);

/// Scores of one hub against its neighbors. Throws if hub is not in the
/// partition's hub set or is isolated.
SimilarityScores hub_similarity(const EmbeddingPair& emb, const Graph& g,
                                const NodePartition& part, NodeId hub);

/// Removal plan: every hub-incident edge scoring below L, except that each
/// hub's single best edge is always retained and no removal may drop any
/// endpoint to degree zero. Candidates are applied in ascending score order
/// (ties by edge id) so the noisiest edges go first. Edges with both
/// endpoints protected are kept.
EdgeEditPlan denoise_hubs(const EmbeddingPair& emb, const Graph& g, const NodePartition& part,
                          double drop_threshold, const ProtectedMask& protect = {});

using SimilaritySink = std::function<void(const SimilarityScores&)>;

/// Streams tail-vs-all scores in row blocks of chunk_rows, excluding self and
/// current neighbors from the candidates. Peak memory O(chunk_rows * |V|);
/// the stream is identical for every chunk size.
void tail_similarity_chunked(const EmbeddingPair& emb, const Graph& g,
                             const NodePartition& part, std::int64_t chunk_rows,
                             const SimilaritySink& sink);

/// Addition plan from the score stream: threshold mode adds every candidate
/// with score >= P; topQ adds the min(Q, |candidates|) best, ties by
/// ascending node id. Duplicate pairs (two tails picking each other) are
/// emitted once. Pairs with both endpoints protected are skipped.
EdgeEditPlan discover_tails(const EmbeddingPair& emb, const Graph& g, const NodePartition& part,
                            const AugmentConfig& cfg, const ProtectedMask& protect = {});

/// Denoise + discover + apply, honoring the config toggles. Removals are
/// applied before additions; the returned plan reproduces the edit.
std::pair<Graph, EdgeEditPlan> augment(const Graph& g, const EmbeddingPair& emb,
                                       const NodePartition& part, const AugmentConfig& cfg,
                                       const ProtectedMask& protect = {});

/// Ablation baseline: uniformly removes floor(rate * |E|) edges.
Graph random_drop_baseline(const Graph& g, double rate, std::uint64_t seed);

}  // namespace saug
