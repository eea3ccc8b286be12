#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "saug/augment.hpp"
#include "saug/graph.hpp"
#include "saug/nn.hpp"

namespace saug {

struct GenConfig {
  std::int64_t noise_dim = 32;     // d_z
  std::int64_t gen_hidden = 64;    // H_gen
  std::int64_t gen_layers = 2;     // l_gen
  double alpha = 1e-4;             // generator regularization
  double beta = 1e-4;              // discriminator regularization
  std::int64_t d_steps_per_g = 2;  // lambda_2, discriminator steps per generator step
  std::int64_t epochs = 300;
  std::uint64_t seed = 0;
  // the minimax term's weight in the generator objective (feature matching
  // always weighs 1); exposed for study
  double adv_weight = 1.0;
  std::int64_t dis_hidden = 32;    // discriminator hidden width
  double lr = 0.01;

  void validate() const;
};

/// One (tail, most cosine-similar neighbor) pair per connected tail, plus
/// the neighbor's features and label, which the generator regresses toward.
struct SimilarTargets {
  std::vector<std::pair<NodeId, NodeId>> pairs;  // (tail, neighbor)
  Matrix target_features;                         // one row per pair
  std::vector<int> target_labels;
  std::vector<NodeId> skipped_isolated;           // tails without neighbors

  std::int64_t count() const { return static_cast<std::int64_t>(pairs.size()); }
};

/// For each tail, argmax over its neighbors of cos(X_tail, X_nbr); zero-norm
/// rows score 0 against everything, ties break to the lowest id. Isolated
/// tails are skipped and recorded.
SimilarTargets select_similar_neighbors(const Graph& g_prime, const std::vector<NodeId>& tails);

/// Fully connected generator mapping noise R^{d_z} -> feature space R^{d_x},
/// output clamped to the observed per-dimension range of the real features.
class Generator {
 public:
  Generator() = default;
  Generator(const GenConfig& cfg, std::int64_t feature_dim, std::uint64_t init_seed);

  ad::Tensor forward(const Matrix& noise) const;
  Matrix generate(const Matrix& noise) const;
  Matrix sample_noise(std::int64_t rows, std::mt19937_64& rng) const;

  std::vector<ad::Tensor> parameters() const;
  std::int64_t noise_dim() const { return noise_dim_; }
  std::int64_t feature_dim() const { return feature_dim_; }

  void set_feature_bounds(std::vector<double> lo, std::vector<double> hi);
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }

  std::vector<Matrix> snapshot_parameters() const;
  void restore_parameters(const std::vector<Matrix>& snap);
  const std::vector<std::int64_t>& layer_dims() const { return dims_; }

 private:
  std::vector<ad::Tensor> weights_, biases_;
  std::vector<std::int64_t> dims_;  // d_z, hidden..., d_x
  std::int64_t noise_dim_ = 0, feature_dim_ = 0;
  std::vector<double> lo_, hi_;  // columnwise clamp bounds
};

struct GanTrace {
  std::vector<double> gen_loss;
  std::vector<double> dis_loss;
};

struct GanResult {
  Generator generator;
  GnnModel discriminator;  // 2-layer GCN, num_classes + 1 output columns
  GanTrace trace;
};

/// Alternating minimax training: per epoch, fresh noise regenerates the
/// pseudo features, the discriminator (class head CE over labeled_rows and
/// all pseudo rows + real/pseudo head BCE over every node + beta reg) takes
/// lambda_2 steps against the detached features, then the generator takes one
/// step on feature matching + alpha reg + the weighted minimax term flowing
/// through the discriminator. Deterministic for a fixed cfg.seed.
GanResult train_generative(const Graph& g_prime, const SimilarTargets& targets,
                           const std::vector<std::int64_t>& labeled_rows, const GenConfig& cfg);

struct PseudoManifestEntry {
  NodeId pseudo_id;
  NodeId tail_id;
  NodeId source_neighbor_id;
  int label;
};

/// One pseudo node per target pair, appended after all real nodes in tail-id
/// order: feature row from a fresh seeded noise draw, label copied from the
/// target neighbor, pseudo flag false, and exactly one edge to the tail.
std::pair<Graph, std::vector<PseudoManifestEntry>> inject_pseudo_nodes(
    const Graph& g_prime, const Generator& generator, const SimilarTargets& targets,
    const GenConfig& cfg);

void save_manifest(const std::vector<PseudoManifestEntry>& manifest,
                   const std::filesystem::path& file);

/// Criterion-style diagnostic: regenerate pseudo features from held-out
/// noise and score the discriminator's real/pseudo head as balanced accuracy
/// (mean of the real and pseudo recalls). 0.5 = collapsed, 1.0 = trivially
/// perfect.
double discriminator_balanced_accuracy(const GanResult& gan, const Graph& g_prime,
                                       const SimilarTargets& targets, std::uint64_t noise_seed);

}  // namespace saug
