#pragma once

#include <cstdint>
#include <vector>

#include "saug/graph.hpp"
#include "saug/nn.hpp"

namespace saug {

/// Embeddings from the two pretrained encoders: z_link is |V| x d_out,
/// z_label is |V| x num_classes and holds pre-activation logits (softmax is
/// applied at use sites).
struct EmbeddingPair {
  Matrix z_link;
  Matrix z_label;
};

struct EncoderConfig {
  std::vector<std::int64_t> hidden = {32};  // hidden widths, output appended
  std::int64_t out_dim = 16;
  Aggregator agg = Aggregator::kGcn;
  double dropout = 0.5;
  double lr = 0.01;
  double weight_decay = 5e-4;
  double reg = 1e-4;  // lambda / mu in the losses
  std::int64_t epochs = 200;

  std::vector<LayerSpec> layer_specs(std::int64_t in_dim) const;
};

/// Shipped defaults: link predictor d -> 32 -> 16, label classifier
/// d -> 32 -> 32 -> num_classes.
EncoderConfig default_link_config();
EncoderConfig default_label_config(int num_classes);

struct PretrainResult {
  EmbeddingPair embeddings;  // final-epoch, inference mode
  GnnModel link_model;
  GnnModel label_model;
  TrainTrace link_trace;
  TrainTrace label_trace;
};

/// Trains the link predictor on the observed edges with freshly resampled
/// uniform negatives each epoch (|neg| = |E|), and the label classifier on
/// the masked labels. train_mask rows must carry valid labels. Deterministic
/// for a fixed seed.
PretrainResult pretrain_encoders(const Graph& g, const std::vector<std::int64_t>& train_mask,
                                 const EncoderConfig& lp_cfg, const EncoderConfig& nc_cfg,
                                 std::uint64_t seed);

}  // namespace saug
