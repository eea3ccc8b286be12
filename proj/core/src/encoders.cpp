#include "saug/encoders.hpp"

#include <stdexcept>

#include "saug/sampling.hpp"

namespace saug {

std::vector<LayerSpec> EncoderConfig::layer_specs(std::int64_t in_dim) const {
  std::vector<LayerSpec> specs;
  std::int64_t prev = in_dim;
  for (std::int64_t h : hidden) {
    specs.push_back({prev, h, agg});
    prev = h;
  }
  specs.push_back({prev, out_dim, agg});
  return specs;
}

EncoderConfig default_link_config() {
  EncoderConfig c;
  c.hidden = {32};
  c.out_dim = 16;
  return c;
}

EncoderConfig default_label_config(int num_classes) {
  EncoderConfig c;
  c.hidden = {32, 32};
  c.out_dim = num_classes;
  return c;
}

PretrainResult pretrain_encoders(const Graph& g, const std::vector<std::int64_t>& train_mask,
                                 const EncoderConfig& lp_cfg, const EncoderConfig& nc_cfg,
                                 std::uint64_t seed) {
  if (train_mask.empty()) throw std::invalid_argument("pretrain_encoders: empty training mask");
  const std::int64_t d = g.features().cols();
  const bool need_sage =
      lp_cfg.agg == Aggregator::kSageMean || nc_cfg.agg == Aggregator::kSageMean;
  GraphOps ops = GraphOps::build(g, need_sage);

  PretrainResult res;
  const auto pos_edges = g.edge_list();
  if (pos_edges.empty()) throw std::invalid_argument("pretrain_encoders: graph has no edges");
  const EdgeKeySet edge_keys = edge_key_set(pos_edges);

  // link predictor
  {
    GnnModel model(lp_cfg.layer_specs(d), lp_cfg.dropout, seed * 2654435761u + 1);
    std::mt19937_64 drop_rng(seed * 2654435761u + 2);
    std::mt19937_64 neg_rng(seed * 2654435761u + 3);
    auto params = model.parameters();
    TrainOptions topts;
    topts.epochs = lp_cfg.epochs;
    topts.lr = lp_cfg.lr;
    topts.weight_decay = lp_cfg.weight_decay;
    res.link_trace = train(
        model,
        [&](std::int64_t) {
          ad::Tensor z = gnn_forward(model, ops, std::monostate{}, /*training=*/true, drop_rng);
          auto neg = sample_non_edges(g.num_nodes(),
                                      static_cast<std::int64_t>(pos_edges.size()),
                                      edge_keys, neg_rng);
          return link_predictor_loss(z, pos_edges, std::move(neg), params, lp_cfg.reg);
        },
        std::nullopt, topts);
    res.link_model = std::move(model);
  }

  // label classifier
  {
    GnnModel model(nc_cfg.layer_specs(d), nc_cfg.dropout, seed * 2654435761u + 4);
    std::mt19937_64 drop_rng(seed * 2654435761u + 5);
    auto params = model.parameters();
    TrainOptions topts;
    topts.epochs = nc_cfg.epochs;
    topts.lr = nc_cfg.lr;
    topts.weight_decay = nc_cfg.weight_decay;
    res.label_trace = train(
        model,
        [&](std::int64_t) {
          ad::Tensor z = gnn_forward(model, ops, std::monostate{}, /*training=*/true, drop_rng);
          return classifier_loss(z, g.labels(), train_mask, params, nc_cfg.reg);
        },
        std::nullopt, topts);
    res.label_model = std::move(model);
  }

  res.embeddings.z_link = gnn_infer(res.link_model, ops);
  res.embeddings.z_label = gnn_infer(res.label_model, ops);
  return res;
}

}  // namespace saug
