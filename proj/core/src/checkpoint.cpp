#include "saug/checkpoint.hpp"

#include <fstream>

#include "json.hpp"

namespace saug {

namespace {

constexpr int kCheckpointVersion = 1;

nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.values()}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<std::int64_t>(), j.at("cols").get<std::int64_t>());
  auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<std::int64_t>(data.size()) != m.size())
    throw std::runtime_error("checkpoint: matrix payload size mismatch");
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

nlohmann::json read_checkpoint(const std::filesystem::path& file, const char* kind) {
  std::ifstream f(file);
  if (!f) throw std::runtime_error("cannot open " + file.string());
  nlohmann::json j;
  f >> j;
  if (j.at("version").get<int>() != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version in " + file.string());
  if (j.at("kind") != kind)
    throw std::runtime_error("checkpoint: expected kind '" + std::string(kind) + "' in " +
                             file.string());
  return j;
}

void write_json(const nlohmann::json& j, const std::filesystem::path& file) {
  std::ofstream f(file);
  if (!f) throw std::runtime_error("cannot write " + file.string());
  f << j.dump() << '\n';
}

}  // namespace

void save_model(const GnnModel& model, const std::filesystem::path& file) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& s : model.specs())
    layers.push_back({{"in", s.in_dim}, {"out", s.out_dim}, {"agg", to_string(s.agg)}});
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : model.parameters()) params.push_back(matrix_to_json(p.value()));
  write_json({{"version", kCheckpointVersion},
              {"kind", "gnn"},
              {"dropout", model.dropout_rate()},
              {"layers", layers},
              {"params", params}},
             file);
}

GnnModel load_model(const std::filesystem::path& file) {
  auto j = read_checkpoint(file, "gnn");
  std::vector<LayerSpec> specs;
  for (const auto& l : j.at("layers"))
    specs.push_back({l.at("in").get<std::int64_t>(), l.at("out").get<std::int64_t>(),
                     aggregator_from_string(l.at("agg").get<std::string>())});
  GnnModel model(specs, j.at("dropout").get<double>(), /*init_seed=*/0);
  std::vector<Matrix> params;
  for (const auto& p : j.at("params")) params.push_back(matrix_from_json(p));
  model.restore_parameters(params);
  return model;
}

void save_generator(const Generator& gen, const std::filesystem::path& file) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : gen.parameters()) params.push_back(matrix_to_json(p.value()));
  write_json({{"version", kCheckpointVersion},
              {"kind", "generator"},
              {"dims", gen.layer_dims()},
              {"lo", gen.lo()},
              {"hi", gen.hi()},
              {"params", params}},
             file);
}

Generator load_generator(const std::filesystem::path& file) {
  auto j = read_checkpoint(file, "generator");
  const auto dims = j.at("dims").get<std::vector<std::int64_t>>();
  if (dims.size() < 2) throw std::runtime_error("checkpoint: generator needs >= 2 dims");
  GenConfig cfg;
  cfg.noise_dim = dims.front();
  cfg.gen_layers = static_cast<std::int64_t>(dims.size()) - 1;
  cfg.gen_hidden = dims.size() > 2 ? dims[1] : 1;
  Generator gen(cfg, dims.back(), /*init_seed=*/0);
  gen.set_feature_bounds(j.at("lo").get<std::vector<double>>(),
                         j.at("hi").get<std::vector<double>>());
  std::vector<Matrix> params;
  for (const auto& p : j.at("params")) params.push_back(matrix_from_json(p));
  gen.restore_parameters(params);
  return gen;
}

void save_embeddings(const EmbeddingPair& emb, const std::filesystem::path& file) {
  write_json({{"version", kCheckpointVersion},
              {"kind", "embeddings"},
              {"z_link", matrix_to_json(emb.z_link)},
              {"z_label", matrix_to_json(emb.z_label)}},
             file);
}

EmbeddingPair load_embeddings(const std::filesystem::path& file) {
  auto j = read_checkpoint(file, "embeddings");
  return {matrix_from_json(j.at("z_link")), matrix_from_json(j.at("z_label"))};
}

}  // namespace saug
