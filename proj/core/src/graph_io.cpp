#include "saug/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace saug {

namespace {

std::ifstream open_or_throw(const std::filesystem::path& p) {
  std::ifstream f(p);
  if (!f) throw std::runtime_error("cannot open " + p.string());
  return f;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

Graph load_graph(const std::filesystem::path& edge_file,
                 const std::filesystem::path& feature_file,
                 const std::filesystem::path& label_file,
                 const LoadOptions& opts, LoadReport* report) {
  // features first: they fix the node count
  Matrix features;
  {
    auto f = open_or_throw(feature_file);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::int64_t width = -1;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::vector<double> row;
      double v;
      while (ss >> v) row.push_back(v);
      if (width < 0) width = static_cast<std::int64_t>(row.size());
      if (static_cast<std::int64_t>(row.size()) != width)
        throw std::runtime_error("feature file: non-rectangular matrix at row " +
                                 std::to_string(rows.size()));
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("feature file: empty");
    features = Matrix(static_cast<std::int64_t>(rows.size()), width);
    for (std::size_t i = 0; i < rows.size(); ++i)
      std::copy(rows[i].begin(), rows[i].end(), features.row(static_cast<std::int64_t>(i)));
  }
  const NodeId n = features.rows();

  if (opts.normalize_features) {
    for (NodeId i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::int64_t j = 0; j < features.cols(); ++j) s += std::fabs(features(i, j));
      if (s > 0.0 && std::fabs(s - 1.0) > 1e-12)
        for (std::int64_t j = 0; j < features.cols(); ++j) features(i, j) /= s;
    }
  }

  std::vector<int> labels;
  int num_classes = 0;
  {
    auto f = open_or_throw(label_file);
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      labels.push_back(std::stoi(line));
      if (labels.back() != kUnlabeled) num_classes = std::max(num_classes, labels.back() + 1);
    }
    if (static_cast<NodeId>(labels.size()) != n)
      throw std::runtime_error("label file: " + std::to_string(labels.size()) +
                               " labels for " + std::to_string(n) + " nodes");
  }

  std::set<EdgePair> edges;
  LoadReport rep;
  {
    auto f = open_or_throw(edge_file);
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      NodeId u, v;
      if (!(ss >> u >> v)) throw std::runtime_error("edge file: malformed line '" + line + "'");
      if (u < 0 || v < 0 || u >= n || v >= n)
        throw std::out_of_range("edge file: node id out of range in '" + line + "'");
      if (u == v) {
        rep.dropped_self_loops++;
        continue;
      }
      if (!edges.insert(canonical_edge(u, v)).second) rep.merged_duplicates++;
    }
  }
  if (report) *report = rep;

  std::vector<EdgePair> edge_vec(edges.begin(), edges.end());
  return Graph(n, std::move(edge_vec), std::move(features), std::move(labels),
               std::vector<std::uint8_t>(n, 1), num_classes);
}

Graph load_graph_dir(const std::filesystem::path& dir, const LoadOptions& opts,
                     LoadReport* report) {
  return load_graph(dir / "edges.txt", dir / "features.txt", dir / "labels.txt", opts, report);
}

void save_graph(const Graph& g, const std::filesystem::path& edge_file,
                const std::filesystem::path& feature_file,
                const std::filesystem::path& label_file) {
  {
    std::ofstream f(edge_file);
    if (!f) throw std::runtime_error("cannot write " + edge_file.string());
    for (auto [u, v] : g.edge_list()) f << u << ' ' << v << '\n';
  }
  {
    std::ofstream f(feature_file);
    if (!f) throw std::runtime_error("cannot write " + feature_file.string());
    for (NodeId i = 0; i < g.num_nodes(); ++i) {
      for (std::int64_t j = 0; j < g.features().cols(); ++j) {
        if (j) f << ' ';
        f << format_double(g.features()(i, j));
      }
      f << '\n';
    }
  }
  {
    std::ofstream f(label_file);
    if (!f) throw std::runtime_error("cannot write " + label_file.string());
    for (int y : g.labels()) f << y << '\n';
  }
}

void save_graph_dir(const Graph& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_graph(g, dir / "edges.txt", dir / "features.txt", dir / "labels.txt");
}

}  // namespace saug
