#pragma once

#include <filesystem>
#include <string>

#include "saug/graph.hpp"

namespace saug {

struct LoadOptions {
  /// Row-normalize features to unit L1 norm (skipped for rows already
  /// summing to 1, so loading a saved graph is bit-exact).
  bool normalize_features = true;
};

struct LoadReport {
  std::int64_t dropped_self_loops = 0;
  std::int64_t merged_duplicates = 0;
};

/// Reads the canonical three-file format:
///   edge file:    one "u v" pair per line (whitespace separated ids)
///   feature file: one row per node, whitespace-separated decimals
///   label file:   one integer per line, -1 = unlabeled
/// Duplicate and reversed edge lines are merged; self loops dropped (counted
/// in the report). Throws on out-of-range ids, row-count mismatch, or a
/// non-rectangular feature matrix.
Graph load_graph(const std::filesystem::path& edge_file,
                 const std::filesystem::path& feature_file,
                 const std::filesystem::path& label_file,
                 const LoadOptions& opts = {}, LoadReport* report = nullptr);

/// Convenience: loads <dir>/edges.txt, <dir>/features.txt, <dir>/labels.txt.
Graph load_graph_dir(const std::filesystem::path& dir, const LoadOptions& opts = {},
                     LoadReport* report = nullptr);

/// Writes the canonical form (edges u < v sorted, shortest round-trip decimal
/// formatting). save then load (with normalization skipped or idempotent)
/// reproduces the graph exactly.
void save_graph(const Graph& g, const std::filesystem::path& edge_file,
                const std::filesystem::path& feature_file,
                const std::filesystem::path& label_file);

void save_graph_dir(const Graph& g, const std::filesystem::path& dir);

}  // namespace saug
