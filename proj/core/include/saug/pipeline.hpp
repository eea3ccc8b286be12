#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "saug/augment.hpp"
#include "saug/encoders.hpp"
#include "saug/graph.hpp"
#include "saug/metrics.hpp"
#include "saug/pagerank.hpp"
#include "saug/pseudo_gen.hpp"
#include "saug/splits.hpp"

namespace saug {

struct SyntheticSpec {
  NodeId n = 300;
  std::int64_t m = 2;
  std::int64_t d_x = 64;
  int num_classes = 4;
  std::uint64_t seed = 1;
};

enum class Task { kTailNc, kOverallNc, kLinkPred };
Task task_from_string(const std::string& s);
std::string to_string(Task t);

/// Everything one experiment needs. Defaults follow the shipped
/// configuration: damping 0.85, K=2, M=30, L=0.1, lr 0.01, weight decay
/// 0.0005, regularization 0.0001, classifier 3x32 layers, link predictor
/// 32 -> 16.
struct RunConfig {
  // dataset: a directory in the canonical format, or a synthetic spec
  std::string dataset_dir;
  SyntheticSpec synthetic;
  bool normalize_features = true;

  // sampling
  double damping = 0.85;
  double pr_tol = 1e-10;
  std::int64_t pr_max_iter = 200;
  double hub_factor = 2.0;     // K
  double tail_percent = 30.0;  // M

  AugmentConfig augment;  // L, strategy (P / Q), chunk_rows
  GenConfig gen;

  // backbone and training
  std::string backbone = "gcn";  // gcn | sage-mean
  double lr = 0.01;
  double weight_decay = 5e-4;
  double lambda = 1e-4;  // link-predictor regularization
  double mu = 1e-4;      // classifier regularization
  double dropout = 0.5;
  std::int64_t epochs = 200;
  std::int64_t patience = 30;
  std::int64_t nc_hidden = 32;
  std::int64_t nc_layers = 3;
  std::int64_t lp_hidden = 32;
  std::int64_t lp_out = 16;

  // protocol
  Task task = Task::kTailNc;
  int labels_per_class = 10;       // tail protocol
  int std_labels_per_class = 20;   // overall protocol
  std::int64_t std_val_size = 500;
  std::int64_t std_test_size = 1000;
  bool strict_train_only_edits = true;

  // ablation toggles
  bool enable_denoise = true;
  bool enable_discover = true;
  bool enable_generate = true;

  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out_root;  // empty: $SAUG_RUN_ROOT, else ./runs

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;

  /// FNV-1a over the canonical serialization minus seeds and out_root:
  /// changes iff a semantically meaningful field changes.
  std::string config_hash() const;
  std::filesystem::path run_root() const;
};

struct StageStat {
  std::string stage;
  std::int64_t nodes = 0;
  std::int64_t edges = 0;
};

struct RunReport {
  std::uint64_t seed = 0;
  std::string config_hash;
  double macro_f1 = -1.0;
  double micro_f1 = -1.0;
  double auc = -1.0;
  std::vector<double> per_class_f1;
  std::vector<StageStat> stages;
  std::int64_t pr_iterations = 0;
  double pr_residual = 0.0;
  std::int64_t num_hubs = 0;
  std::int64_t num_tails = 0;
  std::int64_t removed_edges = 0;
  std::int64_t added_edges = 0;
  std::int64_t pseudo_nodes = 0;
  double wall_seconds = 0.0;
  nlohmann::json config_echo;

  nlohmann::json to_json(bool include_wall_clock = true) const;
};

/// Loads the configured dataset (or generates the synthetic one).
Graph load_config_graph(const RunConfig& cfg);

/// Task realization for one seed: the working graph (the train-edge graph
/// for link prediction), the semi-supervised label mask, the evaluation node
/// sets, and the protected-node mask for strict train-only edits. Splits are
/// deterministic in (config, seed), so stages can be re-executed
/// independently.
struct TaskContext {
  Graph work_graph;
  std::vector<std::int64_t> labeled_train;
  std::vector<NodeId> val_nodes, test_nodes;
  std::optional<LinkSplit> link;
  ProtectedMask protect;
};

TaskContext prepare_task(const RunConfig& cfg, std::uint64_t seed, const Graph& base);

struct BackboneResult {
  GnnModel model;
  TrainTrace trace;
};

/// Retrains the task backbone (classifier for the nc tasks, link encoder for
/// link prediction) on the given graph.
BackboneResult train_backbone(const Graph& g_tilde, const RunConfig& cfg,
                              const TaskContext& ctx, std::uint64_t seed);

struct EvalOutcome {
  double macro_f1 = -1.0;
  double micro_f1 = -1.0;
  double auc = -1.0;
  std::vector<double> per_class_f1;
};

EvalOutcome evaluate_backbone(const GnnModel& model, const Graph& g_tilde,
                              const RunConfig& cfg, const TaskContext& ctx);

/// Full pipeline for one seed: load -> pagerank -> partition -> pretrain ->
/// denoise/discover -> re-sample tails -> generate -> retrain -> evaluate.
/// Artifacts (pr.json, partition.json, plan.jsonl, manifests, checkpoints,
/// report.json, traces) land under out_dir when given. A stage failure
/// rethrows with the stage name prefixed; earlier artifacts stay on disk.
RunReport run_pipeline(const RunConfig& cfg, std::uint64_t seed,
                       const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct ExperimentSummary {
  std::vector<RunReport> per_seed;
  MeanStd macro, micro, auc;
};

/// One pipeline per seed (sequential), aggregated as mean and sample std.
/// With write_artifacts, each seed gets a run directory plus a
/// <hash>-summary.csv aggregate table under the run root.
ExperimentSummary run_experiment(const RunConfig& cfg, bool write_artifacts = false);

/// Table-row name for the configured toggle combination, mirroring the
/// usual ablation naming: baseline, gen_only, denoise, saug_thr[_wo_gen],
/// saug_top[_wo_gen].
std::string variant_name(const RunConfig& cfg);

/// Aggregate table: dataset x method x metric as CSV, one row per seed plus
/// mean and std rows.
std::string experiment_csv(const RunConfig& cfg, const ExperimentSummary& summary);

/// One run_pipeline per (value, seed); returns CSV rows
/// "axis,value,seed,macro_f1,micro_f1,auc" with header. Valid axes:
/// K, M, L, P, Q.
std::string sweep(const RunConfig& cfg, const std::string& axis,
                  const std::vector<double>& values);

}  // namespace saug
