// saug: selective structural augmentation for imbalanced graphs.
//
// Subcommands mirror the pipeline stages; each stage reads its inputs from a
// run directory written by the previous one, so any stage can be re-executed
// without recomputing upstream work.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "saug/checkpoint.hpp"
#include "saug/graph_io.hpp"
#include "saug/pipeline.hpp"
#include "saug/synthetic.hpp"

namespace fs = std::filesystem;
using namespace saug;

namespace {

RunConfig load_config_opt(const std::string& config_path) {
  return config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
}

Graph resolve_graph(const RunConfig& cfg, const std::string& graph_dir) {
  if (!graph_dir.empty()) {
    LoadOptions opts;
    opts.normalize_features = cfg.normalize_features;
    return load_graph_dir(graph_dir, opts);
  }
  return load_config_graph(cfg);
}

PageRankOptions pr_options(const RunConfig& cfg) {
  return {cfg.damping, cfg.pr_tol, cfg.pr_max_iter};
}

PartitionOptions partition_options(const RunConfig& cfg) {
  PartitionOptions p;
  p.hub_factor = cfg.hub_factor;
  p.tail_percent = cfg.tail_percent;
  return p;
}

NodePartition read_partition(const fs::path& file, const PageRankVector& pr) {
  std::ifstream f(file);
  if (!f) throw std::runtime_error("cannot open " + file.string());
  nlohmann::json j;
  f >> j;
  NodePartition part;
  part.hubs = j.at("hubs").get<std::vector<NodeId>>();
  part.tails = j.at("tails").get<std::vector<NodeId>>();
  part.hub_factor = j.at("K").get<double>();
  part.tail_fraction = j.at("tail_fraction").get<double>();
  part.pagerank = pr;
  return part;
}

PageRankVector read_pagerank(const fs::path& file) {
  std::ifstream f(file);
  if (!f) throw std::runtime_error("cannot open " + file.string());
  nlohmann::json j;
  f >> j;
  PageRankVector pr;
  pr.values = j.at("values").get<std::vector<double>>();
  pr.damping = j.at("damping").get<double>();
  pr.iterations_used = j.at("iterations").get<std::int64_t>();
  pr.residual = j.at("residual").get<double>();
  return pr;
}

void write_json_file(const nlohmann::json& j, const fs::path& file, int indent = -1) {
  std::ofstream f(file);
  if (!f) throw std::runtime_error("cannot write " + file.string());
  f << (indent >= 0 ? j.dump(indent) : j.dump()) << '\n';
}

void write_pr_json(const PageRankVector& pr, const fs::path& file) {
  write_json_file({{"values", pr.values},
                   {"damping", pr.damping},
                   {"iterations", pr.iterations_used},
                   {"residual", pr.residual},
                   {"converged", pr.converged}},
                  file);
}

void write_partition_file(const NodePartition& part, const fs::path& file) {
  write_json_file({{"hubs", part.hubs},
                   {"tails", part.tails},
                   {"K", part.hub_factor},
                   {"tail_fraction", part.tail_fraction}},
                  file);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SAug: selective structural augmentation for structurally imbalanced graphs"};
  app.require_subcommand(1);

  std::string config_path, graph_dir, run_dir, out_path;
  std::uint64_t seed = 1;

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset directory");
  NodeId synth_n = 300;
  std::int64_t synth_m = 2, synth_dx = 64;
  int synth_classes = 4;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  synth->add_option("--n", synth_n, "node count");
  synth->add_option("--m", synth_m, "attachment degree");
  synth->add_option("--d-x", synth_dx, "feature dimension");
  synth->add_option("--classes", synth_classes, "number of classes");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "output dataset directory")->required();

  // ---- pagerank ----
  auto* pagerank_cmd = app.add_subcommand("pagerank", "compute the PageRank vector");
  double damping = 0.85;
  pagerank_cmd->add_option("--graph", graph_dir, "dataset directory");
  pagerank_cmd->add_option("--config", config_path, "run config (JSON)");
  pagerank_cmd->add_option("--damping", damping, "damping factor xi")->capture_default_str();
  pagerank_cmd->add_option("--out", out_path, "output JSON path")->required();

  // ---- sample ----
  auto* sample_cmd = app.add_subcommand("sample", "partition nodes into hubs and tails");
  double opt_k = 2.0, opt_m = 30.0;
  std::string pr_path;
  sample_cmd->add_option("--graph", graph_dir, "dataset directory");
  sample_cmd->add_option("--config", config_path, "run config (JSON)");
  sample_cmd->add_option("--pr", pr_path, "precomputed pr.json (recomputed when absent)");
  sample_cmd->add_option("--K", opt_k, "hub factor")->capture_default_str();
  sample_cmd->add_option("--M", opt_m, "tail percent")->capture_default_str();
  sample_cmd->add_option("--out", out_path, "output JSON path")->required();

  // ---- pretrain ----
  auto* pretrain_cmd = app.add_subcommand("pretrain", "pretrain the two encoders");
  pretrain_cmd->add_option("--graph", graph_dir, "dataset directory");
  pretrain_cmd->add_option("--config", config_path, "run config (JSON)");
  pretrain_cmd->add_option("--run", run_dir, "run directory for artifacts")->required();
  pretrain_cmd->add_option("--seed", seed, "seed")->capture_default_str();

  // ---- augment ----
  auto* augment_cmd = app.add_subcommand("augment", "denoise hubs and discover tail neighbors");
  std::string emb_path, strategy;
  double opt_p = -1.0, opt_l = -1.0;
  std::int64_t opt_q = -1;
  augment_cmd->add_option("--graph", graph_dir, "dataset directory");
  augment_cmd->add_option("--config", config_path, "run config (JSON)");
  augment_cmd->add_option("--run", run_dir, "run directory for artifacts")->required();
  augment_cmd->add_option("--emb", emb_path, "embedding checkpoint (default <run>/embeddings.json)");
  augment_cmd->add_option("--strategy", strategy, "threshold | topQ");
  augment_cmd->add_option("--P", opt_p, "discovery threshold");
  augment_cmd->add_option("--Q", opt_q, "discovery topQ");
  augment_cmd->add_option("--L", opt_l, "hub drop threshold");
  augment_cmd->add_option("--seed", seed, "seed")->capture_default_str();

  // ---- generate ----
  auto* generate_cmd = app.add_subcommand("generate", "train the GAN and inject pseudo nodes");
  generate_cmd->add_option("--graph", graph_dir, "dataset directory");
  generate_cmd->add_option("--config", config_path, "run config (JSON)");
  generate_cmd->add_option("--run", run_dir, "run directory for artifacts")->required();
  generate_cmd->add_option("--seed", seed, "seed")->capture_default_str();

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "retrain the backbone on the augmented graph");
  train_cmd->add_option("--graph", graph_dir, "dataset directory");
  train_cmd->add_option("--config", config_path, "run config (JSON)");
  train_cmd->add_option("--run", run_dir, "run directory for artifacts")->required();
  train_cmd->add_option("--seed", seed, "seed")->capture_default_str();

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "evaluate the trained backbone");
  eval_cmd->add_option("--graph", graph_dir, "dataset directory");
  eval_cmd->add_option("--config", config_path, "run config (JSON)");
  eval_cmd->add_option("--run", run_dir, "run directory with backbone_model.json")->required();
  eval_cmd->add_option("--seed", seed, "seed")->capture_default_str();

  // ---- pipeline ----
  auto* pipeline_cmd = app.add_subcommand("pipeline", "run the full pipeline for every seed");
  bool no_artifacts = false;
  pipeline_cmd->add_option("--config", config_path, "run config (JSON)")->required();
  pipeline_cmd->add_flag("--no-artifacts", no_artifacts, "skip writing run directories");

  // ---- sweep ----
  auto* sweep_cmd = app.add_subcommand("sweep", "sweep one hyperparameter axis");
  std::string axis;
  std::vector<double> values;
  sweep_cmd->add_option("--config", config_path, "run config (JSON)")->required();
  sweep_cmd->add_option("--axis", axis, "K | M | L | P | Q")->required();
  sweep_cmd->add_option("--values", values, "axis values")->required()->delimiter(',');
  sweep_cmd->add_option("--out", out_path, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      Graph g = generate_powerlaw(synth_n, synth_m, synth_dx, synth_classes, synth_seed);
      save_graph_dir(g, synth_out);
      std::cout << "wrote " << synth_out << ": " << g.num_nodes() << " nodes, "
                << g.num_edges() << " edges\n";
      return 0;
    }

    RunConfig cfg = load_config_opt(config_path);

    if (*pagerank_cmd) {
      cfg.damping = damping;
      Graph g = resolve_graph(cfg, graph_dir);
      PageRankVector pr = pagerank(g, pr_options(cfg));
      write_pr_json(pr, out_path);
      std::cout << "pagerank: " << pr.iterations_used << " iterations, residual "
                << pr.residual << "\n";
      return 0;
    }

    if (*sample_cmd) {
      Graph g = resolve_graph(cfg, graph_dir);
      PageRankVector pr =
          pr_path.empty() ? pagerank(g, pr_options(cfg)) : read_pagerank(pr_path);
      PartitionOptions popts = partition_options(cfg);
      popts.hub_factor = opt_k;
      popts.tail_percent = opt_m;
      NodePartition part = partition_nodes(pr, popts);
      write_partition_file(part, out_path);
      std::cout << "sample: " << part.hubs.size() << " hubs, " << part.tails.size()
                << " tails\n";
      return 0;
    }

    if (*pretrain_cmd) {
      Graph base = resolve_graph(cfg, graph_dir);
      TaskContext ctx = prepare_task(cfg, seed, base);
      fs::create_directories(run_dir);
      PretrainResult pre = pretrain_encoders(
          ctx.work_graph, ctx.labeled_train,
          [&] {
            EncoderConfig c;
            c.hidden = {cfg.lp_hidden};
            c.out_dim = cfg.lp_out;
            c.agg = aggregator_from_string(cfg.backbone);
            c.dropout = cfg.dropout;
            c.lr = cfg.lr;
            c.weight_decay = cfg.weight_decay;
            c.reg = cfg.lambda;
            c.epochs = cfg.epochs;
            return c;
          }(),
          [&] {
            EncoderConfig c;
            c.hidden.assign(cfg.nc_layers - 1, cfg.nc_hidden);
            c.out_dim = ctx.work_graph.num_classes();
            c.agg = aggregator_from_string(cfg.backbone);
            c.dropout = cfg.dropout;
            c.lr = cfg.lr;
            c.weight_decay = cfg.weight_decay;
            c.reg = cfg.mu;
            c.epochs = cfg.epochs;
            return c;
          }(),
          seed);
      save_model(pre.link_model, fs::path(run_dir) / "lp_model.json");
      save_model(pre.label_model, fs::path(run_dir) / "nc_model.json");
      save_embeddings(pre.embeddings, fs::path(run_dir) / "embeddings.json");
      std::cout << "pretrain: wrote encoders and embeddings to " << run_dir << "\n";
      return 0;
    }

    if (*augment_cmd) {
      Graph base = resolve_graph(cfg, graph_dir);
      TaskContext ctx = prepare_task(cfg, seed, base);
      const Graph& g = ctx.work_graph;
      // reuse the sampled partition when the run directory carries one
      const fs::path part_file = fs::path(run_dir) / "partition.json";
      const fs::path pr_file = fs::path(run_dir) / "pr.json";
      PageRankVector pr =
          fs::exists(pr_file) ? read_pagerank(pr_file) : pagerank(g, pr_options(cfg));
      NodePartition part = fs::exists(part_file)
                               ? read_partition(part_file, pr)
                               : partition_nodes(pr, partition_options(cfg));
      const fs::path emb_file =
          emb_path.empty() ? fs::path(run_dir) / "embeddings.json" : fs::path(emb_path);
      EmbeddingPair emb = load_embeddings(emb_file);
      AugmentConfig acfg = cfg.augment;
      if (!strategy.empty())
        acfg.strategy = strategy == "topQ" ? AugmentConfig::Strategy::kTopQ
                                           : AugmentConfig::Strategy::kThreshold;
      if (opt_p > 0.0) acfg.threshold_p = opt_p;
      if (opt_q > 0) acfg.top_q = opt_q;
      if (opt_l > 0.0) acfg.hub_drop_threshold = opt_l;
      auto [g_prime, plan] = augment(g, emb, part, acfg, ctx.protect);
      fs::create_directories(run_dir);
      save_plan(plan, fs::path(run_dir) / "plan.jsonl");
      save_graph_dir(g_prime, fs::path(run_dir) / "gprime");
      std::cout << "augment: removed " << plan.removals.size() << ", added "
                << plan.additions.size() << " edges\n";
      return 0;
    }

    if (*generate_cmd) {
      Graph base = resolve_graph(cfg, graph_dir);
      TaskContext ctx = prepare_task(cfg, seed, base);
      LoadOptions lopts;
      lopts.normalize_features = false;  // gprime was saved post-normalization
      Graph g_prime = load_graph_dir(fs::path(run_dir) / "gprime", lopts);
      NodePartition part2 =
          partition_nodes(pagerank(g_prime, pr_options(cfg)), partition_options(cfg));
      SimilarTargets targets = select_similar_neighbors(g_prime, part2.tails);
      GenConfig gcfg = cfg.gen;
      gcfg.seed = seed * 0x9e3779b97f4a7c15ull + 21;
      GanResult gan = train_generative(g_prime, targets, ctx.labeled_train, gcfg);
      auto [g_tilde, manifest] = inject_pseudo_nodes(g_prime, gan.generator, targets, gcfg);
      save_generator(gan.generator, fs::path(run_dir) / "generator.json");
      save_model(gan.discriminator, fs::path(run_dir) / "discriminator.json");
      save_manifest(manifest, fs::path(run_dir) / "pseudo_manifest.jsonl");
      save_graph_dir(g_tilde, fs::path(run_dir) / "gtilde");
      std::cout << "generate: injected " << manifest.size() << " pseudo nodes\n";
      return 0;
    }

    if (*train_cmd || *eval_cmd) {
      Graph base = resolve_graph(cfg, graph_dir);
      TaskContext ctx = prepare_task(cfg, seed, base);
      LoadOptions lopts;
      lopts.normalize_features = false;
      Graph g_tilde = ctx.work_graph;
      for (const char* name : {"gtilde", "gprime"}) {
        const fs::path dir = fs::path(run_dir) / name;
        if (fs::exists(dir / "edges.txt")) {
          g_tilde = load_graph_dir(dir, lopts);
          break;
        }
      }
      if (*train_cmd) {
        BackboneResult backbone = train_backbone(g_tilde, cfg, ctx, seed);
        save_model(backbone.model, fs::path(run_dir) / "backbone_model.json");
        std::cout << "train: wrote backbone_model.json (" << backbone.trace.epochs_run
                  << " epochs)\n";
        return 0;
      }
      GnnModel model = load_model(fs::path(run_dir) / "backbone_model.json");
      EvalOutcome out = evaluate_backbone(model, g_tilde, cfg, ctx);
      nlohmann::json j;
      if (out.micro_f1 >= 0.0) {
        j["macro_f1"] = out.macro_f1;
        j["micro_f1"] = out.micro_f1;
      }
      if (out.auc >= 0.0) j["auc"] = out.auc;
      write_json_file(j, fs::path(run_dir) / "metrics.json", 2);
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*pipeline_cmd) {
      ExperimentSummary summary = run_experiment(cfg, !no_artifacts);
      nlohmann::json j;
      if (!summary.per_seed.empty() && summary.per_seed.front().micro_f1 >= 0.0) {
        j["macro_f1"] = {{"mean", summary.macro.mean}, {"std", summary.macro.std}};
        j["micro_f1"] = {{"mean", summary.micro.mean}, {"std", summary.micro.std}};
      }
      if (!summary.per_seed.empty() && summary.per_seed.front().auc >= 0.0)
        j["auc"] = {{"mean", summary.auc.mean}, {"std", summary.auc.std}};
      nlohmann::json seeds_json = nlohmann::json::array();
      for (const auto& r : summary.per_seed) seeds_json.push_back(r.to_json(false));
      j["runs"] = seeds_json;
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*sweep_cmd) {
      const std::string csv = sweep(cfg, axis, values);
      if (out_path.empty()) {
        std::cout << csv;
      } else {
        std::ofstream f(out_path);
        f << csv;
        std::cout << "wrote " << out_path << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "saug: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
