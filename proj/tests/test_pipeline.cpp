#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "saug/checkpoint.hpp"
#include "saug/pipeline.hpp"

using namespace saug;
namespace fs = std::filesystem;

namespace {

RunConfig small_config() {
  RunConfig cfg;
  cfg.synthetic = {140, 2, 32, 3, 7};
  cfg.epochs = 40;
  cfg.patience = 0;  // fixed-length runs keep the test fast and exact
  cfg.gen.epochs = 30;
  cfg.gen.noise_dim = 6;
  cfg.gen.gen_hidden = 12;
  cfg.gen.dis_hidden = 8;
  cfg.seeds = {1};
  return cfg;
}

}  // namespace

TEST_CASE("config round-trips through JSON and hashes semantically") {
  RunConfig cfg = small_config();
  cfg.augment.strategy = AugmentConfig::Strategy::kTopQ;
  cfg.augment.top_q = 5;
  cfg.task = Task::kLinkPred;
  RunConfig back = RunConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());

  const std::string h = cfg.config_hash();
  RunConfig same = cfg;
  same.seeds = {9, 10};  // seeds are not semantic
  same.out_root = "/elsewhere";
  CHECK(same.config_hash() == h);
  RunConfig diff = cfg;
  diff.augment.top_q = 6;
  CHECK(diff.config_hash() != h);
  RunConfig diff2 = cfg;
  diff2.lr = 0.02;
  CHECK(diff2.config_hash() != h);
}

TEST_CASE("defaults carry the shipped configuration") {
  RunConfig cfg;
  CHECK(cfg.damping == 0.85);
  CHECK(cfg.hub_factor == 2.0);
  CHECK(cfg.tail_percent == 30.0);
  CHECK(cfg.augment.hub_drop_threshold == 0.1);
  CHECK(cfg.lr == 0.01);
  CHECK(cfg.weight_decay == 5e-4);
  CHECK(cfg.lambda == 1e-4);
  CHECK(cfg.mu == 1e-4);
  CHECK(cfg.nc_hidden == 32);
  CHECK(cfg.nc_layers == 3);
  CHECK(cfg.lp_hidden == 32);
  CHECK(cfg.lp_out == 16);
}

TEST_CASE("toggles all off reproduce the plain backbone run") {
  RunConfig off = small_config();
  off.enable_denoise = off.enable_discover = off.enable_generate = false;
  RunReport a = run_pipeline(off, 3);
  // the plain backbone: same split, same training path on the raw graph
  Graph base = load_config_graph(off);
  TaskContext ctx = prepare_task(off, 3, base);
  BackboneResult backbone = train_backbone(ctx.work_graph, off, ctx, 3);
  EvalOutcome ref = evaluate_backbone(backbone.model, ctx.work_graph, off, ctx);
  CHECK(a.micro_f1 == ref.micro_f1);
  CHECK(a.macro_f1 == ref.macro_f1);
  CHECK(a.removed_edges == 0);
  CHECK(a.added_edges == 0);
  CHECK(a.pseudo_nodes == 0);
}

TEST_CASE("pipeline is deterministic: identical reports modulo wall clock") {
  RunConfig cfg = small_config();
  RunReport a = run_pipeline(cfg, 5);
  RunReport b = run_pipeline(cfg, 5);
  CHECK(a.to_json(false) == b.to_json(false));
}

TEST_CASE("pipeline writes a complete artifact set") {
  RunConfig cfg = small_config();
  const fs::path dir = fs::temp_directory_path() / "saug_run_artifacts";
  fs::remove_all(dir);
  RunReport r = run_pipeline(cfg, 2, dir);
  for (const char* f : {"config.json", "pr.json", "partition.json", "plan.jsonl",
                        "resampled_partition.json", "pseudo_manifest.jsonl",
                        "lp_model.json", "nc_model.json", "embeddings.json",
                        "generator.json", "backbone_model.json", "report.json",
                        "lp_trace.csv", "nc_trace.csv", "train_trace.csv"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / f));
  }
  CHECK(r.micro_f1 >= 0.0);
  CHECK(r.pseudo_nodes > 0);

  // checkpoints reload to the same values
  GnnModel lp = load_model(dir / "lp_model.json");
  GnnModel lp2 = load_model(dir / "lp_model.json");
  auto s1 = lp.snapshot_parameters();
  auto s2 = lp2.snapshot_parameters();
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i] == s2[i]);
  EmbeddingPair empb = load_embeddings(dir / "embeddings.json");
  CHECK(empb.z_link.rows() == 140);

  // generator checkpoints reproduce outputs exactly
  Generator gen = load_generator(dir / "generator.json");
  Generator gen2 = load_generator(dir / "generator.json");
  std::mt19937_64 za(5), zb(5);
  CHECK(gen.generate(gen.sample_noise(4, za)) == gen2.generate(gen2.sample_noise(4, zb)));
  CHECK(gen.lo().size() == static_cast<std::size_t>(gen.feature_dim()));
}

TEST_CASE("pipeline stage failures carry the stage name") {
  RunConfig cfg = small_config();
  cfg.dataset_dir = "/nonexistent/dataset";
  try {
    run_pipeline(cfg, 1);
    FAIL("expected a throw");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("stage load") != std::string::npos);
  }

  RunConfig bad = small_config();
  bad.tail_percent = 1e-6;  // selects zero tails
  try {
    run_pipeline(bad, 1);
    FAIL("expected a throw");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("stage") != std::string::npos);
  }
}

TEST_CASE("overall-classification task and the sage backbone run end to end") {
  RunConfig cfg = small_config();
  cfg.task = Task::kOverallNc;
  cfg.synthetic.n = 300;
  cfg.std_labels_per_class = 20;
  cfg.std_val_size = 60;
  cfg.std_test_size = 100;
  RunReport r = run_pipeline(cfg, 1);
  CHECK(r.micro_f1 >= 0.0);
  CHECK(r.micro_f1 <= 1.0);

  RunConfig sage = small_config();
  sage.backbone = "sage-mean";
  RunReport rs = run_pipeline(sage, 1);
  CHECK(rs.micro_f1 >= 0.0);
}

TEST_CASE("link prediction pipeline reports AUC and respects the split") {
  RunConfig cfg = small_config();
  cfg.task = Task::kLinkPred;
  cfg.synthetic.n = 160;
  RunReport r = run_pipeline(cfg, 4);
  CHECK(r.auc >= 0.0);
  CHECK(r.auc <= 1.0);
  CHECK(r.micro_f1 < 0.0);  // not a classification run
}

TEST_CASE("run_experiment aggregates mean and sample std across seeds") {
  RunConfig cfg = small_config();
  cfg.seeds = {1, 2, 3};
  ExperimentSummary s = run_experiment(cfg);
  REQUIRE(s.per_seed.size() == 3);
  double mn = (s.per_seed[0].micro_f1 + s.per_seed[1].micro_f1 + s.per_seed[2].micro_f1) / 3.0;
  CHECK(s.micro.mean == doctest::Approx(mn).epsilon(1e-12));

  RunConfig one = small_config();
  one.seeds = {1};
  ExperimentSummary s1 = run_experiment(one);
  CHECK(s1.micro.std == 0.0);

  RunConfig none = small_config();
  none.seeds = {};
  CHECK_THROWS_AS(run_experiment(none), std::invalid_argument);
}

TEST_CASE("variant names mirror the ablation rows") {
  RunConfig cfg;
  CHECK(variant_name(cfg) == "saug_thr");
  cfg.augment.strategy = AugmentConfig::Strategy::kTopQ;
  CHECK(variant_name(cfg) == "saug_top");
  cfg.enable_generate = false;
  CHECK(variant_name(cfg) == "saug_top_wo_gen");
  cfg.enable_discover = false;
  CHECK(variant_name(cfg) == "denoise");
  cfg.enable_denoise = false;
  CHECK(variant_name(cfg) == "baseline");
  cfg.enable_generate = true;
  CHECK(variant_name(cfg) == "gen_only");
}

TEST_CASE("experiment summary lands in an aggregate CSV next to the run dirs") {
  RunConfig cfg = small_config();
  cfg.seeds = {1, 2};
  cfg.out_root = (fs::temp_directory_path() / "saug_summary_csv").string();
  fs::remove_all(cfg.out_root);
  ExperimentSummary s = run_experiment(cfg, /*write_artifacts=*/true);
  const fs::path csv_path = fs::path(cfg.out_root) / (cfg.config_hash() + "-summary.csv");
  REQUIRE(fs::exists(csv_path));
  std::ifstream f(csv_path);
  std::string csv((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  CHECK(csv.find("dataset,task,method,seed,macro_f1,micro_f1,auc") == 0);
  CHECK(csv.find("synthetic,tail_nc,saug_thr,1,") != std::string::npos);
  CHECK(csv.find(",mean,") != std::string::npos);
  CHECK(csv.find(",std,") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 + 2);  // header + seeds + aggregates
  // the CSV mean matches the in-memory aggregate
  CHECK(csv.find(std::to_string(s.micro.mean).substr(0, 8)) != std::string::npos);
}

TEST_CASE("sweep emits one CSV row per (value, seed) and validates the axis") {
  RunConfig cfg = small_config();
  cfg.epochs = 15;
  cfg.gen.epochs = 10;
  cfg.seeds = {1, 2};
  const std::string csv = sweep(cfg, "Q", {2, 4});
  std::size_t rows = std::count(csv.begin(), csv.end(), '\n');
  CHECK(rows == 1 + 2 * 2);  // header + values x seeds
  CHECK(csv.find("axis,value,seed,macro_f1,micro_f1,auc") == 0);
  CHECK(csv.find("Q,2,1,") != std::string::npos);
  CHECK(csv.find("Q,4,2,") != std::string::npos);

  CHECK_THROWS_AS(sweep(cfg, "XX", {1}), std::invalid_argument);
  CHECK_THROWS_AS(sweep(cfg, "K", {}), std::invalid_argument);
}

TEST_CASE("strict train-only edits shield the val/test subgraph") {
  RunConfig cfg = small_config();
  cfg.synthetic.n = 160;
  const fs::path dir = fs::temp_directory_path() / "saug_strict_run";
  fs::remove_all(dir);
  run_pipeline(cfg, 8, dir);

  Graph base = load_config_graph(cfg);
  TaskContext ctx = prepare_task(cfg, 8, base);
  REQUIRE_FALSE(ctx.protect.empty());
  EdgeEditPlan plan = load_plan(dir / "plan.jsonl");
  for (const auto& e : plan.removals) CHECK_FALSE((ctx.protect[e.u] && ctx.protect[e.v]));
  for (const auto& e : plan.additions) CHECK_FALSE((ctx.protect[e.u] && ctx.protect[e.v]));
}
