#include "saug/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "saug/checkpoint.hpp"
#include "saug/graph_io.hpp"
#include "saug/splits.hpp"
#include "saug/synthetic.hpp"

namespace saug {

Task task_from_string(const std::string& s) {
  if (s == "tail_nc") return Task::kTailNc;
  if (s == "overall_nc") return Task::kOverallNc;
  if (s == "link_pred") return Task::kLinkPred;
  throw std::invalid_argument("unknown task '" + s + "'");
}

std::string to_string(Task t) {
  switch (t) {
    case Task::kTailNc: return "tail_nc";
    case Task::kOverallNc: return "overall_nc";
    default: return "link_pred";
  }
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["dataset_dir"] = dataset_dir;
  j["synthetic"] = {{"n", synthetic.n},
                    {"m", synthetic.m},
                    {"d_x", synthetic.d_x},
                    {"num_classes", synthetic.num_classes},
                    {"seed", synthetic.seed}};
  j["normalize_features"] = normalize_features;
  j["damping"] = damping;
  j["pr_tol"] = pr_tol;
  j["pr_max_iter"] = pr_max_iter;
  j["hub_factor"] = hub_factor;
  j["tail_percent"] = tail_percent;
  j["augment"] = {{"L", augment.hub_drop_threshold},
                  {"strategy",
                   augment.strategy == AugmentConfig::Strategy::kThreshold ? "threshold" : "topQ"},
                  {"P", augment.threshold_p},
                  {"Q", augment.top_q},
                  {"chunk_rows", augment.chunk_rows}};
  j["gen"] = {{"noise_dim", gen.noise_dim},     {"gen_hidden", gen.gen_hidden},
              {"gen_layers", gen.gen_layers},   {"alpha", gen.alpha},
              {"beta", gen.beta},               {"d_steps_per_g", gen.d_steps_per_g},
              {"epochs", gen.epochs},           {"adv_weight", gen.adv_weight},
              {"dis_hidden", gen.dis_hidden},   {"lr", gen.lr}};
  j["backbone"] = backbone;
  j["lr"] = lr;
  j["weight_decay"] = weight_decay;
  j["lambda"] = lambda;
  j["mu"] = mu;
  j["dropout"] = dropout;
  j["epochs"] = epochs;
  j["patience"] = patience;
  j["nc_hidden"] = nc_hidden;
  j["nc_layers"] = nc_layers;
  j["lp_hidden"] = lp_hidden;
  j["lp_out"] = lp_out;
  j["task"] = to_string(task);
  j["labels_per_class"] = labels_per_class;
  j["std_labels_per_class"] = std_labels_per_class;
  j["std_val_size"] = std_val_size;
  j["std_test_size"] = std_test_size;
  j["strict_train_only_edits"] = strict_train_only_edits;
  j["enable_denoise"] = enable_denoise;
  j["enable_discover"] = enable_discover;
  j["enable_generate"] = enable_generate;
  j["seeds"] = seeds;
  j["out_root"] = out_root;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("dataset_dir", c.dataset_dir);
  if (j.contains("synthetic")) {
    const auto& s = j.at("synthetic");
    c.synthetic.n = s.value("n", c.synthetic.n);
    c.synthetic.m = s.value("m", c.synthetic.m);
    c.synthetic.d_x = s.value("d_x", c.synthetic.d_x);
    c.synthetic.num_classes = s.value("num_classes", c.synthetic.num_classes);
    c.synthetic.seed = s.value("seed", c.synthetic.seed);
  }
  get("normalize_features", c.normalize_features);
  get("damping", c.damping);
  get("pr_tol", c.pr_tol);
  get("pr_max_iter", c.pr_max_iter);
  get("hub_factor", c.hub_factor);
  get("tail_percent", c.tail_percent);
  if (j.contains("augment")) {
    const auto& a = j.at("augment");
    c.augment.hub_drop_threshold = a.value("L", c.augment.hub_drop_threshold);
    if (a.contains("strategy"))
      c.augment.strategy = a.at("strategy") == "topQ" ? AugmentConfig::Strategy::kTopQ
                                                      : AugmentConfig::Strategy::kThreshold;
    c.augment.threshold_p = a.value("P", c.augment.threshold_p);
    c.augment.top_q = a.value("Q", c.augment.top_q);
    c.augment.chunk_rows = a.value("chunk_rows", c.augment.chunk_rows);
  }
  if (j.contains("gen")) {
    const auto& g = j.at("gen");
    c.gen.noise_dim = g.value("noise_dim", c.gen.noise_dim);
    c.gen.gen_hidden = g.value("gen_hidden", c.gen.gen_hidden);
    c.gen.gen_layers = g.value("gen_layers", c.gen.gen_layers);
    c.gen.alpha = g.value("alpha", c.gen.alpha);
    c.gen.beta = g.value("beta", c.gen.beta);
    c.gen.d_steps_per_g = g.value("d_steps_per_g", c.gen.d_steps_per_g);
    c.gen.epochs = g.value("epochs", c.gen.epochs);
    c.gen.adv_weight = g.value("adv_weight", c.gen.adv_weight);
    c.gen.dis_hidden = g.value("dis_hidden", c.gen.dis_hidden);
    c.gen.lr = g.value("lr", c.gen.lr);
  }
  get("backbone", c.backbone);
  get("lr", c.lr);
  get("weight_decay", c.weight_decay);
  get("lambda", c.lambda);
  get("mu", c.mu);
  get("dropout", c.dropout);
  get("epochs", c.epochs);
  get("patience", c.patience);
  get("nc_hidden", c.nc_hidden);
  get("nc_layers", c.nc_layers);
  get("lp_hidden", c.lp_hidden);
  get("lp_out", c.lp_out);
  if (j.contains("task")) c.task = task_from_string(j.at("task").get<std::string>());
  get("labels_per_class", c.labels_per_class);
  get("std_labels_per_class", c.std_labels_per_class);
  get("std_val_size", c.std_val_size);
  get("std_test_size", c.std_test_size);
  get("strict_train_only_edits", c.strict_train_only_edits);
  get("enable_denoise", c.enable_denoise);
  get("enable_discover", c.enable_discover);
  get("enable_generate", c.enable_generate);
  get("seeds", c.seeds);
  get("out_root", c.out_root);
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream f(file);
  if (!f) throw std::runtime_error("cannot open config " + file.string());
  nlohmann::json j;
  f >> j;
  return from_json(j);
}

void RunConfig::save(const std::filesystem::path& file) const {
  std::ofstream f(file);
  if (!f) throw std::runtime_error("cannot write config " + file.string());
  f << to_json().dump(2) << '\n';
}

std::string RunConfig::config_hash() const {
  nlohmann::json j = to_json();
  j.erase("seeds");
  j.erase("out_root");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 16);
}

std::filesystem::path RunConfig::run_root() const {
  if (!out_root.empty()) return out_root;
  if (const char* env = std::getenv("SAUG_RUN_ROOT")) return env;
  return "runs";
}

nlohmann::json RunReport::to_json(bool include_wall_clock) const {
  nlohmann::json j;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  nlohmann::json metrics;
  if (micro_f1 >= 0.0) {
    metrics["macro_f1"] = macro_f1;
    metrics["micro_f1"] = micro_f1;
    metrics["per_class_f1"] = per_class_f1;
  }
  if (auc >= 0.0) metrics["auc"] = auc;
  j["metrics"] = metrics;
  nlohmann::json stages_json = nlohmann::json::array();
  for (const auto& s : stages)
    stages_json.push_back({{"stage", s.stage}, {"nodes", s.nodes}, {"edges", s.edges}});
  j["stages"] = stages_json;
  j["pagerank"] = {{"iterations", pr_iterations}, {"residual", pr_residual}};
  j["partition"] = {{"hubs", num_hubs}, {"tails", num_tails}};
  j["edits"] = {{"removed_edges", removed_edges},
                {"added_edges", added_edges},
                {"pseudo_nodes", pseudo_nodes}};
  if (include_wall_clock) j["wall_seconds"] = wall_seconds;
  j["config"] = config_echo;
  return j;
}

Graph load_config_graph(const RunConfig& cfg) {
  if (!cfg.dataset_dir.empty()) {
    LoadOptions opts;
    opts.normalize_features = cfg.normalize_features;
    return load_graph_dir(cfg.dataset_dir, opts);
  }
  return generate_powerlaw(cfg.synthetic.n, cfg.synthetic.m, cfg.synthetic.d_x,
                           cfg.synthetic.num_classes, cfg.synthetic.seed);
}

namespace {

struct StageGuard {
  const char* stage;
  template <typename F>
  auto operator()(F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const std::exception& e) {
      throw std::runtime_error("stage " + std::string(stage) + ": " + e.what());
    }
  }
};

EncoderConfig make_lp_config(const RunConfig& cfg) {
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
}

EncoderConfig make_nc_config(const RunConfig& cfg, int num_classes) {
  EncoderConfig c;
  c.hidden.assign(cfg.nc_layers - 1, cfg.nc_hidden);
  c.out_dim = num_classes;
  c.agg = aggregator_from_string(cfg.backbone);
  c.dropout = cfg.dropout;
  c.lr = cfg.lr;
  c.weight_decay = cfg.weight_decay;
  c.reg = cfg.mu;
  c.epochs = cfg.epochs;
  return c;
}

std::vector<std::int64_t> all_labeled_rows(const Graph& g) {
  std::vector<std::int64_t> rows;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (g.labels()[v] != kUnlabeled) rows.push_back(v);
  return rows;
}

void write_trace_csv(const TrainTrace& trace, const std::filesystem::path& file) {
  std::ofstream f(file);
  f << "epoch,train_loss,val_metric\n";
  for (std::size_t e = 0; e < trace.train_loss.size(); ++e) {
    f << e << ',' << trace.train_loss[e] << ',';
    if (e < trace.val_metric.size()) f << trace.val_metric[e];
    f << '\n';
  }
}

void write_pagerank_json(const PageRankVector& pr, const std::filesystem::path& file) {
  nlohmann::json j{{"values", pr.values},
                   {"damping", pr.damping},
                   {"iterations", pr.iterations_used},
                   {"residual", pr.residual},
                   {"converged", pr.converged}};
  std::ofstream f(file);
  f << j.dump() << '\n';
}

void write_partition_json(const NodePartition& part, const std::filesystem::path& file) {
  nlohmann::json j{{"hubs", part.hubs},
                   {"tails", part.tails},
                   {"K", part.hub_factor},
                   {"tail_fraction", part.tail_fraction}};
  std::ofstream f(file);
  f << j.dump() << '\n';
}

double edge_bce_eval(const Matrix& z, const std::vector<EdgePair>& pos,
                     const std::vector<EdgePair>& neg) {
  auto dot = [&](const EdgePair& e) {
    double s = 0.0;
    for (std::int64_t j = 0; j < z.cols(); ++j) s += z(e.first, j) * z(e.second, j);
    return s;
  };
  double total = 0.0;
  for (const auto& e : pos)
    total += -std::log(std::clamp(ad::sigmoid(dot(e)), ad::kProbEps, 1.0));
  for (const auto& e : neg)
    total += -std::log(std::clamp(1.0 - ad::sigmoid(dot(e)), ad::kProbEps, 1.0));
  return total / static_cast<double>(pos.size() + neg.size());
}

double auc_eval(const Matrix& z, const std::vector<EdgePair>& pos,
                const std::vector<EdgePair>& neg) {
  std::vector<double> scores;
  std::vector<int> labels;
  auto dot = [&](const EdgePair& e) {
    double s = 0.0;
    for (std::int64_t j = 0; j < z.cols(); ++j) s += z(e.first, j) * z(e.second, j);
    return ad::sigmoid(s);
  };
  for (const auto& e : pos) {
    scores.push_back(dot(e));
    labels.push_back(1);
  }
  for (const auto& e : neg) {
    scores.push_back(dot(e));
    labels.push_back(0);
  }
  return auc_score(scores, labels);
}

}  // namespace

TaskContext prepare_task(const RunConfig& cfg, std::uint64_t seed, const Graph& base) {
  TaskContext ctx;
  switch (cfg.task) {
    case Task::kLinkPred: {
      ctx.link = make_link_split(base, seed);
      ctx.work_graph = ctx.link->train_graph;
      ctx.labeled_train = all_labeled_rows(ctx.work_graph);
      break;
    }
    case Task::kTailNc: {
      ctx.work_graph = base;
      PageRankOptions pr_opts{cfg.damping, cfg.pr_tol, cfg.pr_max_iter};
      PartitionOptions part_opts;
      part_opts.hub_factor = cfg.hub_factor;
      part_opts.tail_percent = cfg.tail_percent;
      const NodePartition part = partition_nodes(pagerank(base, pr_opts), part_opts);
      TailSplit split = make_tail_split(base, part, cfg.labels_per_class, seed);
      ctx.labeled_train = std::move(split.labeled_train);
      ctx.val_nodes = std::move(split.val_nodes);
      ctx.test_nodes = std::move(split.test_nodes);
      break;
    }
    case Task::kOverallNc: {
      ctx.work_graph = base;
      StandardSplit split = make_standard_split(base, cfg.std_labels_per_class,
                                                cfg.std_val_size, cfg.std_test_size, seed);
      ctx.labeled_train = std::move(split.labeled_train);
      ctx.val_nodes = std::move(split.val_nodes);
      ctx.test_nodes = std::move(split.test_nodes);
      break;
    }
  }
  if (cfg.strict_train_only_edits && cfg.task != Task::kLinkPred) {
    ctx.protect.assign(ctx.work_graph.num_nodes(), 0);
    for (NodeId v : ctx.val_nodes) ctx.protect[v] = 1;
    for (NodeId v : ctx.test_nodes) ctx.protect[v] = 1;
  }
  return ctx;
}

BackboneResult train_backbone(const Graph& g_tilde, const RunConfig& cfg,
                              const TaskContext& ctx, std::uint64_t seed) {
  BackboneResult out;
  if (cfg.task == Task::kLinkPred) {
    const EncoderConfig lp_cfg = make_lp_config(cfg);
    GraphOps ops = GraphOps::build(g_tilde, lp_cfg.agg == Aggregator::kSageMean);
    GnnModel model(lp_cfg.layer_specs(g_tilde.features().cols()), lp_cfg.dropout,
                   seed * 0x9e3779b97f4a7c15ull + 31);
    std::mt19937_64 drop_rng(seed * 0x9e3779b97f4a7c15ull + 32);
    std::mt19937_64 neg_rng(seed * 0x9e3779b97f4a7c15ull + 33);
    auto params = model.parameters();
    const auto pos = g_tilde.edge_list();
    // negatives may hit pseudo nodes too; exclude every known positive
    EdgeKeySet exclude = ctx.link->all_pos_keys;
    for (auto [u, v] : pos) exclude.insert(edge_key(u, v));

    TrainOptions topts{cfg.epochs, cfg.lr, cfg.weight_decay, cfg.patience};
    ValidationFn validation = [&](std::int64_t) {
      const Matrix z = gnn_infer(model, ops);
      return edge_bce_eval(z, ctx.link->val_pos, ctx.link->val_neg);
    };
    out.trace = train(
        model,
        [&](std::int64_t) {
          ad::Tensor z = gnn_forward(model, ops, std::monostate{}, /*training=*/true, drop_rng);
          auto neg = sample_non_edges(g_tilde.num_nodes(),
                                      static_cast<std::int64_t>(pos.size()), exclude, neg_rng);
          return link_predictor_loss(z, pos, std::move(neg), params, cfg.lambda);
        },
        validation, topts);
    out.model = std::move(model);
    return out;
  }

  const EncoderConfig nc_cfg = make_nc_config(cfg, g_tilde.num_classes());
  GraphOps ops = GraphOps::build(g_tilde, nc_cfg.agg == Aggregator::kSageMean);
  GnnModel model(nc_cfg.layer_specs(g_tilde.features().cols()), nc_cfg.dropout,
                 seed * 0x9e3779b97f4a7c15ull + 11);
  std::mt19937_64 drop_rng(seed * 0x9e3779b97f4a7c15ull + 12);
  auto params = model.parameters();

  std::vector<std::int64_t> val_rows;
  for (NodeId v : ctx.val_nodes)
    if (g_tilde.labels()[v] != kUnlabeled) val_rows.push_back(v);

  TrainOptions topts{cfg.epochs, cfg.lr, cfg.weight_decay, cfg.patience};
  std::optional<ValidationFn> validation;
  if (!val_rows.empty())
    validation = [&](std::int64_t) {
      const Matrix z = gnn_infer(model, ops);
      return ad::masked_softmax_ce(ad::Tensor::constant(z), g_tilde.labels(), val_rows).item();
    };
  out.trace = train(
      model,
      [&](std::int64_t) {
        ad::Tensor z = gnn_forward(model, ops, std::monostate{}, /*training=*/true, drop_rng);
        return classifier_loss(z, g_tilde.labels(), ctx.labeled_train, params, cfg.mu);
      },
      validation, topts);
  out.model = std::move(model);
  return out;
}

EvalOutcome evaluate_backbone(const GnnModel& model, const Graph& g_tilde,
                              const RunConfig& cfg, const TaskContext& ctx) {
  EvalOutcome out;
  const bool sage = aggregator_from_string(cfg.backbone) == Aggregator::kSageMean;
  GraphOps ops = GraphOps::build(g_tilde, sage);
  const Matrix z = gnn_infer(model, ops);
  if (cfg.task == Task::kLinkPred) {
    out.auc = auc_eval(z, ctx.link->test_pos, ctx.link->test_neg);
    return out;
  }
  const auto pred = predict_labels(z);
  std::vector<int> test_pred, test_truth;
  for (NodeId v : ctx.test_nodes) {
    if (!g_tilde.pseudo_flags()[v])
      throw std::logic_error("evaluate_backbone: pseudo node in the evaluation set");
    if (g_tilde.labels()[v] == kUnlabeled) continue;
    test_pred.push_back(pred[v]);
    test_truth.push_back(g_tilde.labels()[v]);
  }
  const F1Result f1 = f1_scores(test_pred, test_truth, g_tilde.num_classes());
  out.macro_f1 = f1.macro;
  out.micro_f1 = f1.micro;
  out.per_class_f1 = f1.per_class;
  return out;
}

RunReport run_pipeline(const RunConfig& cfg, std::uint64_t seed,
                       const std::optional<std::filesystem::path>& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  if (out_dir) std::filesystem::create_directories(*out_dir);
  auto artifact = [&](const char* name) {
    return out_dir ? std::optional<std::filesystem::path>(*out_dir / name) : std::nullopt;
  };

  RunReport report;
  report.seed = seed;
  report.config_hash = cfg.config_hash();
  report.config_echo = cfg.to_json();
  if (out_dir) cfg.save(*out_dir / "config.json");

  // ---- load ----
  Graph base = StageGuard{"load"}([&] { return load_config_graph(cfg); });
  report.stages.push_back({"load", base.num_nodes(), base.num_edges()});

  // ---- task split (the link task trains on the train-edge graph) ----
  TaskContext ctx = StageGuard{"split"}([&] { return prepare_task(cfg, seed, base); });
  const Graph& g = ctx.work_graph;
  if (cfg.task == Task::kLinkPred)
    report.stages.push_back({"train_graph", g.num_nodes(), g.num_edges()});

  // ---- pagerank + partition ----
  PageRankOptions pr_opts{cfg.damping, cfg.pr_tol, cfg.pr_max_iter};
  PartitionOptions part_opts;
  part_opts.hub_factor = cfg.hub_factor;
  part_opts.tail_percent = cfg.tail_percent;
  NodePartition part = StageGuard{"sample"}([&] {
    auto pr = pagerank(g, pr_opts);
    return partition_nodes(pr, part_opts);
  });
  report.pr_iterations = part.pagerank.iterations_used;
  report.pr_residual = part.pagerank.residual;
  report.num_hubs = static_cast<std::int64_t>(part.hubs.size());
  report.num_tails = static_cast<std::int64_t>(part.tails.size());
  if (auto p = artifact("pr.json")) write_pagerank_json(part.pagerank, *p);
  if (auto p = artifact("partition.json")) write_partition_json(part, *p);

  // ---- pretrain (only the augmentation stages consume the embeddings) ----
  const bool needs_pretrain = cfg.enable_denoise || cfg.enable_discover;
  PretrainResult pre;
  if (needs_pretrain) {
    pre = StageGuard{"pretrain"}([&] {
      return pretrain_encoders(g, ctx.labeled_train, make_lp_config(cfg),
                               make_nc_config(cfg, g.num_classes()), seed);
    });
    if (auto p = artifact("lp_model.json")) save_model(pre.link_model, *p);
    if (auto p = artifact("nc_model.json")) save_model(pre.label_model, *p);
    if (auto p = artifact("embeddings.json")) save_embeddings(pre.embeddings, *p);
    if (auto p = artifact("lp_trace.csv")) write_trace_csv(pre.link_trace, *p);
    if (auto p = artifact("nc_trace.csv")) write_trace_csv(pre.label_trace, *p);
  }

  // ---- denoise + discover ----
  Graph g_prime = g;
  if (cfg.enable_denoise || cfg.enable_discover) {
    auto [gp, plan] = StageGuard{"augment"}([&] {
      AugmentConfig acfg = cfg.augment;
      acfg.enable_denoise = cfg.enable_denoise;
      acfg.enable_discover = cfg.enable_discover;
      return augment(g, pre.embeddings, part, acfg, ctx.protect);
    });
    g_prime = std::move(gp);
    report.removed_edges = static_cast<std::int64_t>(plan.removals.size());
    report.added_edges = static_cast<std::int64_t>(plan.additions.size());
    if (auto p = artifact("plan.jsonl")) save_plan(plan, *p);
  } else if (auto p = artifact("plan.jsonl")) {
    save_plan(EdgeEditPlan{}, *p);
  }
  report.stages.push_back({"augment", g_prime.num_nodes(), g_prime.num_edges()});

  // ---- re-sample tails + generate ----
  Graph g_tilde = g_prime;
  if (cfg.enable_generate) {
    StageGuard{"generate"}([&] {
      NodePartition part2 = resample_tails(g_prime, pr_opts, part_opts);
      if (auto p = artifact("resampled_partition.json")) write_partition_json(part2, *p);
      SimilarTargets targets = select_similar_neighbors(g_prime, part2.tails);
      if (targets.count() > 0) {
        GenConfig gcfg = cfg.gen;
        gcfg.seed = seed * 0x9e3779b97f4a7c15ull + 21;
        GanResult gan = train_generative(g_prime, targets, ctx.labeled_train, gcfg);
        auto [gt, manifest] = inject_pseudo_nodes(g_prime, gan.generator, targets, gcfg);
        g_tilde = std::move(gt);
        report.pseudo_nodes = static_cast<std::int64_t>(manifest.size());
        if (auto p = artifact("generator.json")) save_generator(gan.generator, *p);
        if (auto p = artifact("discriminator.json")) save_model(gan.discriminator, *p);
        if (auto p = artifact("pseudo_manifest.jsonl")) save_manifest(manifest, *p);
      }
      return 0;
    });
  }
  report.stages.push_back({"generate", g_tilde.num_nodes(), g_tilde.num_edges()});

  // ---- retrain + evaluate ----
  BackboneResult backbone = StageGuard{"train"}([&] {
    return train_backbone(g_tilde, cfg, ctx, seed);
  });
  if (auto p = artifact("backbone_model.json")) save_model(backbone.model, *p);
  if (auto p = artifact("train_trace.csv")) write_trace_csv(backbone.trace, *p);

  StageGuard{"eval"}([&] {
    const EvalOutcome out = evaluate_backbone(backbone.model, g_tilde, cfg, ctx);
    report.macro_f1 = out.macro_f1;
    report.micro_f1 = out.micro_f1;
    report.auc = out.auc;
    report.per_class_f1 = out.per_class_f1;
    return 0;
  });

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (out_dir) {
    std::ofstream f(*out_dir / "report.json");
    f << report.to_json().dump(2) << '\n';
  }
  return report;
}

ExperimentSummary run_experiment(const RunConfig& cfg, bool write_artifacts) {
  if (cfg.seeds.empty()) throw std::invalid_argument("run_experiment: need at least one seed");
  ExperimentSummary summary;
  std::vector<double> macros, micros, aucs;
  for (std::uint64_t seed : cfg.seeds) {
    std::optional<std::filesystem::path> dir;
    if (write_artifacts)
      dir = cfg.run_root() / (cfg.config_hash() + "-seed" + std::to_string(seed));
    RunReport r = run_pipeline(cfg, seed, dir);
    if (r.micro_f1 >= 0.0) {
      macros.push_back(r.macro_f1);
      micros.push_back(r.micro_f1);
    }
    if (r.auc >= 0.0) aucs.push_back(r.auc);
    summary.per_seed.push_back(std::move(r));
  }
  summary.macro = mean_std(macros);
  summary.micro = mean_std(micros);
  summary.auc = mean_std(aucs);
  if (write_artifacts) {
    std::filesystem::create_directories(cfg.run_root());
    std::ofstream f(cfg.run_root() / (cfg.config_hash() + "-summary.csv"));
    f << experiment_csv(cfg, summary);
  }
  return summary;
}

std::string variant_name(const RunConfig& cfg) {
  if (!cfg.enable_denoise && !cfg.enable_discover)
    return cfg.enable_generate ? "gen_only" : "baseline";
  if (!cfg.enable_discover)
    return cfg.enable_generate ? "denoise_w_gen" : "denoise";
  std::string name = cfg.augment.strategy == AugmentConfig::Strategy::kThreshold
                         ? "saug_thr"
                         : "saug_top";
  if (!cfg.enable_generate) name += "_wo_gen";
  return name;
}

std::string experiment_csv(const RunConfig& cfg, const ExperimentSummary& summary) {
  const std::string dataset = cfg.dataset_dir.empty()
                                  ? "synthetic"
                                  : std::filesystem::path(cfg.dataset_dir).filename().string();
  const std::string method = variant_name(cfg);
  std::ostringstream csv;
  csv << "dataset,task,method,seed,macro_f1,micro_f1,auc\n";
  auto row = [&](const std::string& seed_label, double macro, double micro, double auc) {
    csv << dataset << ',' << to_string(cfg.task) << ',' << method << ',' << seed_label << ',';
    if (micro >= 0.0) csv << macro << ',' << micro;
    else csv << ',';
    csv << ',';
    if (auc >= 0.0) csv << auc;
    csv << '\n';
  };
  for (const auto& r : summary.per_seed)
    row(std::to_string(r.seed), r.macro_f1, r.micro_f1, r.auc);
  const bool has_nc = !summary.per_seed.empty() && summary.per_seed.front().micro_f1 >= 0.0;
  const bool has_auc = !summary.per_seed.empty() && summary.per_seed.front().auc >= 0.0;
  row("mean", has_nc ? summary.macro.mean : -1.0, has_nc ? summary.micro.mean : -1.0,
      has_auc ? summary.auc.mean : -1.0);
  row("std", has_nc ? summary.macro.std : -1.0, has_nc ? summary.micro.std : -1.0,
      has_auc ? summary.auc.std : -1.0);
  return csv.str();
}

std::string sweep(const RunConfig& cfg, const std::string& axis,
                  const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("sweep: empty value list");
  const std::vector<std::string> valid{"K", "M", "L", "P", "Q"};
  if (std::find(valid.begin(), valid.end(), axis) == valid.end())
    throw std::invalid_argument("sweep: invalid axis '" + axis + "' (want K, M, L, P or Q)");

  std::ostringstream csv;
  csv << "axis,value,seed,macro_f1,micro_f1,auc\n";
  for (double value : values) {
    RunConfig c = cfg;
    if (axis == "K") c.hub_factor = value;
    if (axis == "M") c.tail_percent = value;
    if (axis == "L") c.augment.hub_drop_threshold = value;
    if (axis == "P") {
      c.augment.strategy = AugmentConfig::Strategy::kThreshold;
      c.augment.threshold_p = value;
    }
    if (axis == "Q") {
      c.augment.strategy = AugmentConfig::Strategy::kTopQ;
      c.augment.top_q = static_cast<std::int64_t>(value);
    }
    for (std::uint64_t seed : cfg.seeds) {
      RunReport r = run_pipeline(c, seed);
      csv << axis << ',' << value << ',' << seed << ',';
      if (r.micro_f1 >= 0.0) csv << r.macro_f1 << ',' << r.micro_f1;
      else csv << ',';
      csv << ',';
      if (r.auc >= 0.0) csv << r.auc;
      csv << '\n';
    }
  }
  return csv.str();
}

}  // namespace saug
