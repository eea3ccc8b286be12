#include <benchmark/benchmark.h>

#include <random>

#include "saug/augment.hpp"
#include "saug/nn.hpp"
#include "saug/pagerank.hpp"
#include "saug/synthetic.hpp"

using namespace saug;

namespace {

Graph bench_graph(NodeId n) { return generate_powerlaw(n, 3, 128, 4, 1); }

EmbeddingPair bench_embeddings(NodeId n, int classes, std::int64_t d_link) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  EmbeddingPair emb;
  emb.z_label = Matrix(n, classes);
  emb.z_link = Matrix(n, d_link);
  for (std::int64_t i = 0; i < emb.z_label.size(); ++i) emb.z_label.data()[i] = gauss(rng);
  for (std::int64_t i = 0; i < emb.z_link.size(); ++i) emb.z_link.data()[i] = gauss(rng);
  return emb;
}

}  // namespace

static void BM_Pagerank(benchmark::State& state) {
  Graph g = bench_graph(static_cast<NodeId>(state.range(0)));
  for (auto _ : state) {
    auto pr = pagerank(g);
    benchmark::DoNotOptimize(pr.values.data());
  }
}
BENCHMARK(BM_Pagerank)->Arg(1000)->Arg(5000);

static void BM_GcnForward(benchmark::State& state) {
  Graph g = bench_graph(static_cast<NodeId>(state.range(0)));
  GraphOps ops = GraphOps::build(g, false);
  GnnModel model({{128, 32, Aggregator::kGcn},
                  {32, 32, Aggregator::kGcn},
                  {32, 4, Aggregator::kGcn}},
                 0.0, 3);
  for (auto _ : state) {
    Matrix out = gnn_infer(model, ops);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_GcnForward)->Arg(1000)->Arg(5000);

static void BM_TrainEpoch(benchmark::State& state) {
  Graph g = bench_graph(static_cast<NodeId>(state.range(0)));
  GraphOps ops = GraphOps::build(g, false);
  GnnModel model({{128, 32, Aggregator::kGcn}, {32, 4, Aggregator::kGcn}}, 0.5, 3);
  auto params = model.parameters();
  AdamOptimizer adam(params, 0.01, 5e-4);
  std::vector<std::int64_t> mask;
  for (NodeId v = 0; v < g.num_nodes(); ++v) mask.push_back(v);
  std::mt19937_64 rng(4);
  for (auto _ : state) {
    ad::Tensor z = gnn_forward(model, ops, std::monostate{}, true, rng);
    ad::Tensor loss = classifier_loss(z, g.labels(), mask, params, 1e-4);
    ad::backward(loss);
    adam.step();
    benchmark::DoNotOptimize(loss.item());
  }
}
BENCHMARK(BM_TrainEpoch)->Arg(1000)->Arg(5000);

static void BM_TailSimilarityChunked(benchmark::State& state) {
  const NodeId n = 2000;
  Graph g = bench_graph(n);
  EmbeddingPair emb = bench_embeddings(n, 4, 16);
  auto part = partition_nodes(pagerank(g), {});
  for (auto _ : state) {
    double sink = 0.0;
    tail_similarity_chunked(emb, g, part, state.range(0), [&](const SimilarityScores& s) {
      if (!s.scores.empty()) sink += s.scores[0];
    });
    benchmark::DoNotOptimize(sink);
  }
}
BENCHMARK(BM_TailSimilarityChunked)->Arg(32)->Arg(256);

BENCHMARK_MAIN();
