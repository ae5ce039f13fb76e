// Serial reference vs OpenMP for the data-parallel kernels, graph
// construction and path sampling.

#include <benchmark/benchmark.h>
#include <fmt/format.h>

#include <vector>

#include "wildlong/graph/meta_graph.hpp"
#include "wildlong/graph/path_sampler.hpp"
#include "wildlong/kernels/kernels.hpp"
#include "wildlong/meta/meta_model.hpp"
#include "wildlong/rng.hpp"

using namespace wildlong;
using kernels::Exec;
using kernels::MatrixView;

namespace {

std::vector<double> random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<double> m(rows * cols);
  for (auto& v : m) v = standard_normal(rng);
  return m;
}

std::vector<meta::MetaRecord> random_records(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<meta::MetaRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = out[i];
    r.conversation_id = fmt::format("c{}", i);
    r.doc_types.push_back(meta::normalize_value("report"));
    for (auto f : meta::kAllFields) {
      if (!meta::graph_eligible(f)) continue;
      const auto k = uniform_index(rng, 4);
      for (std::uint64_t j = 0; j < k; ++j) {
        r.values[f].push_back(meta::normalize_value(fmt::format("{} {}", meta::field_key(f), uniform_index(rng, 40))));
      }
      if (r.values[f].empty()) r.values.erase(f);
    }
  }
  return out;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::kOpenMP : Exec::kSerial; }

void BM_AssignNearest(benchmark::State& state) {
  const std::size_t n = 20000, k = 10, dim = 64;
  const auto pts = random_matrix(n, dim, 1);
  const auto ctr = random_matrix(k, dim, 2);
  std::vector<std::uint32_t> assignment(n);
  std::vector<double> dist2(n);
  for (auto _ : state) {
    kernels::assign_nearest(exec_of(state), {pts, n, dim}, {ctr, k, dim}, assignment, dist2);
    benchmark::DoNotOptimize(dist2.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

void BM_ClassifierGradient(benchmark::State& state) {
  const std::size_t n = 20000, k = 10, dim = 64;
  const auto x = random_matrix(n, dim, 3);
  const auto w = random_matrix(k, dim, 4);
  const std::vector<double> bias(k, 0.0);
  std::vector<std::uint32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<std::uint32_t>(i % k);
  std::vector<double> residual(n * k), loss(n), gw(k * dim), gb(k);
  for (auto _ : state) {
    kernels::softmax_residuals(exec_of(state), {x, n, dim}, {w, k, dim}, bias, labels, residual, loss);
    kernels::accumulate_gradient(exec_of(state), {x, n, dim}, {residual, n, k}, gw, gb);
    benchmark::DoNotOptimize(gw.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

void BM_GraphBuild(benchmark::State& state) {
  const auto records = random_records(2000, 5);
  for (auto _ : state) {
    auto g = graph::build_graph_sharded(records, "report", 1.0, 8, exec_of(state));
    benchmark::DoNotOptimize(g.edge_count());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * records.size()));
}

void BM_PathSampling(benchmark::State& state) {
  const auto g = graph::build_graph(random_records(2000, 6), "report", 1.0);
  graph::WalkConfig cfg;
  cfg.seed = 7;
  const std::size_t count = 4000;
  for (auto _ : state) {
    auto paths = graph::sample_paths_partitioned(g, cfg, count, 16, exec_of(state));
    benchmark::DoNotOptimize(paths.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * count));
}

}  // namespace

BENCHMARK(BM_AssignNearest)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClassifierGradient)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GraphBuild)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PathSampling)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
