#include <benchmark/benchmark.h>

#include "hidsq/metrics.hpp"
#include "hidsq/models.hpp"
#include "hidsq/models/knn.hpp"
#include "hidsq/preprocess.hpp"
#include "hidsq/rng.hpp"
#include "hidsq/synth.hpp"

using namespace hidsq;

namespace {

LabeledMatrix gram_matrix(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  LabeledMatrix m;
  m.x = FeatureMatrix(rows, 6);
  for (std::size_t i = 0; i < rows; ++i) {
    const Label l = static_cast<Label>(i % 2);
    for (std::size_t j = 0; j < 6; ++j) m.x(i, j) = static_cast<double>(rng.below(40) + (l ? 10 : 0));
    m.y.push_back(l);
  }
  return m;
}

void BM_TokenizeDedup(benchmark::State& state) {
  SynthSpec s;
  s.traces_per_class = static_cast<std::size_t>(state.range(0));
  s.signature_overlap = 0.3;
  s.seed = 1;
  const auto ds = generate(s);
  PipelineConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(prepare_pools(ds, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}
BENCHMARK(BM_TokenizeDedup)->Arg(500)->Arg(2000);

void BM_Auc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  std::vector<Label> y(n);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<Label>(i % 2);
    s[i] = static_cast<double>(rng.below(1000));
  }
  for (auto _ : state) benchmark::DoNotOptimize(auc(y, s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Auc)->Arg(1000)->Arg(100000);

void BM_KnnScore(benchmark::State& state) {
  const auto train = gram_matrix(static_cast<std::size_t>(state.range(0)), 3);
  const auto test = gram_matrix(256, 4);
  KnnModel m(train.x, train.y, 3);
  for (auto _ : state) benchmark::DoNotOptimize(m.score(test.x));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_KnnScore)->Arg(2000)->Arg(10000);

void BM_TreeFit(benchmark::State& state) {
  const auto train = gram_matrix(static_cast<std::size_t>(state.range(0)), 5);
  const auto spec = ModelSpec::defaults(ModelKind::dtree, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit(spec, train.x, train.y));
}
BENCHMARK(BM_TreeFit)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SvmFit(benchmark::State& state) {
  const auto train = gram_matrix(static_cast<std::size_t>(state.range(0)), 6);
  const auto spec = ModelSpec::defaults(ModelKind::svm_poly, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit(spec, train.x, train.y));
}
BENCHMARK(BM_SvmFit)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
