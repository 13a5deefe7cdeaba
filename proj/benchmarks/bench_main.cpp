#include <benchmark/benchmark.h>

#include <vector>

#include "plab/adam.hpp"
#include "plab/metrics.hpp"
#include "plab/nnops.hpp"
#include "plab/rng.hpp"
#include "plab/task.hpp"
#include "plab/taskgen.hpp"
#include "plab/transformer.hpp"

namespace {

using namespace plab;

MixtureSpec toy_mixture() {
  MixtureSpec mix;
  mix.entries.push_back({make_task(TaskKind::LinearRegression, 10, 1.0), 0.5});
  mix.entries.push_back({make_task(TaskKind::SparseParity, 10, 0.0, 2), 0.5});
  return mix;
}

void BM_BatchGeneration(benchmark::State& state) {
  MixtureSpec mix = toy_mixture();
  Rng rng(7, 0);
  const int B = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto batch = build_batch(mix, B, 40, rng);
    benchmark::DoNotOptimize(batch.data());
  }
  state.SetItemsProcessed(state.iterations() * B);
}

void BM_ForwardToy(benchmark::State& state) {
  MixtureSpec mix = toy_mixture();
  TransformerConfig cfg = TransformerConfig::toy_profile(10, 40);
  Transformer<float> model(cfg);
  model.init(3);
  Rng rng(7, 0);
  auto batch = build_batch(mix, 1, 40, rng);
  std::vector<float> tokens = embed_prompt<float>(batch[0]);
  TransformerActs<float> acts;
  for (auto _ : state) {
    auto preds = model.forward(tokens.data(), 80, acts);
    benchmark::DoNotOptimize(preds.data());
  }
}

void BM_TrainStepToy(benchmark::State& state) {
  MixtureSpec mix = toy_mixture();
  TransformerConfig cfg = TransformerConfig::toy_profile(10, 40);
  Transformer<float> model(cfg);
  model.init(3);
  AdamState<float> adam;
  adam.lr = 3e-4f;
  adam.reset(model.params().values.size());
  Rng rng(7, 0);
  std::vector<float> grad(model.params().values.size());
  std::vector<double> c = {0.1, 1.0};
  std::vector<Modality> mod = {Modality::Continuous, Modality::Boolean};
  const int B = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto batch = build_batch(mix, B, 40, rng);
    std::fill(grad.begin(), grad.end(), 0.0f);
    BatchLoss bl = sequence_loss<float>(model, batch, c, mod, grad.data());
    adam_step(model.params(), grad.data(), adam);
    benchmark::DoNotOptimize(bl.total);
  }
}

void BM_OnlineDetector(benchmark::State& state) {
  Rng rng(11, 0);
  std::vector<double> vals(1 << 14);
  for (auto& v : vals) v = 0.5 + rng.uniform();
  for (auto _ : state) {
    OnlineDetector det(0.8, true);
    for (size_t t = 0; t < vals.size(); ++t) det.push(static_cast<std::int64_t>(t + 1), vals[t]);
    benchmark::DoNotOptimize(det.fired());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(vals.size()));
}

BENCHMARK(BM_BatchGeneration)->Arg(16)->Arg(64);
BENCHMARK(BM_ForwardToy);
BENCHMARK(BM_TrainStepToy)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OnlineDetector);

}  // namespace
