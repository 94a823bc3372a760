#include <benchmark/benchmark.h>

#include <optional>

#include "kgat/autodiff.hpp"
#include "kgat/kernels.hpp"
#include "kgat/model.hpp"
#include "kgat/random.hpp"
#include "kgat/synthetic.hpp"

using namespace kgat;

namespace {

Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Tensor m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

void BM_KernelPool(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor m = random_matrix(n, n, 1);
  const KernelBank bank = default_bank(21);
  const Mask cols(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernel_pool(m, {}, cols, bank));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * bank.size()));
}
BENCHMARK(BM_KernelPool)->Arg(16)->Arg(64)->Arg(130);

struct ModelFixture {
  explicit ModelFixture(std::size_t dim) {
    ModelConfig mc;
    mc.dim = dim;
    model.emplace(mc, random_instance_vocabulary(spec), 3);
    Rng rng(5);
    instance = random_instance(rng, spec);
  }
  RandomInstanceSpec spec;
  std::optional<KgatModel> model;
  ClaimInstance instance;
};

void BM_Forward(benchmark::State& state) {
  ModelFixture f(static_cast<std::size_t>(state.range(0)));
  const AblationMode mode = state.range(1) ? AblationMode::full() : AblationMode::gat();
  for (auto _ : state) benchmark::DoNotOptimize(f.model->forward(f.instance, mode));
}
BENCHMARK(BM_Forward)->Args({32, 1})->Args({32, 0})->Args({64, 1});

void BM_ForwardBackward(benchmark::State& state) {
  ModelFixture f(static_cast<std::size_t>(state.range(0)));
  const AblationMode mode = state.range(1) ? AblationMode::full() : AblationMode::gat();
  for (auto _ : state) {
    f.model->params().zero_grad();
    benchmark::DoNotOptimize(f.model->forward_backward(f.instance, mode));
  }
}
BENCHMARK(BM_ForwardBackward)->Args({32, 1})->Args({32, 0})->Args({64, 1});

}  // namespace

BENCHMARK_MAIN();
