#include <benchmark/benchmark.h>

#include <random>

#include "tnqc/circuit/circuit.hpp"
#include "tnqc/decompose/decompose.hpp"
#include "tnqc/ground_state/dmrg.hpp"
#include "tnqc/linalg/decompositions.hpp"
#include "tnqc/mps/mps.hpp"
#include "tnqc/optim/cmaes.hpp"
#include "tnqc/tasks/dataset.hpp"
#include "tnqc/tnbm/tnbm.hpp"

using namespace tnqc;

namespace {

Matrix random_unitary(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix z(4, 4);
  for (auto& x : z.reshaped()) x = cplx(g(rng), g(rng));
  return linalg::closest_unitary(z);
}

void BM_Simulate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto c = circuit::build_circuit(n, 3, true);
  Rng rng(1);
  const auto p = circuit::init_params(c, circuit::InitMode::kRandom, 0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(circuit::simulate(c, p));
  state.SetLabel(std::to_string(c.gate_count()) + " gates");
}
BENCHMARK(BM_Simulate)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_ApplyTwoSiteGate(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto chi = static_cast<std::size_t>(state.range(0));
  const auto m = mps::canonicalize(mps::Mps::random(16, chi, rng), 7);
  const Matrix u = random_unitary(rng);
  for (auto _ : state) benchmark::DoNotOptimize(mps::apply_two_site_gate(m, u, 7, {chi, 0.0}));
}
BENCHMARK(BM_ApplyTwoSiteGate)->Arg(4)->Arg(16)->Arg(64);

void BM_Kak(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const Matrix u = random_unitary(rng);
  for (auto _ : state) benchmark::DoNotOptimize(circuit::kak_decompose(u));
}
BENCHMARK(BM_Kak);

void BM_SvdTruncated(benchmark::State& state) {
  const auto dim = state.range(0);
  const Matrix m = Matrix::Random(dim, dim);
  for (auto _ : state) benchmark::DoNotOptimize(linalg::svd_truncated(m, {static_cast<std::size_t>(dim / 2), 0.0}));
}
BENCHMARK(BM_SvdTruncated)->Arg(16)->Arg(64)->Arg(128);

void BM_CmaesGeneration(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  optim::CmaesConfig cfg;
  optim::Cmaes es(std::vector<double>(d, 0.0), cfg);
  std::vector<double> losses(cfg.lambda);
  for (auto _ : state) {
    const auto& pop = es.ask();
    for (std::size_t i = 0; i < pop.size(); ++i) {
      double s = 0;
      for (double v : pop[i]) s += v * v;
      losses[i] = s;
    }
    es.tell(losses);
  }
}
BENCHMARK(BM_CmaesGeneration)->Arg(90)->Arg(630);

void BM_TnbmSweep(benchmark::State& state) {
  const auto data = tasks::cardinality_dataset(12, 6);
  tnbm::TnbmConfig cfg;
  cfg.sweeps = 1;
  cfg.chi_max = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(tnbm::train_tnbm(data, cfg));
}
BENCHMARK(BM_TnbmSweep)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_DecomposeLayer(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto target = mps::Mps::random(12, 8, rng);
  decompose::DecomposeConfig cfg;
  cfg.max_layers = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(decompose::decompose_mps(target, cfg));
}
BENCHMARK(BM_DecomposeLayer)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Dmrg3x3(benchmark::State& state) {
  const auto mpo = ground_state::heisenberg_mpo(3, 3);
  ground_state::DmrgConfig cfg;
  cfg.chi_max = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ground_state::dmrg_ground_state(mpo, cfg));
}
BENCHMARK(BM_Dmrg3x3)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
