#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tnqc/circuit/circuit.hpp"
#include "tnqc/decompose/decompose.hpp"
#include "tnqc/error.hpp"
#include "tnqc/linalg/decompositions.hpp"

using namespace tnqc;
using namespace tnqc::decompose;
using mps::Mps;

namespace {

// Dense statevector of U^(1) ... U^(k) |0>, built with full gate matrices.
Vector oracle_state(const LayerStack& stack) {
  const std::size_t n = stack.num_qubits;
  Vector v = Vector::Zero(static_cast<Eigen::Index>(std::size_t{1} << n));
  v(0) = 1;
  for (const auto& layer : stack.layers)
    for (std::size_t q = 0; q + 1 < n; ++q) v = oracle::embed_gate(n, layer[q], q, q + 1) * v;
  return v;
}

LayerStack random_stack(std::size_t n, std::size_t depth, std::mt19937_64& rng) {
  LayerStack s{n, {}, {}};
  for (std::size_t k = 0; k < depth; ++k) {
    LinearLayer l;
    for (std::size_t q = 0; q + 1 < n; ++q) l.push_back(oracle::haar_unitary(4, rng));
    s.layers.push_back(l);
  }
  return s;
}

}  // namespace

TEST(Extract, ExactForBondTwoStates) {
  std::mt19937_64 rng(60);
  for (const Mps& m : {Mps::ghz(6), Mps::zeros(5), Mps::product_state(Bitstring::from_string("1011")),
                       mps::truncate(Mps::random(7, 2, rng), {2, 0.0})}) {
    const auto layer = extract_layer(m);
    ASSERT_EQ(layer.size(), m.num_sites() - 1);
    for (const auto& g : layer) EXPECT_TRUE(linalg::is_unitary(g, 1e-12));
    const LayerStack s{m.num_sites(), {layer}, {}};
    EXPECT_GT(oracle::fidelity(oracle_state(s), oracle::mps_dense(m)), 1 - 1e-12);
    EXPECT_NEAR(fidelity(s, m), 1.0, 1e-12);
  }
}

TEST(Extract, BondEightStateGivesPartialOverlap) {
  std::mt19937_64 rng(61);
  const Mps m = Mps::random(8, 8, rng);
  const LayerStack s{8, {extract_layer(m)}, {}};
  const double f = fidelity(s, m);
  EXPECT_NEAR(f, oracle::fidelity(oracle_state(s), oracle::mps_dense(m)), 1e-10);
  EXPECT_GT(f, 0.0);
  EXPECT_LT(f, 1.0);
}

TEST(Disentangle, InvertsLayer) {
  std::mt19937_64 rng(62);
  const Mps m = mps::truncate(Mps::random(6, 2, rng), {2, 0.0});
  const auto layer = extract_layer(m);
  const Mps rest = disentangle(m, layer);
  EXPECT_NEAR(std::abs(mps::amplitude(rest, Bitstring(0, 6))), 1.0, 1e-12);
}

TEST(Fidelity, MatchesDenseOracle) {
  std::mt19937_64 rng(63);
  const auto s = random_stack(5, 3, rng);
  const Mps target = Mps::random(5, 4, rng);
  EXPECT_NEAR(fidelity(s, target), oracle::fidelity(oracle_state(s), oracle::mps_dense(target)), 1e-11);
  const Mps exact = mps::from_statevector(oracle_state(s));
  EXPECT_NEAR(fidelity(s, exact), 1.0, 1e-11);
}

TEST(Optimize, NeverLowersFidelity) {
  std::mt19937_64 rng(64);
  int improved = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    const Mps target = Mps::random(6, 4, rng);
    const auto s = random_stack(6, 2, rng);
    const double before = fidelity(s, target);
    const auto out = optimize_stack(s, target, 3);
    ASSERT_EQ(out.fidelity_history.size(), 3U);
    double last = before;
    for (double f : out.fidelity_history) {
      EXPECT_GE(f, last - 1e-12);
      last = f;
    }
    EXPECT_NEAR(fidelity(out, target), out.fidelity_history.back(), 1e-12);
    for (const auto& l : out.layers)
      for (const auto& g : l) EXPECT_TRUE(linalg::is_unitary(g, 1e-10));
    if (out.fidelity_history.back() > before + 1e-9) ++improved;
  }
  EXPECT_GE(improved, trials * 9 / 10);
}

TEST(Optimize, RecoversRepresentableState) {
  std::mt19937_64 rng(65);
  const auto truth = random_stack(5, 1, rng);
  const Mps target = mps::from_statevector(oracle_state(truth));
  DecomposeConfig cfg;
  cfg.max_layers = 1;
  const auto res = decompose_mps(target, cfg);
  EXPECT_GT(res.fidelity, 1 - 1e-10);
  EXPECT_TRUE(res.converged);
}

TEST(Decompose, FidelityMonotoneInLayers) {
  std::mt19937_64 rng(66);
  const Mps target = Mps::random(7, 8, rng);
  double last = 0;
  for (std::size_t k = 1; k <= 4; ++k) {
    DecomposeConfig cfg;
    cfg.max_layers = k;
    const auto res = decompose_mps(target, cfg);
    EXPECT_GE(res.fidelity, last - 1e-12) << k;
    last = res.fidelity;
    EXPECT_EQ(res.stack.layers.size(), k);
  }
}

TEST(Decompose, CircuitReproducesStack) {
  std::mt19937_64 rng(67);
  const Mps target = Mps::random(6, 4, rng);
  DecomposeConfig cfg;
  cfg.max_layers = 2;
  const auto res = decompose_mps(target, cfg);
  const Vector from_circuit = circuit::simulate(res.circuit);
  EXPECT_NEAR(oracle::fidelity(from_circuit, oracle_state(res.stack)), 1.0, 1e-9);
  EXPECT_NEAR(oracle::fidelity(from_circuit, oracle::mps_dense(target)), res.fidelity, 1e-9);
  EXPECT_EQ(res.circuit.gate_count(), 10U);
}

TEST(Decompose, RejectsBadConfig) {
  DecomposeConfig cfg;
  cfg.max_layers = 0;
  EXPECT_THROW(decompose_mps(Mps::ghz(4), cfg), ConfigError);
}
