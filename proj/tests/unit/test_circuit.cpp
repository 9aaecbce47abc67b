#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tnqc/circuit/circuit.hpp"
#include "tnqc/error.hpp"
#include "tnqc/linalg/decompositions.hpp"

using namespace tnqc;
using namespace tnqc::circuit;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

// exp(-i t/2 P) for an involutory P: cos(t/2) I - i sin(t/2) P.
Matrix rot(const Matrix& p, double t) {
  return std::cos(t / 2) * Matrix::Identity(p.rows(), p.cols()) - cplx(0, 1) * std::sin(t / 2) * p;
}

double phase_distance(const Matrix& a, const Matrix& b) {
  const cplx t = (b.adjoint() * a).trace();
  const cplx ph = std::abs(t) > 0 ? t / std::abs(t) : cplx(1);
  return (a - ph * b).norm();
}

}  // namespace

TEST(Gates, U3SpecialCases) {
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  EXPECT_LT(phase_distance(u3_matrix(kPi, 0, kPi), x), 1e-14);
  EXPECT_LT((u3_matrix(0, 0, 0) - Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_TRUE(linalg::is_unitary(u3_matrix(0.3, 1.1, -2.0), 1e-14));
}

TEST(Gates, TwoQubitRotationsMatchPauliExponentials) {
  for (double t : {0.0, 0.4, -1.3, kPi}) {
    EXPECT_LT((xx_matrix(t) - rot(oracle::pauli_string("XX"), t)).norm(), 1e-14);
    EXPECT_LT((yy_matrix(t) - rot(oracle::pauli_string("YY"), t)).norm(), 1e-14);
    EXPECT_LT((zz_matrix(t) - rot(oracle::pauli_string("ZZ"), t)).norm(), 1e-14);
  }
}

TEST(Gates, Su4ZeroIsIdentityAndFactorOrder) {
  GateParams z{};
  EXPECT_LT((su4_matrix(z) - Matrix::Identity(4, 4)).norm(), 1e-15);
  GateParams t{};
  t[7] = kPi;  // only the YY angle
  EXPECT_LT(phase_distance(su4_matrix(t), oracle::pauli_string("YY")), 1e-14);
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> u(0, 2 * kPi);
  for (auto& v : t) v = u(rng);
  const Matrix expected = kron(u3_matrix(t[0], t[1], t[2]), u3_matrix(t[3], t[4], t[5])) * rot(oracle::pauli_string("XX"), t[6]) *
                          rot(oracle::pauli_string("YY"), t[7]) * rot(oracle::pauli_string("ZZ"), t[8]) *
                          kron(u3_matrix(t[9], t[10], t[11]), u3_matrix(t[12], t[13], t[14]));
  EXPECT_LT((su4_matrix(t) - expected).norm(), 1e-13);
}

TEST(Kak, IdentityAndCnot) {
  const auto id = kak_decompose(Matrix::Identity(4, 4));
  Matrix rec = su4_matrix(id.theta) * std::exp(cplx(0, -id.phase));
  EXPECT_LT((rec - Matrix::Identity(4, 4)).norm(), 1e-10);
  Matrix cnot = Matrix::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1;
  const auto k = kak_decompose(cnot);
  rec = su4_matrix(k.theta) * std::exp(cplx(0, -k.phase));
  EXPECT_LT((rec - cnot).norm(), 1e-10);
  // CNOT is locally equivalent to a single pi/2 interaction; the Makhlin
  // invariants of the canonical part reveal that independent of branch.
  const double a = std::fmod(std::abs(k.theta[6]), kPi);
  const double b = std::fmod(std::abs(k.theta[7]), kPi);
  const double c = std::fmod(std::abs(k.theta[8]), kPi);
  auto near = [](double x, double y) { return std::abs(x - y) < 1e-8; };
  const int quarter = near(a, kPi / 2) + near(b, kPi / 2) + near(c, kPi / 2);
  const int zero = (near(a, 0) || near(a, kPi)) + (near(b, 0) || near(b, kPi)) + (near(c, 0) || near(c, kPi));
  EXPECT_EQ(quarter + zero, 3);
  EXPECT_EQ(quarter % 2, 1);
}

TEST(Kak, HaarRoundTrip) {
  std::mt19937_64 rng(31);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const Matrix u = oracle::haar_unitary(4, rng);
    const auto r = kak_decompose(u);
    const Matrix rec = su4_matrix(r.theta) * std::exp(cplx(0, -r.phase));
    worst = std::max(worst, (rec - u).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Kak, LocalAndSwapInputs) {
  std::mt19937_64 rng(32);
  const Matrix local = kron(oracle::haar_unitary(2, rng), oracle::haar_unitary(2, rng));
  const Matrix swap = (Matrix(4, 4) << 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1).finished();
  for (const Matrix& u : {local, swap}) {
    const auto r = kak_decompose(u);
    EXPECT_LT((su4_matrix(r.theta) * std::exp(cplx(0, -r.phase)) - u).norm(), 1e-10);
  }
}

TEST(Kak, RejectsNonUnitary) {
  Matrix m = Matrix::Identity(4, 4);
  m(0, 1) = 1e-6;
  EXPECT_THROW(kak_decompose(m), UnitarityError);
}

TEST(Structure, GateCounts) {
  EXPECT_EQ(build_circuit(12, 8, false).gate_count(), 88U);
  EXPECT_EQ(build_circuit(12, 8, false).param_count(), 1320U);
  EXPECT_EQ(build_circuit(12, 8, true).gate_count(), 7U * 11U + 66U);
  EXPECT_EQ(build_circuit(4, 1, true).gate_count(), 6U);
  EXPECT_EQ(build_circuit(4, 5, false).gate_count() * kParamsPerGate, 225U);
  EXPECT_THROW(build_circuit(4, 0, false), ConfigError);
  EXPECT_THROW(build_circuit(1, 1, false), ConfigError);
}

TEST(Structure, LayerPairs) {
  const auto lin = layer_pairs(4, Topology::kLinear);
  const std::vector<std::pair<std::size_t, std::size_t>> expected{{0, 1}, {1, 2}, {2, 3}};
  EXPECT_EQ(lin, expected);
  EXPECT_EQ(layer_pairs(5, Topology::kAllToAll).size(), 10U);
  EXPECT_EQ(topology_from_string(to_string(Topology::kAllToAll)), Topology::kAllToAll);
  EXPECT_THROW(topology_from_string("ring"), ConfigError);
}

TEST(Init, ModesAndDeterminism) {
  const auto c = build_circuit(4, 3, false);
  Rng a(1), b(1);
  const auto pa = init_params(c, InitMode::kRandom, 0, a);
  const auto pb = init_params(c, InitMode::kRandom, 0, b);
  EXPECT_EQ(pa, pb);
  for (double v : pa) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 2 * kPi);
  }
  Rng r(2);
  const auto pn = init_params(build_circuit(12, 8, false), InitMode::kNearIdentity, 0.01, r);
  double ss = 0;
  for (double v : pn) ss += v * v;
  EXPECT_NEAR(std::sqrt(ss / pn.size()), 0.01, 0.001);
  EXPECT_THROW(init_mode_from_string("warm"), ConfigError);
}

TEST(Simulate, MatchesDenseOracle) {
  std::mt19937_64 rng(33);
  for (bool all : {false, true}) {
    const auto c = build_circuit(5, 3, all);
    Rng r(7);
    const auto p = init_params(c, InitMode::kRandom, 0, r);
    const auto bound = c.with_parameters(p);
    Vector expected = Vector::Zero(32);
    expected(0) = 1;
    for (const auto& layer : bound.layers())
      for (const auto& g : layer.gates) expected = oracle::embed_gate(5, g.matrix(), g.i, g.j) * expected;
    EXPECT_LT((simulate(c, p) - expected).norm(), 1e-12);
  }
}

TEST(Simulate, ApplyGateNonAdjacent) {
  std::mt19937_64 rng(34);
  const Vector psi = oracle::random_state(4, rng);
  const Matrix u = oracle::haar_unitary(4, rng);
  for (auto [i, j] : std::vector<std::pair<std::size_t, std::size_t>>{{0, 3}, {3, 0}, {2, 1}}) {
    Vector v = psi;
    apply_gate(v, 4, u, i, j);
    EXPECT_LT((v - oracle::embed_gate(4, u, i, j) * psi).norm(), 1e-13);
  }
}

TEST(Simulate, BornAndGuards) {
  std::mt19937_64 rng(35);
  const Vector psi = oracle::random_state(3, rng);
  const RealVector p = born_probabilities(psi);
  EXPECT_NEAR(p.sum(), 1.0, 1e-14);
  EXPECT_NEAR(p(3), std::norm(psi(3)), 1e-16);
  const auto c = build_circuit(4, 1, false);
  EXPECT_THROW(simulate(c, std::vector<double>(3, 0.0)), ShapeError);
}

TEST(Json, RoundTrip) {
  const auto c = build_circuit(4, 2, true);
  Rng r(3);
  auto bound = c.with_parameters(init_params(c, InitMode::kRandom, 0, r));
  const auto back = circuit_from_json(to_json(bound));
  EXPECT_EQ(back.parameters(), bound.parameters());
  EXPECT_EQ(back.layers().back().topology, Topology::kAllToAll);
  EXPECT_THROW(circuit_from_json(nlohmann::json{{"num_qubits", 3}}), ConfigError);
}

TEST(Extend, KeepsExistingGatesAndAddsNew) {
  const auto c = build_circuit(5, 2, false);
  Rng r(4);
  const auto bound = c.with_parameters(init_params(c, InitMode::kRandom, 0, r));
  Rng e(5);
  const auto ext = extend_final_layer(bound, 0.0, e);
  EXPECT_EQ(ext.gate_count(), 4U + 10U);
  EXPECT_EQ(ext.layers().back().topology, Topology::kAllToAll);
  // With zero-angle new gates the state is unchanged.
  EXPECT_LT((simulate(ext) - simulate(bound)).norm(), 1e-12);
}
