#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tnqc/error.hpp"
#include "tnqc/ground_state/dmrg.hpp"
#include "tnqc/linalg/decompositions.hpp"

using namespace tnqc;
using namespace tnqc::ground_state;

namespace {

Matrix oracle_dense(const tasks::PauliHamiltonian& h) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << h.num_qubits);
  Matrix m = Matrix::Zero(dim, dim);
  for (const auto& t : h.terms) m += t.coefficient * oracle::pauli_string(t.ops);
  return m;
}

}  // namespace

TEST(Mpo, DenseMatchesPauliSum) {
  for (auto [r, c] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 2}, {2, 2}, {2, 3}}) {
    const Matrix expected = oracle_dense(tasks::heisenberg_terms(r, c));
    EXPECT_LT((dense_mpo(heisenberg_mpo(r, c)) - expected).cwiseAbs().maxCoeff(), 1e-14) << r << "x" << c;
  }
}

TEST(Mpo, GenericPauliTerms) {
  tasks::PauliHamiltonian h{4, {{0.7, "XIZI"}, {-1.2, "IYIY"}, {0.3, "ZIII"}, {0.5, "IIIX"}, {0.1, "XXII"}}};
  EXPECT_LT((dense_mpo(mpo_from_pauli(h)) - oracle_dense(h)).cwiseAbs().maxCoeff(), 1e-14);
  tasks::PauliHamiltonian three{3, {{1.0, "XYZ"}}};
  EXPECT_THROW(mpo_from_pauli(three), ConfigError);
}

TEST(Mpo, EnergyOfMpsMatchesDense) {
  std::mt19937_64 rng(50);
  const auto mpo = heisenberg_mpo(2, 3);
  const Matrix h = oracle_dense(tasks::heisenberg_terms(2, 3));
  for (int k = 0; k < 5; ++k) {
    const mps::Mps m = mps::Mps::random(6, 3, rng);
    const Vector v = oracle::mps_dense(m);
    EXPECT_NEAR(energy_of_mps(m, mpo), v.dot(h * v).real() / v.squaredNorm(), 1e-12);
  }
}

TEST(Dmrg, TwoSiteSinglet) {
  const auto res = dmrg_ground_state(heisenberg_mpo(1, 2), {});
  EXPECT_NEAR(res.energy, -0.75, 1e-12);
}

TEST(Dmrg, ThreeByThreeMatchesExactDiagonalization) {
  const auto [e0, v0] = tasks::exact_ground_state(tasks::heisenberg_terms(3, 3));
  DmrgConfig cfg;
  cfg.chi_max = 16;
  cfg.sweeps = 20;
  const auto res = dmrg_ground_state(heisenberg_mpo(3, 3), cfg);
  EXPECT_NEAR(res.energy, e0, 1e-8);
  EXPECT_NEAR(energy_of_mps(res.state, heisenberg_mpo(3, 3)), e0, 1e-8);
  EXPECT_LE(res.state.max_bond(), 16U);
}

TEST(Dmrg, SmallerBondIsVariationalAndOrdered) {
  const auto [e0, v0] = tasks::exact_ground_state(tasks::heisenberg_terms(3, 3));
  double previous = 1e9;
  for (std::size_t chi : {1, 2, 4, 16}) {
    DmrgConfig cfg;
    cfg.chi_max = chi;
    cfg.sweeps = 20;
    const auto res = dmrg_ground_state(heisenberg_mpo(3, 3), cfg);
    EXPECT_GE(res.energy, e0 - 1e-9) << chi;
    EXPECT_LE(res.energy, previous + 1e-9) << chi;
    previous = res.energy;
  }
}

TEST(Dmrg, DeterministicForSeed) {
  DmrgConfig cfg;
  cfg.chi_max = 4;
  cfg.seed = 9;
  const auto a = dmrg_ground_state(heisenberg_mpo(2, 3), cfg);
  const auto b = dmrg_ground_state(heisenberg_mpo(2, 3), cfg);
  EXPECT_EQ(a.half_sweep_energies, b.half_sweep_energies);
}

TEST(Dmrg, RejectsBadConfig) {
  DmrgConfig cfg;
  cfg.chi_max = 0;
  EXPECT_THROW(dmrg_ground_state(heisenberg_mpo(2, 2), cfg), ConfigError);
}
