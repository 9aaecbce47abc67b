#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tnqc/error.hpp"
#include "tnqc/linalg/decompositions.hpp"
#include "tnqc/tasks/dataset.hpp"
#include "tnqc/tasks/hamiltonian.hpp"

using namespace tnqc;
using namespace tnqc::tasks;

namespace {

// Independent BAS enumeration: walk every image and test the definition.
std::size_t count_bas(std::size_t rows, std::size_t cols) {
  std::size_t count = 0;
  for (std::uint64_t img = 0; img < (1ULL << (rows * cols)); ++img) {
    auto px = [&](std::size_t r, std::size_t c) { return (img >> (r * cols + c)) & 1U; };
    bool rows_const = true;
    bool cols_const = true;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        if (px(r, c) != px(r, 0)) rows_const = false;
        if (px(r, c) != px(0, c)) cols_const = false;
      }
    if (rows_const || cols_const) ++count;
  }
  return count;
}

}  // namespace

TEST(Dataset, CardinalityCounts) {
  EXPECT_EQ(cardinality_dataset(12, 6).size(), 924U);
  const auto d = cardinality_dataset(4, 2);
  EXPECT_EQ(d.size(), 6U);
  for (auto s : d.strings()) EXPECT_EQ(std::popcount(s), 2);
  const auto z = cardinality_dataset(2, 0);
  ASSERT_EQ(z.size(), 1U);
  EXPECT_EQ(z.strings()[0], 0U);
}

TEST(Dataset, BarsAndStripesCounts) {
  EXPECT_EQ(bas_dataset(4, 3).size(), 22U);
  EXPECT_EQ(bas_dataset(4, 3).size(), count_bas(4, 3));
  EXPECT_EQ(bas_dataset(2, 2).size(), 6U);
  EXPECT_EQ(bas_dataset(1, 1).size(), 2U);
  EXPECT_EQ(bas_dataset(3, 3).size(), count_bas(3, 3));
}

TEST(Dataset, SortedAndDeduplicated) {
  const Dataset d(3, {5, 1, 5, 3});
  ASSERT_EQ(d.size(), 3U);
  EXPECT_TRUE(std::is_sorted(d.strings().begin(), d.strings().end()));
  EXPECT_THROW(Dataset(3, {}), ConfigError);
}

TEST(Kl, PerfectModelIsZero) {
  const auto d = cardinality_dataset(5, 2);
  std::vector<double> q(32, 0.0);
  for (auto s : d.strings()) q[s] = 1.0 / d.size();
  EXPECT_NEAR(kl_divergence(q, d), 0.0, 1e-14);
}

TEST(Kl, UniformOverHalfTheSpace) {
  const Dataset full(4, [] {
    std::vector<std::uint64_t> v;
    for (std::uint64_t x = 0; x < 16; ++x) if (std::popcount(x) % 2 == 0) v.push_back(x);
    return v;
  }());
  std::vector<double> q(16, 1.0 / 16);
  EXPECT_NEAR(kl_divergence(q, full), std::log(2.0), 1e-14);
}

TEST(Kl, FloorAvoidsInfinity) {
  const auto d = cardinality_dataset(3, 1);
  std::vector<double> q(8, 0.0);
  q[0] = 1.0;
  EXPECT_TRUE(std::isfinite(kl_divergence(q, d)));
}

TEST(Hamiltonian, TermAndEdgeCounts) {
  EXPECT_EQ(heisenberg_terms(1, 2).terms.size(), 3U);
  EXPECT_EQ(heisenberg_terms(3, 3).terms.size(), 36U);
  EXPECT_EQ(grid_edges(3, 3).size(), 12U);
  for (const auto& t : heisenberg_terms(1, 2).terms) EXPECT_DOUBLE_EQ(t.coefficient, 0.25);
}

TEST(Hamiltonian, SnakeOrderingNeighbours) {
  // 2x3 snake: row 0 -> 0 1 2, row 1 -> 5 4 3
  EXPECT_EQ(snake_site(3, 1, 0), 5U);
  EXPECT_EQ(snake_site(3, 1, 2), 3U);
  const auto e = grid_edges(2, 3);
  const std::vector<std::pair<std::size_t, std::size_t>> expected{{0, 1}, {0, 5}, {1, 2}, {1, 4}, {2, 3}, {3, 4}, {4, 5}};
  EXPECT_EQ(e, expected);
}

TEST(Hamiltonian, SingletAndAllUp) {
  const auto h12 = heisenberg_terms(1, 2);
  Vector singlet = Vector::Zero(4);
  singlet(1) = 1 / std::sqrt(2.0);
  singlet(2) = -1 / std::sqrt(2.0);
  EXPECT_NEAR(energy(singlet, h12), -0.75, 1e-14);
  const auto h33 = heisenberg_terms(3, 3);
  Vector up = Vector::Zero(512);
  up(0) = 1.0;
  EXPECT_NEAR(energy(up, h33), 3.0, 1e-14);
}

TEST(Hamiltonian, DenseMatchesKroneckerOracle) {
  const auto h = heisenberg_terms(2, 2);
  Matrix oracle_h = Matrix::Zero(16, 16);
  for (const auto& t : h.terms) oracle_h += t.coefficient * oracle::pauli_string(t.ops);
  EXPECT_LT((dense_matrix(h) - oracle_h).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_TRUE(linalg::is_hermitian(oracle_h, 1e-14));
}

TEST(Hamiltonian, EnergyMatchesDenseAndVariationalBound) {
  const auto h = heisenberg_terms(2, 3);
  const Matrix hd = dense_matrix(h);
  const auto [e0, v0] = exact_ground_state(h);
  EXPECT_NEAR(energy(v0, h), e0, 1e-10);
  EXPECT_NEAR(energy_error(energy(v0, h), e0), 0.0, 1e-10);
  std::mt19937_64 rng(20);
  for (int k = 0; k < 100; ++k) {
    const Vector psi = oracle::random_state(6, rng);
    const double e = energy(psi, h);
    EXPECT_NEAR(e, psi.dot(hd * psi).real(), 1e-12);
    EXPECT_GE(e, e0 - 1e-9);
  }
}

TEST(Hamiltonian, LanczosPathMatchesDense) {
  const auto h = heisenberg_terms(3, 3);
  const auto [e_iter, v] = exact_ground_state(h);
  const auto dense = linalg::eigh_smallest(dense_matrix(h), 1);
  EXPECT_NEAR(e_iter, dense.values(0), 1e-10);
}

TEST(Hamiltonian, JsonRoundTrip) {
  const auto h = heisenberg_terms(2, 2);
  const auto back = hamiltonian_from_json(to_json(h));
  ASSERT_EQ(back.terms.size(), h.terms.size());
  EXPECT_EQ(back.terms[5].ops, h.terms[5].ops);
  EXPECT_EQ(back.terms[5].coefficient, h.terms[5].coefficient);
}

TEST(Hamiltonian, ShapeMismatchThrows) {
  EXPECT_THROW(energy(Vector::Zero(8), heisenberg_terms(2, 2)), ShapeError);
}
