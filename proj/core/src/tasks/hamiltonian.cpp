#include "tnqc/tasks/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include "tnqc/error.hpp"
#include "tnqc/linalg/decompositions.hpp"

namespace tnqc::tasks {

namespace {

struct PauliMasks {
  std::uint64_t flip = 0;   // X or Y
  std::uint64_t phase = 0;  // Y or Z
  int num_y = 0;
};

PauliMasks masks_of(const PauliTerm& term) {
  PauliMasks m;
  const std::size_t n = term.ops.size();
  for (std::size_t q = 0; q < n; ++q) {
    const std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
    switch (term.ops[q]) {
      case 'I':
        break;
      case 'X':
        m.flip |= bit;
        break;
      case 'Y':
        m.flip |= bit;
        m.phase |= bit;
        ++m.num_y;
        break;
      case 'Z':
        m.phase |= bit;
        break;
      default:
        throw ConfigError(std::string("invalid Pauli label '") + term.ops[q] + "'");
    }
  }
  return m;
}

cplx i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0:
      return {1, 0};
    case 1:
      return {0, 1};
    case 2:
      return {-1, 0};
    default:
      return {0, -1};
  }
}

}  // namespace

std::size_t snake_site(std::size_t cols, std::size_t row, std::size_t col) {
  return row * cols + (row % 2 == 0 ? col : cols - 1 - col);
}

std::vector<std::pair<std::size_t, std::size_t>> grid_edges(std::size_t rows, std::size_t cols) {
  if (rows < 1 || cols < 1) throw ConfigError("grid needs rows, cols >= 1");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t here = snake_site(cols, r, c);
      if (c + 1 < cols) {
        const std::size_t there = snake_site(cols, r, c + 1);
        edges.emplace_back(std::min(here, there), std::max(here, there));
      }
      if (r + 1 < rows) {
        const std::size_t there = snake_site(cols, r + 1, c);
        edges.emplace_back(std::min(here, there), std::max(here, there));
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

void PauliHamiltonian::validate() const {
  for (const auto& t : terms) {
    if (t.ops.size() != num_qubits) throw ShapeError("Pauli term length does not match qubit count");
    if (!std::isfinite(t.coefficient)) throw NumericalInputError("non-finite Pauli coefficient");
    (void)masks_of(t);
  }
}

PauliHamiltonian heisenberg_terms(std::size_t rows, std::size_t cols) {
  if (rows < 1 || cols < 1) throw ConfigError("Heisenberg grid needs rows, cols >= 1");
  if (rows * cols > 20) throw ConfigError("Heisenberg grid larger than 20 sites");
  PauliHamiltonian h{rows * cols, {}};
  for (const auto& [i, j] : grid_edges(rows, cols)) {
    for (char p : {'X', 'Y', 'Z'}) {
      std::string ops(h.num_qubits, 'I');
      ops[i] = ops[j] = p;
      h.terms.push_back({0.25, std::move(ops)});
    }
  }
  return h;
}

Vector apply_pauli(const Vector& psi, const PauliTerm& term) {
  const std::size_t n = term.ops.size();
  if (static_cast<std::size_t>(psi.size()) != (std::size_t{1} << n)) {
    throw ShapeError("apply_pauli: statevector length does not match term");
  }
  const PauliMasks m = masks_of(term);
  const cplx global = i_power(m.num_y);
  Vector out(psi.size());
  for (std::uint64_t x = 0; x < static_cast<std::uint64_t>(psi.size()); ++x) {
    const double sign = (std::popcount(x & m.phase) & 1) ? -1.0 : 1.0;
    out(static_cast<Eigen::Index>(x ^ m.flip)) = global * sign * psi(static_cast<Eigen::Index>(x));
  }
  return out;
}

double energy(const Vector& psi, const PauliHamiltonian& h) {
  if (static_cast<std::size_t>(psi.size()) != (std::size_t{1} << h.num_qubits)) {
    throw ShapeError("energy: statevector length does not match Hamiltonian");
  }
  double total = 0.0;
  for (const auto& term : h.terms) {
    const PauliMasks m = masks_of(term);
    const cplx global = i_power(m.num_y);
    cplx acc = 0.0;
    for (std::uint64_t x = 0; x < static_cast<std::uint64_t>(psi.size()); ++x) {
      const double sign = (std::popcount(x & m.phase) & 1) ? -1.0 : 1.0;
      acc += std::conj(psi(static_cast<Eigen::Index>(x ^ m.flip))) * sign * psi(static_cast<Eigen::Index>(x));
    }
    total += term.coefficient * (global * acc).real();
  }
  return total;
}

Matrix dense_matrix(const PauliHamiltonian& h) {
  if (h.num_qubits > 14) throw SizeGuardError("dense_matrix: more than 14 qubits");
  h.validate();
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << h.num_qubits);
  Matrix out = Matrix::Zero(dim, dim);
  for (const auto& term : h.terms) {
    const PauliMasks m = masks_of(term);
    const cplx global = i_power(m.num_y);
    for (std::uint64_t x = 0; x < static_cast<std::uint64_t>(dim); ++x) {
      const double sign = (std::popcount(x & m.phase) & 1) ? -1.0 : 1.0;
      out(static_cast<Eigen::Index>(x ^ m.flip), static_cast<Eigen::Index>(x)) +=
          term.coefficient * global * sign;
    }
  }
  return out;
}

std::pair<double, Vector> exact_ground_state(const PauliHamiltonian& h) {
  h.validate();
  if (h.num_qubits <= 12) {
    const auto pairs = linalg::eigh_smallest(dense_matrix(h), 1);
    return {pairs.values(0), pairs.vectors.col(0)};
  }
  linalg::LinearOperator op{std::size_t{1} << h.num_qubits, [&h](const Vector& in, Vector& out) {
                              out = Vector::Zero(in.size());
                              for (const auto& term : h.terms) out += term.coefficient * apply_pauli(in, term);
                            }};
  const auto pairs = linalg::eigh_smallest(op, 1);
  return {pairs.values(0), pairs.vectors.col(0)};
}

nlohmann::json to_json(const PauliHamiltonian& h) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : h.terms) terms.push_back({{"coefficient", t.coefficient}, {"ops", t.ops}});
  return {{"num_qubits", h.num_qubits}, {"terms", terms}};
}

PauliHamiltonian hamiltonian_from_json(const nlohmann::json& j) {
  PauliHamiltonian h;
  h.num_qubits = j.at("num_qubits").get<std::size_t>();
  for (const auto& t : j.at("terms")) {
    h.terms.push_back({t.at("coefficient").get<double>(), t.at("ops").get<std::string>()});
  }
  h.validate();
  return h;
}

}  // namespace tnqc::tasks
