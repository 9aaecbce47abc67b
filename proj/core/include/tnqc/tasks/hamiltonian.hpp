#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tnqc/linalg/tensor.hpp"

namespace tnqc::tasks {

/// Chain position of grid cell (row, col) under snake ordering: row-major
/// with the direction alternating from row to row.
std::size_t snake_site(std::size_t cols, std::size_t row, std::size_t col);

/// Nearest-neighbour pairs (i < j) of an open rows x cols grid in chain
/// coordinates, sorted lexicographically.
std::vector<std::pair<std::size_t, std::size_t>> grid_edges(std::size_t rows, std::size_t cols);

struct PauliTerm {
  double coefficient = 0.0;
  std::string ops;  // one of I, X, Y, Z per qubit, qubit 0 first
};

struct PauliHamiltonian {
  std::size_t num_qubits = 0;
  std::vector<PauliTerm> terms;

  void validate() const;
};

/// H = 1/4 sum_<ij> (X_i X_j + Y_i Y_j + Z_i Z_j) on an open grid.
PauliHamiltonian heisenberg_terms(std::size_t rows, std::size_t cols);

/// P|psi> for a single Pauli string (coefficient ignored).
Vector apply_pauli(const Vector& psi, const PauliTerm& term);

/// <psi|H|psi>; the imaginary residue is discarded.
double energy(const Vector& psi, const PauliHamiltonian& h);

inline double energy_error(double energy_value, double ground_energy) {
  return energy_value - ground_energy;
}

/// Dense 2^N x 2^N matrix, N <= 14.
Matrix dense_matrix(const PauliHamiltonian& h);

/// Smallest eigenvalue (and vector) by exact diagonalization. Uses a
/// matrix-free Lanczos solve above 12 qubits.
std::pair<double, Vector> exact_ground_state(const PauliHamiltonian& h);

nlohmann::json to_json(const PauliHamiltonian& h);
PauliHamiltonian hamiltonian_from_json(const nlohmann::json& j);

}  // namespace tnqc::tasks
