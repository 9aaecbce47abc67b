#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tnqc/linalg/tensor.hpp"
#include "tnqc/mps/mps.hpp"
#include "tnqc/tasks/hamiltonian.hpp"

namespace tnqc::ground_state {

/// Matrix product operator; cores have axes (left, physical out, physical in, right).
struct Mpo {
  std::vector<linalg::DenseTensor> cores;

  [[nodiscard]] std::size_t num_sites() const noexcept { return cores.size(); }
  [[nodiscard]] std::vector<std::size_t> bond_dims() const;
};

/// MPO of a Hamiltonian made of one- and two-qubit Pauli terms, built as a
/// finite automaton with one open channel per (first qubit, Pauli) pair.
Mpo mpo_from_pauli(const tasks::PauliHamiltonian& h);

/// Heisenberg model on an open rows x cols grid in snake ordering.
Mpo heisenberg_mpo(std::size_t rows, std::size_t cols);

/// Dense 2^N x 2^N form, N <= 12.
Matrix dense_mpo(const Mpo& mpo);

/// <psi|H|psi> / <psi|psi>.
double energy_of_mps(const mps::Mps& state, const Mpo& mpo);

struct DmrgConfig {
  std::size_t chi_max = 16;
  std::size_t sweeps = 10;
  double sv_threshold = 0.0;
  double energy_tol = 1e-12;  // stop once a full sweep changes the energy by less
  std::uint64_t seed = 0;

  void validate() const;
};

struct DmrgResult {
  mps::Mps state;
  double energy = 0.0;
  std::vector<double> half_sweep_energies;
};

/// Two-site DMRG from a seeded random state.
DmrgResult dmrg_ground_state(const Mpo& mpo, const DmrgConfig& config);

}  // namespace tnqc::ground_state
