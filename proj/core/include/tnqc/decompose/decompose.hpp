#pragma once

#include <cstddef>
#include <vector>

#include "tnqc/circuit/circuit.hpp"
#include "tnqc/mps/mps.hpp"

namespace tnqc::decompose {

/// N - 1 two-qubit unitaries; entry q acts on qubits (q, q + 1) and the gates
/// run in index order.
using LinearLayer = std::vector<Matrix>;

/// Layers U^(k), ..., U^(1) in circuit-execution order, so the newest layer
/// sits at the front and the represented state is U^(1) ... U^(k) |0...0>.
struct LayerStack {
  std::size_t num_qubits = 0;
  std::vector<LinearLayer> layers;
  std::vector<double> fidelity_history;
};

// Relative singular-value cutoff used when applying gates "exactly".
inline constexpr double kExactThreshold = 1e-14;

/// Truncates a copy of the state to bond dimension 2 and returns the staircase
/// layer mapping |0...0> onto that truncation.
LinearLayer extract_layer(const mps::Mps& state);

/// Applies the layer's inverse, gate (N-2, N-1) first, without a bond ceiling.
mps::Mps disentangle(const mps::Mps& state, const LinearLayer& layer, double sv_threshold = kExactThreshold);

/// U^(k)^dagger ... U^(1)^dagger |target>.
mps::Mps apply_inverse(const LayerStack& stack, const mps::Mps& target,
                       double sv_threshold = kExactThreshold);

/// |<0...0| U^(k)^dagger ... U^(1)^dagger |target>|.
double fidelity(const LayerStack& stack, const mps::Mps& target);

struct OptimizeStats {
  std::size_t sweeps_run = 0;
  std::size_t rank_deficient_visits = 0;
};

/// Gate-by-gate environment sweeps; each visit replaces a gate with the
/// unitary maximizing the overlap with every other gate held fixed. Appends the
/// fidelity after each sweep to stack.fidelity_history. Stops early once a
/// sweep gains less than `min_gain`.
LayerStack optimize_stack(LayerStack stack, const mps::Mps& target, std::size_t sweeps,
                          double min_gain = 0.0, OptimizeStats* stats = nullptr);

struct DecomposeConfig {
  std::size_t max_layers = 1;
  double f_target = 1.0;
  std::size_t sweeps_per_layer = 10;
  double min_sweep_gain = 1e-7;
  double sv_threshold = 1e-12;  // residual re-truncation during disentangling

  void validate() const;
};

struct DecomposeResult {
  LayerStack stack;
  circuit::ParamCircuit circuit;
  double fidelity = 0.0;
  bool converged = false;
  std::size_t rank_deficient_visits = 0;
};

/// Layer-by-layer decomposition: extract a layer from the residual, prepend
/// it, optimize the whole stack, recompute the residual; stop after
/// `max_layers` layers or once the fidelity reaches `f_target`.
DecomposeResult decompose_mps(const mps::Mps& target, const DecomposeConfig& config);

/// Linear-layer circuit holding the KAK parameters of every gate.
circuit::ParamCircuit to_circuit(const LayerStack& stack);

}  // namespace tnqc::decompose
