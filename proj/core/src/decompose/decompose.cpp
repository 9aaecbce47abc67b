#include "tnqc/decompose/decompose.hpp"

#include <algorithm>
#include <cmath>

#include "tnqc/error.hpp"
#include "tnqc/linalg/decompositions.hpp"

namespace tnqc::decompose {

namespace {

using mps::Mps;

linalg::Truncation exact(double threshold) { return {linalg::kUnbounded, threshold}; }

// Two-qubit unitary whose column 2 * c equals the given column c of `cols`
// (4 x l, orthonormal) for every c < l; remaining columns complete the basis.
Matrix embed_columns(const Matrix& cols) {
  const Matrix full = linalg::complete_isometry(cols);
  Matrix gate(4, 4);
  const Eigen::Index l = cols.cols();
  Eigen::Index next = l;
  for (Eigen::Index target = 0; target < 4; ++target) {
    if (target % 2 == 0 && target / 2 < l) {
      gate.col(target) = full.col(target / 2);
    } else {
      gate.col(target) = full.col(next++);
    }
  }
  return gate;
}

void check_layer(const LinearLayer& layer, std::size_t n) {
  if (layer.size() + 1 != n) throw ShapeError("layer size does not match qubit count");
}

Mps apply_layer(Mps state, const LinearLayer& layer) {
  for (std::size_t q = 0; q < layer.size(); ++q) {
    state = mps::apply_two_site_gate(state, layer[q], q, exact(kExactThreshold));
  }
  return state;
}

}  // namespace

LinearLayer extract_layer(const Mps& state) {
  const std::size_t n = state.num_sites();
  if (n < 2) throw ShapeError("extract_layer: need at least two qubits");
  // truncate() leaves site 0 as the center, so sites 1..N-1 are right-orthonormal.
  const Mps t = mps::truncate(state, {2, 0.0});

  LinearLayer layer(n - 1);
  for (std::size_t q = 0; q + 1 < n; ++q) {
    const auto& core = t.core(q);
    const std::size_t l = core.dim(0);
    const std::size_t r = core.dim(2);
    // Column for input bond value c has entries at row 2 * s + b.
    Matrix cols = Matrix::Zero(4, static_cast<Eigen::Index>(l));
    for (std::size_t c = 0; c < l; ++c) {
      for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t b = 0; b < r; ++b) cols(2 * s + b, c) = core[(c * 2 + s) * r + b];
      }
    }
    layer[q] = embed_columns(cols);
  }

  // The last site is a 2 x r isometry acting on qubit N-1 after the final gate.
  const auto& last = t.core(n - 1);
  const std::size_t r = last.dim(0);
  Matrix iso(2, static_cast<Eigen::Index>(r));
  for (std::size_t b = 0; b < r; ++b) {
    for (std::size_t s = 0; s < 2; ++s) iso(s, b) = last[b * 2 + s];
  }
  const Matrix u_last = linalg::complete_isometry(iso);
  Matrix local = Matrix::Zero(4, 4);
  local.block(0, 0, 2, 2) = u_last;
  local.block(2, 2, 2, 2) = u_last;
  layer[n - 2] = local * layer[n - 2];
  return layer;
}

Mps disentangle(const Mps& state, const LinearLayer& layer, double sv_threshold) {
  check_layer(layer, state.num_sites());
  Mps out = state;
  for (std::size_t q = layer.size(); q-- > 0;) {
    out = mps::apply_two_site_gate(out, layer[q].adjoint(), q, exact(sv_threshold));
  }
  return out;
}

Mps apply_inverse(const LayerStack& stack, const Mps& target, double sv_threshold) {
  if (stack.num_qubits != target.num_sites()) throw ShapeError("layer stack and target differ in size");
  Mps out = target;
  for (auto it = stack.layers.rbegin(); it != stack.layers.rend(); ++it) {
    out = disentangle(out, *it, sv_threshold);
  }
  return out;
}

double fidelity(const LayerStack& stack, const Mps& target) {
  const Mps residual = apply_inverse(stack, target);
  return std::abs(mps::amplitude(residual, Bitstring(0, target.num_sites())));
}

LayerStack optimize_stack(LayerStack stack, const Mps& target, std::size_t sweeps, double min_gain,
                          OptimizeStats* stats) {
  if (stack.layers.empty()) throw ConfigError("optimize_stack: empty stack");
  const std::size_t n = stack.num_qubits;
  if (target.num_sites() != n) throw ShapeError("optimize_stack: size mismatch");
  const std::size_t depth = stack.layers.size();
  OptimizeStats local;

  double previous = fidelity(stack, target);
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    // bra[p] = layers[p+1..] applied to |0>, i.e. everything executed before layer p.
    std::vector<Mps> bra(depth);
    Mps acc = Mps::zeros(n);
    for (std::size_t p = 0; p < depth; ++p) {
      bra[p] = acc;
      acc = apply_layer(acc, stack.layers[p]);
    }

    Mps ket = target;
    for (std::size_t p = depth; p-- > 0;) {
      LinearLayer& layer = stack.layers[p];
      std::vector<Mps> prefix(n - 1);
      prefix[0] = bra[p];
      for (std::size_t q = 0; q + 2 < n; ++q) {
        prefix[q + 1] = mps::apply_two_site_gate(prefix[q], layer[q], q, exact(kExactThreshold));
      }
      for (std::size_t q = n - 1; q-- > 0;) {
        // overlap = tr(conj(g) R); the maximizing unitary is conj(V U^dagger).
        const Matrix env = mps::two_site_environment(prefix[q], ket, q);
        Eigen::JacobiSVD<Matrix> svd(env, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& s = svd.singularValues();
        if (s(0) <= 1e-300) {
          ++local.rank_deficient_visits;
          ket = mps::apply_two_site_gate(ket, layer[q].adjoint(), q, exact(kExactThreshold));
          continue;
        }
        if (s(3) <= 1e-12 * s(0)) ++local.rank_deficient_visits;
        layer[q] = (svd.matrixV() * svd.matrixU().adjoint()).conjugate();
        ket = mps::apply_two_site_gate(ket, layer[q].adjoint(), q, exact(kExactThreshold));
      }
    }
    ++local.sweeps_run;
    const double now = std::abs(mps::amplitude(ket, Bitstring(0, n)));
    stack.fidelity_history.push_back(now);
    const bool stalled = now - previous < min_gain;
    previous = now;
    if (stalled) break;
  }
  if (stats) {
    stats->sweeps_run += local.sweeps_run;
    stats->rank_deficient_visits += local.rank_deficient_visits;
  }
  return stack;
}

void DecomposeConfig::validate() const {
  if (max_layers < 1) throw ConfigError("decompose: max_layers must be >= 1");
  if (!(f_target > 0.0 && f_target <= 1.0)) throw ConfigError("decompose: f_target must be in (0, 1]");
  if (!(sv_threshold >= 0.0)) throw ConfigError("decompose: sv_threshold must be >= 0");
  if (!(min_sweep_gain >= 0.0)) throw ConfigError("decompose: min_sweep_gain must be >= 0");
}

DecomposeResult decompose_mps(const Mps& target_in, const DecomposeConfig& config) {
  config.validate();
  const std::size_t n = target_in.num_sites();
  if (n < 2) throw ShapeError("decompose_mps: need at least two qubits");
  const Mps target = mps::canonicalize(target_in, 0);

  DecomposeResult result;
  result.stack.num_qubits = n;
  Mps residual = target;
  double current = std::abs(mps::amplitude(target, Bitstring(0, n)));
  OptimizeStats stats;

  for (std::size_t k = 0; k < config.max_layers; ++k) {
    LayerStack with_layer = result.stack;
    with_layer.layers.insert(with_layer.layers.begin(), extract_layer(residual));
    double f = fidelity(with_layer, target);
    // An identity layer never lowers the fidelity; fall back to it if the
    // analytic layer would.
    if (f < current) {
      with_layer.layers.front() = LinearLayer(n - 1, Matrix::Identity(4, 4));
      f = current;
    }
    with_layer.fidelity_history.push_back(f);
    with_layer = optimize_stack(std::move(with_layer), target, config.sweeps_per_layer,
                                config.min_sweep_gain, &stats);
    result.stack = std::move(with_layer);
    residual = apply_inverse(result.stack, target, config.sv_threshold);
    current = std::abs(mps::amplitude(residual, Bitstring(0, n)));
    if (current >= config.f_target) {
      result.converged = true;
      break;
    }
  }
  result.fidelity = fidelity(result.stack, target);
  result.rank_deficient_visits = stats.rank_deficient_visits;
  result.circuit = to_circuit(result.stack);
  return result;
}

circuit::ParamCircuit to_circuit(const LayerStack& stack) {
  std::vector<circuit::Layer> layers;
  for (const auto& layer : stack.layers) {
    circuit::Layer out;
    out.topology = circuit::Topology::kLinear;
    for (std::size_t q = 0; q < layer.size(); ++q) {
      const auto kak = circuit::kak_decompose(layer[q]);
      out.gates.push_back({q, q + 1, kak.theta, kak.phase});
    }
    layers.push_back(std::move(out));
  }
  return circuit::ParamCircuit(stack.num_qubits, std::move(layers));
}

}  // namespace tnqc::decompose
