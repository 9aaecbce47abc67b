#include "tnqc/ground_state/dmrg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "tnqc/error.hpp"
#include "tnqc/linalg/decompositions.hpp"

namespace tnqc::ground_state {

namespace {

using linalg::DenseTensor;
using mps::Mps;

Matrix pauli_matrix(char p) {
  Matrix m = Matrix::Zero(2, 2);
  switch (p) {
    case 'I': m(0, 0) = m(1, 1) = 1.0; break;
    case 'X': m(0, 1) = m(1, 0) = 1.0; break;
    case 'Y': m(0, 1) = cplx(0, -1); m(1, 0) = cplx(0, 1); break;
    case 'Z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    default: throw ConfigError(std::string("unknown Pauli label '") + p + "'");
  }
  return m;
}

void add_block(DenseTensor& w, std::size_t l, std::size_t r, const Matrix& op) {
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t t = 0; t < 2; ++t) w.at({l, s, t, r}) += op(s, t);
  }
}

// Left environment after absorbing one site: E'(a', w', b') =
// sum conj(A(a, s, a')) E(a, w, b) W(w, s, t, w') B(b, t, b').
DenseTensor grow_left(const DenseTensor& env, const DenseTensor& bra, const DenseTensor& w,
                      const DenseTensor& ket) {
  const DenseTensor t1 = linalg::contract(env, ket, {{2, 0}});             // (a, w, t, b')
  const DenseTensor t2 = linalg::contract(t1, w, {{1, 0}, {2, 2}});        // (a, b', s, w')
  return linalg::contract(bra.conj(), t2, {{0, 0}, {1, 2}}).permuted({0, 2, 1});  // (a', w', b')
}

// Right environment: E'(a, w, b) = sum conj(A(a, s, a')) W(w, s, t, w') B(b, t, b') E(a', w', b').
DenseTensor grow_right(const DenseTensor& env, const DenseTensor& bra, const DenseTensor& w,
                       const DenseTensor& ket) {
  const DenseTensor t1 = linalg::contract(ket, env, {{2, 2}});             // (b, t, a', w')
  const DenseTensor t2 = linalg::contract(w, t1, {{2, 1}, {3, 3}});        // (w, s, b, a')
  return linalg::contract(bra.conj(), t2, {{1, 1}, {2, 3}});               // (a, w, b)
}

DenseTensor unit_env() { return DenseTensor({1, 1, 1}, {cplx(1.0, 0.0)}); }

// Effective Hamiltonian of the merged pair as a dense (l*4*r) matrix.
Matrix effective_hamiltonian(const DenseTensor& left, const DenseTensor& w1, const DenseTensor& w2,
                             const DenseTensor& right) {
  // left (a, w, a'), right (b, w'', b'); rows index the bra (a, s, t, b).
  const DenseTensor t1 = linalg::contract(left, w1, {{1, 0}});       // (a, a', s, s', w')
  const DenseTensor t2 = linalg::contract(t1, w2, {{4, 0}});         // (a, a', s, s', t, t', w'')
  const DenseTensor t3 = linalg::contract(t2, right, {{6, 1}});      // (a, a', s, s', t, t', b, b')
  const DenseTensor h = t3.permuted({0, 2, 4, 6, 1, 3, 5, 7});
  return h.as_matrix(4);
}

}  // namespace

std::vector<std::size_t> Mpo::bond_dims() const {
  std::vector<std::size_t> out;
  for (const auto& c : cores) out.push_back(c.dim(0));
  if (!cores.empty()) out.push_back(cores.back().dim(3));
  return out;
}

Mpo mpo_from_pauli(const tasks::PauliHamiltonian& h) {
  h.validate();
  const std::size_t n = h.num_qubits;
  if (n < 1) throw ConfigError("mpo_from_pauli: no qubits");

  struct TwoBody {
    std::size_t a, b;
    char pa, pb;
    double coef;
  };
  std::vector<TwoBody> pairs;
  std::vector<std::vector<std::pair<char, double>>> local(n);
  for (const auto& term : h.terms) {
    std::vector<std::size_t> support;
    for (std::size_t q = 0; q < n; ++q) {
      if (term.ops[q] != 'I') support.push_back(q);
    }
    if (support.size() == 1) {
      local[support[0]].emplace_back(term.ops[support[0]], term.coefficient);
    } else if (support.size() == 2) {
      pairs.push_back({support[0], support[1], term.ops[support[0]], term.ops[support[1]], term.coefficient});
    } else if (!support.empty()) {
      throw ConfigError("mpo_from_pauli: only one- and two-qubit terms are supported");
    }
  }

  // Channels on bond b (between sites b and b+1): 0 = nothing placed yet,
  // 1 = term finished, then one per open (first qubit, Pauli) with b in [a, b_end).
  using Channel = std::pair<std::size_t, char>;
  std::vector<std::map<Channel, std::size_t>> channels(n > 0 ? n - 1 : 0);
  for (const auto& p : pairs) {
    for (std::size_t bond = p.a; bond < p.b; ++bond) channels[bond].emplace(Channel{p.a, p.pa}, 0);
  }
  for (auto& bond : channels) {
    std::size_t next = 2;
    for (auto& [key, idx] : bond) idx = next++;
  }
  const auto bond_size = [&](std::size_t bond) { return channels[bond].size() + 2; };

  Mpo mpo;
  const Matrix id = pauli_matrix('I');
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t dl = i == 0 ? 1 : bond_size(i - 1);
    const std::size_t dr = i + 1 == n ? 1 : bond_size(i);
    // Boundary cores keep only the "start" row and the "finished" column.
    const auto lrow = [&](std::size_t ch) -> std::ptrdiff_t {
      if (i == 0) return ch == 0 ? 0 : -1;
      return static_cast<std::ptrdiff_t>(ch);
    };
    const auto rcol = [&](std::size_t ch) -> std::ptrdiff_t {
      if (i + 1 == n) return ch == 1 ? 0 : -1;
      return static_cast<std::ptrdiff_t>(ch);
    };
    DenseTensor w({dl, 2, 2, dr});
    const auto put = [&](std::ptrdiff_t l, std::ptrdiff_t r, const Matrix& op) {
      if (l >= 0 && r >= 0) add_block(w, static_cast<std::size_t>(l), static_cast<std::size_t>(r), op);
    };
    put(lrow(0), rcol(0), id);
    put(lrow(1), rcol(1), id);
    for (const auto& [p, c] : local[i]) put(lrow(0), rcol(1), c * pauli_matrix(p));
    if (i + 1 < n) {
      for (const auto& [key, idx] : channels[i]) {
        if (key.first == i) put(lrow(0), rcol(idx), pauli_matrix(key.second));
      }
    }
    if (i > 0) {
      for (const auto& [key, idx] : channels[i - 1]) {
        if (i + 1 < n) {
          const auto carry = channels[i].find(key);
          if (carry != channels[i].end()) put(lrow(idx), rcol(carry->second), id);
        }
        for (const auto& p : pairs) {
          if (p.b == i && p.a == key.first && p.pa == key.second) {
            put(lrow(idx), rcol(1), p.coef * pauli_matrix(p.pb));
          }
        }
      }
    }
    mpo.cores.push_back(std::move(w));
  }
  return mpo;
}

Mpo heisenberg_mpo(std::size_t rows, std::size_t cols) {
  if (rows < 1 || cols < 1) throw ConfigError("heisenberg_mpo: rows and cols must be >= 1");
  return mpo_from_pauli(tasks::heisenberg_terms(rows, cols));
}

Matrix dense_mpo(const Mpo& mpo) {
  const std::size_t n = mpo.num_sites();
  if (n > 12) throw SizeGuardError("dense_mpo: more than 12 sites");
  // acc axes: (out, in, right bond) with out/in growing site by site.
  DenseTensor acc = DenseTensor({1, 1, 1}, {cplx(1.0, 0.0)});
  std::size_t dim = 1;
  for (const auto& w : mpo.cores) {
    const DenseTensor t = linalg::contract(acc, w, {{2, 0}});  // (out, in, s, t, r)
    const std::size_t r = w.dim(3);
    acc = t.permuted({0, 2, 1, 3, 4}).reshaped({dim * 2, dim * 2, r});
    dim *= 2;
  }
  return acc.reshaped({dim, dim}).as_matrix(1);
}

double energy_of_mps(const Mps& state, const Mpo& mpo) {
  if (state.num_sites() != mpo.num_sites()) throw ShapeError("energy_of_mps: length mismatch");
  DenseTensor env = unit_env();
  for (std::size_t i = 0; i < state.num_sites(); ++i) {
    env = grow_left(env, state.core(i), mpo.cores[i], state.core(i));
  }
  const double norm2 = mps::inner(state, state).real();
  if (!(norm2 > 0.0)) throw NormalizationError("energy_of_mps: zero state");
  return env[0].real() / norm2;
}

void DmrgConfig::validate() const {
  if (chi_max < 1) throw ConfigError("dmrg: chi_max must be >= 1");
  if (sweeps < 1) throw ConfigError("dmrg: sweeps must be >= 1");
  if (!(sv_threshold >= 0.0)) throw ConfigError("dmrg: sv_threshold must be >= 0");
}

DmrgResult dmrg_ground_state(const Mpo& mpo, const DmrgConfig& config) {
  config.validate();
  const std::size_t n = mpo.num_sites();
  if (n < 2) throw ConfigError("dmrg: need at least two sites");
  Rng rng(config.seed);
  std::vector<DenseTensor> cores = Mps::random(n, config.chi_max, rng).cores();

  std::vector<DenseTensor> left(n + 1);
  std::vector<DenseTensor> right(n + 1);
  left[0] = unit_env();
  right[n] = unit_env();
  for (std::size_t i = n; i-- > 2;) right[i] = grow_right(right[i + 1], cores[i], mpo.cores[i], cores[i]);

  const linalg::Truncation trunc{config.chi_max, config.sv_threshold};
  DmrgResult result;
  double energy = 0.0;

  const auto solve = [&](std::size_t i, bool moving_right) {
    const std::size_t l = cores[i].dim(0);
    const std::size_t r = cores[i + 1].dim(2);
    const Matrix h = effective_hamiltonian(left[i], mpo.cores[i], mpo.cores[i + 1], right[i + 2]);
    const auto eig = linalg::eigh_smallest(h, 1);
    energy = eig.values(0);
    const DenseTensor theta = DenseTensor::from_vector(eig.vectors.col(0)).reshaped({l * 2, 2 * r});
    const auto svd = linalg::svd_truncated(theta.as_matrix(1), trunc);
    const auto k = static_cast<std::size_t>(svd.singular_values.size());
    Matrix s = svd.singular_values.cast<cplx>().asDiagonal();
    s /= svd.singular_values.norm();
    const Matrix a = moving_right ? svd.left : Matrix(svd.left * s);
    const Matrix b = moving_right ? Matrix(s * svd.right) : svd.right;
    cores[i] = DenseTensor::from_matrix(a).reshaped({l, 2, k});
    cores[i + 1] = DenseTensor::from_matrix(b).reshaped({k, 2, r});
  };

  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t sweep = 0; sweep < config.sweeps; ++sweep) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      solve(i, true);
      left[i + 1] = grow_left(left[i], cores[i], mpo.cores[i], cores[i]);
    }
    result.half_sweep_energies.push_back(energy);
    for (std::size_t i = n - 1; i-- > 0;) {
      solve(i, false);
      right[i + 1] = grow_right(right[i + 2], cores[i + 1], mpo.cores[i + 1], cores[i + 1]);
    }
    result.half_sweep_energies.push_back(energy);
    if (std::abs(previous - energy) < config.energy_tol) break;
    previous = energy;
  }

  result.state = Mps(std::move(cores), 0, config.chi_max);
  result.energy = energy_of_mps(result.state, mpo);
  return result;
}

}  // namespace tnqc::ground_state
