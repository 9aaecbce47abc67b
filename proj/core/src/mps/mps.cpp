#include "tnqc/mps/mps.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "tnqc/error.hpp"

namespace tnqc {

Bitstring::Bitstring(std::uint64_t index, std::size_t length) : index_(index), length_(length) {
  if (length > 63) throw ShapeError("Bitstring: at most 63 bits are supported");
  if (length < 64 && (index >> length) != 0) throw ShapeError("Bitstring: index exceeds length");
}

Bitstring Bitstring::from_string(const std::string& text) {
  std::uint64_t index = 0;
  for (char c : text) {
    if (c != '0' && c != '1') throw ShapeError("Bitstring: invalid character '" + std::string(1, c) + "'");
    index = (index << 1U) | static_cast<std::uint64_t>(c == '1');
  }
  return {index, text.size()};
}

std::string Bitstring::to_string() const {
  std::string out(length_, '0');
  for (std::size_t i = 0; i < length_; ++i) out[i] = (*this)[i] ? '1' : '0';
  return out;
}

}  // namespace tnqc

namespace tnqc::mps {

namespace {

using linalg::Shape;
using linalg::svd_truncated;

// Core slice A[:, s, :] as an l x r matrix.
Matrix slice(const DenseTensor& core, int s) {
  const std::size_t l = core.dim(0);
  const std::size_t r = core.dim(2);
  Matrix m(l, r);
  for (std::size_t a = 0; a < l; ++a) {
    for (std::size_t b = 0; b < r; ++b) m(a, b) = core[(a * 2 + s) * r + b];
  }
  return m;
}

DenseTensor core_from_rows(const Matrix& m, std::size_t l, std::size_t r) {
  // m is (l*2) x r.
  return DenseTensor::from_matrix(m).reshaped({l, 2, r});
}

DenseTensor core_from_cols(const Matrix& m, std::size_t l, std::size_t r) {
  // m is l x (2*r).
  return DenseTensor::from_matrix(m).reshaped({l, 2, r});
}

Matrix thin_q(const Matrix& m, Eigen::Index k) {
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ() * Matrix::Identity(m.rows(), k);
}

// Left-orthonormalizes `site` and pushes the remainder into site + 1.
void shift_right(std::vector<DenseTensor>& cores, std::size_t site) {
  const DenseTensor& core = cores[site];
  const std::size_t l = core.dim(0);
  const Matrix m = core.as_matrix(2);  // (l*2) x r
  const Eigen::Index k = std::min<Eigen::Index>(m.rows(), m.cols());
  const Matrix q = thin_q(m, k);
  const Matrix rest = q.adjoint() * m;  // k x r
  cores[site] = core_from_rows(q, l, static_cast<std::size_t>(k));
  DenseTensor& next = cores[site + 1];
  const std::size_t r2 = next.dim(2);
  const Matrix merged = rest * next.as_matrix(1);  // k x (2*r2)
  next = core_from_cols(merged, static_cast<std::size_t>(k), r2);
}

// Right-orthonormalizes `site` and pushes the remainder into site - 1.
void shift_left(std::vector<DenseTensor>& cores, std::size_t site) {
  const DenseTensor& core = cores[site];
  const std::size_t r = core.dim(2);
  const Matrix m = core.as_matrix(1);  // l x (2*r)
  const Eigen::Index k = std::min<Eigen::Index>(m.rows(), m.cols());
  const Matrix q = thin_q(m.adjoint(), k);  // (2r) x k
  const Matrix rest = m * q;                // l x k, m = rest * q^dagger
  cores[site] = core_from_cols(q.adjoint(), static_cast<std::size_t>(k), r);
  DenseTensor& prev = cores[site - 1];
  const std::size_t l0 = prev.dim(0);
  const Matrix merged = prev.as_matrix(2) * rest;  // (l0*2) x k
  prev = core_from_rows(merged, l0, static_cast<std::size_t>(k));
}

void normalize_core(DenseTensor& core) {
  const double n = core.norm();
  if (n == 0.0) throw NormalizationError("MPS has zero norm");
  core = core.scaled(1.0 / n);
}

std::size_t bounded_chi(const Truncation& trunc) { return trunc.chi_max; }

}  // namespace

Mps::Mps(std::vector<DenseTensor> cores, std::optional<std::size_t> gauge_center,
         std::size_t chi_max)
    : cores_(std::move(cores)), center_(gauge_center), chi_max_(chi_max) {
  if (cores_.empty()) throw ShapeError("MPS needs at least one site");
  for (std::size_t i = 0; i < cores_.size(); ++i) {
    const auto& c = cores_[i];
    if (c.rank() != 3 || c.dim(1) != 2) throw ShapeError("MPS core must have shape (l, 2, r)");
    if (i == 0 && c.dim(0) != 1) throw ShapeError("first MPS core must have left bond 1");
    if (i + 1 == cores_.size() && c.dim(2) != 1) throw ShapeError("last MPS core must have right bond 1");
    if (i > 0 && cores_[i - 1].dim(2) != c.dim(0)) throw ShapeError("inconsistent MPS bond dimensions");
  }
  if (center_ && *center_ >= cores_.size()) throw ShapeError("gauge center out of range");
}

Mps Mps::product_state(const Bitstring& bits) {
  if (bits.size() == 0) throw ShapeError("product state needs at least one site");
  std::vector<DenseTensor> cores;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    DenseTensor c({1, 2, 1});
    c[static_cast<std::size_t>(bits[i])] = 1.0;
    cores.push_back(std::move(c));
  }
  return Mps(std::move(cores), 0, 1);
}

Mps Mps::zeros(std::size_t num_sites) { return product_state(Bitstring(0, num_sites)); }

Mps Mps::ghz(std::size_t num_sites) {
  if (num_sites == 0) throw ShapeError("GHZ state needs at least one site");
  const double amp = 1.0 / std::sqrt(2.0);
  if (num_sites == 1) {
    return Mps({DenseTensor({1, 2, 1}, {amp, amp})}, 0, 1);
  }
  std::vector<DenseTensor> cores;
  for (std::size_t i = 0; i < num_sites; ++i) {
    const std::size_t l = i == 0 ? 1 : 2;
    const std::size_t r = i + 1 == num_sites ? 1 : 2;
    DenseTensor c({l, 2, r});
    for (std::size_t s = 0; s < 2; ++s) {
      const std::size_t a = l == 1 ? 0 : s;
      const std::size_t b = r == 1 ? 0 : s;
      c.at({a, s, b}) = i == 0 ? amp : 1.0;
    }
    cores.push_back(std::move(c));
  }
  return Mps(std::move(cores), 0, 2);
}

Mps Mps::random(std::size_t num_sites, std::size_t bond_dim, Rng& rng) {
  if (num_sites == 0 || bond_dim == 0) throw ConfigError("random MPS needs sites and bond >= 1");
  std::normal_distribution<double> gauss;
  std::vector<std::size_t> bonds(num_sites + 1, 1);
  for (std::size_t i = 1; i < num_sites; ++i) {
    const std::size_t left_cap = i < 63 ? (std::size_t{1} << i) : bond_dim;
    const std::size_t right_cap = num_sites - i < 63 ? (std::size_t{1} << (num_sites - i)) : bond_dim;
    bonds[i] = std::min({bond_dim, left_cap, right_cap});
  }
  std::vector<DenseTensor> cores;
  for (std::size_t i = 0; i < num_sites; ++i) {
    DenseTensor c({bonds[i], 2, bonds[i + 1]});
    for (auto& x : c.data()) x = cplx(gauss(rng), gauss(rng));
    cores.push_back(std::move(c));
  }
  return canonicalize(Mps(std::move(cores), std::nullopt, bond_dim), 0);
}

std::vector<std::size_t> Mps::bond_dims() const {
  std::vector<std::size_t> out;
  out.reserve(cores_.size() + 1);
  for (const auto& c : cores_) out.push_back(c.dim(0));
  out.push_back(cores_.back().dim(2));
  return out;
}

std::size_t Mps::max_bond() const {
  const auto b = bond_dims();
  return *std::max_element(b.begin(), b.end());
}

bool Mps::satisfies_gauge(double tol) const {
  if (!center_) return std::abs(inner(*this, *this) - 1.0) <= tol;
  const std::size_t c = *center_;
  for (std::size_t i = 0; i < cores_.size(); ++i) {
    if (i < c) {
      const Matrix m = cores_[i].as_matrix(2);
      if ((m.adjoint() * m - Matrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff() > tol) {
        return false;
      }
    } else if (i > c) {
      const Matrix m = cores_[i].as_matrix(1);
      if ((m * m.adjoint() - Matrix::Identity(m.rows(), m.rows())).cwiseAbs().maxCoeff() > tol) {
        return false;
      }
    } else if (std::abs(cores_[i].norm() - 1.0) > tol) {
      return false;
    }
  }
  return true;
}

Mps from_statevector(const Vector& psi, const Truncation& trunc) {
  const auto size = static_cast<std::size_t>(psi.size());
  if (size < 2 || (size & (size - 1)) != 0) throw ShapeError("statevector length must be 2^N, N >= 1");
  std::size_t n = 0;
  while ((std::size_t{1} << n) < size) ++n;
  if (n > kMaxDenseSites) throw SizeGuardError("from_statevector: more than 20 qubits");
  if (std::abs(psi.norm() - 1.0) > 1e-8) throw NormalizationError("from_statevector: input is not normalized");
  if (trunc.chi_max < 1) throw ConfigError("chi_max must be >= 1");

  std::vector<DenseTensor> cores;
  RowMajorMatrix rest = Eigen::Map<const RowMajorMatrix>(psi.data(), 1, psi.size());
  std::size_t left = 1;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Eigen::Index cols = rest.size() / static_cast<Eigen::Index>(2 * left);
    const Matrix m = Eigen::Map<const RowMajorMatrix>(rest.data(), static_cast<Eigen::Index>(2 * left), cols);
    const auto svd = svd_truncated(m, trunc);
    const auto k = static_cast<std::size_t>(svd.singular_values.size());
    cores.push_back(core_from_rows(svd.left, left, k));
    rest = svd.singular_values.cast<cplx>().asDiagonal() * svd.right;
    left = k;
  }
  cores.push_back(DenseTensor({left, 2, 1}, std::vector<cplx>(rest.data(), rest.data() + rest.size())));
  normalize_core(cores.back());
  return Mps(std::move(cores), n - 1, bounded_chi(trunc));
}

Vector to_statevector(const Mps& mps) {
  const std::size_t n = mps.num_sites();
  if (n > kMaxDenseSites) throw SizeGuardError("to_statevector: more than 20 qubits");
  RowMajorMatrix acc = RowMajorMatrix::Ones(1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const DenseTensor& c = mps.core(i);
    const RowMajorMatrix next = acc * c.as_matrix(1);  // (2^i) x (2 * r)
    acc = Eigen::Map<const RowMajorMatrix>(next.data(), next.rows() * 2,
                                           next.cols() / 2);
  }
  return Eigen::Map<const Vector>(acc.data(), acc.size());
}

cplx amplitude(const Mps& mps, const Bitstring& x) {
  if (x.size() != mps.num_sites()) {
    throw ShapeError("amplitude: bitstring length " + std::to_string(x.size()) +
                     " does not match " + std::to_string(mps.num_sites()) + " sites");
  }
  Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Ones(1);
  for (std::size_t i = 0; i < mps.num_sites(); ++i) {
    v = v * slice(mps.core(i), x[i]);
  }
  return v(0);
}

cplx inner(const Mps& a, const Mps& b) {
  if (a.num_sites() != b.num_sites()) throw ShapeError("inner: site count mismatch");
  Matrix env = Matrix::Ones(1, 1);
  for (std::size_t i = 0; i < a.num_sites(); ++i) {
    Matrix next = Matrix::Zero(a.core(i).dim(2), b.core(i).dim(2));
    for (int s = 0; s < 2; ++s) next.noalias() += slice(a.core(i), s).adjoint() * env * slice(b.core(i), s);
    env = std::move(next);
  }
  return env(0, 0);
}

Mps canonicalize(const Mps& mps, std::size_t center) {
  const std::size_t n = mps.num_sites();
  if (center >= n) throw ShapeError("canonicalize: center out of range");
  std::vector<DenseTensor> cores = mps.cores();
  std::size_t left_from = 0;
  std::size_t right_from = n - 1;
  if (const auto current = mps.gauge_center()) {
    // Only the cores between the old and new center need new gauges.
    left_from = *current < center ? *current : center;
    right_from = *current > center ? *current : center;
  }
  for (std::size_t i = left_from; i < center; ++i) shift_right(cores, i);
  for (std::size_t i = right_from; i > center; --i) shift_left(cores, i);
  normalize_core(cores[center]);
  return Mps(std::move(cores), center, mps.chi_max());
}

Mps truncate(const Mps& mps, const Truncation& trunc) {
  if (trunc.chi_max < 1) throw ConfigError("truncate: chi_max must be >= 1");
  const std::size_t n = mps.num_sites();
  Mps canon = canonicalize(mps, n - 1);
  std::vector<DenseTensor> cores = canon.cores();
  for (std::size_t i = n - 1; i > 0; --i) {
    const DenseTensor& core = cores[i];
    const std::size_t r = core.dim(2);
    const auto svd = svd_truncated(core.as_matrix(1), trunc);
    const auto k = static_cast<std::size_t>(svd.singular_values.size());
    cores[i] = core_from_cols(svd.right, k, r);
    DenseTensor& prev = cores[i - 1];
    const std::size_t l0 = prev.dim(0);
    const Matrix us = svd.left * svd.singular_values.cast<cplx>().asDiagonal();
    prev = core_from_rows(prev.as_matrix(2) * us, l0, k);
  }
  normalize_core(cores[0]);
  return Mps(std::move(cores), 0, trunc.chi_max);
}

namespace {

class SequentialSampler {
 public:
  explicit SequentialSampler(const Mps& mps) : canon_(canonicalize(mps, 0)) {
    for (const auto& core : canon_.cores()) slices_.push_back({slice(core, 0), slice(core, 1)});
  }

  Bitstring draw(Rng& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const std::size_t n = canon_.num_sites();
    Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Ones(1);
    std::uint64_t index = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::RowVectorXcd w0 = v * slices_[i][0];
      Eigen::RowVectorXcd w1 = v * slices_[i][1];
      const double p0 = w0.squaredNorm();
      const double p1 = w1.squaredNorm();
      const int bit = uniform(rng) * (p0 + p1) < p0 ? 0 : 1;
      index = (index << 1U) | static_cast<std::uint64_t>(bit);
      v = bit == 0 ? w0 / std::sqrt(p0) : w1 / std::sqrt(p1);
    }
    return {index, n};
  }

 private:
  Mps canon_;
  std::vector<std::array<Matrix, 2>> slices_;
};

}  // namespace

Bitstring sample(const Mps& mps, Rng& rng) { return SequentialSampler(mps).draw(rng); }

std::vector<Bitstring> sample(const Mps& mps, Rng& rng, std::size_t count) {
  SequentialSampler sampler(mps);
  std::vector<Bitstring> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler.draw(rng));
  return out;
}

Mps apply_two_site_gate(const Mps& mps, const Matrix& u, std::size_t site, const Truncation& trunc) {
  if (u.rows() != 4 || u.cols() != 4) throw ShapeError("apply_two_site_gate: gate must be 4x4");
  if (!linalg::is_unitary(u, 1e-10)) throw UnitarityError("apply_two_site_gate: gate is not unitary");
  if (site + 1 >= mps.num_sites()) throw ShapeError("apply_two_site_gate: site out of range");

  Mps canon = canonicalize(mps, site);
  std::vector<DenseTensor> cores = canon.cores();
  const std::size_t l = cores[site].dim(0);
  const std::size_t r = cores[site + 1].dim(2);
  // theta: (l, 2, 2, r) -> (l, 4, r)
  const DenseTensor theta = linalg::contract(cores[site], cores[site + 1], {{2, 0}});
  DenseTensor gated({l, 2, 2, r});
  for (std::size_t a = 0; a < l; ++a) {
    for (std::size_t out = 0; out < 4; ++out) {
      for (std::size_t b = 0; b < r; ++b) {
        cplx acc = 0.0;
        for (std::size_t in = 0; in < 4; ++in) acc += u(out, in) * theta[(a * 4 + in) * r + b];
        gated[(a * 4 + out) * r + b] = acc;
      }
    }
  }
  const auto svd = svd_truncated(gated.as_matrix(2), trunc);
  const auto k = static_cast<std::size_t>(svd.singular_values.size());
  cores[site] = core_from_rows(svd.left, l, k);
  cores[site + 1] =
      core_from_cols(svd.singular_values.cast<cplx>().asDiagonal() * svd.right, k, r);
  normalize_core(cores[site + 1]);
  return Mps(std::move(cores), site + 1, trunc.chi_max);
}

Matrix two_site_environment(const Mps& bra, const Mps& ket, std::size_t site) {
  const std::size_t n = bra.num_sites();
  if (ket.num_sites() != n) throw ShapeError("two_site_environment: site count mismatch");
  if (site + 1 >= n) throw ShapeError("two_site_environment: site out of range");

  Matrix left = Matrix::Ones(1, 1);
  for (std::size_t i = 0; i < site; ++i) {
    Matrix next = Matrix::Zero(bra.core(i).dim(2), ket.core(i).dim(2));
    for (int s = 0; s < 2; ++s) next.noalias() += slice(bra.core(i), s).adjoint() * left * slice(ket.core(i), s);
    left = std::move(next);
  }
  Matrix right = Matrix::Ones(1, 1);
  for (std::size_t i = n - 1; i > site + 1; --i) {
    Matrix next = Matrix::Zero(bra.core(i).dim(0), ket.core(i).dim(0));
    for (int s = 0; s < 2; ++s) {
      next.noalias() += slice(bra.core(i), s).conjugate() * right * slice(ket.core(i), s).transpose();
    }
    right = std::move(next);
  }

  const DenseTensor bra_pair = linalg::contract(bra.core(site), bra.core(site + 1), {{2, 0}}).conj();
  const DenseTensor ket_pair = linalg::contract(ket.core(site), ket.core(site + 1), {{2, 0}});
  const DenseTensor t1 = linalg::contract(DenseTensor::from_matrix(left), ket_pair, {{1, 0}});
  const DenseTensor t2 = linalg::contract(t1, DenseTensor::from_matrix(right), {{3, 1}});
  const DenseTensor env = linalg::contract(bra_pair, t2, {{0, 0}, {3, 3}});
  return env.as_matrix(2);
}

}  // namespace tnqc::mps
