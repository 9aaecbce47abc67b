#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tnqc/linalg/decompositions.hpp"
#include "tnqc/linalg/tensor.hpp"

namespace tnqc {

using Rng = std::mt19937_64;

/// Fixed-length bit string. Bit 0 is the leftmost character and the most
/// significant bit of the statevector index, matching MPS site 0.
class Bitstring {
 public:
  Bitstring() = default;
  Bitstring(std::uint64_t index, std::size_t length);
  static Bitstring from_string(const std::string& text);

  [[nodiscard]] std::size_t size() const noexcept { return length_; }
  [[nodiscard]] int operator[](std::size_t site) const {
    return static_cast<int>((index_ >> (length_ - 1 - site)) & 1U);
  }
  [[nodiscard]] std::uint64_t index() const noexcept { return index_; }
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const Bitstring&, const Bitstring&) = default;

 private:
  std::uint64_t index_ = 0;
  std::size_t length_ = 0;
};

}  // namespace tnqc

namespace tnqc::mps {

using linalg::DenseTensor;
using linalg::Truncation;

inline constexpr std::size_t kMaxDenseSites = 20;

/// Open-boundary matrix product state of qubits. Cores have axes
/// (left bond, physical = 2, right bond).
class Mps {
 public:
  Mps() = default;
  /// Takes ownership of `cores`; validates bond consistency but not the gauge.
  explicit Mps(std::vector<DenseTensor> cores, std::optional<std::size_t> gauge_center = {},
               std::size_t chi_max = linalg::kUnbounded);

  static Mps product_state(const Bitstring& bits);
  static Mps zeros(std::size_t num_sites);
  /// (|0...0> + |1...1>)/sqrt(2).
  static Mps ghz(std::size_t num_sites);
  /// Random complex cores with the given uniform bond dimension, normalized.
  static Mps random(std::size_t num_sites, std::size_t bond_dim, Rng& rng);

  [[nodiscard]] std::size_t num_sites() const noexcept { return cores_.size(); }
  [[nodiscard]] const DenseTensor& core(std::size_t site) const { return cores_.at(site); }
  [[nodiscard]] const std::vector<DenseTensor>& cores() const noexcept { return cores_; }
  [[nodiscard]] std::vector<std::size_t> bond_dims() const;
  [[nodiscard]] std::size_t max_bond() const;
  [[nodiscard]] std::optional<std::size_t> gauge_center() const noexcept { return center_; }
  [[nodiscard]] std::size_t chi_max() const noexcept { return chi_max_; }

  /// Checks orthonormality of every core around the recorded gauge center.
  [[nodiscard]] bool satisfies_gauge(double tol = 1e-10) const;

  // Low-level mutation used by the sweep algorithms; callers are responsible
  // for restoring the invariants before handing the value out.
  DenseTensor& mutable_core(std::size_t site) { return cores_.at(site); }
  void set_gauge_center(std::optional<std::size_t> center) { center_ = center; }
  void set_chi_max(std::size_t chi_max) { chi_max_ = chi_max; }

 private:
  std::vector<DenseTensor> cores_;
  std::optional<std::size_t> center_;
  std::size_t chi_max_ = linalg::kUnbounded;
};

/// Sequential SVD factorization of a normalized statevector of length 2^N.
Mps from_statevector(const Vector& psi, const Truncation& trunc = {});

/// Full contraction to a length-2^N vector. Throws SizeGuardError for N > 20.
Vector to_statevector(const Mps& mps);

/// <x|psi>.
cplx amplitude(const Mps& mps, const Bitstring& x);

/// <a|b>.
cplx inner(const Mps& a, const Mps& b);

/// Moves the gauge center to `center` by QR sweeps. The state is unchanged.
Mps canonicalize(const Mps& mps, std::size_t center);

/// Sequential SVD truncation from a canonical form; the result is normalized.
Mps truncate(const Mps& mps, const Truncation& trunc);

/// One bitstring drawn from |<x|psi>|^2 by sequential conditional sampling.
Bitstring sample(const Mps& mps, Rng& rng);
std::vector<Bitstring> sample(const Mps& mps, Rng& rng, std::size_t count);

/// Applies a 4x4 unitary to sites (site, site + 1). The gate's row/column
/// index is 2 * s_site + s_{site+1}. Re-splits the bond with `trunc`.
Mps apply_two_site_gate(const Mps& mps, const Matrix& u, std::size_t site,
                        const Truncation& trunc = {});

/// 4x4 matrix R with R(a, b) = sum over all other sites of
/// conj(bra(.., a, ..)) * ket(.., b, ..), where a and b index the physical
/// pair at (site, site + 1). Then <bra| G |ket> = sum_ab G(a, b) R(a, b).
Matrix two_site_environment(const Mps& bra, const Mps& ket, std::size_t site);

}  // namespace tnqc::mps
