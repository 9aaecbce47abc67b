#pragma once

#include <cstddef>
#include <functional>
#include <limits>

#include "tnqc/linalg/tensor.hpp"

namespace tnqc::linalg {

inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

/// Bond truncation policy shared by every SVD-splitting operation.
///
/// `sv_threshold` is an absolute cutoff on singular values of the matrix
/// after it has been scaled to unit Frobenius norm, so the rule does not
/// depend on the overall scale of the input.
struct Truncation {
  std::size_t chi_max = kUnbounded;
  double sv_threshold = 0.0;
};

struct SvdResult {
  Matrix left;                  // column-orthonormal, rows x r
  RealVector singular_values;   // length r, non-increasing
  Matrix right;                 // row-orthonormal (V^dagger), r x cols
  double discarded_weight = 0;  // sum of squared dropped singular values
};

/// Truncated SVD. Keeps at most `chi_max` values and drops those below the
/// normalized threshold; at least one value is always kept.
SvdResult svd_truncated(const Matrix& m, const Truncation& trunc = {});

/// The unitary factor U V^dagger of m = U S V^dagger. Throws
/// DegeneratePolarError when m is rank deficient.
Matrix closest_unitary(const Matrix& m);

struct EigenPairs {
  RealVector values;  // ascending
  Matrix vectors;     // orthonormal columns
};

/// Matrix-free Hermitian operator used by the iterative eigensolver.
struct LinearOperator {
  std::size_t dim = 0;
  std::function<void(const Vector& in, Vector& out)> apply;
};

/// The k smallest eigenpairs of a Hermitian matrix. Dense diagonalization up
/// to dimension 4096, Lanczos above. Throws SymmetryError for non-Hermitian
/// input.
EigenPairs eigh_smallest(const Matrix& h, std::size_t k);

/// Lanczos with full reorthogonalization and deflation for k > 1.
EigenPairs eigh_smallest(const LinearOperator& op, std::size_t k,
                         double residual_tol = 1e-10, std::size_t seed = 7);

[[nodiscard]] bool is_unitary(const Matrix& u, double tol);
[[nodiscard]] bool is_hermitian(const Matrix& h, double tol);

/// Orthonormal completion of the columns of `isometry` to a square unitary.
/// New columns have their largest-magnitude entry made real and positive.
Matrix complete_isometry(const Matrix& isometry);

}  // namespace tnqc::linalg
