#include "tnqc/linalg/decompositions.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tnqc/error.hpp"

namespace tnqc::linalg {

namespace {

bool all_finite(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const cplx x = m(i, j);
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    }
  }
  return true;
}

// Modified Gram-Schmidt of `v` against the columns of `basis`, applied twice.
void orthogonalize(Vector& v, const Matrix& basis, Eigen::Index count) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < count; ++j) {
      v -= basis.col(j) * basis.col(j).dot(v);
    }
  }
}

}  // namespace

SvdResult svd_truncated(const Matrix& m, const Truncation& trunc) {
  if (m.size() == 0) throw NumericalInputError("svd_truncated: empty matrix");
  if (!all_finite(m)) throw NumericalInputError("svd_truncated: non-finite input");
  if (trunc.chi_max < 1) throw ConfigError("svd_truncated: chi_max must be >= 1");
  if (!(trunc.sv_threshold >= 0.0)) throw ConfigError("svd_truncated: negative sv_threshold");

  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  const double frobenius = m.norm();

  Eigen::Index keep = std::min<Eigen::Index>(
      s.size(), static_cast<Eigen::Index>(std::min<std::size_t>(trunc.chi_max, s.size())));
  if (frobenius > 0.0) {
    while (keep > 1 && s(keep - 1) / frobenius < trunc.sv_threshold) --keep;
  } else {
    keep = 1;
  }
  keep = std::max<Eigen::Index>(keep, 1);

  SvdResult out;
  out.left = svd.matrixU().leftCols(keep);
  out.singular_values = s.head(keep);
  out.right = svd.matrixV().leftCols(keep).adjoint();
  out.discarded_weight = s.tail(s.size() - keep).squaredNorm();
  return out;
}

Matrix closest_unitary(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("closest_unitary: matrix is not square");
  if (!all_finite(m)) throw NumericalInputError("closest_unitary: non-finite input");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0 || s(s.size() - 1) <= 1e-12 * s(0)) {
    throw DegeneratePolarError("closest_unitary: rank-deficient input");
  }
  return svd.matrixU() * svd.matrixV().adjoint();
}

bool is_unitary(const Matrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const Matrix defect = u.adjoint() * u - Matrix::Identity(u.rows(), u.cols());
  return defect.cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const Matrix& h, double tol) {
  if (h.rows() != h.cols()) return false;
  if (h.size() == 0) return true;
  return (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

EigenPairs eigh_smallest(const Matrix& h, std::size_t k) {
  if (h.rows() != h.cols()) throw ShapeError("eigh_smallest: matrix is not square");
  const auto dim = static_cast<std::size_t>(h.rows());
  if (k < 1 || k > dim) throw ShapeError("eigh_smallest: invalid eigenpair count");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (!is_hermitian(h, 1e-10 * scale)) throw SymmetryError("eigh_smallest: input is not Hermitian");

  if (dim <= 4096) {
    const Matrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) throw NumericalInputError("eigh_smallest: solver failed");
    const auto kk = static_cast<Eigen::Index>(k);
    return {solver.eigenvalues().head(kk), solver.eigenvectors().leftCols(kk)};
  }
  LinearOperator op{dim, [&h](const Vector& in, Vector& out) { out.noalias() = h * in; }};
  return eigh_smallest(op, k);
}

EigenPairs eigh_smallest(const LinearOperator& op, std::size_t k, double residual_tol,
                         std::size_t seed) {
  const auto dim = static_cast<Eigen::Index>(op.dim);
  if (k < 1 || k > op.dim) throw ShapeError("eigh_smallest: invalid eigenpair count");
  const auto kk = static_cast<Eigen::Index>(k);

  EigenPairs out;
  out.values.resize(kk);
  out.vectors.resize(dim, kk);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const Eigen::Index krylov_max = std::min<Eigen::Index>(dim, 120);

  auto deflated_apply = [&](const Vector& in, Vector& result, Eigen::Index found) {
    op.apply(in, result);
    orthogonalize(result, out.vectors, found);
  };

  for (Eigen::Index found = 0; found < kk; ++found) {
    Vector start(dim);
    for (Eigen::Index i = 0; i < dim; ++i) start(i) = cplx(gauss(rng), gauss(rng));
    orthogonalize(start, out.vectors, found);
    start.normalize();

    double theta = 0.0;
    Vector ritz = start;
    bool converged = false;
    for (int restart = 0; restart < 200 && !converged; ++restart) {
      const Eigen::Index m = std::min<Eigen::Index>(krylov_max, dim - found);
      Matrix basis(dim, m);
      RealVector alpha = RealVector::Zero(m);
      RealVector beta = RealVector::Zero(m);
      basis.col(0) = ritz;
      Vector w(dim);
      Eigen::Index steps = 0;
      for (Eigen::Index j = 0; j < m; ++j) {
        deflated_apply(basis.col(j), w, found);
        alpha(j) = basis.col(j).dot(w).real();
        orthogonalize(w, basis, j + 1);
        orthogonalize(w, out.vectors, found);
        steps = j + 1;
        if (j + 1 == m) break;
        const double b = w.norm();
        beta(j) = b;
        if (b < 1e-14) break;
        basis.col(j + 1) = w / b;
      }

      Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(steps, steps);
      for (Eigen::Index j = 0; j < steps; ++j) {
        tri(j, j) = alpha(j);
        if (j + 1 < steps) tri(j, j + 1) = tri(j + 1, j) = beta(j);
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(tri);
      theta = small.eigenvalues()(0);
      const Eigen::VectorXd y = small.eigenvectors().col(0);
      ritz = basis.leftCols(steps) * y.cast<cplx>();
      orthogonalize(ritz, out.vectors, found);
      ritz.normalize();

      deflated_apply(ritz, w, found);
      theta = ritz.dot(w).real();
      const double residual = (w - theta * ritz).norm();
      converged = residual <= residual_tol * std::max(1.0, std::abs(theta));
    }
    if (!converged) throw NumericalInputError("eigh_smallest: Lanczos did not converge");
    out.values(found) = theta;
    out.vectors.col(found) = ritz;
  }

  // Deflation finds the pairs in ascending order up to near-degeneracies;
  // sort to honour the contract.
  std::vector<Eigen::Index> order(kk);
  for (Eigen::Index i = 0; i < kk; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return out.values(a) < out.values(b); });
  EigenPairs sorted{RealVector(kk), Matrix(dim, kk)};
  for (Eigen::Index i = 0; i < kk; ++i) {
    sorted.values(i) = out.values(order[i]);
    sorted.vectors.col(i) = out.vectors.col(order[i]);
  }
  return sorted;
}

Matrix complete_isometry(const Matrix& isometry) {
  const Eigen::Index n = isometry.rows();
  const Eigen::Index m = isometry.cols();
  if (m > n) throw ShapeError("complete_isometry: more columns than rows");
  Matrix out(n, n);
  out.leftCols(m) = isometry;
  if (m == n) return out;

  const Matrix projector = Matrix::Identity(n, n) - isometry * isometry.adjoint();
  Eigen::ColPivHouseholderQR<Matrix> qr(projector);
  const Matrix q = qr.householderQ();
  for (Eigen::Index j = 0; j < n - m; ++j) {
    Vector col = q.col(j);
    orthogonalize(col, out, m + j);
    col.normalize();
    Eigen::Index pivot = 0;
    col.cwiseAbs().maxCoeff(&pivot);
    col *= std::conj(col(pivot)) / std::abs(col(pivot));
    out.col(m + j) = col;
  }
  return out;
}

}  // namespace tnqc::linalg
