#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace tnqc {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RowMajorMatrix =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace linalg {

using Shape = std::vector<std::size_t>;

/// Complex multi-axis array stored in row-major order (last axis fastest).
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Shape shape);
  DenseTensor(Shape shape, std::vector<cplx> data);

  /// Rank-2 tensor with the same entries as `m`.
  static DenseTensor from_matrix(const Matrix& m);
  /// Rank-1 tensor with the same entries as `v`.
  static DenseTensor from_vector(const Vector& v);

  [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
  [[nodiscard]] std::size_t rank() const noexcept { return shape_.size(); }
  [[nodiscard]] std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

  [[nodiscard]] std::span<const cplx> data() const noexcept { return data_; }
  [[nodiscard]] std::span<cplx> data() noexcept { return data_; }

  [[nodiscard]] cplx& operator[](std::size_t flat) { return data_[flat]; }
  [[nodiscard]] const cplx& operator[](std::size_t flat) const { return data_[flat]; }

  [[nodiscard]] cplx& at(std::initializer_list<std::size_t> index);
  [[nodiscard]] const cplx& at(std::initializer_list<std::size_t> index) const;

  /// Axes reordered so that axis k of the result is axis perm[k] of this.
  [[nodiscard]] DenseTensor permuted(std::span<const std::size_t> perm) const;
  [[nodiscard]] DenseTensor permuted(std::initializer_list<std::size_t> perm) const {
    return permuted(std::span<const std::size_t>(perm.begin(), perm.size()));
  }
  /// Same data, new shape. Throws ShapeError when the element count differs.
  [[nodiscard]] DenseTensor reshaped(Shape shape) const;

  /// Matrix view: rows run over the first `row_axes` axes, columns over the rest.
  [[nodiscard]] Matrix as_matrix(std::size_t row_axes) const;
  [[nodiscard]] Vector as_vector() const;

  [[nodiscard]] DenseTensor conj() const;
  [[nodiscard]] DenseTensor scaled(cplx factor) const;
  [[nodiscard]] double norm() const;
  [[nodiscard]] bool all_finite() const;

 private:
  [[nodiscard]] std::size_t flat_index(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<cplx> data_;
};

using AxisPair = std::pair<std::size_t, std::size_t>;

/// Contracts `a` with `b` over the listed axis pairs. Free axes of `a` come
/// first in the result, followed by the free axes of `b`, each in their
/// original order. Throws ShapeError on a length mismatch.
DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::span<const AxisPair> axis_pairs);

inline DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                            std::initializer_list<AxisPair> axis_pairs) {
  return contract(a, b, std::span<const AxisPair>(axis_pairs.begin(), axis_pairs.size()));
}

}  // namespace linalg
}  // namespace tnqc
