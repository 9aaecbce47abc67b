#include "tnqc/linalg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "tnqc/error.hpp"

namespace tnqc::linalg {

namespace {

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
  out << ')';
  return out.str();
}

Shape row_major_strides(const Shape& shape) {
  Shape strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  return strides;
}

}  // namespace

DenseTensor::DenseTensor(Shape shape)
    : shape_(std::move(shape)), data_(element_count(shape_), cplx{0.0, 0.0}) {}

DenseTensor::DenseTensor(Shape shape, std::vector<cplx> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (element_count(shape_) != data_.size()) {
    throw ShapeError("tensor shape " + shape_string(shape_) + " does not match " +
                     std::to_string(data_.size()) + " elements");
  }
}

DenseTensor DenseTensor::from_matrix(const Matrix& m) {
  DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  Eigen::Map<RowMajorMatrix>(t.data_.data(), m.rows(), m.cols()) = m;
  return t;
}

DenseTensor DenseTensor::from_vector(const Vector& v) {
  DenseTensor t({static_cast<std::size_t>(v.size())});
  std::copy(v.data(), v.data() + v.size(), t.data_.begin());
  return t;
}

std::size_t DenseTensor::flat_index(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw ShapeError("index rank " + std::to_string(index.size()) +
                     " does not match tensor rank " + std::to_string(shape_.size()));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) throw ShapeError("tensor index out of range");
    flat = flat * shape_[axis] + i;
    ++axis;
  }
  return flat;
}

cplx& DenseTensor::at(std::initializer_list<std::size_t> index) {
  return data_[flat_index(index)];
}

const cplx& DenseTensor::at(std::initializer_list<std::size_t> index) const {
  return data_[flat_index(index)];
}

DenseTensor DenseTensor::permuted(std::span<const std::size_t> perm) const {
  const std::size_t r = rank();
  if (perm.size() != r) throw ShapeError("permutation rank mismatch");
  std::vector<bool> seen(r, false);
  for (std::size_t p : perm) {
    if (p >= r || seen[p]) throw ShapeError("invalid axis permutation");
    seen[p] = true;
  }
  if (std::is_sorted(perm.begin(), perm.end())) return *this;

  Shape out_shape(r);
  for (std::size_t k = 0; k < r; ++k) out_shape[k] = shape_[perm[k]];
  const Shape in_strides = row_major_strides(shape_);
  Shape src_strides(r);
  for (std::size_t k = 0; k < r; ++k) src_strides[k] = in_strides[perm[k]];

  DenseTensor out(out_shape);
  if (data_.empty()) return out;
  // Odometer over the output index; the innermost axis is handled as a
  // strided copy.
  const std::size_t inner = out_shape[r - 1];
  const std::size_t inner_stride = src_strides[r - 1];
  std::vector<std::size_t> counter(r, 0);
  std::size_t src = 0;
  std::size_t dst = 0;
  const std::size_t total = data_.size();
  while (dst < total) {
    for (std::size_t i = 0; i < inner; ++i) out.data_[dst + i] = data_[src + i * inner_stride];
    dst += inner;
    for (std::size_t axis = r - 1; axis-- > 0;) {
      src += src_strides[axis];
      if (++counter[axis] < out_shape[axis]) break;
      src -= src_strides[axis] * out_shape[axis];
      counter[axis] = 0;
    }
  }
  return out;
}

DenseTensor DenseTensor::reshaped(Shape shape) const {
  if (element_count(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  DenseTensor out;
  out.shape_ = std::move(shape);
  out.data_ = data_;
  return out;
}

Matrix DenseTensor::as_matrix(std::size_t row_axes) const {
  if (row_axes > rank()) throw ShapeError("as_matrix: too many row axes");
  std::size_t rows = 1;
  for (std::size_t i = 0; i < row_axes; ++i) rows *= shape_[i];
  const std::size_t cols = rows == 0 ? 0 : data_.size() / rows;
  return Eigen::Map<const RowMajorMatrix>(data_.data(), static_cast<Eigen::Index>(rows),
                                          static_cast<Eigen::Index>(cols));
}

Vector DenseTensor::as_vector() const {
  return Eigen::Map<const Vector>(data_.data(), static_cast<Eigen::Index>(data_.size()));
}

DenseTensor DenseTensor::conj() const {
  DenseTensor out = *this;
  for (auto& x : out.data_) x = std::conj(x);
  return out;
}

DenseTensor DenseTensor::scaled(cplx factor) const {
  DenseTensor out = *this;
  for (auto& x : out.data_) x *= factor;
  return out;
}

double DenseTensor::norm() const {
  double sum = 0.0;
  for (const auto& x : data_) sum += std::norm(x);
  return std::sqrt(sum);
}

bool DenseTensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const cplx& x) {
    return std::isfinite(x.real()) && std::isfinite(x.imag());
  });
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::span<const AxisPair> axis_pairs) {
  std::vector<bool> a_used(a.rank(), false);
  std::vector<bool> b_used(b.rank(), false);
  std::vector<std::size_t> a_perm;
  std::vector<std::size_t> b_perm;
  std::size_t inner = 1;
  for (const auto& [ia, ib] : axis_pairs) {
    if (ia >= a.rank() || ib >= b.rank()) throw ShapeError("contract: axis out of range");
    if (a_used[ia] || b_used[ib]) throw ShapeError("contract: axis listed twice");
    if (a.dim(ia) != b.dim(ib)) {
      throw ShapeError("contract: axis " + std::to_string(ia) + " of length " +
                       std::to_string(a.dim(ia)) + " paired with axis " + std::to_string(ib) +
                       " of length " + std::to_string(b.dim(ib)));
    }
    a_used[ia] = b_used[ib] = true;
    inner *= a.dim(ia);
  }

  Shape out_shape;
  std::size_t a_free = 1;
  for (std::size_t i = 0; i < a.rank(); ++i) {
    if (!a_used[i]) {
      a_perm.push_back(i);
      out_shape.push_back(a.dim(i));
      a_free *= a.dim(i);
    }
  }
  for (const auto& pair : axis_pairs) a_perm.push_back(pair.first);
  for (const auto& pair : axis_pairs) b_perm.push_back(pair.second);
  std::size_t b_free = 1;
  for (std::size_t i = 0; i < b.rank(); ++i) {
    if (!b_used[i]) {
      b_perm.push_back(i);
      out_shape.push_back(b.dim(i));
      b_free *= b.dim(i);
    }
  }

  const DenseTensor ap = a.permuted(a_perm);
  const DenseTensor bp = b.permuted(b_perm);
  DenseTensor out(out_shape);
  if (out.size() == 0) return out;
  using Map = Eigen::Map<const RowMajorMatrix>;
  const auto rows = static_cast<Eigen::Index>(a_free);
  const auto mid = static_cast<Eigen::Index>(inner);
  const auto cols = static_cast<Eigen::Index>(b_free);
  Eigen::Map<RowMajorMatrix>(out.data().data(), rows, cols).noalias() =
      Map(ap.data().data(), rows, mid) * Map(bp.data().data(), mid, cols);
  return out;
}

}  // namespace tnqc::linalg
