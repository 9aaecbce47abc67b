#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "tnqc/mps/mps.hpp"

namespace tnqc::tasks {

/// Deduplicated, sorted set of N-bit strings with uniform weight 1/|D|.
/// Strings are stored as statevector indices (bit 0 most significant).
class Dataset {
 public:
  Dataset(std::size_t num_bits, std::vector<std::uint64_t> strings);

  [[nodiscard]] std::size_t num_bits() const noexcept { return num_bits_; }
  [[nodiscard]] std::size_t size() const noexcept { return strings_.size(); }
  [[nodiscard]] std::span<const std::uint64_t> strings() const noexcept { return strings_; }
  [[nodiscard]] Bitstring bitstring(std::size_t i) const { return {strings_.at(i), num_bits_}; }
  [[nodiscard]] double weight() const noexcept { return 1.0 / static_cast<double>(strings_.size()); }
  [[nodiscard]] bool contains(std::uint64_t index) const;

 private:
  std::size_t num_bits_;
  std::vector<std::uint64_t> strings_;
};

/// All N-bit strings with exactly c ones.
Dataset cardinality_dataset(std::size_t num_bits, std::size_t cardinality);

/// Bars and stripes on a rows x cols grid, flattened row-major: images whose
/// rows are each constant (stripes) or whose columns are each constant
/// (bars). The all-0 and all-1 images appear once.
Dataset bas_dataset(std::size_t rows, std::size_t cols);

/// One bitstring per line.
void write_dataset(std::ostream& out, const Dataset& data);
void save_dataset(const std::filesystem::path& path, const Dataset& data);

inline constexpr double kProbabilityFloor = 1e-300;

/// KL(p_D || q) = -log|D| - mean_{x in D} log q(x) in nats, with q clamped
/// below at 1e-300.
double kl_divergence(const std::function<double(std::uint64_t)>& q, const Dataset& data);
/// Same, reading q from a dense probability vector indexed by bitstring.
double kl_divergence(std::span<const double> probabilities, const Dataset& data);

/// Neumaier-compensated sum; order-stable to well below 1e-12 for the sizes used here.
double compensated_sum(std::span<const double> values);

}  // namespace tnqc::tasks
