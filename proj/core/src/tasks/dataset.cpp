#include "tnqc/tasks/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <ostream>
#include <string>

#include "tnqc/error.hpp"

namespace tnqc::tasks {

Dataset::Dataset(std::size_t num_bits, std::vector<std::uint64_t> strings)
    : num_bits_(num_bits), strings_(std::move(strings)) {
  if (num_bits_ == 0 || num_bits_ > 63) throw ConfigError("dataset bit length must be in [1, 63]");
  if (strings_.empty()) throw ConfigError("dataset must not be empty");
  std::sort(strings_.begin(), strings_.end());
  strings_.erase(std::unique(strings_.begin(), strings_.end()), strings_.end());
  if ((strings_.back() >> num_bits_) != 0) throw ShapeError("dataset string longer than num_bits");
}

bool Dataset::contains(std::uint64_t index) const {
  return std::binary_search(strings_.begin(), strings_.end(), index);
}

Dataset cardinality_dataset(std::size_t num_bits, std::size_t cardinality) {
  if (num_bits == 0 || num_bits > 30) throw ConfigError("cardinality dataset needs 1 <= N <= 30");
  if (cardinality > num_bits) throw ConfigError("cardinality must not exceed N");
  std::vector<std::uint64_t> strings;
  const std::uint64_t limit = std::uint64_t{1} << num_bits;
  for (std::uint64_t x = 0; x < limit; ++x) {
    if (static_cast<std::size_t>(std::popcount(x)) == cardinality) strings.push_back(x);
  }
  return {num_bits, std::move(strings)};
}

Dataset bas_dataset(std::size_t rows, std::size_t cols) {
  if (rows < 1 || cols < 1) throw ConfigError("bars and stripes needs rows, cols >= 1");
  if (rows * cols > 20) throw ConfigError("bars and stripes grid larger than 20 pixels");
  const std::size_t n = rows * cols;
  auto bit_of = [n](std::size_t pixel) { return std::uint64_t{1} << (n - 1 - pixel); };

  std::vector<std::uint64_t> strings;
  for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << rows); ++pattern) {
    std::uint64_t image = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      if ((pattern >> r) & 1U) {
        for (std::size_t c = 0; c < cols; ++c) image |= bit_of(r * cols + c);
      }
    }
    strings.push_back(image);
  }
  for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << cols); ++pattern) {
    std::uint64_t image = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      if ((pattern >> c) & 1U) {
        for (std::size_t r = 0; r < rows; ++r) image |= bit_of(r * cols + c);
      }
    }
    strings.push_back(image);
  }
  return {n, std::move(strings)};
}

void write_dataset(std::ostream& out, const Dataset& data) {
  for (std::size_t i = 0; i < data.size(); ++i) out << data.bitstring(i).to_string() << '\n';
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_dataset(out, data);
}

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

double kl_divergence(const std::function<double(std::uint64_t)>& q, const Dataset& data) {
  std::vector<double> logs;
  logs.reserve(data.size());
  for (std::uint64_t x : data.strings()) logs.push_back(std::log(std::max(q(x), kProbabilityFloor)));
  const double mean_log = compensated_sum(logs) / static_cast<double>(data.size());
  return -std::log(static_cast<double>(data.size())) - mean_log;
}

double kl_divergence(std::span<const double> probabilities, const Dataset& data) {
  if (probabilities.size() != (std::size_t{1} << data.num_bits())) {
    throw ShapeError("kl_divergence: probability vector length does not match dataset width");
  }
  return kl_divergence([probabilities](std::uint64_t x) { return probabilities[x]; }, data);
}

}  // namespace tnqc::tasks
