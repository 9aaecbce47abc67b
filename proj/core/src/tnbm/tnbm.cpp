#include "tnqc/tnbm/tnbm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tnqc/error.hpp"

namespace tnqc::tnbm {

namespace {

using linalg::DenseTensor;
using mps::Mps;

Matrix slice(const DenseTensor& core, int s) {
  const std::size_t l = core.dim(0);
  const std::size_t r = core.dim(2);
  Matrix m(l, r);
  for (std::size_t a = 0; a < l; ++a) {
    for (std::size_t b = 0; b < r; ++b) m(a, b) = core[(a * 2 + s) * r + b];
  }
  return m;
}

// Theta(l, 2, 2, r) block for physical pair (s, t) as an l x r matrix.
Matrix theta_block(const DenseTensor& theta, int s, int t) {
  const std::size_t l = theta.dim(0);
  const std::size_t r = theta.dim(3);
  Matrix m(l, r);
  for (std::size_t a = 0; a < l; ++a) {
    for (std::size_t b = 0; b < r; ++b) m(a, b) = theta[((a * 2 + s) * 2 + t) * r + b];
  }
  return m;
}

void add_block(DenseTensor& theta, int s, int t, const Matrix& block, cplx factor) {
  const std::size_t l = theta.dim(0);
  const std::size_t r = theta.dim(3);
  for (std::size_t a = 0; a < l; ++a) {
    for (std::size_t b = 0; b < r; ++b) theta[((a * 2 + s) * 2 + t) * r + b] += factor * block(a, b);
  }
}

// Per-sample bits, grouped by the physical pair at a bond.
struct SampleBits {
  std::size_t num_sites = 0;
  std::vector<std::uint64_t> strings;
  [[nodiscard]] int bit(std::size_t sample, std::size_t site) const {
    return static_cast<int>((strings[sample] >> (num_sites - 1 - site)) & 1U);
  }
};

// Gradient of the loss with respect to theta given the environment rows of
// every sample: left (|D| x l) and right (|D| x r).
DenseTensor gradient_from_environments(const DenseTensor& theta, const Matrix& left,
                                       const Matrix& right, const SampleBits& bits,
                                       std::size_t site) {
  const double z = std::pow(theta.norm(), 2);
  DenseTensor grad = theta.scaled(2.0 / z);
  const double scale = -2.0 / static_cast<double>(bits.strings.size());
  for (int s = 0; s < 2; ++s) {
    for (int t = 0; t < 2; ++t) {
      std::vector<Eigen::Index> rows;
      for (std::size_t x = 0; x < bits.strings.size(); ++x) {
        if (bits.bit(x, site) == s && bits.bit(x, site + 1) == t) rows.push_back(static_cast<Eigen::Index>(x));
      }
      if (rows.empty()) continue;
      const Matrix lg = left(rows, Eigen::all);
      const Matrix rg = right(rows, Eigen::all);
      const Vector psi = (lg * theta_block(theta, s, t)).cwiseProduct(rg).rowwise().sum();
      Vector weight(psi.size());
      for (Eigen::Index k = 0; k < psi.size(); ++k) {
        weight(k) = psi(k) / (std::max(std::norm(psi(k)) / z, tasks::kProbabilityFloor) * z);
      }
      const Matrix g = lg.adjoint() * (weight.asDiagonal() * rg.conjugate());
      add_block(grad, s, t, g, scale);
    }
  }
  return grad;
}

class Trainer {
 public:
  Trainer(const tasks::Dataset& data, const TnbmConfig& config)
      : config_(config),
        bits_{data.num_bits(), std::vector<std::uint64_t>(data.strings().begin(), data.strings().end())},
        data_(data),
        state_(mps::canonicalize(initial_state(data.num_bits(), config), 0)) {
    const std::size_t n = bits_.num_sites;
    left_.resize(n + 1);
    right_.resize(n + 1);
    const auto samples = static_cast<Eigen::Index>(bits_.strings.size());
    left_[0] = Matrix::Ones(samples, 1);
    right_[n] = Matrix::Ones(samples, 1);
    for (std::size_t i = n; i-- > 1;) update_right(i);
  }

  TnbmResult run() {
    const std::size_t n = bits_.num_sites;
    std::vector<double> history;
    for (std::size_t sweep = 0; sweep < config_.sweeps; ++sweep) {
      for (std::size_t i = 0; i + 1 < n; ++i) {
        update_bond(i, /*moving_right=*/true);
        update_left(i);
      }
      for (std::size_t i = n - 1; i-- > 0;) {
        update_bond(i, /*moving_right=*/false);
        update_right(i + 1);
      }
      history.push_back(kl_of_mps(state_, data_));
    }
    state_.set_chi_max(config_.chi_max);
    return {state_, std::move(history)};
  }

 private:
  void update_left(std::size_t site) {
    const DenseTensor& core = state_.core(site);
    const Matrix a0 = slice(core, 0);
    const Matrix a1 = slice(core, 1);
    Matrix next(left_[site].rows(), static_cast<Eigen::Index>(core.dim(2)));
    for (Eigen::Index x = 0; x < next.rows(); ++x) {
      next.row(x) = left_[site].row(x) * (bits_.bit(static_cast<std::size_t>(x), site) ? a1 : a0);
    }
    left_[site + 1] = std::move(next);
  }

  void update_right(std::size_t site) {
    const DenseTensor& core = state_.core(site);
    const Matrix a0 = slice(core, 0).transpose();
    const Matrix a1 = slice(core, 1).transpose();
    Matrix next(right_[site + 1].rows(), static_cast<Eigen::Index>(core.dim(0)));
    for (Eigen::Index x = 0; x < next.rows(); ++x) {
      next.row(x) = right_[site + 1].row(x) * (bits_.bit(static_cast<std::size_t>(x), site) ? a1 : a0);
    }
    right_[site] = std::move(next);
  }

  void update_bond(std::size_t site, bool moving_right) {
    std::vector<DenseTensor> cores = state_.cores();
    const std::size_t l = cores[site].dim(0);
    const std::size_t r = cores[site + 1].dim(2);
    DenseTensor theta = linalg::contract(cores[site], cores[site + 1], {{2, 0}});
    for (std::size_t step = 0; step < config_.steps_per_bond; ++step) {
      const DenseTensor grad = gradient_from_environments(theta, left_[site], right_[site + 2], bits_, site);
      for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= config_.eta * grad[k];
      theta = theta.scaled(1.0 / theta.norm());
    }
    const auto svd = linalg::svd_truncated(theta.as_matrix(2), {config_.chi_max, config_.sv_threshold});
    const auto k = static_cast<std::size_t>(svd.singular_values.size());
    const Matrix s = svd.singular_values.cast<cplx>().asDiagonal();
    Matrix left_factor = moving_right ? svd.left : Matrix(svd.left * s);
    Matrix right_factor = moving_right ? Matrix(s * svd.right) : svd.right;
    const double norm = moving_right ? right_factor.norm() : left_factor.norm();
    (moving_right ? right_factor : left_factor) /= norm;
    cores[site] = DenseTensor::from_matrix(left_factor).reshaped({l, 2, k});
    cores[site + 1] = DenseTensor::from_matrix(right_factor).reshaped({k, 2, r});
    state_ = Mps(std::move(cores), moving_right ? site + 1 : site, config_.chi_max);
  }

  TnbmConfig config_;
  SampleBits bits_;
  const tasks::Dataset& data_;
  Mps state_;
  std::vector<Matrix> left_;   // left_[i]: product of cores 0..i-1 per sample
  std::vector<Matrix> right_;  // right_[i]: product of cores i..N-1 per sample
};

}  // namespace

void TnbmConfig::validate() const {
  if (!(eta > 0.0)) throw ConfigError("tnbm: eta must be > 0");
  if (sweeps < 1) throw ConfigError("tnbm: sweeps must be >= 1");
  if (chi_max < 1) throw ConfigError("tnbm: chi_max must be >= 1");
  if (!(sv_threshold >= 0.0)) throw ConfigError("tnbm: sv_threshold must be >= 0");
  if (init_bond < 1) throw ConfigError("tnbm: init_bond must be >= 1");
  if (steps_per_bond < 1) throw ConfigError("tnbm: steps_per_bond must be >= 1");
}

DenseTensor two_site_gradient(const Mps& state, const tasks::Dataset& data, std::size_t site) {
  const std::size_t n = state.num_sites();
  if (data.num_bits() != n) throw ShapeError("two_site_gradient: dataset width does not match MPS");
  if (site + 1 >= n) throw ShapeError("two_site_gradient: site out of range");
  const auto center = state.gauge_center();
  if (!center || (*center != site && *center != site + 1)) {
    throw ConfigError("two_site_gradient: gauge center must be at site or site + 1");
  }
  SampleBits bits{n, std::vector<std::uint64_t>(data.strings().begin(), data.strings().end())};
  const auto samples = static_cast<Eigen::Index>(data.size());
  Matrix left = Matrix::Ones(samples, 1);
  for (std::size_t i = 0; i < site; ++i) {
    const Matrix a0 = slice(state.core(i), 0);
    const Matrix a1 = slice(state.core(i), 1);
    Matrix next(samples, a0.cols());
    for (Eigen::Index x = 0; x < samples; ++x) {
      next.row(x) = left.row(x) * (bits.bit(static_cast<std::size_t>(x), i) ? a1 : a0);
    }
    left = std::move(next);
  }
  Matrix right = Matrix::Ones(samples, 1);
  for (std::size_t i = n; i-- > site + 2;) {
    const Matrix a0 = slice(state.core(i), 0).transpose();
    const Matrix a1 = slice(state.core(i), 1).transpose();
    Matrix next(samples, a0.cols());
    for (Eigen::Index x = 0; x < samples; ++x) {
      next.row(x) = right.row(x) * (bits.bit(static_cast<std::size_t>(x), i) ? a1 : a0);
    }
    right = std::move(next);
  }
  const DenseTensor theta = linalg::contract(state.core(site), state.core(site + 1), {{2, 0}});
  return gradient_from_environments(theta, left, right, bits, site);
}

double kl_of_mps(const Mps& state, const tasks::Dataset& data) {
  if (data.num_bits() != state.num_sites()) throw ShapeError("kl_of_mps: dataset width does not match MPS");
  return tasks::kl_divergence(
      [&](std::uint64_t x) { return std::norm(mps::amplitude(state, Bitstring(x, data.num_bits()))); }, data);
}

Mps initial_state(std::size_t num_sites, const TnbmConfig& config) {
  config.validate();
  if (num_sites < 2) throw ConfigError("tnbm: need at least two sites");
  Rng rng(config.seed);
  std::uniform_real_distribution<double> noise(0.9, 1.1);
  const std::size_t bond = std::min(config.init_bond, config.chi_max);
  std::vector<DenseTensor> cores;
  for (std::size_t i = 0; i < num_sites; ++i) {
    const std::size_t l = i == 0 ? 1 : bond;
    const std::size_t r = i + 1 == num_sites ? 1 : bond;
    DenseTensor c({l, 2, r});
    for (auto& x : c.data()) x = noise(rng);
    cores.push_back(std::move(c));
  }
  return mps::canonicalize(Mps(std::move(cores), std::nullopt, config.chi_max), 0);
}

TnbmResult train_tnbm(const tasks::Dataset& data, const TnbmConfig& config) {
  config.validate();
  if (data.num_bits() < 2) throw ConfigError("tnbm: dataset strings must have N >= 2");
  return Trainer(data, config).run();
}

}  // namespace tnqc::tnbm
