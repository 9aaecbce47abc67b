#include "tnqc/optim/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "tnqc/error.hpp"

namespace tnqc::optim {

namespace {

constexpr double kEigenFloor = 1e-14;

}  // namespace

void CmaesConfig::validate() const {
  if (!(sigma0 > 0.0)) throw ConfigError("cmaes: sigma0 must be > 0");
  if (lambda < 4) throw ConfigError("cmaes: lambda must be >= 4");
  if (!(tolfun >= 0.0)) throw ConfigError("cmaes: tolfun must be >= 0");
  if (tolfun_window < 1) throw ConfigError("cmaes: tolfun_window must be >= 1");
}

Cmaes::Cmaes(std::vector<double> mean, const CmaesConfig& config)
    : config_(config), n_(mean.size()), lambda_(config.lambda), mu_(config.lambda / 2), rng_(config.seed),
      best_f_(std::numeric_limits<double>::infinity()) {
  config_.validate();
  if (n_ == 0) throw ConfigError("cmaes: dimension must be >= 1");
  const double n = static_cast<double>(n_);

  weights_.resize(static_cast<Eigen::Index>(mu_));
  for (std::size_t i = 0; i < mu_; ++i) {
    weights_(static_cast<Eigen::Index>(i)) = std::log(static_cast<double>(mu_) + 0.5) - std::log(static_cast<double>(i + 1));
  }
  weights_ /= weights_.sum();
  mueff_ = 1.0 / weights_.squaredNorm();

  cs_ = (mueff_ + 2.0) / (n + mueff_ + 5.0);
  ds_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff_ - 1.0) / (n + 1.0)) - 1.0) + cs_;
  cc_ = (4.0 + mueff_ / n) / (n + 4.0 + 2.0 * mueff_ / n);
  c1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mueff_);
  cmu_ = std::min(1.0 - c1_, 2.0 * (mueff_ - 2.0 + 1.0 / mueff_) / ((n + 2.0) * (n + 2.0) + mueff_));
  chin_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  mean_ = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(n_));
  sigma_ = config_.sigma0;
  cov_ = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  basis_ = cov_;
  scales_ = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n_));
  ps_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
  pc_ = ps_;
  best_x_ = std::move(mean);
}

const std::vector<std::vector<double>>& Cmaes::ask() {
  std::normal_distribution<double> gauss;
  const auto n = static_cast<Eigen::Index>(n_);
  population_.assign(lambda_, std::vector<double>(n_));
  steps_.assign(lambda_, Eigen::VectorXd(n));
  Eigen::VectorXd z(n);
  for (std::size_t k = 0; k < lambda_; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = gauss(rng_);
    steps_[k].noalias() = basis_ * scales_.cwiseProduct(z);
    Eigen::Map<Eigen::VectorXd>(population_[k].data(), n) = mean_ + sigma_ * steps_[k];
  }
  asked_ = true;
  return population_;
}

void Cmaes::tell(std::span<const double> losses) {
  if (!asked_) throw ConfigError("cmaes: tell() without ask()");
  if (losses.size() != lambda_) throw ShapeError("cmaes: expected one loss per candidate");
  asked_ = false;

  std::vector<std::size_t> order(lambda_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return losses[a] < losses[b]; });
  if (losses[order[0]] < best_f_) {
    best_f_ = losses[order[0]];
    best_x_ = population_[order[0]];
  }

  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::VectorXd yw = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < mu_; ++i) yw += weights_(static_cast<Eigen::Index>(i)) * steps_[order[i]];
  mean_ += sigma_ * yw;

  // C^{-1/2} yw = B D^{-1} B^T yw
  const Eigen::VectorXd inv_sqrt_yw = basis_ * (basis_.transpose() * yw).cwiseQuotient(scales_);
  ps_ = (1.0 - cs_) * ps_ + std::sqrt(cs_ * (2.0 - cs_) * mueff_) * inv_sqrt_yw;
  const double gen = static_cast<double>(iteration_ + 1);
  const double ps_norm = ps_.norm();
  const bool hsig = ps_norm / std::sqrt(1.0 - std::pow(1.0 - cs_, 2.0 * gen)) <
                    (1.4 + 2.0 / (static_cast<double>(n_) + 1.0)) * chin_;
  pc_ = (1.0 - cc_) * pc_ + (hsig ? std::sqrt(cc_ * (2.0 - cc_) * mueff_) : 0.0) * yw;

  const double old_weight = 1.0 - c1_ - cmu_ + (hsig ? 0.0 : c1_ * cc_ * (2.0 - cc_));
  cov_ *= old_weight;
  cov_.selfadjointView<Eigen::Lower>().rankUpdate(pc_, c1_);
  for (std::size_t i = 0; i < mu_; ++i) {
    cov_.selfadjointView<Eigen::Lower>().rankUpdate(steps_[order[i]], cmu_ * weights_(static_cast<Eigen::Index>(i)));
  }
  cov_.triangularView<Eigen::StrictlyUpper>() = cov_.transpose();

  sigma_ *= std::exp((cs_ / ds_) * (ps_norm / chin_ - 1.0));
  ++iteration_;

  const double gap = static_cast<double>(lambda_) / ((c1_ + cmu_) * static_cast<double>(n_) * 10.0);
  if (static_cast<double>(iteration_ - eigen_iteration_) >= gap) update_eigensystem();
}

void Cmaes::update_eigensystem() {
  eigen_iteration_ = iteration_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_);
  Eigen::VectorXd values = eig.eigenvalues();
  basis_ = eig.eigenvectors();
  const double floor = kEigenFloor * std::max(1.0, values.maxCoeff());
  if (values.minCoeff() < floor) {
    ++repairs_;
    values = values.cwiseMax(floor);
    cov_ = basis_ * values.asDiagonal() * basis_.transpose();
  }
  scales_ = values.cwiseSqrt();
}

CmaesResult cmaes_minimize(const Objective& objective, std::vector<double> theta0, const CmaesConfig& config) {
  config.validate();
  Cmaes es(std::move(theta0), config);
  CmaesResult out;
  std::vector<double> losses(config.lambda);
  std::vector<double> best_so_far;
  out.stop_reason = "max_iterations";
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    const auto& pop = es.ask();
    for (std::size_t k = 0; k < pop.size(); ++k) {
      losses[k] = objective(pop[k]);
      ++out.evaluations;
      if (!std::isfinite(losses[k])) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "cmaes: objective returned " << losses[k] << " at params [";
        for (std::size_t i = 0; i < pop[k].size(); ++i) msg << (i ? ", " : "") << pop[k][i];
        msg << "]";
        throw EvaluationError(msg.str());
      }
    }
    es.tell(losses);
    out.loss_history.push_back(*std::min_element(losses.begin(), losses.end()));
    best_so_far.push_back(es.best_loss());
    const std::size_t w = config.tolfun_window;
    if (best_so_far.size() > w && best_so_far[best_so_far.size() - 1 - w] - best_so_far.back() < config.tolfun) {
      out.stop_reason = "tolfun";
      break;
    }
  }
  out.iterations = es.iteration();
  out.best_params = es.best_params();
  out.best_loss = es.best_loss();
  out.covariance_repairs = es.covariance_repairs();
  return out;
}

double finite_diff_gradient(const Objective& objective, std::span<const double> theta, std::size_t index,
                            double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("finite_diff_gradient: epsilon must be > 0");
  if (index >= theta.size()) throw ShapeError("finite_diff_gradient: index out of range");
  std::vector<double> x(theta.begin(), theta.end());
  x[index] = theta[index] + epsilon;
  const double up = objective(x);
  x[index] = theta[index] - epsilon;
  const double down = objective(x);
  return (up - down) / (2.0 * epsilon);
}

}  // namespace tnqc::optim
