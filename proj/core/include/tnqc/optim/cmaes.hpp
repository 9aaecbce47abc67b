#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tnqc/mps/mps.hpp"

namespace tnqc::optim {

using Objective = std::function<double(std::span<const double>)>;

struct CmaesConfig {
  double sigma0 = 1e-2;
  std::size_t lambda = 20;
  std::size_t max_iterations = 2000;
  double tolfun = 5e-4;
  std::size_t tolfun_window = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Ask/tell CMA-ES with the standard (mu/mu_w, lambda) defaults.
class Cmaes {
 public:
  Cmaes(std::vector<double> mean, const CmaesConfig& config);

  /// Draws the next population (lambda vectors).
  [[nodiscard]] const std::vector<std::vector<double>>& ask();
  /// Updates the distribution from the losses of the last asked population.
  void tell(std::span<const double> losses);

  [[nodiscard]] std::size_t dimension() const noexcept { return n_; }
  [[nodiscard]] std::size_t iteration() const noexcept { return iteration_; }
  [[nodiscard]] double sigma() const noexcept { return sigma_; }
  [[nodiscard]] const Eigen::VectorXd& mean() const noexcept { return mean_; }
  [[nodiscard]] const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
  [[nodiscard]] const std::vector<double>& best_params() const noexcept { return best_x_; }
  [[nodiscard]] double best_loss() const noexcept { return best_f_; }
  [[nodiscard]] std::size_t covariance_repairs() const noexcept { return repairs_; }

 private:
  void update_eigensystem();

  CmaesConfig config_;
  std::size_t n_;
  std::size_t lambda_;
  std::size_t mu_;
  Eigen::VectorXd weights_;
  double mueff_, cs_, ds_, cc_, c1_, cmu_, chin_;

  Eigen::VectorXd mean_;
  double sigma_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd basis_;     // eigenvectors of cov_
  Eigen::VectorXd scales_;    // square roots of its eigenvalues
  Eigen::VectorXd ps_, pc_;
  std::size_t iteration_ = 0;
  std::size_t eigen_iteration_ = 0;
  std::size_t repairs_ = 0;

  Rng rng_;
  std::vector<std::vector<double>> population_;
  std::vector<Eigen::VectorXd> steps_;  // (x - mean) / sigma per candidate
  bool asked_ = false;

  std::vector<double> best_x_;
  double best_f_;
};

struct CmaesResult {
  std::vector<double> best_params;
  double best_loss = 0.0;
  std::vector<double> loss_history;  // population best per iteration
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::size_t covariance_repairs = 0;
  std::string stop_reason;
};

/// Runs until max_iterations or until the best loss improves by less than
/// tolfun over a tolfun_window-iteration window. Throws EvaluationError on a
/// non-finite objective value.
CmaesResult cmaes_minimize(const Objective& objective, std::vector<double> theta0, const CmaesConfig& config);

/// (f(theta + eps e_l) - f(theta - eps e_l)) / (2 eps).
double finite_diff_gradient(const Objective& objective, std::span<const double> theta, std::size_t index,
                            double epsilon);

}  // namespace tnqc::optim
