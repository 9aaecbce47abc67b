#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tnqc/mps/mps.hpp"
#include "tnqc/tasks/dataset.hpp"

namespace tnqc::tnbm {

/// Settings for Born-machine training of an MPS by two-site gradient sweeps.
struct TnbmConfig {
  double eta = 0.01;
  std::size_t sweeps = 50;
  std::size_t chi_max = 8;
  double sv_threshold = 5e-5;
  std::uint64_t seed = 0;
  // Bond dimension of the near-uniform starting state (capped by chi_max).
  std::size_t init_bond = 2;
  // Gradient steps on the merged tensor before it is split again.
  std::size_t steps_per_bond = 1;

  void validate() const;
};

struct TnbmResult {
  mps::Mps mps;
  std::vector<double> loss_history;  // KL after every full sweep
};

/// Gradient of the KL loss with respect to the merged tensor of sites
/// (site, site + 1), shape (l, 2, 2, r). Requires the gauge center at site or
/// site + 1. Uses the descent convention theta <- theta - eta * grad.
linalg::DenseTensor two_site_gradient(const mps::Mps& mps, const tasks::Dataset& data,
                                      std::size_t site);

/// KL(p_D || |psi|^2) for a normalized MPS.
double kl_of_mps(const mps::Mps& mps, const tasks::Dataset& data);

/// Cores drawn uniformly from [0.9, 1.1], then normalized.
mps::Mps initial_state(std::size_t num_sites, const TnbmConfig& config);

/// Runs `config.sweeps` left-right-left sweeps of merge / gradient step /
/// SVD split. Deterministic for a fixed config.
TnbmResult train_tnbm(const tasks::Dataset& data, const TnbmConfig& config);

}  // namespace tnqc::tnbm
