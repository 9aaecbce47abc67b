#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tnqc/circuit/circuit.hpp"
#include "tnqc/decompose/decompose.hpp"
#include "tnqc/ground_state/dmrg.hpp"
#include "tnqc/optim/cmaes.hpp"
#include "tnqc/tasks/dataset.hpp"
#include "tnqc/tasks/hamiltonian.hpp"
#include "tnqc/tnbm/tnbm.hpp"

namespace tnqc::experiments {

enum class Task { kCardinality, kBas, kHeisenberg };
enum class Init { kRandom, kNearIdentity, kMps };

std::string to_string(Task t);
std::string to_string(Init i);
Task task_from_string(const std::string& text);
Init init_from_string(const std::string& text);

struct GradientVarianceConfig {
  std::vector<std::size_t> qubits{4, 8, 12, 16};
  std::size_t index = 7;  // flat parameter index of the probe (YY angle of the first gate)
  double epsilon = 1e-8;
  std::size_t bootstrap_resamples = 1000;
};

struct ExperimentConfig {
  Task task = Task::kCardinality;
  std::size_t num_qubits = 8;
  std::size_t cardinality = 4;
  std::size_t rows = 2;
  std::size_t cols = 2;

  std::size_t layers = 3;
  bool final_all_to_all = true;

  Init init = Init::kMps;
  std::size_t chi = 4;
  double init_sigma = 0.01;
  // Angles of gates added after the decomposition (extension and padding).
  // Unset means 0.01 for generative tasks and 0 for the Hamiltonian task.
  std::optional<double> extension_sigma;

  tnbm::TnbmConfig tnbm{};
  ground_state::DmrgConfig dmrg{};
  decompose::DecomposeConfig decomposition{};
  // Unset sigma0 picks the per-task default (see default_sigma0).
  optim::CmaesConfig cmaes{};
  bool cmaes_sigma0_set = false;

  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  GradientVarianceConfig gradient_variance{};

  /// Number of qubits implied by the task.
  [[nodiscard]] std::size_t qubits() const;
  void validate() const;
};

ExperimentConfig default_config();
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Initial CMA-ES step size used when the config leaves it unset.
double default_sigma0(const ExperimentConfig& config);

/// splitmix64 of (master, stream, index); independent per repetition.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

struct RunRecord {
  std::string run_id;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<double> loss_history;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double wall_time_s = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::size_t gate_count = 0;
  std::size_t param_count = 0;
  std::string stop_reason;
  std::optional<double> mps_loss;
  std::optional<double> decomposition_fidelity;
  std::optional<double> ground_energy;
  std::vector<std::string> warnings;
  std::vector<double> best_params;
};

nlohmann::json to_json(const RunRecord& record);

/// Loss evaluated on circuit parameters: KL for generative tasks, energy
/// minus the exact ground energy for the Hamiltonian task.
class LossFunction {
 public:
  explicit LossFunction(const ExperimentConfig& config);

  [[nodiscard]] double operator()(const circuit::ParamCircuit& circuit, std::span<const double> params) const;
  [[nodiscard]] double of_state(const Vector& psi) const;
  [[nodiscard]] double of_mps(const mps::Mps& state) const;

  [[nodiscard]] bool is_hamiltonian() const noexcept { return hamiltonian_.has_value(); }
  [[nodiscard]] const std::optional<tasks::Dataset>& dataset() const noexcept { return dataset_; }
  [[nodiscard]] double ground_energy() const noexcept { return ground_energy_; }

 private:
  std::optional<tasks::Dataset> dataset_;
  std::optional<tasks::PauliHamiltonian> hamiltonian_;
  double ground_energy_ = 0.0;
};

struct SynergyInit {
  circuit::ParamCircuit circuit;
  mps::Mps target;
  double mps_loss = 0.0;
  double fidelity = 0.0;
  bool converged = false;
  std::size_t padded_layers = 0;
};

/// MPS training, decomposition into `layers` linear layers (padded with
/// near-identity layers if it converges early) and optional extension of the
/// final layer. Exposed separately for the gradient-variance experiment.
SynergyInit mps_initialized_circuit(const ExperimentConfig& config, const LossFunction& loss, std::uint64_t seed);

RunRecord run_synergy(const ExperimentConfig& config, std::size_t repetition);
RunRecord run_baseline(const ExperimentConfig& config, std::size_t repetition);
/// Dispatches on config.init.
RunRecord run_training(const ExperimentConfig& config, std::size_t repetition);

struct BootstrapResult {
  double median = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Percentile bootstrap of the median.
BootstrapResult bootstrap_median_ci(std::span<const double> samples, std::size_t resamples, double lower_pct,
                                    double upper_pct, std::uint64_t seed);

/// Percentile with linear interpolation between order statistics.
double percentile(std::vector<double> values, double pct);

struct GradientVarianceRow {
  std::size_t num_qubits = 0;
  std::size_t layers = 0;
  std::string topology;
  std::string init;
  double variance = 0.0;
  double median = 0.0;   // median of bootstrap variances
  double ci_low = 0.0;   // 25th percentile of bootstrap variances
  double ci_high = 0.0;  // 75th percentile of bootstrap variances
  std::vector<double> gradients;
};

double sample_variance(std::span<const double> values);

std::vector<GradientVarianceRow> run_gradient_variance(const ExperimentConfig& config);

/// losses.csv, run.json and plot.svg in `dir`.
void emit_artifacts(std::span<const RunRecord> records, const std::filesystem::path& dir);
void write_losses_csv(std::span<const RunRecord> records, const std::filesystem::path& path);
void write_plot_svg(std::span<const RunRecord> records, const std::filesystem::path& path);
void write_gradient_variance(std::span<const GradientVarianceRow> rows, const std::filesystem::path& dir);

/// "%.16e": enough digits to round-trip a double.
std::string format_double(double x);

}  // namespace tnqc::experiments
