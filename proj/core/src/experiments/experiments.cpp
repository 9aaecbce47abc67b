#include "tnqc/experiments/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "tnqc/error.hpp"
#include "tnqc/mps/mps.hpp"

namespace tnqc::experiments {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

double ext_sigma(const ExperimentConfig& c) {
  if (c.extension_sigma) return *c.extension_sigma;
  return c.task == Task::kHeisenberg ? 0.0 : 0.01;
}

ExperimentConfig with_sigma0(ExperimentConfig c) {
  if (!c.cmaes_sigma0_set) c.cmaes.sigma0 = default_sigma0(c);
  return c;
}

std::vector<double> run_cmaes(const ExperimentConfig& config, const LossFunction& loss,
                              const circuit::ParamCircuit& circuit, std::vector<double> theta0,
                              std::uint64_t seed, RunRecord& record) {
  optim::CmaesConfig cma = config.cmaes;
  cma.seed = seed;
  std::size_t counted = 0;
  const optim::Objective objective = [&](std::span<const double> p) {
    ++counted;
    return loss(circuit, p);
  };
  record.initial_loss = loss(circuit, theta0);
  const auto result = optim::cmaes_minimize(objective, theta0, cma);
  if (counted != result.evaluations || counted != result.iterations * cma.lambda) {
    throw EvaluationError("objective evaluation count does not match iterations x lambda");
  }
  record.loss_history = result.loss_history;
  record.iterations = result.iterations;
  record.evaluations = result.evaluations;
  record.stop_reason = result.stop_reason;
  if (result.iterations > 0 && result.best_loss < record.initial_loss) {
    record.final_loss = result.best_loss;
    return result.best_params;
  }
  record.final_loss = record.initial_loss;
  return theta0;
}

std::string run_id(const ExperimentConfig& c, std::size_t repetition) {
  std::ostringstream id;
  id << to_string(c.task) << '-' << to_string(c.init);
  if (c.init == Init::kMps) id << "-chi" << c.chi;
  id << "-rep" << repetition;
  return id.str();
}

}  // namespace

std::string to_string(Task t) {
  switch (t) {
    case Task::kCardinality: return "cardinality";
    case Task::kBas: return "bas";
    case Task::kHeisenberg: return "heisenberg";
  }
  return "?";
}

std::string to_string(Init i) {
  switch (i) {
    case Init::kRandom: return "random";
    case Init::kNearIdentity: return "near-identity";
    case Init::kMps: return "mps";
  }
  return "?";
}

Task task_from_string(const std::string& text) {
  if (text == "cardinality") return Task::kCardinality;
  if (text == "bas") return Task::kBas;
  if (text == "heisenberg") return Task::kHeisenberg;
  throw ConfigError("unknown task '" + text + "'");
}

Init init_from_string(const std::string& text) {
  if (text == "random") return Init::kRandom;
  if (text == "near-identity") return Init::kNearIdentity;
  if (text == "mps") return Init::kMps;
  throw ConfigError("unknown init '" + text + "'");
}

std::size_t ExperimentConfig::qubits() const {
  return task == Task::kCardinality ? num_qubits : rows * cols;
}

void ExperimentConfig::validate() const {
  const std::size_t n = qubits();
  if (n < 2) throw ConfigError("config: need at least 2 qubits");
  if (n > circuit::kMaxQubits) throw ConfigError("config: at most 20 qubits are supported");
  if (task == Task::kCardinality && cardinality > num_qubits) throw ConfigError("config: cardinality exceeds N");
  if (task != Task::kCardinality && (rows < 1 || cols < 1)) throw ConfigError("config: rows and cols must be >= 1");
  if (layers < 1) throw ConfigError("config: layers (k) must be >= 1");
  if (chi < 1) throw ConfigError("config: chi must be >= 1");
  if (!(init_sigma >= 0.0)) throw ConfigError("config: init_sigma must be >= 0");
  if (extension_sigma && !(*extension_sigma >= 0.0)) throw ConfigError("config: extension_sigma must be >= 0");
  if (repetitions < 1) throw ConfigError("config: repetitions must be >= 1");
  tnbm.validate();
  dmrg.validate();
  decomposition.validate();
  if (cmaes_sigma0_set) cmaes.validate();
  for (std::size_t q : gradient_variance.qubits) {
    if (q < 2 || q > circuit::kMaxQubits) throw ConfigError("config: gradient_variance qubits must be in [2, 20]");
  }
  if (!(gradient_variance.epsilon > 0.0)) throw ConfigError("config: gradient_variance epsilon must be > 0");
  if (gradient_variance.bootstrap_resamples < 100) throw ConfigError("config: bootstrap_resamples must be >= 100");
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.tnbm.chi_max = c.chi;
  return c;
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c = default_config();
  try {
    check_keys(doc,
               {"task", "num_qubits", "cardinality", "rows", "cols", "layers", "final_all_to_all", "init", "chi",
                "init_sigma", "extension_sigma", "tnbm", "dmrg", "decompose", "cmaes", "repetitions", "seed",
                "output_dir", "gradient_variance"},
               "config");
    if (doc.contains("task")) c.task = task_from_string(doc.at("task").get<std::string>());
    read(doc, "num_qubits", c.num_qubits);
    read(doc, "cardinality", c.cardinality);
    read(doc, "rows", c.rows);
    read(doc, "cols", c.cols);
    read(doc, "layers", c.layers);
    read(doc, "final_all_to_all", c.final_all_to_all);
    if (doc.contains("init")) c.init = init_from_string(doc.at("init").get<std::string>());
    read(doc, "chi", c.chi);
    read(doc, "init_sigma", c.init_sigma);
    if (doc.contains("extension_sigma") && !doc.at("extension_sigma").is_null()) {
      c.extension_sigma = doc.at("extension_sigma").get<double>();
    }
    if (doc.contains("tnbm")) {
      const auto& t = doc.at("tnbm");
      check_keys(t, {"eta", "sweeps", "sv_threshold", "init_bond", "steps_per_bond"}, "config.tnbm");
      read(t, "eta", c.tnbm.eta);
      read(t, "sweeps", c.tnbm.sweeps);
      read(t, "sv_threshold", c.tnbm.sv_threshold);
      read(t, "init_bond", c.tnbm.init_bond);
      read(t, "steps_per_bond", c.tnbm.steps_per_bond);
    }
    if (doc.contains("dmrg")) {
      const auto& d = doc.at("dmrg");
      check_keys(d, {"chi_max", "sweeps", "sv_threshold", "seed"}, "config.dmrg");
      read(d, "chi_max", c.dmrg.chi_max);
      read(d, "sweeps", c.dmrg.sweeps);
      read(d, "sv_threshold", c.dmrg.sv_threshold);
      read(d, "seed", c.dmrg.seed);
    }
    if (doc.contains("decompose")) {
      const auto& d = doc.at("decompose");
      check_keys(d, {"f_target", "sweeps_per_layer", "min_sweep_gain", "sv_threshold"}, "config.decompose");
      read(d, "f_target", c.decomposition.f_target);
      read(d, "sweeps_per_layer", c.decomposition.sweeps_per_layer);
      read(d, "min_sweep_gain", c.decomposition.min_sweep_gain);
      read(d, "sv_threshold", c.decomposition.sv_threshold);
    }
    if (doc.contains("cmaes")) {
      const auto& m = doc.at("cmaes");
      check_keys(m, {"sigma0", "lambda", "max_iterations", "tolfun", "tolfun_window"}, "config.cmaes");
      if (m.contains("sigma0") && !m.at("sigma0").is_null()) {
        c.cmaes.sigma0 = m.at("sigma0").get<double>();
        c.cmaes_sigma0_set = true;
      }
      read(m, "lambda", c.cmaes.lambda);
      read(m, "max_iterations", c.cmaes.max_iterations);
      read(m, "tolfun", c.cmaes.tolfun);
      read(m, "tolfun_window", c.cmaes.tolfun_window);
    }
    read(doc, "repetitions", c.repetitions);
    read(doc, "seed", c.seed);
    read(doc, "output_dir", c.output_dir);
    if (doc.contains("gradient_variance")) {
      const auto& g = doc.at("gradient_variance");
      check_keys(g, {"qubits", "index", "epsilon", "bootstrap_resamples"}, "config.gradient_variance");
      read(g, "qubits", c.gradient_variance.qubits);
      read(g, "index", c.gradient_variance.index);
      read(g, "epsilon", c.gradient_variance.epsilon);
      read(g, "bootstrap_resamples", c.gradient_variance.bootstrap_resamples);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.tnbm.chi_max = c.chi;
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json doc = {
      {"task", to_string(c.task)},
      {"num_qubits", c.num_qubits},
      {"cardinality", c.cardinality},
      {"rows", c.rows},
      {"cols", c.cols},
      {"layers", c.layers},
      {"final_all_to_all", c.final_all_to_all},
      {"init", to_string(c.init)},
      {"chi", c.chi},
      {"init_sigma", c.init_sigma},
      {"extension_sigma", c.extension_sigma ? json(*c.extension_sigma) : json(nullptr)},
      {"tnbm",
       {{"eta", c.tnbm.eta},
        {"sweeps", c.tnbm.sweeps},
        {"sv_threshold", c.tnbm.sv_threshold},
        {"init_bond", c.tnbm.init_bond},
        {"steps_per_bond", c.tnbm.steps_per_bond}}},
      {"dmrg",
       {{"chi_max", c.dmrg.chi_max},
        {"sweeps", c.dmrg.sweeps},
        {"sv_threshold", c.dmrg.sv_threshold},
        {"seed", c.dmrg.seed}}},
      {"decompose",
       {{"f_target", c.decomposition.f_target},
        {"sweeps_per_layer", c.decomposition.sweeps_per_layer},
        {"min_sweep_gain", c.decomposition.min_sweep_gain},
        {"sv_threshold", c.decomposition.sv_threshold}}},
      {"cmaes",
       {{"sigma0", c.cmaes_sigma0_set ? json(c.cmaes.sigma0) : json(nullptr)},
        {"lambda", c.cmaes.lambda},
        {"max_iterations", c.cmaes.max_iterations},
        {"tolfun", c.cmaes.tolfun},
        {"tolfun_window", c.cmaes.tolfun_window}}},
      {"repetitions", c.repetitions},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"gradient_variance",
       {{"qubits", c.gradient_variance.qubits},
        {"index", c.gradient_variance.index},
        {"epsilon", c.gradient_variance.epsilon},
        {"bootstrap_resamples", c.gradient_variance.bootstrap_resamples}}},
  };
  return doc;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

double default_sigma0(const ExperimentConfig& c) {
  if (c.task != Task::kHeisenberg || c.init != Init::kMps) return 1e-2;
  if (c.chi <= 2) return 7.5e-3;
  if (c.chi <= 4) return 5e-3;
  return 2.5e-3;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  const auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31U);
  };
  return mix(mix(mix(master) ^ stream) ^ index);
}

json to_json(const RunRecord& r) {
  const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {
      {"run_id", r.run_id},
      {"config", r.config},
      {"seed", r.seed},
      {"initial_loss", r.initial_loss},
      {"final_loss", r.final_loss},
      {"wall_time_s", r.wall_time_s},
      {"iterations", r.iterations},
      {"evaluations", r.evaluations},
      {"gate_count", r.gate_count},
      {"param_count", r.param_count},
      {"stop_reason", r.stop_reason},
      {"mps_loss", opt(r.mps_loss)},
      {"decomposition_fidelity", opt(r.decomposition_fidelity)},
      {"ground_energy", opt(r.ground_energy)},
      {"warnings", r.warnings},
  };
}

LossFunction::LossFunction(const ExperimentConfig& c) {
  switch (c.task) {
    case Task::kCardinality: dataset_ = tasks::cardinality_dataset(c.num_qubits, c.cardinality); break;
    case Task::kBas: dataset_ = tasks::bas_dataset(c.rows, c.cols); break;
    case Task::kHeisenberg:
      hamiltonian_ = tasks::heisenberg_terms(c.rows, c.cols);
      ground_energy_ = tasks::exact_ground_state(*hamiltonian_).first;
      break;
  }
}

double LossFunction::of_state(const Vector& psi) const {
  if (hamiltonian_) return tasks::energy(psi, *hamiltonian_) - ground_energy_;
  const RealVector q = circuit::born_probabilities(psi);
  return tasks::kl_divergence(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())), *dataset_);
}

double LossFunction::operator()(const circuit::ParamCircuit& c, std::span<const double> params) const {
  return of_state(circuit::simulate(c, params));
}

double LossFunction::of_mps(const mps::Mps& state) const {
  if (hamiltonian_) return of_state(mps::to_statevector(state));
  return tnbm::kl_of_mps(state, *dataset_);
}

SynergyInit mps_initialized_circuit(const ExperimentConfig& config, const LossFunction& loss, std::uint64_t seed) {
  SynergyInit out;
  const std::size_t n = config.qubits();
  if (loss.is_hamiltonian()) {
    const auto mpo = ground_state::heisenberg_mpo(config.rows, config.cols);
    const auto gs = ground_state::dmrg_ground_state(mpo, config.dmrg);
    out.target = mps::truncate(gs.state, {config.chi, 0.0});
  } else {
    tnbm::TnbmConfig t = config.tnbm;
    t.chi_max = config.chi;
    t.seed = seed;
    out.target = tnbm::train_tnbm(*loss.dataset(), t).mps;
  }
  out.mps_loss = loss.of_mps(out.target);

  decompose::DecomposeConfig d = config.decomposition;
  d.max_layers = config.layers;
  const auto dec = decompose::decompose_mps(out.target, d);
  out.fidelity = dec.fidelity;
  out.converged = dec.converged;

  Rng rng(derive_seed(seed, 7, 0));
  const double sigma = ext_sigma(config);
  std::vector<circuit::Layer> layers = dec.circuit.layers();
  // A decomposition that converged early leaves the residual at |0...0>, so
  // further extracted layers would be identities; pad with near-identity
  // layers executed first.
  while (layers.size() < config.layers) {
    circuit::Layer pad;
    for (const auto& [i, j] : circuit::layer_pairs(n, circuit::Topology::kLinear)) {
      circuit::Gate g{i, j, {}, 0.0};
      if (sigma > 0.0) {
        std::normal_distribution<double> dist(0.0, sigma);
        for (double& t : g.theta) t = dist(rng);
      }
      pad.gates.push_back(g);
    }
    layers.insert(layers.begin(), std::move(pad));
    ++out.padded_layers;
  }
  out.circuit = circuit::ParamCircuit(n, std::move(layers));
  if (config.final_all_to_all) out.circuit = circuit::extend_final_layer(out.circuit, sigma, rng);
  return out;
}

RunRecord run_synergy(const ExperimentConfig& config_in, std::size_t repetition) {
  ExperimentConfig config = with_sigma0(config_in);
  config.validate();
  if (config.init != Init::kMps) throw ConfigError("run_synergy: init must be mps");
  const auto start = std::chrono::steady_clock::now();
  const LossFunction loss(config);

  RunRecord record;
  record.run_id = run_id(config, repetition);
  record.config = to_json(config);
  record.seed = derive_seed(config.seed, 1, repetition);
  const SynergyInit init = mps_initialized_circuit(config, loss, record.seed);
  record.mps_loss = init.mps_loss;
  record.decomposition_fidelity = init.fidelity;
  if (!init.converged && config.decomposition.f_target < 1.0) {
    record.warnings.push_back("decomposition did not reach f_target");
  }
  if (init.padded_layers > 0) {
    record.warnings.push_back("decomposition converged early; padded " + std::to_string(init.padded_layers) +
                              " near-identity layer(s)");
  }
  if (loss.is_hamiltonian()) record.ground_energy = loss.ground_energy();
  record.gate_count = init.circuit.gate_count();
  record.param_count = init.circuit.param_count();
  record.best_params = run_cmaes(config, loss, init.circuit, init.circuit.parameters(),
                                 derive_seed(config.seed, 2, repetition), record);
  record.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

RunRecord run_baseline(const ExperimentConfig& config_in, std::size_t repetition) {
  ExperimentConfig config = with_sigma0(config_in);
  config.validate();
  if (config.init == Init::kMps) throw ConfigError("run_baseline: init must be random or near-identity");
  const auto start = std::chrono::steady_clock::now();
  const LossFunction loss(config);

  RunRecord record;
  record.run_id = run_id(config, repetition);
  record.config = to_json(config);
  record.seed = derive_seed(config.seed, 1, repetition);
  if (loss.is_hamiltonian()) record.ground_energy = loss.ground_energy();
  const auto circuit = circuit::build_circuit(config.qubits(), config.layers, config.final_all_to_all);
  Rng rng(record.seed);
  const auto mode = config.init == Init::kRandom ? circuit::InitMode::kRandom : circuit::InitMode::kNearIdentity;
  auto theta0 = circuit::init_params(circuit, mode, config.init_sigma, rng);
  record.gate_count = circuit.gate_count();
  record.param_count = circuit.param_count();
  record.best_params = run_cmaes(config, loss, circuit, std::move(theta0), derive_seed(config.seed, 2, repetition), record);
  record.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

RunRecord run_training(const ExperimentConfig& config, std::size_t repetition) {
  return config.init == Init::kMps ? run_synergy(config, repetition) : run_baseline(config, repetition);
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw ConfigError("percentile: no values");
  if (!(pct >= 0.0 && pct <= 100.0)) throw ConfigError("percentile: pct must be in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

BootstrapResult bootstrap_median_ci(std::span<const double> samples, std::size_t resamples, double lower_pct,
                                    double upper_pct, std::uint64_t seed) {
  if (samples.empty()) throw ConfigError("bootstrap: no samples");
  if (resamples < 100) throw ConfigError("bootstrap: resamples must be >= 100");
  if (!(lower_pct <= upper_pct)) throw ConfigError("bootstrap: lower percentile above upper");
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
  std::vector<double> medians(resamples);
  std::vector<double> draw(samples.size());
  for (auto& m : medians) {
    for (auto& d : draw) d = samples[pick(rng)];
    m = percentile(draw, 50.0);
  }
  return {percentile({samples.begin(), samples.end()}, 50.0), percentile(medians, lower_pct),
          percentile(medians, upper_pct)};
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(values.size() - 1);
}

std::vector<GradientVarianceRow> run_gradient_variance(const ExperimentConfig& config_in) {
  config_in.validate();
  std::vector<GradientVarianceRow> rows;
  for (std::size_t n : config_in.gradient_variance.qubits) {
    ExperimentConfig c = config_in;
    c.task = Task::kCardinality;
    c.num_qubits = n;
    c.cardinality = n / 2;
    const LossFunction loss(c);
    GradientVarianceRow row;
    row.num_qubits = n;
    row.layers = c.layers;
    row.topology = c.final_all_to_all ? "all-to-all" : "linear";
    row.init = c.init == Init::kMps ? "mps-chi" + std::to_string(c.chi) : to_string(c.init);
    for (std::size_t rep = 0; rep < c.repetitions; ++rep) {
      const std::uint64_t seed = derive_seed(c.seed, 100 + n, rep);
      circuit::ParamCircuit circ;
      std::vector<double> theta;
      if (c.init == Init::kMps) {
        circ = mps_initialized_circuit(c, loss, seed).circuit;
        theta = circ.parameters();
      } else {
        circ = circuit::build_circuit(n, c.layers, c.final_all_to_all);
        Rng rng(seed);
        const auto mode = c.init == Init::kRandom ? circuit::InitMode::kRandom : circuit::InitMode::kNearIdentity;
        theta = circuit::init_params(circ, mode, c.init_sigma, rng);
      }
      if (c.gradient_variance.index >= theta.size()) throw ConfigError("gradient_variance: probe index out of range");
      const optim::Objective f = [&](std::span<const double> p) { return loss(circ, p); };
      row.gradients.push_back(
          optim::finite_diff_gradient(f, theta, c.gradient_variance.index, c.gradient_variance.epsilon));
    }
    row.variance = sample_variance(row.gradients);
    // Bootstrap distribution of the variance statistic.
    Rng rng(derive_seed(c.seed, 200 + n, 0));
    std::uniform_int_distribution<std::size_t> pick(0, row.gradients.size() - 1);
    std::vector<double> stats(c.gradient_variance.bootstrap_resamples);
    std::vector<double> draw(row.gradients.size());
    for (auto& s : stats) {
      for (auto& d : draw) d = row.gradients[pick(rng)];
      s = sample_variance(draw);
    }
    row.median = percentile(stats, 50.0);
    row.ci_low = percentile(stats, 25.0);
    row.ci_high = percentile(stats, 75.0);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

void write_losses_csv(std::span<const RunRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "run_id,iteration,loss\n";
  for (const auto& r : records) {
    for (std::size_t i = 0; i < r.loss_history.size(); ++i) {
      out << r.run_id << ',' << i << ',' << format_double(r.loss_history[i]) << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_plot_svg(std::span<const RunRecord> records, const std::filesystem::path& path) {
  constexpr double kWidth = 800, kHeight = 500, kLeft = 70, kRight = 20, kTop = 20, kBottom = 50;
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::size_t max_len = 1;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& r : records) {
    max_len = std::max(max_len, r.loss_history.size());
    for (double v : r.loss_history) {
      if (v > 0 && std::isfinite(v)) {
        lo = std::min(lo, std::log10(v));
        hi = std::max(hi, std::log10(v));
      }
    }
  }
  if (!std::isfinite(lo)) lo = -1, hi = 0;
  if (hi - lo < 1e-12) hi = lo + 1;
  const double floor = lo;
  const auto xpos = [&](std::size_t i) {
    return kLeft + (kWidth - kLeft - kRight) * (max_len > 1 ? double(i) / double(max_len - 1) : 0.0);
  };
  const auto ypos = [&](double v) {
    const double l = v > 0 && std::isfinite(v) ? std::log10(v) : floor;
    return kTop + (kHeight - kTop - kBottom) * (hi - l) / (hi - lo);
  };

  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
      << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
      << "\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(std::ceil(lo)); d <= static_cast<int>(std::floor(hi)); ++d) {
    const double y = kTop + (kHeight - kTop - kBottom) * (hi - d) / (hi - lo);
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4 << "\" font-size=\"12\" text-anchor=\"end\">1e" << d
        << "</text>\n";
  }
  out << "<text x=\"" << (kWidth + kLeft) / 2 << "\" y=\"" << kHeight - 12
      << "\" font-size=\"13\" text-anchor=\"middle\">iteration</text>\n";
  out << "<text x=\"16\" y=\"" << (kHeight - kBottom) / 2 << "\" font-size=\"13\" transform=\"rotate(-90 16 "
      << (kHeight - kBottom) / 2 << ")\" text-anchor=\"middle\">loss</text>\n";
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    out << "<polyline fill=\"none\" stroke=\"" << kColors[k % 10] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < r.loss_history.size(); ++i) {
      out << (i ? " " : "") << xpos(i) << ',' << ypos(r.loss_history[i]);
    }
    out << "\"><title>" << r.run_id << "</title></polyline>\n";
  }
  out << "</svg>\n";
}

void emit_artifacts(std::span<const RunRecord> records, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_losses_csv(records, dir / "losses.csv");
  json runs = json::array();
  for (const auto& r : records) runs.push_back(to_json(r));
  std::ofstream meta(dir / "run.json");
  if (!meta) throw IoError("cannot write " + (dir / "run.json").string());
  meta << json{{"runs", runs}}.dump(2) << '\n';
  write_plot_svg(records, dir / "plot.svg");
}

void write_gradient_variance(std::span<const GradientVarianceRow> rows, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::ofstream csv(dir / "grad_variance.csv");
  if (!csv) throw IoError("cannot write " + (dir / "grad_variance.csv").string());
  csv << "num_qubits,layers,topology,init,variance,median,ci_low,ci_high\n";
  json doc = json::array();
  for (const auto& r : rows) {
    csv << r.num_qubits << ',' << r.layers << ',' << r.topology << ',' << r.init << ',' << format_double(r.variance)
        << ',' << format_double(r.median) << ',' << format_double(r.ci_low) << ',' << format_double(r.ci_high)
        << '\n';
    doc.push_back({{"num_qubits", r.num_qubits},
                   {"layers", r.layers},
                   {"topology", r.topology},
                   {"init", r.init},
                   {"variance", r.variance},
                   {"median", r.median},
                   {"ci_low", r.ci_low},
                   {"ci_high", r.ci_high},
                   {"gradients", r.gradients}});
  }
  std::ofstream out(dir / "grad_variance.json");
  if (!out) throw IoError("cannot write " + (dir / "grad_variance.json").string());
  out << doc.dump(2) << '\n';
}

}  // namespace tnqc::experiments
