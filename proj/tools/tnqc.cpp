#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tnqc/circuit/circuit.hpp"
#include "tnqc/decompose/decompose.hpp"
#include "tnqc/error.hpp"
#include "tnqc/experiments/experiments.hpp"
#include "tnqc/ground_state/dmrg.hpp"
#include "tnqc/mps/io.hpp"
#include "tnqc/tasks/hamiltonian.hpp"
#include "tnqc/tnbm/tnbm.hpp"

namespace fs = std::filesystem;
namespace ex = tnqc::experiments;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> reps;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON experiment config");
  cmd->add_option("--seed", c.seed, "master seed (overrides config)");
  cmd->add_option("--out", c.out, "output directory (overrides config)");
  cmd->add_option("--reps", c.reps, "repetitions (overrides config)")->check(CLI::PositiveNumber);
}

ex::ExperimentConfig resolve(const Common& c) {
  json doc = json::object();
  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path);
    if (!in) throw tnqc::ConfigError("cannot open config " + c.config_path);
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw tnqc::ConfigError("config " + c.config_path + ": " + e.what());
    }
  }
  if (c.seed) doc["seed"] = *c.seed;
  if (c.out) doc["output_dir"] = *c.out;
  if (c.reps) doc["repetitions"] = *c.reps;
  return ex::config_from_json(doc);
}

fs::path prepare(const ex::ExperimentConfig& c) {
  const fs::path dir = c.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw tnqc::IoError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw tnqc::IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int train_tnbm(const ex::ExperimentConfig& cfg) {
  if (cfg.task == ex::Task::kHeisenberg) throw tnqc::ConfigError("train-tnbm needs a generative task");
  const auto dir = prepare(cfg);
  const ex::LossFunction loss(cfg);
  std::vector<ex::RunRecord> records;
  for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    auto t = cfg.tnbm;
    t.chi_max = cfg.chi;
    t.seed = ex::derive_seed(cfg.seed, 1, rep);
    const auto res = tnqc::tnbm::train_tnbm(*loss.dataset(), t);
    ex::RunRecord r;
    r.run_id = ex::to_string(cfg.task) + "-tnbm-chi" + std::to_string(cfg.chi) + "-rep" + std::to_string(rep);
    r.config = ex::to_json(cfg);
    r.seed = t.seed;
    r.loss_history = res.loss_history;
    r.initial_loss = loss.of_mps(tnqc::tnbm::initial_state(cfg.qubits(), t));
    r.final_loss = res.loss_history.back();
    r.iterations = res.loss_history.size();
    r.wall_time_s = seconds_since(t0);
    tnqc::mps::save(dir / (r.run_id + ".mps"), res.mps);
    std::printf("%s: KL %.6g after %zu sweeps, max bond %zu\n", r.run_id.c_str(), r.final_loss, r.iterations,
                res.mps.max_bond());
    records.push_back(std::move(r));
  }
  ex::emit_artifacts(records, dir);
  return 0;
}

int ground_state(const ex::ExperimentConfig& cfg) {
  if (cfg.task != ex::Task::kHeisenberg) throw tnqc::ConfigError("ground-state needs task heisenberg");
  const auto dir = prepare(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const auto mpo = tnqc::ground_state::heisenberg_mpo(cfg.rows, cfg.cols);
  auto d = cfg.dmrg;
  d.seed = ex::derive_seed(cfg.seed, 1, 0);
  const auto res = tnqc::ground_state::dmrg_ground_state(mpo, d);
  const double e0 = tnqc::tasks::exact_ground_state(tnqc::tasks::heisenberg_terms(cfg.rows, cfg.cols)).first;
  json out = {{"rows", cfg.rows},
              {"cols", cfg.cols},
              {"chi_max", d.chi_max},
              {"energy", res.energy},
              {"exact_energy", e0},
              {"energy_error", res.energy - e0},
              {"half_sweep_energies", res.half_sweep_energies},
              {"wall_time_s", seconds_since(t0)},
              {"truncations", json::array()}};
  for (std::size_t chi = 1; chi < res.state.max_bond(); chi *= 2) {
    const auto t = tnqc::mps::truncate(res.state, {chi, 0.0});
    out["truncations"].push_back({{"chi", chi}, {"energy", tnqc::ground_state::energy_of_mps(t, mpo)}});
  }
  tnqc::mps::save(dir / "ground_state.mps", res.state);
  write_json(dir / "ground_state.json", out);
  std::printf("E = %.12f (exact %.12f, error %.3e)\n", res.energy, e0, res.energy - e0);
  return 0;
}

int decompose(const ex::ExperimentConfig& cfg, const std::string& mps_path) {
  const auto dir = prepare(cfg);
  tnqc::mps::Mps target;
  if (!mps_path.empty()) {
    target = tnqc::mps::load(mps_path);
  } else {
    const ex::LossFunction loss(cfg);
    target = ex::mps_initialized_circuit(cfg, loss, ex::derive_seed(cfg.seed, 1, 0)).target;
  }
  auto d = cfg.decomposition;
  d.max_layers = cfg.layers;
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = tnqc::decompose::decompose_mps(target, d);
  tnqc::circuit::save_circuit(res.circuit, (dir / "circuit.json").string());
  write_json(dir / "decomposition.json", {{"num_qubits", target.num_sites()},
                                          {"layers", res.stack.layers.size()},
                                          {"fidelity", res.fidelity},
                                          {"converged", res.converged},
                                          {"fidelity_history", res.stack.fidelity_history},
                                          {"rank_deficient_visits", res.rank_deficient_visits},
                                          {"wall_time_s", seconds_since(t0)}});
  std::printf("fidelity %.12f with %zu layer(s)\n", res.fidelity, res.stack.layers.size());
  return 0;
}

int train(const ex::ExperimentConfig& cfg) {
  const auto dir = prepare(cfg);
  std::vector<ex::RunRecord> records;
  for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
    records.push_back(ex::run_training(cfg, rep));
    const auto& r = records.back();
    std::printf("%s: loss %.6g -> %.6g in %zu iterations (%s)\n", r.run_id.c_str(), r.initial_loss, r.final_loss,
                r.iterations, r.stop_reason.c_str());
    for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s: %s\n", r.run_id.c_str(), w.c_str());
  }
  ex::emit_artifacts(records, dir);
  return 0;
}

int grad_variance(const ex::ExperimentConfig& cfg) {
  const auto dir = prepare(cfg);
  const auto rows = ex::run_gradient_variance(cfg);
  ex::write_gradient_variance(rows, dir);
  for (const auto& r : rows) {
    std::printf("N=%zu %s %s: var %.4e [%.4e, %.4e]\n", r.num_qubits, r.init.c_str(), r.topology.c_str(), r.variance,
                r.ci_low, r.ci_high);
  }
  return 0;
}

// MPS-initialized runs next to near-identity and random baselines with the
// same layout and budget.
int synergy(ex::ExperimentConfig cfg) {
  const auto dir = prepare(cfg);
  std::vector<ex::RunRecord> records;
  std::vector<ex::Init> inits{ex::Init::kMps, ex::Init::kNearIdentity};
  if (cfg.task != ex::Task::kHeisenberg) inits.push_back(ex::Init::kRandom);
  for (auto init : inits) {
    cfg.init = init;
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
      records.push_back(ex::run_training(cfg, rep));
      const auto& r = records.back();
      std::printf("%s: final loss %.6g\n", r.run_id.c_str(), r.final_loss);
    }
  }
  ex::emit_artifacts(records, dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor-network initialization of parametrized quantum circuits"};
  app.require_subcommand(1);
  Common common;
  std::string mps_path;

  auto* tnbm_cmd = app.add_subcommand("train-tnbm", "train an MPS Born machine on the configured dataset");
  auto* gs_cmd = app.add_subcommand("ground-state", "DMRG ground state of the configured Heisenberg grid");
  auto* dec_cmd = app.add_subcommand("decompose", "decompose an MPS into linear layers of two-qubit gates");
  auto* qcbm_cmd = app.add_subcommand("train-qcbm", "train a circuit Born machine with CMA-ES");
  auto* vqe_cmd = app.add_subcommand("train-vqe", "variational ground-state search with CMA-ES");
  auto* gv_cmd = app.add_subcommand("grad-variance", "variance of a single-angle gradient versus qubit count");
  auto* syn_cmd = app.add_subcommand("synergy", "MPS-initialized training next to the baselines");
  for (auto* cmd : {tnbm_cmd, gs_cmd, dec_cmd, qcbm_cmd, vqe_cmd, gv_cmd, syn_cmd}) add_common(cmd, common);
  dec_cmd->add_option("--mps", mps_path, "MPS file to decompose (default: build one from the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const auto cfg = resolve(common);
    if (*tnbm_cmd) return train_tnbm(cfg);
    if (*gs_cmd) return ground_state(cfg);
    if (*dec_cmd) return decompose(cfg, mps_path);
    if (*qcbm_cmd) {
      if (cfg.task == ex::Task::kHeisenberg) throw tnqc::ConfigError("train-qcbm needs a generative task");
      return train(cfg);
    }
    if (*vqe_cmd) {
      if (cfg.task != ex::Task::kHeisenberg) throw tnqc::ConfigError("train-vqe needs task heisenberg");
      return train(cfg);
    }
    if (*gv_cmd) return grad_variance(cfg);
    if (*syn_cmd) return synergy(cfg);
  } catch (const tnqc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
