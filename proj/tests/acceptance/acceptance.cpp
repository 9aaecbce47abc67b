// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "tnqc/circuit/circuit.hpp"
#include "tnqc/decompose/decompose.hpp"
#include "tnqc/experiments/experiments.hpp"
#include "tnqc/ground_state/dmrg.hpp"
#include "tnqc/mps/mps.hpp"
#include "tnqc/optim/cmaes.hpp"
#include "tnqc/tasks/dataset.hpp"
#include "tnqc/tasks/hamiltonian.hpp"
#include "tnqc/tnbm/tnbm.hpp"

using namespace tnqc;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

// 1 ----------------------------------------------------------------------

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(1001);
  double amp_err = 0, inner_err = 0, gate_fid = 1, circ_fid = 1, energy_err = 0;
  const std::vector<std::pair<std::size_t, std::size_t>> grids{{1, 2}, {1, 3}, {2, 2}, {1, 5}, {2, 3},
                                                               {1, 7}, {2, 4}, {3, 3}, {2, 5}};
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 2 + static_cast<std::size_t>(inst) % 9;
    const std::size_t chi = 1 + static_cast<std::size_t>(inst) % 5;
    const mps::Mps a = mps::Mps::random(n, chi, rng);
    const mps::Mps b = mps::Mps::random(n, 1 + (chi + 2) % 5, rng);
    const Vector da = oracle::mps_dense(a);
    const Vector db = oracle::mps_dense(b);

    const Vector sv = mps::to_statevector(a);
    amp_err = std::max(amp_err, (sv - da).cwiseAbs().maxCoeff());
    std::uniform_int_distribution<std::uint64_t> pick(0, (std::uint64_t{1} << n) - 1);
    for (int s = 0; s < 8; ++s) {
      const auto x = pick(rng);
      amp_err = std::max(amp_err, std::abs(mps::amplitude(a, Bitstring(x, n)) - da(static_cast<Eigen::Index>(x))));
    }
    inner_err = std::max(inner_err, std::abs(mps::inner(a, b) - da.dot(db)));

    std::uniform_int_distribution<std::size_t> site(0, n - 2);
    const std::size_t q = site(rng);
    const Matrix u = oracle::haar_unitary(4, rng);
    const mps::Mps applied = mps::apply_two_site_gate(a, u, q);
    gate_fid = std::min(gate_fid, oracle::fidelity(oracle::mps_dense(applied), oracle::apply_dense(n, u, q, q + 1, da)));

    const auto circ = circuit::build_circuit(n, 2, inst % 2 == 1);
    Rng prng(static_cast<std::uint64_t>(inst));
    const auto theta = circuit::init_params(circ, circuit::InitMode::kRandom, 0, prng);
    Vector expected = Vector::Zero(static_cast<Eigen::Index>(std::size_t{1} << n));
    expected(0) = 1;
    std::size_t offset = 0;
    for (const auto& layer : circ.layers()) {
      for (const auto& g : layer.gates) {
        expected = oracle::apply_dense(n, oracle::su4(theta.data() + offset), g.i, g.j, expected);
        offset += circuit::kParamsPerGate;
      }
    }
    const Vector got = circuit::simulate(circ, theta);
    circ_fid = std::min(circ_fid, oracle::fidelity(got, expected));
    amp_err = std::max(amp_err, std::abs(got.norm() - 1.0));

    const auto [rows, cols] = grids[n - 2];
    const auto h = tasks::heisenberg_terms(rows, cols);
    cplx e = 0;
    for (const auto& t : h.terms) e += t.coefficient * oracle::pauli_expectation(t.ops, da);
    energy_err = std::max(energy_err, std::abs(tasks::energy(da, h) - e.real()));
  }
  o.require(amp_err < 1e-8, "amplitude");
  o.require(inner_err < 1e-8, "inner");
  o.require(1 - gate_fid < 1e-9, "gate fidelity");
  o.require(1 - circ_fid < 1e-9, "circuit fidelity");
  o.require(energy_err < 1e-8, "energy");
  o.detail << "amp " << sci(amp_err) << ", inner " << sci(inner_err) << ", 1-F gate " << sci(1 - gate_fid)
           << ", 1-F circuit " << sci(1 - circ_fid) << ", energy " << sci(energy_err);
  return o;
}

// 2 ----------------------------------------------------------------------

Outcome kak_round_trip() {
  Outcome o;
  std::mt19937_64 rng(2002);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const Matrix u = oracle::haar_unitary(4, rng);
    const auto r = circuit::kak_decompose(u);
    const Matrix rec = circuit::su4_matrix(r.theta) * std::exp(cplx(0, -r.phase));
    worst = std::max(worst, (rec - u).cwiseAbs().maxCoeff());
  }
  o.require(worst < 1e-8, "max entrywise error");
  o.detail << "max entrywise error " << sci(worst) << " over 1000 Haar samples";
  return o;
}

// 3 ----------------------------------------------------------------------

mps::Mps with_merged(const mps::Mps& base, const linalg::DenseTensor& theta, std::size_t site) {
  std::vector<linalg::DenseTensor> cores = base.cores();
  const std::size_t l = theta.dim(0);
  const std::size_t r = theta.dim(3);
  cores[site] = theta.reshaped({l, 2, 2 * r});
  linalg::DenseTensor copy({2 * r, 2, r});
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t b = 0; b < r; ++b) copy.at({t * r + b, t, b}) = 1.0;
  cores[site + 1] = copy;
  return mps::Mps(std::move(cores));
}

// KL(p_D || |psi|^2 / Z), straight from the definition.
double oracle_kl(const mps::Mps& m, const tasks::Dataset& d) {
  const Vector psi = oracle::mps_dense(m);
  const double z = psi.squaredNorm();
  double acc = 0;
  const double p = 1.0 / static_cast<double>(d.size());
  for (auto x : d.strings()) acc += p * std::log(p / (std::norm(psi(static_cast<Eigen::Index>(x))) / z));
  return acc;
}

Outcome tnbm_gradient_check() {
  Outcome o;
  std::mt19937_64 rng(3003);
  double worst = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t n = 6;
    const std::size_t chi = 2 + static_cast<std::size_t>(inst) % 3;
    // Random dataset of 5..20 strings.
    std::uniform_int_distribution<std::uint64_t> pick(0, 63);
    std::vector<std::uint64_t> strings(5 + static_cast<std::size_t>(inst) % 16);
    for (auto& s : strings) s = pick(rng);
    const tasks::Dataset data(n, strings);
    const std::size_t site = static_cast<std::size_t>(inst) % (n - 1);
    const mps::Mps m = mps::canonicalize(mps::Mps::random(n, chi, rng), site + static_cast<std::size_t>(inst % 2));
    const auto grad = tnbm::two_site_gradient(m, data, site);
    const auto theta = linalg::contract(m.core(site), m.core(site + 1), {{2, 0}});
    const double h = 1e-6;
    double num = 0, den = 0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      for (const cplx dir : {cplx(1, 0), cplx(0, 1)}) {
        auto plus = theta;
        auto minus = theta;
        plus[k] += h * dir;
        minus[k] -= h * dir;
        const double fd =
            (oracle_kl(with_merged(m, plus, site), data) - oracle_kl(with_merged(m, minus, site), data)) / (2 * h);
        const double analytic = (std::conj(grad[k]) * dir).real();
        num += (analytic - fd) * (analytic - fd);
        den += fd * fd;
      }
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  o.require(worst < 1e-5, "relative gradient error");
  o.detail << "max relative error " << sci(worst) << " over 20 instances";
  return o;
}

// 4 ----------------------------------------------------------------------

Outcome ground_state_pipeline() {
  Outcome o;
  const auto h = tasks::heisenberg_terms(3, 3);
  const double e0 = tasks::exact_ground_state(h).first;
  const auto mpo = ground_state::heisenberg_mpo(3, 3);
  ground_state::DmrgConfig cfg;
  cfg.chi_max = 16;
  cfg.sweeps = 20;
  const auto gs = ground_state::dmrg_ground_state(mpo, cfg);
  const double err16 = std::abs(gs.energy - e0);
  o.require(err16 < 1e-8, "chi=16 energy");
  o.detail << "E0 " << e0 << ", |E(16)-E0| " << sci(err16);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t chi : {2, 4, 8}) {
    const auto t = mps::truncate(gs.state, {chi, 0.0});
    const double err = tasks::energy(mps::to_statevector(t), h) - e0;
    o.detail << ", dE(" << chi << ") " << sci(err);
    o.require(err < previous, "strictly decreasing error at chi=" + std::to_string(chi));
    o.require(err > -1e-10, "variational bound at chi=" + std::to_string(chi));
    previous = err;
  }
  return o;
}

// 5 ----------------------------------------------------------------------

Outcome decomposition() {
  Outcome o;
  std::mt19937_64 rng(5005);
  double worst_chi2 = 1;
  for (int inst = 0; inst < 30; ++inst) {
    const std::size_t n = 3 + static_cast<std::size_t>(inst) % 8;
    const mps::Mps m = mps::Mps::random(n, 2, rng);
    decompose::DecomposeConfig cfg;
    cfg.max_layers = 1;
    worst_chi2 = std::min(worst_chi2, decompose::decompose_mps(m, cfg).fidelity);
  }
  o.require(worst_chi2 >= 1 - 1e-9, "chi=2 one-layer fidelity");
  o.detail << "chi=2 min F " << std::setprecision(12) << worst_chi2;

  double worst_drop = 0;
  double worst_layer_drop = 0;
  std::vector<mps::Mps> targets;
  for (int t = 0; t < 3; ++t) targets.push_back(mps::Mps::random(9, 8, rng));
  // A Heisenberg ground state truncated to chi=8.
  ground_state::DmrgConfig dcfg;
  dcfg.chi_max = 16;
  targets.push_back(mps::truncate(ground_state::dmrg_ground_state(ground_state::heisenberg_mpo(3, 3), dcfg).state,
                                  {8, 0.0}));
  for (const auto& target : targets) {
    decompose::DecomposeConfig cfg;
    cfg.max_layers = 4;
    cfg.f_target = 1.0;
    const auto res = decompose::decompose_mps(target, cfg);
    const auto& hist = res.stack.fidelity_history;
    for (std::size_t i = 1; i < hist.size(); ++i) worst_drop = std::max(worst_drop, hist[i - 1] - hist[i]);
    double last = 0;
    for (std::size_t k = 1; k <= 4; ++k) {
      decompose::DecomposeConfig ck;
      ck.max_layers = k;
      const double f = decompose::decompose_mps(target, ck).fidelity;
      worst_layer_drop = std::max(worst_layer_drop, last - f);
      last = f;
      if (k == 1) o.detail << "; F(1)=" << std::setprecision(6) << f;
      if (k == 4) o.detail << " F(4)=" << f;
    }
  }
  o.require(worst_drop <= 1e-9, "sweep history non-decreasing");
  o.require(worst_layer_drop <= 1e-9, "fidelity non-decreasing in K");
  o.detail << "; max history drop " << sci(worst_drop) << ", max K drop " << sci(worst_layer_drop);
  return o;
}

// 6 ----------------------------------------------------------------------

experiments::ExperimentConfig qcbm_config(experiments::Init init, std::size_t chi) {
  auto c = experiments::default_config();
  c.task = experiments::Task::kCardinality;
  c.num_qubits = 8;
  c.cardinality = 4;
  c.layers = 3;
  c.final_all_to_all = true;
  c.init = init;
  c.chi = chi;
  c.tnbm.chi_max = chi;
  c.cmaes.lambda = 20;
  c.cmaes.sigma0 = 1e-2;
  c.cmaes_sigma0_set = true;
  c.cmaes.max_iterations = 2000;
  c.seed = 6;
  return c;
}

Outcome qcbm_ordering() {
  Outcome o;
  struct Arm {
    std::string name;
    experiments::Init init;
    std::size_t chi;
    double best = std::numeric_limits<double>::infinity();
    double best_mps_loss = 0;
  };
  std::vector<Arm> arms{{"mps-chi4", experiments::Init::kMps, 4},
                        {"mps-chi2", experiments::Init::kMps, 2},
                        {"near-identity", experiments::Init::kNearIdentity, 4},
                        {"random", experiments::Init::kRandom, 4}};
  std::size_t gates = 0;
  for (auto& arm : arms) {
    for (std::size_t rep = 0; rep < 3; ++rep) {
      const auto r = experiments::run_training(qcbm_config(arm.init, arm.chi), rep);
      if (gates == 0) gates = r.gate_count;
      o.require(r.gate_count == gates, "identical layouts");
      if (r.final_loss < arm.best) {
        arm.best = r.final_loss;
        arm.best_mps_loss = r.mps_loss.value_or(0.0);
      }
    }
    o.detail << arm.name << " " << std::setprecision(4) << arm.best << "; ";
  }
  for (std::size_t i = 0; i + 1 < arms.size(); ++i) {
    o.require(arms[i].best < arms[i + 1].best, arms[i].name + " < " + arms[i + 1].name);
  }
  o.require(arms[0].best < arms[0].best_mps_loss + 0.05, "mps-chi4 within 0.05 of its TNBM KL");
  o.detail << "TNBM chi4 KL " << arms[0].best_mps_loss;
  return o;
}

// 7 ----------------------------------------------------------------------

Outcome vqe_comparison() {
  Outcome o;
  auto median3 = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[1];
  };
  std::vector<double> mps_de, ni_de;
  for (std::size_t rep = 0; rep < 3; ++rep) {
    auto c = experiments::default_config();
    c.task = experiments::Task::kHeisenberg;
    c.rows = 2;
    c.cols = 2;
    c.layers = 2;
    c.cmaes.max_iterations = 2000;
    c.seed = 7;
    c.init = experiments::Init::kMps;
    c.chi = 4;
    mps_de.push_back(experiments::run_training(c, rep).final_loss);
    c.init = experiments::Init::kNearIdentity;
    ni_de.push_back(experiments::run_training(c, rep).final_loss);
  }
  const double m = median3(mps_de);
  const double ni = median3(ni_de);
  o.require(m <= ni, "mps-chi4 dE <= near-identity dE");
  o.require(*std::min_element(mps_de.begin(), mps_de.end()) > 0 && *std::min_element(ni_de.begin(), ni_de.end()) > 0,
            "positive dE");
  o.detail << "median dE mps-chi4 " << sci(m) << ", near-identity " << sci(ni);
  return o;
}

// 8 ----------------------------------------------------------------------

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

Outcome gradient_variance() {
  Outcome o;
  auto c = experiments::default_config();
  c.layers = 3;
  c.final_all_to_all = false;
  c.gradient_variance.qubits = {4, 8, 12, 16};
  c.seed = 8;
  c.init = experiments::Init::kRandom;
  c.repetitions = 200;
  const auto random_rows = experiments::run_gradient_variance(c);
  std::vector<double> ns, logs;
  for (const auto& r : random_rows) {
    ns.push_back(static_cast<double>(r.num_qubits));
    logs.push_back(std::log(r.variance));
    o.detail << "rand N=" << r.num_qubits << " " << sci(r.variance) << "; ";
  }
  const double s = slope(ns, logs);
  const double ratio = random_rows[0].variance / random_rows[2].variance;
  o.require(s < 0, "negative log-variance slope");
  o.require(ratio > 10, "var(4)/var(12) > 10");
  o.detail << "slope " << sci(s) << ", var4/var12 " << sci(ratio) << "; ";

  c.init = experiments::Init::kMps;
  c.chi = 2;
  c.tnbm.chi_max = 2;
  c.repetitions = 50;
  const auto mps_rows = experiments::run_gradient_variance(c);
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& r : mps_rows) {
    lo = std::min(lo, r.variance);
    hi = std::max(hi, r.variance);
    o.detail << "mps N=" << r.num_qubits << " " << sci(r.variance) << "; ";
  }
  o.require(hi / lo < 10, "mps max/min variance < 10");
  o.detail << "mps max/min " << sci(hi / lo);
  return o;
}

// 9 ----------------------------------------------------------------------

Outcome cmaes_benchmarks() {
  Outcome o;
  auto sphere = [](std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v * v;
    return s;
  };
  auto rosenbrock = [](std::span<const double> x) {
    double s = 0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) s += 100 * std::pow(x[i + 1] - x[i] * x[i], 2) + std::pow(1 - x[i], 2);
    return s;
  };
  optim::CmaesConfig sc;
  sc.sigma0 = 0.5;
  sc.lambda = 8;
  sc.tolfun = 0;
  sc.max_iterations = 2000 / sc.lambda;
  sc.seed = 9;
  const auto sr = optim::cmaes_minimize(sphere, std::vector<double>(4, 1.0), sc);
  o.require(sr.best_loss < 1e-10 && sr.evaluations <= 2000, "sphere");
  optim::CmaesConfig rc = sc;
  rc.lambda = 10;
  rc.max_iterations = 20000 / rc.lambda;
  const auto rr = optim::cmaes_minimize(rosenbrock, std::vector<double>(5, 0.0), rc);
  o.require(rr.best_loss < 1e-6 && rr.evaluations <= 20000, "rosenbrock");
  const auto again = optim::cmaes_minimize(rosenbrock, std::vector<double>(5, 0.0), rc);
  o.require(again.loss_history == rr.loss_history && again.best_params == rr.best_params, "bitwise reproducible");
  o.detail << "sphere " << sci(sr.best_loss) << " in " << sr.evaluations << " evals, rosenbrock " << sci(rr.best_loss)
           << " in " << rr.evaluations << " evals";
  return o;
}

// 10 ---------------------------------------------------------------------

Outcome dataset_counts() {
  Outcome o;
  std::size_t card = 0;
  for (std::uint64_t x = 0; x < (1U << 12); ++x) card += std::popcount(x) == 6;
  std::size_t bas = 0;
  for (std::uint64_t img = 0; img < (1U << 12); ++img) {
    bool rows_const = true, cols_const = true;
    auto px = [&](std::size_t r, std::size_t c) { return (img >> (r * 3 + c)) & 1U; };
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 3; ++c) {
        rows_const = rows_const && px(r, c) == px(r, 0);
        cols_const = cols_const && px(r, c) == px(0, c);
      }
    bas += rows_const || cols_const;
  }
  const std::size_t lib_card = tasks::cardinality_dataset(12, 6).size();
  const std::size_t lib_bas = tasks::bas_dataset(4, 3).size();
  o.require(lib_card == 924 && card == 924, "cardinality(12,6)");
  o.require(lib_bas == 22 && bas == 22, "bas(4,3)");
  o.detail << "|cardinality(12,6)| " << lib_card << " (enumerated " << card << "), |bas(4,3)| " << lib_bas
           << " (enumerated " << bas << ")";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "oracle equivalence", 120, oracle_equivalence},
      {2, "KAK round trip", 30, kak_round_trip},
      {3, "TNBM gradient check", 60, tnbm_gradient_check},
      {4, "ground-state pipeline", 120, ground_state_pipeline},
      {5, "decomposition exactness and monotonicity", 180, decomposition},
      {6, "QCBM initialization ordering", 900, qcbm_ordering},
      {7, "VQE initialization comparison", 600, vqe_comparison},
      {8, "gradient variance scaling", 1200, gradient_variance},
      {9, "CMA-ES benchmarks", 60, cmaes_benchmarks},
      {10, "dataset counts", 1, dataset_counts},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) out.require(false, "runtime over " + std::to_string(static_cast<int>(c.budget_s)) + " s");
    std::printf("%s %2d %s (%.1f s): %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, secs, out.detail.str().c_str());
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
