#include "tnqc/circuit/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "tnqc/error.hpp"
#include "tnqc/linalg/decompositions.hpp"

namespace tnqc::circuit {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Matrix pauli(char p) {
  Matrix m = Matrix::Zero(2, 2);
  switch (p) {
    case 'X': m(0, 1) = m(1, 0) = 1.0; break;
    case 'Y': m(0, 1) = -kI; m(1, 0) = kI; break;
    default: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
  }
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
  }
  return out;
}

// exp(-i t/2 P(x)P) = cos(t/2) I - i sin(t/2) P(x)P since (P(x)P)^2 = I.
Matrix pair_rotation(char p, double t) {
  const Matrix pp = kron(pauli(p), pauli(p));
  return std::cos(t / 2) * Matrix::Identity(4, 4) - kI * std::sin(t / 2) * pp;
}

Matrix magic_basis() {
  const double s = 1.0 / std::sqrt(2.0);
  Matrix m(4, 4);
  m << s, kI * s, 0, 0,
       0, 0, kI * s, s,
       0, 0, kI * s, -s,
       s, -kI * s, 0, 0;
  return m;
}

// Nearest a (x) b to a 4x4 matrix, via the rank-one SVD of its rearrangement.
std::pair<Matrix, Matrix> kron_factor(const Matrix& k) {
  Matrix r(4, 4);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int c = 0; c < 2; ++c) {
        for (int d = 0; d < 2; ++d) r(2 * a + c, 2 * b + d) = k(2 * a + b, 2 * c + d);
      }
    }
  }
  Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double s = std::sqrt(svd.singularValues()(0));
  const Vector va = s * svd.matrixU().col(0);
  const Vector vb = s * svd.matrixV().col(0).conjugate();
  Matrix a(2, 2);
  Matrix b(2, 2);
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      a(x, y) = va(2 * x + y);
      b(x, y) = vb(2 * x + y);
    }
  }
  return {a, b};
}

// Euler angles of a 2x2 unitary modulo its global phase.
std::array<double, 3> u3_angles(const Matrix& v) {
  const double c = std::abs(v(0, 0));
  const double s = std::abs(v(1, 0));
  const double theta = 2.0 * std::atan2(s, c);
  constexpr double kTiny = 1e-12;
  if (s <= kTiny) {
    const double beta = std::arg(v(0, 0));
    return {theta, 0.0, std::arg(v(1, 1)) - beta};
  }
  if (c <= kTiny) {
    const double beta = std::arg(-v(0, 1));
    return {theta, std::arg(v(1, 0)) - beta, 0.0};
  }
  const double beta = std::arg(v(0, 0));
  return {theta, std::arg(v(1, 0)) - beta, std::arg(-v(0, 1)) - beta};
}

double wrap_angle(double x) {
  x = std::fmod(x, kTwoPi);
  if (x > std::numbers::pi) x -= kTwoPi;
  if (x <= -std::numbers::pi) x += kTwoPi;
  return x;
}

KakResult kak_attempt(const Matrix& u, double mix) {
  const Matrix magic = magic_basis();
  const cplx det = u.determinant();
  const Matrix us = u / std::pow(det, 0.25);
  const Matrix up = magic.adjoint() * us * magic;
  const Matrix m2 = up.transpose() * up;

  // m2 is unitary and symmetric, so its real and imaginary parts are commuting
  // real symmetric matrices; a generic combination shares their eigenvectors.
  const Eigen::MatrixXd mixed = m2.real() + mix * m2.imag();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mixed);
  Eigen::MatrixXd p = eig.eigenvectors();
  if (p.determinant() < 0) p.col(0) *= -1.0;
  const Matrix pc = p.cast<cplx>();
  const Matrix d2 = pc.transpose() * m2 * pc;

  Vector d(4);
  for (int k = 0; k < 4; ++k) d(k) = std::sqrt(d2(k, k));
  if (std::real(d.prod()) < 0) d(0) = -d(0);
  const Matrix k1 = up * pc * d.cwiseInverse().asDiagonal();

  const auto [a1, b1] = kron_factor(magic * k1 * magic.adjoint());
  const auto [a2, b2] = kron_factor(magic * pc.transpose() * magic.adjoint());

  // arg d_k = gamma - (a sx_k + b sy_k + c sz_k) / 2 with sign patterns read off
  // the magic-basis representation of the entanglers.
  Eigen::Matrix4d system;
  Eigen::Vector4d rhs;
  const Matrix sx = magic.adjoint() * kron(pauli('X'), pauli('X')) * magic;
  const Matrix sy = magic.adjoint() * kron(pauli('Y'), pauli('Y')) * magic;
  const Matrix sz = magic.adjoint() * kron(pauli('Z'), pauli('Z')) * magic;
  for (int k = 0; k < 4; ++k) {
    system.row(k) << 1.0, -0.5 * sx(k, k).real(), -0.5 * sy(k, k).real(), -0.5 * sz(k, k).real();
    rhs(k) = std::arg(d(k));
  }
  const Eigen::Vector4d sol = system.fullPivLu().solve(rhs);

  KakResult out;
  const auto set = [&out](std::size_t at, const std::array<double, 3>& v) {
    for (std::size_t q = 0; q < 3; ++q) out.theta[at + q] = v[q];
  };
  set(0, u3_angles(a1));
  set(3, u3_angles(b1));
  out.theta[6] = sol(1);
  out.theta[7] = sol(2);
  out.theta[8] = sol(3);
  set(9, u3_angles(a2));
  set(12, u3_angles(b2));
  for (double& t : out.theta) t = wrap_angle(t);
  const Matrix rebuilt = su4_matrix(out.theta);
  out.phase = wrap_angle(-std::arg((rebuilt.adjoint() * u).trace()));
  return out;
}

double reconstruction_error(const KakResult& r, const Matrix& u) {
  const Matrix rebuilt = su4_matrix(r.theta) * std::exp(-kI * r.phase);
  return (rebuilt - u).cwiseAbs().maxCoeff();
}

void check_qubits(std::size_t n, std::size_t i, std::size_t j) {
  if (i >= n || j >= n || i == j) {
    throw ShapeError("gate qubits (" + std::to_string(i) + "," + std::to_string(j) +
                     ") invalid for " + std::to_string(n) + " qubits");
  }
}

}  // namespace

Matrix u3_matrix(double theta, double phi, double lam) {
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  Matrix m(2, 2);
  m(0, 0) = c;
  m(0, 1) = -std::exp(kI * lam) * s;
  m(1, 0) = std::exp(kI * phi) * s;
  m(1, 1) = std::exp(kI * (phi + lam)) * c;
  return m;
}

Matrix xx_matrix(double t) { return pair_rotation('X', t); }
Matrix yy_matrix(double t) { return pair_rotation('Y', t); }
Matrix zz_matrix(double t) { return pair_rotation('Z', t); }

Matrix su4_matrix(std::span<const double> t) {
  if (t.size() != kParamsPerGate) throw ShapeError("su4_matrix: expected 15 angles");
  const Matrix outer = kron(u3_matrix(t[0], t[1], t[2]), u3_matrix(t[3], t[4], t[5]));
  const Matrix inner = kron(u3_matrix(t[9], t[10], t[11]), u3_matrix(t[12], t[13], t[14]));
  return outer * xx_matrix(t[6]) * yy_matrix(t[7]) * zz_matrix(t[8]) * inner;
}

KakResult kak_decompose(const Matrix& u) {
  if (u.rows() != 4 || u.cols() != 4) throw ShapeError("kak_decompose: expected a 4x4 matrix");
  if (!linalg::is_unitary(u, 1e-10)) throw UnitarityError("kak_decompose: input is not unitary");
  // Degenerate spectra make some mixing weights unlucky; keep the best of a
  // few fixed choices.
  constexpr std::array<double, 5> kMix{0.6180339887, 1.7320508076, -0.4142135624, 3.1415926536, 0.1234567891};
  KakResult best;
  double best_err = std::numeric_limits<double>::infinity();
  for (double mix : kMix) {
    const KakResult r = kak_attempt(u, mix);
    const double err = reconstruction_error(r, u);
    if (err < best_err) {
      best = r;
      best_err = err;
    }
    if (best_err < 1e-12) break;
  }
  return best;
}

std::string to_string(Topology t) { return t == Topology::kLinear ? "linear" : "all-to-all"; }

Topology topology_from_string(const std::string& text) {
  if (text == "linear") return Topology::kLinear;
  if (text == "all-to-all") return Topology::kAllToAll;
  throw ConfigError("unknown topology '" + text + "'");
}

Matrix Gate::matrix() const { return su4_matrix(theta) * std::exp(-kI * phase); }

std::vector<std::pair<std::size_t, std::size_t>> layer_pairs(std::size_t n, Topology t) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (t == Topology::kLinear) {
    for (std::size_t q = 0; q + 1 < n; ++q) pairs.emplace_back(q, q + 1);
  } else {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
    }
  }
  return pairs;
}

ParamCircuit::ParamCircuit(std::size_t num_qubits, std::vector<Layer> layers)
    : num_qubits_(num_qubits), layers_(std::move(layers)) {
  if (num_qubits_ < 2) throw ConfigError("circuit needs at least 2 qubits");
  for (const auto& layer : layers_) {
    for (const auto& g : layer.gates) check_qubits(num_qubits_, g.i, g.j);
  }
}

std::size_t ParamCircuit::gate_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.gates.size();
  return n;
}

std::vector<double> ParamCircuit::parameters() const {
  std::vector<double> out;
  out.reserve(param_count());
  for (const auto& layer : layers_) {
    for (const auto& g : layer.gates) out.insert(out.end(), g.theta.begin(), g.theta.end());
  }
  return out;
}

ParamCircuit ParamCircuit::with_parameters(std::span<const double> params) const {
  if (params.size() != param_count()) {
    throw ShapeError("parameter vector has length " + std::to_string(params.size()) + ", expected " +
                     std::to_string(param_count()));
  }
  ParamCircuit out = *this;
  std::size_t at = 0;
  for (auto& layer : out.layers_) {
    for (auto& g : layer.gates) {
      std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(at), kParamsPerGate, g.theta.begin());
      at += kParamsPerGate;
    }
  }
  return out;
}

ParamCircuit build_circuit(std::size_t num_qubits, std::size_t depth, bool final_all_to_all) {
  if (num_qubits < 2) throw ConfigError("build_circuit: N must be >= 2");
  if (depth < 1) throw ConfigError("build_circuit: k must be >= 1");
  std::vector<Layer> layers;
  for (std::size_t l = 0; l < depth; ++l) {
    const bool last = l + 1 == depth;
    Layer layer;
    layer.topology = last && final_all_to_all ? Topology::kAllToAll : Topology::kLinear;
    for (const auto& [i, j] : layer_pairs(num_qubits, layer.topology)) layer.gates.push_back({i, j, {}, 0.0});
    layers.push_back(std::move(layer));
  }
  return ParamCircuit(num_qubits, std::move(layers));
}

InitMode init_mode_from_string(const std::string& text) {
  if (text == "random") return InitMode::kRandom;
  if (text == "near-identity") return InitMode::kNearIdentity;
  throw ConfigError("unknown init mode '" + text + "'");
}

std::vector<double> init_params(const ParamCircuit& circuit, InitMode mode, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw ConfigError("init_params: sigma must be >= 0");
  std::vector<double> out(circuit.param_count());
  if (mode == InitMode::kRandom) {
    std::uniform_real_distribution<double> dist(0.0, kTwoPi);
    for (double& x : out) x = dist(rng);
  } else if (sigma > 0.0) {
    std::normal_distribution<double> dist(0.0, sigma);
    for (double& x : out) x = dist(rng);
  }
  return out;
}

ParamCircuit extend_final_layer(const ParamCircuit& circuit, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw ConfigError("extend_final_layer: sigma must be >= 0");
  if (circuit.num_layers() == 0) throw ConfigError("extend_final_layer: circuit has no layers");
  std::vector<Layer> layers = circuit.layers();
  const Layer& old = layers.back();
  Layer wide;
  wide.topology = Topology::kAllToAll;
  for (const auto& [i, j] : layer_pairs(circuit.num_qubits(), Topology::kAllToAll)) {
    const auto found = std::find_if(old.gates.begin(), old.gates.end(),
                                    [&](const Gate& g) { return g.i == i && g.j == j; });
    if (found != old.gates.end()) {
      wide.gates.push_back(*found);
      continue;
    }
    Gate g{i, j, {}, 0.0};
    if (sigma > 0.0) {
      std::normal_distribution<double> dist(0.0, sigma);
      for (double& t : g.theta) t = dist(rng);
    }
    wide.gates.push_back(g);
  }
  layers.back() = std::move(wide);
  return ParamCircuit(circuit.num_qubits(), std::move(layers));
}

void apply_gate(Vector& psi, std::size_t n, const Matrix& u, std::size_t i, std::size_t j) {
  check_qubits(n, i, j);
  const std::size_t bi = std::size_t{1} << (n - 1 - i);
  const std::size_t bj = std::size_t{1} << (n - 1 - j);
  const std::size_t dim = std::size_t{1} << n;
  cplx m[4][4];
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m[r][c] = u(r, c);
  }
  cplx* data = psi.data();
  for (std::size_t x = 0; x < dim; ++x) {
    if (x & (bi | bj)) continue;
    const std::size_t idx[4] = {x, x | bj, x | bi, x | bi | bj};
    const cplx a[4] = {data[idx[0]], data[idx[1]], data[idx[2]], data[idx[3]]};
    for (int r = 0; r < 4; ++r) {
      data[idx[r]] = m[r][0] * a[0] + m[r][1] * a[1] + m[r][2] * a[2] + m[r][3] * a[3];
    }
  }
}

Vector simulate(const ParamCircuit& circuit) {
  const std::size_t n = circuit.num_qubits();
  if (n > kMaxQubits) throw SizeGuardError("simulate: more than 20 qubits");
  Vector psi = Vector::Zero(static_cast<Eigen::Index>(std::size_t{1} << n));
  psi(0) = 1.0;
  for (const auto& layer : circuit.layers()) {
    for (const auto& g : layer.gates) apply_gate(psi, n, g.matrix(), g.i, g.j);
  }
  return psi;
}

Vector simulate(const ParamCircuit& circuit, std::span<const double> params) {
  return simulate(circuit.with_parameters(params));
}

RealVector born_probabilities(const Vector& psi) { return psi.cwiseAbs2(); }

nlohmann::json to_json(const ParamCircuit& circuit) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : circuit.layers()) {
    nlohmann::json gates = nlohmann::json::array();
    for (const auto& g : layer.gates) {
      gates.push_back({{"i", g.i}, {"j", g.j}, {"theta", g.theta}, {"phase", g.phase}});
    }
    layers.push_back({{"topology", to_string(layer.topology)}, {"gates", std::move(gates)}});
  }
  return {{"num_qubits", circuit.num_qubits()}, {"layers", std::move(layers)}};
}

ParamCircuit circuit_from_json(const nlohmann::json& doc) {
  try {
    std::vector<Layer> layers;
    for (const auto& l : doc.at("layers")) {
      Layer layer;
      layer.topology = topology_from_string(l.at("topology").get<std::string>());
      for (const auto& g : l.at("gates")) {
        Gate gate;
        gate.i = g.at("i").get<std::size_t>();
        gate.j = g.at("j").get<std::size_t>();
        const auto theta = g.at("theta").get<std::vector<double>>();
        if (theta.size() != kParamsPerGate) throw ConfigError("circuit JSON: gate needs 15 angles");
        std::copy(theta.begin(), theta.end(), gate.theta.begin());
        gate.phase = g.value("phase", 0.0);
        layer.gates.push_back(gate);
      }
      layers.push_back(std::move(layer));
    }
    return ParamCircuit(doc.at("num_qubits").get<std::size_t>(), std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("circuit JSON: ") + e.what());
  }
}

void save_circuit(const ParamCircuit& circuit, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << to_json(circuit).dump(2) << '\n';
}

ParamCircuit load_circuit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  try {
    return circuit_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("circuit JSON: ") + e.what());
  }
}

}  // namespace tnqc::circuit
