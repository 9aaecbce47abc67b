#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tnqc/linalg/tensor.hpp"
#include "tnqc/mps/mps.hpp"

namespace tnqc::circuit {

inline constexpr std::size_t kParamsPerGate = 15;
inline constexpr std::size_t kMaxQubits = 20;

using GateParams = std::array<double, kParamsPerGate>;

/// Rows (cos(t/2), -e^{i lam} sin(t/2)), (e^{i phi} sin(t/2), e^{i(phi+lam)} cos(t/2)).
Matrix u3_matrix(double theta, double phi, double lam);

/// exp(-i t/2 P(x)P) for P in {X, Y, Z}.
Matrix xx_matrix(double t);
Matrix yy_matrix(double t);
Matrix zz_matrix(double t);

/// (U3(t1:3) (x) U3(t4:6)) XX(t7) YY(t8) ZZ(t9) (U3(t10:12) (x) U3(t13:15)).
/// The first tensor factor acts on the first qubit of the gate.
Matrix su4_matrix(std::span<const double> theta);

struct KakResult {
  GateParams theta{};
  double phase = 0.0;  // u = su4_matrix(theta) * exp(-i phase)
};

/// Inverse of su4_matrix up to the returned global phase. Throws
/// UnitarityError if u is not unitary to 1e-10.
KakResult kak_decompose(const Matrix& u);

enum class Topology { kLinear, kAllToAll };

std::string to_string(Topology t);
Topology topology_from_string(const std::string& text);

struct Gate {
  std::size_t i = 0;
  std::size_t j = 1;
  GateParams theta{};
  double phase = 0.0;

  [[nodiscard]] Matrix matrix() const;
};

struct Layer {
  Topology topology = Topology::kLinear;
  std::vector<Gate> gates;
};

/// Pairs of a layer in execution order.
std::vector<std::pair<std::size_t, std::size_t>> layer_pairs(std::size_t num_qubits, Topology t);

/// Layered circuit of SU(4) gates. Layers run in stored order, gates within a
/// layer in stored order. The trainable vector is the concatenation of every
/// gate's 15 angles; phases are fixed.
class ParamCircuit {
 public:
  ParamCircuit() = default;
  ParamCircuit(std::size_t num_qubits, std::vector<Layer> layers);

  [[nodiscard]] std::size_t num_qubits() const noexcept { return num_qubits_; }
  [[nodiscard]] const std::vector<Layer>& layers() const noexcept { return layers_; }
  [[nodiscard]] std::size_t num_layers() const noexcept { return layers_.size(); }
  [[nodiscard]] std::size_t gate_count() const;
  [[nodiscard]] std::size_t param_count() const { return kParamsPerGate * gate_count(); }

  [[nodiscard]] std::vector<double> parameters() const;
  [[nodiscard]] ParamCircuit with_parameters(std::span<const double> params) const;

 private:
  std::size_t num_qubits_ = 0;
  std::vector<Layer> layers_;
};

/// k - 1 linear layers followed by a final linear or all-to-all layer, all
/// angles zero.
ParamCircuit build_circuit(std::size_t num_qubits, std::size_t depth, bool final_all_to_all);

enum class InitMode { kRandom, kNearIdentity };

InitMode init_mode_from_string(const std::string& text);

/// kRandom: every angle uniform in [0, 2 pi]. kNearIdentity: Normal(0, sigma^2).
std::vector<double> init_params(const ParamCircuit& circuit, InitMode mode, double sigma, Rng& rng);

/// Replaces the last layer with an all-to-all layer. Gates whose pair already
/// existed keep their angles and phase; new gates get Normal(0, sigma^2)
/// angles and zero phase.
ParamCircuit extend_final_layer(const ParamCircuit& circuit, double sigma, Rng& rng);

/// Applies a 4x4 gate to qubits (i, j) of a statevector, with matrix index
/// 2 * s_i + s_j. Qubit 0 is the most significant bit.
void apply_gate(Vector& psi, std::size_t num_qubits, const Matrix& u, std::size_t i, std::size_t j);

/// Statevector of the circuit applied to |0...0>.
Vector simulate(const ParamCircuit& circuit);
Vector simulate(const ParamCircuit& circuit, std::span<const double> params);

/// |<x|psi>|^2 for every basis state x.
RealVector born_probabilities(const Vector& psi);

nlohmann::json to_json(const ParamCircuit& circuit);
ParamCircuit circuit_from_json(const nlohmann::json& doc);
void save_circuit(const ParamCircuit& circuit, const std::string& path);
ParamCircuit load_circuit(const std::string& path);

}  // namespace tnqc::circuit
