#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vqpi/rng.hpp"

namespace vqpi {

using Complex = std::complex<double>;

// Exact statevector register. Qubit 0 is the most significant bit of the
// basis index, so |q0 q1 ... q_{n-1}> lives at index sum_q q * 2^(n-1-q).
struct StateVector {
  Eigen::VectorXcd amplitudes;
  int num_qubits = 0;

  static StateVector zero_state(int qubits) {
    if (qubits < 1) throw std::invalid_argument("StateVector: need at least one qubit");
    StateVector s;
    s.num_qubits = qubits;
    s.amplitudes = Eigen::VectorXcd::Zero(1LL << qubits);
    s.amplitudes(0) = 1.0;
    return s;
  }

  Eigen::Index dim() const { return amplitudes.size(); }
  double norm() const { return amplitudes.norm(); }

  void validate() const {
    if (num_qubits < 1 || dim() != (1LL << num_qubits))
      throw std::invalid_argument("StateVector: size is not 2^qubits");
  }
};

inline Complex inner_product(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("inner_product: dimension mismatch");
  return a.amplitudes.dot(b.amplitudes);  // Eigen conjugates the left factor
}

// Overlap-based distance between pure states, insensitive to global phase.
inline double trace_distance(const StateVector& a, const StateVector& b) {
  const double overlap = std::abs(inner_product(a, b));
  return std::sqrt(std::max(0.0, 1.0 - overlap * overlap));
}

// ---------------------------------------------------------------------------
// Gates

inline Eigen::Matrix2cd u3_matrix(double theta, double phi, double lambda) {
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  Eigen::Matrix2cd u;
  u(0, 0) = c;
  u(0, 1) = -std::polar(s, lambda);
  u(1, 0) = std::polar(s, phi);
  u(1, 1) = std::polar(c, phi + lambda);
  return u;
}

// Entrywise derivatives of u3_matrix with respect to theta, phi, lambda.
inline std::array<Eigen::Matrix2cd, 3> u3_parameter_derivatives(double theta, double phi,
                                                                double lambda) {
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  const Complex i(0.0, 1.0);
  std::array<Eigen::Matrix2cd, 3> d;
  d[0](0, 0) = -0.5 * s;
  d[0](0, 1) = -0.5 * std::polar(c, lambda);
  d[0](1, 0) = 0.5 * std::polar(c, phi);
  d[0](1, 1) = -0.5 * std::polar(s, phi + lambda);
  d[1].setZero();
  d[1](1, 0) = i * std::polar(s, phi);
  d[1](1, 1) = i * std::polar(c, phi + lambda);
  d[2].setZero();
  d[2](0, 1) = -i * std::polar(s, lambda);
  d[2](1, 1) = i * std::polar(c, phi + lambda);
  return d;
}

namespace detail {

inline void check_qubit(const StateVector& state, int qubit) {
  if (qubit < 0 || qubit >= state.num_qubits)
    throw std::invalid_argument("gate applied to qubit out of range");
}

inline void apply_single_qubit(StateVector& state, int qubit, const Eigen::Matrix2cd& u) {
  check_qubit(state, qubit);
  const std::int64_t bit = 1LL << (state.num_qubits - 1 - qubit);
  const std::int64_t dim = state.dim();
  auto& amp = state.amplitudes;
  for (std::int64_t base = 0; base < dim; base += 2 * bit)
    for (std::int64_t off = 0; off < bit; ++off) {
      const std::int64_t i0 = base + off, i1 = i0 + bit;
      const Complex a0 = amp(i0), a1 = amp(i1);
      amp(i0) = u(0, 0) * a0 + u(0, 1) * a1;
      amp(i1) = u(1, 0) * a0 + u(1, 1) * a1;
    }
}

}  // namespace detail

inline void apply_u3(StateVector& state, int qubit, double theta, double phi, double lambda) {
  detail::apply_single_qubit(state, qubit, u3_matrix(theta, phi, lambda));
}

inline void apply_u3_dagger(StateVector& state, int qubit, double theta, double phi,
                            double lambda) {
  detail::apply_single_qubit(state, qubit, u3_matrix(theta, phi, lambda).adjoint());
}

inline void apply_cx(StateVector& state, int control, int target) {
  detail::check_qubit(state, control);
  detail::check_qubit(state, target);
  if (control == target) throw std::invalid_argument("apply_cx: control equals target");
  const std::int64_t cbit = 1LL << (state.num_qubits - 1 - control);
  const std::int64_t tbit = 1LL << (state.num_qubits - 1 - target);
  const std::int64_t dim = state.dim();
  auto& amp = state.amplitudes;
  for (std::int64_t i = 0; i < dim; ++i)
    if ((i & cbit) && !(i & tbit)) std::swap(amp(i), amp(i | tbit));
}

// Ring entangler: the wrap-around CX(n-1 -> 0) fires first, then
// CX(c -> c+1) for c = n-2 down to 0. Self-inverse it is not; the order
// matters and is part of the circuit definition.
inline void apply_cx_ring(StateVector& state) {
  if (state.num_qubits < 2) throw std::invalid_argument("apply_cx_ring: need at least two qubits");
  apply_cx(state, state.num_qubits - 1, 0);
  for (int c = state.num_qubits - 2; c >= 0; --c) apply_cx(state, c, c + 1);
}

inline void apply_cx_ring_inverse(StateVector& state) {
  if (state.num_qubits < 2) throw std::invalid_argument("apply_cx_ring_inverse: need at least two qubits");
  for (int c = 0; c <= state.num_qubits - 2; ++c) apply_cx(state, c, c + 1);
  apply_cx(state, state.num_qubits - 1, 0);
}

// ---------------------------------------------------------------------------
// Hardware-efficient ansatz: depth layers of per-qubit U3 rotations with the
// CX ring between consecutive layers.

struct AnsatzConfig {
  int num_qubits = 1;
  int depth = 1;
  std::vector<double> parameters;  // depth x num_qubits x 3

  std::size_t param_count() const {
    return static_cast<std::size_t>(depth) * static_cast<std::size_t>(num_qubits) * 3u;
  }
  std::size_t param_index(int layer, int qubit, int k) const {
    return (static_cast<std::size_t>(layer) * static_cast<std::size_t>(num_qubits) +
            static_cast<std::size_t>(qubit)) * 3u + static_cast<std::size_t>(k);
  }

  void validate() const {
    if (num_qubits < 1 || depth < 1)
      throw std::invalid_argument("AnsatzConfig: qubits and depth must be positive");
    if (parameters.size() != param_count())
      throw std::invalid_argument("AnsatzConfig: parameter count must be depth*qubits*3");
  }

  static AnsatzConfig random(int qubits, int depth, std::uint64_t seed) {
    AnsatzConfig cfg;
    cfg.num_qubits = qubits;
    cfg.depth = depth;
    cfg.parameters.resize(cfg.param_count());
    Rng rng(seed);
    for (auto& p : cfg.parameters) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
    cfg.validate();
    return cfg;
  }
};

inline void apply_ansatz(StateVector& state, const AnsatzConfig& cfg) {
  cfg.validate();
  if (state.num_qubits != cfg.num_qubits)
    throw std::invalid_argument("apply_ansatz: register size mismatch");
  for (int layer = 0; layer < cfg.depth; ++layer) {
    if (layer > 0 && cfg.num_qubits >= 2) apply_cx_ring(state);
    for (int q = 0; q < cfg.num_qubits; ++q)
      apply_u3(state, q, cfg.parameters[cfg.param_index(layer, q, 0)],
               cfg.parameters[cfg.param_index(layer, q, 1)],
               cfg.parameters[cfg.param_index(layer, q, 2)]);
  }
}

inline StateVector prepare_ansatz(const AnsatzConfig& cfg) {
  StateVector state = StateVector::zero_state(cfg.num_qubits);
  apply_ansatz(state, cfg);
  return state;
}

inline Eigen::MatrixXcd ansatz_unitary(const AnsatzConfig& cfg) {
  cfg.validate();
  const std::int64_t dim = 1LL << cfg.num_qubits;
  Eigen::MatrixXcd u(dim, dim);
  for (std::int64_t j = 0; j < dim; ++j) {
    StateVector basis;
    basis.num_qubits = cfg.num_qubits;
    basis.amplitudes = Eigen::VectorXcd::Zero(dim);
    basis.amplitudes(j) = 1.0;
    apply_ansatz(basis, cfg);
    u.col(j) = basis.amplitudes;
  }
  return u;
}

// ---------------------------------------------------------------------------
// Embeddings and measurements

// Register sizes needed to run a dim-dimensional system: the bare register,
// the Hadamard-test register with its ancilla, and a two-register layout for
// controlled application of the whole system.
struct QubitRequirements {
  int system = 0;
  int hadamard_test = 0;
  int controlled_application = 0;
};

inline QubitRequirements qubit_requirements(int dim) {
  if (dim < 2) throw std::invalid_argument("qubit_requirements: dimension must be at least 2");
  int n = 0;
  while ((1LL << n) < dim) ++n;
  return {n, n + 1, 2 * n + 1};
}

// Normalized amplitude encoding of a real vector, zero-padded up to the
// register dimension.
inline StateVector prepare_basis_embedding(const Eigen::VectorXd& v, int qubits = 0) {
  if (v.size() < 1) throw std::invalid_argument("prepare_basis_embedding: empty vector");
  int n = qubits;
  if (n == 0) n = v.size() == 1 ? 1 : qubit_requirements(static_cast<int>(v.size())).system;
  const std::int64_t dim = 1LL << n;
  if (v.size() > dim)
    throw std::invalid_argument("prepare_basis_embedding: vector exceeds register size");
  const double norm = v.norm();
  if (norm <= 0.0) throw std::invalid_argument("prepare_basis_embedding: zero vector");
  StateVector state;
  state.num_qubits = n;
  state.amplitudes = Eigen::VectorXcd::Zero(dim);
  for (Eigen::Index i = 0; i < v.size(); ++i) state.amplitudes(i) = v(i) / norm;
  return state;
}

// Applies a (generally nonunitary) matrix and renormalizes; the discarded
// norm is returned alongside. Throws if the image vanishes.
inline std::pair<StateVector, double> apply_matrix(const StateVector& state,
                                                   const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols() || m.rows() != state.dim())
    throw std::invalid_argument("apply_matrix: dimension mismatch");
  StateVector out;
  out.num_qubits = state.num_qubits;
  out.amplitudes = m * state.amplitudes;
  const double norm = out.amplitudes.norm();
  if (norm <= 1e-300) throw std::runtime_error("apply_matrix: image has zero norm");
  out.amplitudes /= norm;
  return {out, norm};
}

inline std::pair<StateVector, double> apply_matrix(const StateVector& state,
                                                   const Eigen::MatrixXd& m) {
  return apply_matrix(state, Eigen::MatrixXcd(m.cast<Complex>()));
}

enum class HadamardPart { kReal, kImaginary };

// Expectation <phi|U|phi> read out through the one-ancilla interference
// circuit: H on the ancilla, U controlled on it, S^dagger for the imaginary
// part, H again; the returned value is P(ancilla 0) - P(ancilla 1). The
// ancilla is the most significant qubit of the extended register, so the two
// halves of that register are exactly the blocks mixed below.
inline double hadamard_test(const Eigen::MatrixXcd& u, const StateVector& phi,
                            HadamardPart part) {
  if (u.rows() != u.cols() || u.rows() != phi.dim())
    throw std::invalid_argument("hadamard_test: dimension mismatch");
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  Eigen::VectorXcd top = phi.amplitudes * inv_sqrt2;
  Eigen::VectorXcd bottom = (u * phi.amplitudes) * inv_sqrt2;
  if (part == HadamardPart::kImaginary) bottom *= Complex(0.0, -1.0);
  const double p0 = ((top + bottom) * inv_sqrt2).squaredNorm();
  const double p1 = ((top - bottom) * inv_sqrt2).squaredNorm();
  return p0 - p1;
}

// Orthogonal reflection taking |0...0> to the given unit vector, used to
// prepare right-hand sides as circuits rather than raw amplitudes.
inline Eigen::MatrixXcd reflection_unitary(const Eigen::VectorXd& target) {
  if (target.size() < 2) throw std::invalid_argument("reflection_unitary: need dimension >= 2");
  if (std::abs(target.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("reflection_unitary: target must be a unit vector");
  Eigen::VectorXd w = target;
  w(0) -= 1.0;
  const double n2 = w.squaredNorm();
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(target.size(), target.size());
  if (n2 > 1e-24) u -= (2.0 / n2) * (w * w.transpose());
  return u.cast<Complex>();
}

// Measurement in the computational basis: counts per basis index.
inline std::vector<std::int64_t> sample_counts(const StateVector& state, int shots,
                                               std::uint64_t seed) {
  if (shots < 0) throw std::invalid_argument("sample_counts: negative shot count");
  const std::int64_t dim = state.dim();
  std::vector<double> cumulative(static_cast<std::size_t>(dim));
  double acc = 0.0;
  for (std::int64_t i = 0; i < dim; ++i) {
    acc += std::norm(state.amplitudes(i));
    cumulative[static_cast<std::size_t>(i)] = acc;
  }
  if (acc <= 0.0) throw std::invalid_argument("sample_counts: state has zero norm");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(dim), 0);
  Rng rng(seed);
  for (int shot = 0; shot < shots; ++shot) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
    if (idx >= counts.size()) idx = counts.size() - 1;
    ++counts[idx];
  }
  return counts;
}

}  // namespace vqpi
