#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vqpi/decomp.hpp"
#include "vqpi/sim.hpp"

namespace vqpi {

// Variational solve of A x = b: a depth-layered ansatz is trained to make
// |x(alpha)> proportional to A^{-1} b. The padded system embeds A in the
// next power-of-two dimension with an identity block, which leaves the
// solution on the original coordinates untouched and the pad amplitudes at
// zero.

inline Eigen::MatrixXd pad_system(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() < 2)
    throw std::invalid_argument("pad_system: square matrix of dimension >= 2 required");
  const std::int64_t dim = 1LL << qubit_requirements(static_cast<int>(a.rows())).system;
  if (dim == a.rows()) return a;
  Eigen::MatrixXd padded = Eigen::MatrixXd::Identity(dim, dim);
  padded.topLeftCorner(a.rows(), a.cols()) = a;
  return padded;
}

inline Eigen::VectorXd pad_rhs(const Eigen::VectorXd& b, Eigen::Index dim) {
  if (b.size() > dim) throw std::invalid_argument("pad_rhs: vector longer than target dimension");
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(dim);
  padded.head(b.size()) = b;
  return padded;
}

struct VlsProblem {
  Eigen::MatrixXd system;   // padded to 2^num_qubits
  Eigen::VectorXd rhs;      // padded, unnormalized
  UnitaryDecomposition decomposition;
  StateVector rhs_state;    // normalized amplitude embedding of rhs
  int num_qubits = 0;
  int original_dim = 0;
  int depth = 1;

  std::size_t param_count() const {
    return static_cast<std::size_t>(depth) * static_cast<std::size_t>(num_qubits) * 3u;
  }

  AnsatzConfig ansatz(const std::vector<double>& parameters) const {
    AnsatzConfig cfg;
    cfg.num_qubits = num_qubits;
    cfg.depth = depth;
    cfg.parameters = parameters;
    cfg.validate();
    return cfg;
  }
};

inline VlsProblem make_vls_problem(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                   int depth) {
  if (b.size() != a.rows())
    throw std::invalid_argument("make_vls_problem: rhs length must match the system");
  if (depth < 1) throw std::invalid_argument("make_vls_problem: depth must be positive");
  VlsProblem problem;
  problem.original_dim = static_cast<int>(a.rows());
  problem.system = pad_system(a);
  problem.rhs = pad_rhs(b, problem.system.rows());
  problem.decomposition = two_term_unitary_decomposition(problem.system);
  problem.rhs_state = prepare_basis_embedding(problem.rhs);
  problem.num_qubits = problem.rhs_state.num_qubits;
  problem.depth = depth;
  return problem;
}

inline StateVector solution_state(const VlsProblem& problem,
                                  const std::vector<double>& parameters) {
  return prepare_ansatz(problem.ansatz(parameters));
}

namespace detail {

// <lam| (g on one qubit) |phi> without materializing the full operator.
inline Complex single_qubit_sandwich(const StateVector& lam, const StateVector& phi,
                                     int qubit, const Eigen::Matrix2cd& g) {
  const std::int64_t bit = 1LL << (lam.num_qubits - 1 - qubit);
  const std::int64_t dim = lam.dim();
  Complex acc = 0.0;
  for (std::int64_t base = 0; base < dim; base += 2 * bit)
    for (std::int64_t off = 0; off < bit; ++off) {
      const std::int64_t i0 = base + off, i1 = i0 + bit;
      const Complex p0 = phi.amplitudes(i0), p1 = phi.amplitudes(i1);
      acc += std::conj(lam.amplitudes(i0)) * (g(0, 0) * p0 + g(0, 1) * p1);
      acc += std::conj(lam.amplitudes(i1)) * (g(1, 0) * p0 + g(1, 1) * p1);
    }
  return acc;
}

// Precomputed quadratic forms of the global cost
//   C(x) = 1 - |<b|A|x>|^2 / <x|A^T A|x>.
struct GlobalCost {
  const Eigen::MatrixXd& a;
  Eigen::MatrixXd gram;      // A^T A
  Eigen::VectorXcd overlap;  // A^T conj(b): <b|A|x> = sum_i overlap_i x_i
  Eigen::VectorXcd adjoint_rhs;  // A^T b, the co-vector feeding the gradient

  explicit GlobalCost(const VlsProblem& problem)
      : a(problem.system),
        gram(problem.system.transpose() * problem.system),
        overlap(problem.system.transpose() * problem.rhs_state.amplitudes.conjugate()),
        adjoint_rhs(problem.system.transpose() * problem.rhs_state.amplitudes) {}

  struct Parts {
    double cost = 0.0;
    Complex numerator_root;    // <b|A|x>
    double denominator = 0.0;  // <x|A^T A|x>
    Eigen::VectorXcd gram_x;
  };

  Parts evaluate(const Eigen::VectorXcd& x) const {
    Parts parts;
    parts.numerator_root = overlap.transpose() * x;  // plain sum, no conjugation
    parts.gram_x.resize(x.size());
    parts.gram_x.real() = gram * x.real();
    parts.gram_x.imag() = gram * x.imag();
    parts.denominator = x.dot(parts.gram_x).real();
    if (parts.denominator <= 1e-300)
      throw std::runtime_error("global cost: ansatz state annihilated by the system");
    parts.cost = 1.0 - std::norm(parts.numerator_root) / parts.denominator;
    return parts;
  }

  // Co-vector r with dC = Re <r | dx>.
  Eigen::VectorXcd cost_covector(const Parts& parts) const {
    const double d = parts.denominator;
    return (2.0 / (d * d)) *
           (std::norm(parts.numerator_root) * parts.gram_x -
            d * parts.numerator_root * adjoint_rhs);
  }
};

// Reverse sweep through the circuit: peel gates off the prepared state while
// dragging the cost co-vector along, reading one gradient entry per angle.
// Gate count stays linear in depth, unlike shifted re-evaluations.
inline std::vector<double> ansatz_gradient_backward(const AnsatzConfig& cfg, StateVector phi,
                                                    StateVector lam) {
  std::vector<double> grad(cfg.parameters.size(), 0.0);
  for (int layer = cfg.depth - 1; layer >= 0; --layer) {
    for (int q = cfg.num_qubits - 1; q >= 0; --q) {
      const double theta = cfg.parameters[cfg.param_index(layer, q, 0)];
      const double phi_angle = cfg.parameters[cfg.param_index(layer, q, 1)];
      const double lambda = cfg.parameters[cfg.param_index(layer, q, 2)];
      apply_u3_dagger(phi, q, theta, phi_angle, lambda);
      const auto derivatives = u3_parameter_derivatives(theta, phi_angle, lambda);
      for (int k = 0; k < 3; ++k)
        grad[cfg.param_index(layer, q, k)] =
            single_qubit_sandwich(lam, phi, q, derivatives[static_cast<std::size_t>(k)])
                .real();
      apply_u3_dagger(lam, q, theta, phi_angle, lambda);
    }
    if (layer > 0 && cfg.num_qubits >= 2) {
      apply_cx_ring_inverse(phi);
      apply_cx_ring_inverse(lam);
    }
  }
  return grad;
}

}  // namespace detail

inline double cost_global(const VlsProblem& problem, const std::vector<double>& parameters) {
  detail::GlobalCost engine(problem);
  return engine.evaluate(solution_state(problem, parameters).amplitudes).cost;
}

inline std::pair<double, std::vector<double>> cost_and_gradient(
    const VlsProblem& problem, const std::vector<double>& parameters) {
  detail::GlobalCost engine(problem);
  AnsatzConfig cfg = problem.ansatz(parameters);
  StateVector x = prepare_ansatz(cfg);
  auto parts = engine.evaluate(x.amplitudes);
  StateVector lam;
  lam.num_qubits = problem.num_qubits;
  lam.amplitudes = engine.cost_covector(parts);
  return {parts.cost, detail::ansatz_gradient_backward(cfg, std::move(x), std::move(lam))};
}

// Same cost assembled the way a device would estimate it: every term of the
// unitary decomposition enters through Hadamard tests only.
//   |<b|A|x>|^2 = sum_{k,l} c_k conj(c_l) <b|A_k|x> conj(<b|A_l|x>)
//   <x|A^T A|x> = sum_{k,l} conj(c_l) c_k <x|A_l^dag A_k|x>
// The b-side overlaps run on |0...0> after folding the rhs reflection into
// the tested unitary.
inline double cost_global_hadamard(const VlsProblem& problem,
                                   const std::vector<double>& parameters) {
  if (problem.rhs_state.amplitudes.imag().cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("cost_global_hadamard: rhs embedding must be real");
  const auto& terms = problem.decomposition.terms;
  const StateVector x = solution_state(problem, parameters);
  const StateVector origin = StateVector::zero_state(problem.num_qubits);
  const Eigen::MatrixXcd u_x = ansatz_unitary(problem.ansatz(parameters));
  const Eigen::MatrixXcd u_b = reflection_unitary(problem.rhs_state.amplitudes.real());

  std::vector<Complex> m(terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const Eigen::MatrixXcd u = u_b.adjoint() * terms[k].matrix * u_x;
    m[k] = Complex(hadamard_test(u, origin, HadamardPart::kReal),
                   hadamard_test(u, origin, HadamardPart::kImaginary));
  }
  Complex numerator = 0.0, denominator = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k)
    for (std::size_t l = 0; l < terms.size(); ++l) {
      numerator += terms[k].coefficient * std::conj(terms[l].coefficient) * m[k] *
                   std::conj(m[l]);
      const Eigen::MatrixXcd u = terms[l].matrix.adjoint() * terms[k].matrix;
      const Complex g(hadamard_test(u, x, HadamardPart::kReal),
                      hadamard_test(u, x, HadamardPart::kImaginary));
      denominator += std::conj(terms[l].coefficient) * terms[k].coefficient * g;
    }
  if (denominator.real() <= 1e-300)
    throw std::runtime_error("global cost: ansatz state annihilated by the system");
  return 1.0 - numerator.real() / denominator.real();
}

struct TrainConfig {
  double learning_rate = 0.01;
  double loss_threshold = 1e-4;
  int max_steps = 10000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  std::optional<std::vector<double>> initial_parameters;  // random when absent

  void validate(const VlsProblem& problem) const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be positive");
    if (!(loss_threshold > 0.0)) throw std::invalid_argument("TrainConfig: loss threshold must be positive");
    if (max_steps < 0) throw std::invalid_argument("TrainConfig: negative step limit");
    if (initial_parameters && initial_parameters->size() != problem.param_count())
      throw std::invalid_argument("TrainConfig: initial parameter count mismatch");
  }
};

struct TrainResult {
  std::vector<double> final_parameters;
  int steps_taken = 0;
  bool converged = false;
  std::vector<double> loss_trace;  // loss before any step, then after each step

  double final_loss() const { return loss_trace.empty() ? 0.0 : loss_trace.back(); }
};

// Adam descent on the global cost until it dips under the threshold or the
// step budget runs out. A warm start that already satisfies the threshold
// takes zero steps.
inline TrainResult train(const VlsProblem& problem, const TrainConfig& config) {
  config.validate(problem);
  detail::GlobalCost engine(problem);

  std::vector<double> alpha;
  if (config.initial_parameters) {
    alpha = *config.initial_parameters;
  } else {
    alpha = AnsatzConfig::random(problem.num_qubits, problem.depth, config.seed).parameters;
  }

  auto evaluate = [&](const std::vector<double>& params) {
    AnsatzConfig cfg = problem.ansatz(params);
    StateVector x = prepare_ansatz(cfg);
    auto parts = engine.evaluate(x.amplitudes);
    StateVector lam;
    lam.num_qubits = problem.num_qubits;
    lam.amplitudes = engine.cost_covector(parts);
    return std::pair{parts.cost,
                     detail::ansatz_gradient_backward(cfg, std::move(x), std::move(lam))};
  };

  TrainResult result;
  auto [cost, grad] = evaluate(alpha);
  result.loss_trace.push_back(cost);

  const std::size_t p = alpha.size();
  std::vector<double> m(p, 0.0), v(p, 0.0);
  double b1t = 1.0, b2t = 1.0;
  while (cost > config.loss_threshold && result.steps_taken < config.max_steps) {
    b1t *= config.adam_beta1;
    b2t *= config.adam_beta2;
    for (std::size_t j = 0; j < p; ++j) {
      m[j] = config.adam_beta1 * m[j] + (1.0 - config.adam_beta1) * grad[j];
      v[j] = config.adam_beta2 * v[j] + (1.0 - config.adam_beta2) * grad[j] * grad[j];
      const double mhat = m[j] / (1.0 - b1t);
      const double vhat = v[j] / (1.0 - b2t);
      alpha[j] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_epsilon);
    }
    ++result.steps_taken;
    std::tie(cost, grad) = evaluate(alpha);
    result.loss_trace.push_back(cost);
  }
  result.final_parameters = std::move(alpha);
  result.converged = cost <= config.loss_threshold;
  return result;
}

}  // namespace vqpi
