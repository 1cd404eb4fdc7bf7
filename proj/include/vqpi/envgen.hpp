#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vqpi/rng.hpp"

namespace vqpi {

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline int int_log2(int n) {
  if (!is_power_of_two(n)) throw std::invalid_argument("int_log2: not a power of two");
  int k = 0;
  while ((1 << k) < n) ++k;
  return k;
}

inline int ring_distance(int a, int b, int n) {
  int d = std::abs(a - b) % n;
  return std::min(d, n - d);
}

// Families of random single-action dynamics whose rows only reach a short
// window of following states on a ring. Window width log2(N) keeps the
// policy-evaluation system as sparse as a qubit register is wide.
enum class LocalDynamicsKind { kDeterministic, kUniform, kExponential };

struct LocalDynamicsSpec {
  int num_states = 8;  // power of two, at least 2
  LocalDynamicsKind kind = LocalDynamicsKind::kUniform;
  double perturbation = 0.1;  // exponential kind only, in (0, 1]
  std::uint64_t seed = 0;

  int window_size() const { return int_log2(num_states); }

  void validate() const {
    if (num_states < 2 || !is_power_of_two(num_states))
      throw std::invalid_argument("LocalDynamicsSpec: num_states must be a power of two >= 2");
    if (kind == LocalDynamicsKind::kExponential &&
        !(perturbation > 0.0 && perturbation <= 1.0))
      throw std::invalid_argument("LocalDynamicsSpec: perturbation must lie in (0, 1]");
  }
};

// Row-stochastic transition matrix. Row s distributes its mass over the
// window {s+1, ..., s+w} (mod N), w = log2(N); the state itself is excluded.
inline Eigen::MatrixXd generate_local_dynamics(const LocalDynamicsSpec& spec) {
  spec.validate();
  const int n = spec.num_states;
  const int w = spec.window_size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  Rng rng(spec.seed);

  switch (spec.kind) {
    case LocalDynamicsKind::kDeterministic:
      for (int s = 0; s < n; ++s) {
        int offset = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(w)));
        p(s, (s + offset) % n) = 1.0;
      }
      break;
    case LocalDynamicsKind::kUniform:
      for (int s = 0; s < n; ++s)
        for (int k = 1; k <= w; ++k) p(s, (s + k) % n) = 1.0 / w;
      break;
    case LocalDynamicsKind::kExponential: {
      // Weights exp((1 - 1/beta) * d) over ring distances d; shifting by the
      // largest exponent keeps tiny beta from underflowing every weight.
      const double c = 1.0 - 1.0 / spec.perturbation;
      std::vector<int> dist(static_cast<std::size_t>(w));
      for (int s = 0; s < n; ++s) {
        int dmin = n;
        for (int k = 1; k <= w; ++k) {
          dist[static_cast<std::size_t>(k - 1)] = ring_distance(s, (s + k) % n, n);
          dmin = std::min(dmin, dist[static_cast<std::size_t>(k - 1)]);
        }
        double total = 0.0;
        for (int k = 1; k <= w; ++k)
          total += std::exp(c * (dist[static_cast<std::size_t>(k - 1)] - dmin));
        for (int k = 1; k <= w; ++k)
          p(s, (s + k) % n) = std::exp(c * (dist[static_cast<std::size_t>(k - 1)] - dmin)) / total;
      }
      break;
    }
  }
  return p;
}

// Policy-evaluation system A = I - discount * P for single-action dynamics.
inline Eigen::MatrixXd local_evaluation_system(const Eigen::MatrixXd& p, double discount) {
  if (p.rows() != p.cols()) throw std::invalid_argument("local_evaluation_system: square matrix required");
  if (!(discount >= 0.0 && discount < 1.0))
    throw std::invalid_argument("local_evaluation_system: discount must lie in [0, 1)");
  return Eigen::MatrixXd::Identity(p.rows(), p.cols()) - discount * p;
}

}  // namespace vqpi
