#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqpi/rng.hpp"

namespace vqpi {

// Finite MDP with dense dynamics p(s'|s,a) and rewards r(s,a,s').
// Terminal states are absorbing: p(t|t,a) = 1 with zero reward, which keeps
// the policy-evaluation system nonsingular for any discount below one.
struct Mdp {
  int num_states = 0;
  int num_actions = 0;
  double discount = 0.9;
  std::vector<double> transition;  // (s * num_actions + a) * num_states + s'
  std::vector<double> reward;      // same layout
  std::vector<std::uint8_t> terminal;

  static Mdp zeros(int states, int actions, double discount) {
    if (states <= 0 || actions <= 0)
      throw std::invalid_argument("Mdp: states and actions must be positive");
    Mdp m;
    m.num_states = states;
    m.num_actions = actions;
    m.discount = discount;
    std::size_t n = static_cast<std::size_t>(states) * actions * states;
    m.transition.assign(n, 0.0);
    m.reward.assign(n, 0.0);
    m.terminal.assign(static_cast<std::size_t>(states), 0);
    return m;
  }

  std::size_t idx(int s, int a, int s2) const {
    return (static_cast<std::size_t>(s) * num_actions + a) * num_states + s2;
  }
  double p(int s, int a, int s2) const { return transition[idx(s, a, s2)]; }
  double& p(int s, int a, int s2) { return transition[idx(s, a, s2)]; }
  double r(int s, int a, int s2) const { return reward[idx(s, a, s2)]; }
  double& r(int s, int a, int s2) { return reward[idx(s, a, s2)]; }
  bool is_terminal(int s) const { return terminal[static_cast<std::size_t>(s)] != 0; }

  // Dimension of the state-action system solved during policy evaluation.
  int system_size() const { return num_states * num_actions; }

  void validate() const {
    if (num_states <= 0 || num_actions <= 0)
      throw std::invalid_argument("Mdp: empty state or action set");
    if (!(discount >= 0.0 && discount < 1.0))
      throw std::invalid_argument("Mdp: discount must lie in [0, 1)");
    const double tol = 1e-12;
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < num_actions; ++a) {
        double sum = 0.0;
        for (int s2 = 0; s2 < num_states; ++s2) {
          double q = p(s, a, s2);
          if (q < -tol || q > 1.0 + tol)
            throw std::invalid_argument("Mdp: transition probability outside [0, 1]");
          sum += q;
        }
        if (std::abs(sum - 1.0) > 1e-9)
          throw std::invalid_argument("Mdp: transition row does not sum to one");
        if (is_terminal(s)) {
          if (std::abs(p(s, a, s) - 1.0) > tol)
            throw std::invalid_argument("Mdp: terminal state is not absorbing");
          for (int s2 = 0; s2 < num_states; ++s2)
            if (r(s, a, s2) != 0.0)
              throw std::invalid_argument("Mdp: terminal state has nonzero reward");
        }
      }
  }
};

struct DeterministicPolicy {
  std::vector<int> action;

  int operator()(int s) const { return action[static_cast<std::size_t>(s)]; }

  void validate(const Mdp& mdp) const {
    if (static_cast<int>(action.size()) != mdp.num_states)
      throw std::invalid_argument("DeterministicPolicy: wrong number of states");
    for (int a : action)
      if (a < 0 || a >= mdp.num_actions)
        throw std::invalid_argument("DeterministicPolicy: action out of range");
  }
};

inline DeterministicPolicy random_policy(const Mdp& mdp, std::uint64_t seed) {
  Rng rng(seed);
  DeterministicPolicy pi;
  pi.action.resize(static_cast<std::size_t>(mdp.num_states));
  for (auto& a : pi.action) a = static_cast<int>(rng.uniform_index(mdp.num_actions));
  return pi;
}

// Two policies are interchangeable if they agree outside terminal states;
// terminal actions never influence values.
inline bool same_policy_nonterminal(const DeterministicPolicy& a,
                                    const DeterministicPolicy& b, const Mdp& mdp) {
  for (int s = 0; s < mdp.num_states; ++s)
    if (!mdp.is_terminal(s) && a(s) != b(s)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// FrozenLake

// Gym action order.
enum FrozenLakeAction : int {
  kActionLeft = 0,
  kActionDown = 1,
  kActionRight = 2,
  kActionUp = 3,
};

struct FrozenLakeSpec {
  int side = 4;
  double beta = 0.0;  // per-side slip probability; straight move keeps 1 - 2*beta
  std::string cells;  // row-major S/F/H/G characters, side*side of them

  // The classic 4x4 and 8x8 maps.
  static FrozenLakeSpec standard(int side, double beta) {
    FrozenLakeSpec spec;
    spec.side = side;
    spec.beta = beta;
    if (side == 4) {
      spec.cells =
          "SFFF"
          "FHFH"
          "FFFH"
          "HFFG";
    } else if (side == 8) {
      spec.cells =
          "SFFFFFFF"
          "FFFFFFFF"
          "FFFHFFFF"
          "FFFFFHFF"
          "FFFHFFFF"
          "FHHFFFHF"
          "FHFFHFHF"
          "FFFHFFFG";
    } else {
      throw std::invalid_argument("FrozenLakeSpec: no standard map of side " +
                                  std::to_string(side));
    }
    return spec;
  }

  static FrozenLakeSpec from_lines(const std::vector<std::string>& lines, double beta) {
    FrozenLakeSpec spec;
    spec.beta = beta;
    if (lines.empty()) throw std::invalid_argument("FrozenLakeSpec: empty layout");
    spec.side = static_cast<int>(lines.size());
    for (const auto& line : lines) {
      if (static_cast<int>(line.size()) != spec.side)
        throw std::invalid_argument("FrozenLakeSpec: layout must be square");
      spec.cells += line;
    }
    return spec;
  }

  static FrozenLakeSpec from_file(const std::string& path, double beta) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("FrozenLakeSpec: cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(line);
    }
    return from_lines(lines, beta);
  }

  void validate() const {
    if (side <= 1) throw std::invalid_argument("FrozenLakeSpec: side must be at least 2");
    if (!(beta >= 0.0 && beta <= 1.0 / 3.0))
      throw std::invalid_argument("FrozenLakeSpec: beta must lie in [0, 1/3]");
    if (static_cast<int>(cells.size()) != side * side)
      throw std::invalid_argument("FrozenLakeSpec: layout size mismatch");
    int starts = 0, goals = 0;
    for (char c : cells) {
      if (c == 'S') ++starts;
      else if (c == 'G') ++goals;
      else if (c != 'F' && c != 'H')
        throw std::invalid_argument("FrozenLakeSpec: invalid cell character");
    }
    if (starts != 1 || goals != 1)
      throw std::invalid_argument("FrozenLakeSpec: exactly one S and one G required");
  }

  int start_state() const { return static_cast<int>(cells.find('S')); }
  int goal_state() const { return static_cast<int>(cells.find('G')); }
};

inline Mdp build_frozen_lake(const FrozenLakeSpec& spec, double discount = 0.9) {
  spec.validate();
  const int side = spec.side;
  const int states = side * side;
  Mdp mdp = Mdp::zeros(states, 4, discount);
  const int goal = spec.goal_state();
  for (int s = 0; s < states; ++s)
    mdp.terminal[static_cast<std::size_t>(s)] =
        (spec.cells[static_cast<std::size_t>(s)] == 'H' || s == goal) ? 1 : 0;

  // Moving off the grid leaves the state unchanged.
  auto step = [&](int s, int a) {
    int row = s / side, col = s % side;
    switch (a) {
      case kActionLeft: col = std::max(col - 1, 0); break;
      case kActionDown: row = std::min(row + 1, side - 1); break;
      case kActionRight: col = std::min(col + 1, side - 1); break;
      case kActionUp: row = std::max(row - 1, 0); break;
    }
    return row * side + col;
  };
  auto perpendicular = [](int a) {
    return (a == kActionLeft || a == kActionRight)
               ? std::pair<int, int>{kActionUp, kActionDown}
               : std::pair<int, int>{kActionLeft, kActionRight};
  };

  for (int s = 0; s < states; ++s) {
    if (mdp.is_terminal(s)) {
      for (int a = 0; a < 4; ++a) mdp.p(s, a, s) = 1.0;
      continue;
    }
    for (int a = 0; a < 4; ++a) {
      auto [p1, p2] = perpendicular(a);
      mdp.p(s, a, step(s, a)) += 1.0 - 2.0 * spec.beta;
      mdp.p(s, a, step(s, p1)) += spec.beta;
      mdp.p(s, a, step(s, p2)) += spec.beta;
      mdp.r(s, a, goal) = 1.0;  // paid on arrival at the goal
    }
  }
  mdp.validate();
  return mdp;
}

// ---------------------------------------------------------------------------
// Policy evaluation as a linear system

// Q-values of a fixed policy solve (I - discount * P * Pi) q = r, one row per
// state-action pair, indexed i = s * num_actions + a. P maps pairs to
// successor states and Pi injects the policy's next action.
struct BellmanLse {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
  int num_actions = 0;

  int index(int s, int a) const { return s * num_actions + a; }
  int state_of(int i) const { return i / num_actions; }
  int action_of(int i) const { return i % num_actions; }
};

inline BellmanLse assemble_lse(const Mdp& mdp, const DeterministicPolicy& policy) {
  policy.validate(mdp);
  const int n = mdp.system_size();
  BellmanLse lse;
  lse.num_actions = mdp.num_actions;
  lse.matrix = Eigen::MatrixXd::Identity(n, n);
  lse.rhs = Eigen::VectorXd::Zero(n);
  for (int s = 0; s < mdp.num_states; ++s)
    for (int a = 0; a < mdp.num_actions; ++a) {
      const int i = lse.index(s, a);
      double expected_r = 0.0;
      for (int s2 = 0; s2 < mdp.num_states; ++s2) {
        const double q = mdp.p(s, a, s2);
        if (q == 0.0) continue;
        expected_r += q * mdp.r(s, a, s2);
        lse.matrix(i, lse.index(s2, policy(s2))) -= mdp.discount * q;
      }
      lse.rhs(i) = expected_r;
    }
  return lse;
}

// Direct solve with a residual guard; throws if the system is numerically
// singular instead of returning garbage.
inline Eigen::VectorXd solve_exact(const BellmanLse& lse) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(lse.matrix);
  Eigen::VectorXd q = lu.solve(lse.rhs);
  const double scale = std::max(1.0, lse.rhs.lpNorm<Eigen::Infinity>());
  const double residual = (lse.matrix * q - lse.rhs).lpNorm<Eigen::Infinity>();
  if (!q.allFinite() || residual > 1e-10 * scale)
    throw std::runtime_error("solve_exact: policy-evaluation system is singular");
  return q;
}

// Greedy policy from Q-values; ties break toward the smallest action index
// and terminal states are pinned to action 0.
inline DeterministicPolicy greedy_improvement(const Eigen::VectorXd& q, const Mdp& mdp) {
  if (q.size() != mdp.system_size())
    throw std::invalid_argument("greedy_improvement: wrong Q-vector size");
  DeterministicPolicy pi;
  pi.action.assign(static_cast<std::size_t>(mdp.num_states), 0);
  for (int s = 0; s < mdp.num_states; ++s) {
    if (mdp.is_terminal(s)) continue;
    int best = 0;
    double best_q = q(s * mdp.num_actions);
    for (int a = 1; a < mdp.num_actions; ++a) {
      double v = q(s * mdp.num_actions + a);
      if (v > best_q) {
        best_q = v;
        best = a;
      }
    }
    pi.action[static_cast<std::size_t>(s)] = best;
  }
  return pi;
}

struct PolicyIterationResult {
  DeterministicPolicy policy;
  int iterations = 0;
  std::vector<DeterministicPolicy> sequence;  // improved policy after each sweep
};

inline PolicyIterationResult classical_policy_iteration(const Mdp& mdp,
                                                        const DeterministicPolicy& initial,
                                                        int max_iterations = 100) {
  initial.validate(mdp);
  PolicyIterationResult result;
  DeterministicPolicy current = initial;
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd q = solve_exact(assemble_lse(mdp, current));
    DeterministicPolicy next = greedy_improvement(q, mdp);
    result.sequence.push_back(next);
    ++result.iterations;
    if (same_policy_nonterminal(next, current, mdp)) {
      result.policy = next;
      return result;
    }
    current = next;
  }
  throw std::runtime_error("classical_policy_iteration: no fixed point within limit");
}

// Monte Carlo discounted return of one trajectory.
inline double rollout_return(const Mdp& mdp, const DeterministicPolicy& policy, int start,
                             int horizon, std::uint64_t seed) {
  policy.validate(mdp);
  if (start < 0 || start >= mdp.num_states)
    throw std::invalid_argument("rollout_return: start state out of range");
  Rng rng(seed);
  std::vector<double> row(static_cast<std::size_t>(mdp.num_states));
  int s = start;
  double value = 0.0, weight = 1.0;
  for (int t = 0; t < horizon && !mdp.is_terminal(s); ++t) {
    const int a = policy(s);
    for (int s2 = 0; s2 < mdp.num_states; ++s2) row[static_cast<std::size_t>(s2)] = mdp.p(s, a, s2);
    const int s2 = static_cast<int>(rng.categorical(row));
    value += weight * mdp.r(s, a, s2);
    weight *= mdp.discount;
    s = s2;
  }
  return value;
}

}  // namespace vqpi
