#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqpi/mdp.hpp"
#include "vqpi/vls.hpp"

namespace vqpi {

struct TomographyResult {
  std::vector<std::int64_t> counts;  // per basis index, length 2^qubits
  std::int64_t padding_counts = 0;   // shots landing beyond the system indices
  DeterministicPolicy policy;
};

// Measurement-based policy improvement: repeated basis measurements estimate
// the |amplitude|^2 mass per state-action pair, and the policy takes each
// state's most frequent action (ties toward the smaller index, terminal
// states pinned to 0). Values are nonnegative here, so the counts order
// actions exactly like the values do. More than 10% of the shots landing in
// the zero padding means the state no longer represents the system.
inline TomographyResult tomography_policy(const StateVector& state, const Mdp& mdp,
                                          int shots, std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("tomography_policy: need at least one shot");
  const int n = mdp.system_size();
  if (n > state.dim())
    throw std::invalid_argument("tomography_policy: register smaller than the system");
  TomographyResult result;
  result.counts = sample_counts(state, shots, seed);
  for (std::size_t i = static_cast<std::size_t>(n); i < result.counts.size(); ++i)
    result.padding_counts += result.counts[i];
  if (10 * result.padding_counts > shots)
    throw std::runtime_error("tomography_policy: padding absorbed over 10% of shots");
  result.policy.action.assign(static_cast<std::size_t>(mdp.num_states), 0);
  for (int s = 0; s < mdp.num_states; ++s) {
    if (mdp.is_terminal(s)) continue;
    int best_action = 0;
    std::int64_t best = result.counts[static_cast<std::size_t>(s * mdp.num_actions)];
    for (int a = 1; a < mdp.num_actions; ++a) {
      const std::int64_t c = result.counts[static_cast<std::size_t>(s * mdp.num_actions + a)];
      if (c > best) {
        best = c;
        best_action = a;
      }
    }
    result.policy.action[static_cast<std::size_t>(s)] = best_action;
  }
  return result;
}

// Noise-free readout: greedy improvement straight from the exact amplitude
// magnitudes, with the same padding-mass guard.
inline DeterministicPolicy exact_readout_policy(const StateVector& state, const Mdp& mdp) {
  const int n = mdp.system_size();
  if (n > state.dim())
    throw std::invalid_argument("exact_readout_policy: register smaller than the system");
  Eigen::VectorXd magnitudes = state.amplitudes.cwiseAbs();
  const double pad_mass = magnitudes.tail(state.dim() - n).squaredNorm();
  if (pad_mass > 0.1 * magnitudes.squaredNorm())
    throw std::runtime_error("exact_readout_policy: padding holds over 10% of the state");
  return greedy_improvement(magnitudes.head(n), mdp);
}

struct QpiConfig {
  int ansatz_depth = 12;
  int shots = 1000;      // 0 reads exact magnitudes
  bool warm_start = true;
  bool exact = false;    // direct linear solve in place of the variational core
  int max_iterations = 30;
  std::uint64_t seed = 0;
  TrainConfig train;

  void validate() const {
    if (ansatz_depth < 1) throw std::invalid_argument("QpiConfig: depth must be positive");
    if (shots < 0) throw std::invalid_argument("QpiConfig: negative shot count");
    if (max_iterations < 1) throw std::invalid_argument("QpiConfig: need at least one iteration");
  }
};

struct IterationRecord {
  int iteration = 0;  // 1-based
  int steps = 0;
  double final_loss = 0.0;
  bool converged = true;  // training reached its threshold (always true in exact mode)
  DeterministicPolicy policy_before;
  DeterministicPolicy policy_after;
  std::vector<double> loss_trace;
};

struct QpiRun {
  std::vector<IterationRecord> iterations;
  DeterministicPolicy final_policy;
  bool converged = false;  // policy fixed point reached within the iteration budget

  long total_steps() const {
    long total = 0;
    for (const auto& rec : iterations) total += rec.steps;
    return total;
  }
};

// Policy iteration with the evaluation step done variationally: assemble the
// system for the current policy, train the solver, read the values out, act
// greedily. With warm_start each iteration resumes from the previous
// optimum; otherwise every iteration draws a fresh initialization. The two
// modes share all seeds, so their first iterations are identical.
inline QpiRun run_qpi(const Mdp& mdp, const DeterministicPolicy& initial,
                      const QpiConfig& config) {
  mdp.validate();
  initial.validate(mdp);
  config.validate();

  QpiRun run;
  DeterministicPolicy current = initial;
  std::optional<std::vector<double>> carried;
  for (int it = 1; it <= config.max_iterations; ++it) {
    BellmanLse lse = assemble_lse(mdp, current);
    IterationRecord rec;
    rec.iteration = it;
    rec.policy_before = current;

    DeterministicPolicy next;
    if (config.exact) {
      next = greedy_improvement(solve_exact(lse), mdp);
    } else {
      VlsProblem problem = make_vls_problem(lse.matrix, lse.rhs, config.ansatz_depth);
      TrainConfig tc = config.train;
      tc.seed = mix_seed(config.seed, 1, static_cast<std::uint64_t>(it));
      if (config.warm_start && carried) tc.initial_parameters = carried;
      TrainResult trained = train(problem, tc);
      rec.steps = trained.steps_taken;
      rec.final_loss = trained.final_loss();
      rec.converged = trained.converged;
      rec.loss_trace = trained.loss_trace;
      carried = trained.final_parameters;

      StateVector state = solution_state(problem, trained.final_parameters);
      if (config.shots == 0) {
        next = exact_readout_policy(state, mdp);
      } else {
        next = tomography_policy(state, mdp, config.shots,
                                 mix_seed(config.seed, 2, static_cast<std::uint64_t>(it)))
                   .policy;
      }
    }
    rec.policy_after = next;
    run.iterations.push_back(std::move(rec));

    if (same_policy_nonterminal(next, current, mdp)) {
      run.final_policy = next;
      run.converged = true;
      return run;
    }
    current = next;
  }
  run.final_policy = current;
  run.converged = false;
  return run;
}

// A policy succeeds against an evaluation if in every non-terminal state its
// action comes within tolerance of the best one. The tolerance lives in
// measurement-probability space, the squared entries of the unit-normalized
// value vector, where a thousand-shot readout resolves roughly one part in a
// thousand. This treats exact ties and gaps below the readout resolution as
// equivalent choices.
inline bool score_success(const DeterministicPolicy& improved, const BellmanLse& lse,
                          const Mdp& mdp, double tolerance = 1e-3) {
  improved.validate(mdp);
  Eigen::VectorXd q = solve_exact(lse);
  const double norm = q.norm();
  if (norm > 0.0) q /= norm;
  for (int s = 0; s < mdp.num_states; ++s) {
    if (mdp.is_terminal(s)) continue;
    double best = q(s * mdp.num_actions);
    for (int a = 1; a < mdp.num_actions; ++a)
      best = std::max(best, q(s * mdp.num_actions + a));
    const double chosen = q(s * mdp.num_actions + improved(s));
    if (best * best - chosen * chosen > tolerance) return false;
  }
  return true;
}

// Final-policy check against the classical oracle: the policy must be
// greedy, within tolerance, for the optimal values.
inline bool score_against_oracle(const Mdp& mdp, const DeterministicPolicy& policy,
                                 double tolerance = 1e-3) {
  PolicyIterationResult oracle = classical_policy_iteration(mdp, policy);
  return score_success(policy, assemble_lse(mdp, oracle.policy), mdp, tolerance);
}

inline std::string policy_string(const DeterministicPolicy& policy) {
  std::string out;
  out.reserve(policy.action.size());
  for (int a : policy.action) {
    if (a > 9) out += '-';
    out += std::to_string(a);
  }
  return out;
}

}  // namespace vqpi
