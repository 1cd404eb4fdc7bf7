// Trains the variational solver on a random 8x8 system with a prescribed
// condition number and compares the prepared state against the direct
// solution, including the certified bound derived from the final loss.

#include <cstdio>

#include "vqpi/numerics.hpp"
#include "vqpi/rng.hpp"
#include "vqpi/vls.hpp"

namespace {

Eigen::MatrixXd random_square(int n, std::uint64_t seed) {
  vqpi::Rng rng(seed);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

Eigen::MatrixXd with_condition_number(int n, double kappa, std::uint64_t seed) {
  Eigen::HouseholderQR<Eigen::MatrixXd> q1(random_square(n, seed));
  Eigen::HouseholderQR<Eigen::MatrixXd> q2(random_square(n, seed + 1));
  Eigen::VectorXd sv(n);
  for (int i = 0; i < n; ++i)
    sv(i) = 1.0 - (1.0 - 1.0 / kappa) * static_cast<double>(i) / (n - 1);
  return Eigen::MatrixXd(q1.householderQ()) * sv.asDiagonal() *
         Eigen::MatrixXd(q2.householderQ()).transpose();
}

}  // namespace

int main() {
  const int n = 8;
  const double kappa = 10.0;
  const double accuracy = 0.05;

  const Eigen::MatrixXd a = with_condition_number(n, kappa, 7);
  Eigen::VectorXd b(n);
  vqpi::Rng rng(11);
  for (int i = 0; i < n; ++i) b(i) = rng.uniform(-1.0, 1.0);

  const vqpi::VlsProblem problem = vqpi::make_vls_problem(a, b, 6);
  std::printf("system: %dx%d, condition number %.1f, %d qubits, %zu parameters\n", n, n,
              vqpi::condition_number(a), problem.num_qubits, problem.param_count());

  vqpi::TrainConfig config;
  config.learning_rate = 0.02;
  config.loss_threshold = vqpi::loss_threshold_bound(accuracy, kappa);
  config.max_steps = 50000;
  config.seed = 3;
  std::printf("training to loss %.3e for a certified trace distance of %.2f\n",
              config.loss_threshold, accuracy);

  const vqpi::TrainResult result = vqpi::train(problem, config);
  std::printf("%s after %d steps, final loss %.3e\n",
              result.converged ? "converged" : "stopped", result.steps_taken,
              result.final_loss());

  const Eigen::VectorXd x = problem.system.partialPivLu().solve(problem.rhs);
  const vqpi::StateVector target = vqpi::prepare_basis_embedding(x, problem.num_qubits);
  const vqpi::StateVector trained = vqpi::solution_state(problem, result.final_parameters);
  std::printf("trace distance to the exact solution state: %.4f (certified %.2f)\n",
              vqpi::trace_distance(trained, target), accuracy);
  return result.converged ? 0 : 1;
}
