// Builds the classic 4x4 slippery gridworld, runs classical policy iteration
// from a random start, and prints each improvement sweep as an arrow map.

#include <cstdio>

#include "vqpi/mdp.hpp"
#include "vqpi/rng.hpp"

namespace {

// Action order: left, down, right, up.
constexpr char kArrows[] = "<v>^";

void print_policy(const vqpi::FrozenLakeSpec& spec, const vqpi::DeterministicPolicy& policy) {
  for (int row = 0; row < spec.side; ++row) {
    for (int col = 0; col < spec.side; ++col) {
      const int s = row * spec.side + col;
      const char cell = spec.cells[static_cast<std::size_t>(s)];
      std::printf("%c", cell == 'H' || cell == 'G' ? cell : kArrows[policy(s)]);
    }
    std::printf("\n");
  }
}

}  // namespace

int main() {
  const auto spec = vqpi::FrozenLakeSpec::standard(4, 0.1);
  const vqpi::Mdp mdp = vqpi::build_frozen_lake(spec);

  const auto initial = vqpi::random_policy(mdp, 42);
  std::printf("initial policy\n");
  print_policy(spec, initial);

  const auto result = vqpi::classical_policy_iteration(mdp, initial);
  for (std::size_t i = 0; i < result.sequence.size(); ++i) {
    std::printf("\nafter sweep %zu\n", i + 1);
    print_policy(spec, result.sequence[i]);
  }

  const Eigen::VectorXd q = vqpi::solve_exact(vqpi::assemble_lse(mdp, result.policy));
  std::printf("\nstate values under the final policy\n");
  for (int row = 0; row < spec.side; ++row) {
    for (int col = 0; col < spec.side; ++col) {
      const int s = row * spec.side + col;
      double best = q(s * mdp.num_actions);
      for (int a = 1; a < mdp.num_actions; ++a) best = std::max(best, q(s * mdp.num_actions + a));
      std::printf(" %6.3f", best);
    }
    std::printf("\n");
  }
  std::printf("\nconverged in %d sweeps\n", result.iterations);
  return 0;
}
