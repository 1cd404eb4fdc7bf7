// Runs a small paired study of variational policy iteration with and without
// warm-started parameters and prints the per-iteration optimizer effort.

#include <cstdio>

#include "vqpi/experiments.hpp"

int main() {
  vqpi::SweepSpec spec;
  spec.kind = vqpi::StudyKind::WarmStart;
  spec.betas = {0.1};
  spec.trials = 5;
  spec.seed = 1;
  spec.ansatz_depth = 12;
  spec.shots = 0;
  spec.train.learning_rate = 0.01;
  spec.train.loss_threshold = 1e-4;
  spec.train.max_steps = 10000;

  std::printf("running %d paired trials on the slippery 4x4 gridworld...\n", spec.trials);
  const vqpi::SweepResult result = vqpi::warm_start_study(spec);

  std::printf("\n%-10s %12s %12s %8s\n", "iteration", "warm steps", "cold steps", "active");
  const auto warm = vqpi::warmstart_iteration_aggregates(result.table, "warm");
  const auto cold = vqpi::warmstart_iteration_aggregates(result.table, "cold");
  for (std::size_t i = 0; i < std::max(warm.size(), cold.size()); ++i) {
    std::printf("%-10zu", i + 1);
    if (i < warm.size())
      std::printf(" %12.1f", warm[i].mean_steps);
    else
      std::printf(" %12s", "-");
    if (i < cold.size())
      std::printf(" %12.1f", cold[i].mean_steps);
    else
      std::printf(" %12s", "-");
    std::printf(" %8d\n", i < warm.size() ? warm[i].active : 0);
  }

  const double warm_total = result.cells[0].mean;
  const double cold_total = result.cells[1].mean;
  std::printf("\nmean total steps: warm %.0f, cold %.0f (ratio %.2f)\n", warm_total, cold_total,
              warm_total / cold_total);
  return 0;
}
