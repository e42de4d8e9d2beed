#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "cforge/rng.hpp"

namespace cforge {
namespace nsga2 {

/// Fronts of indices ordered by dominance depth (minimization on every
/// objective). Works for any objective count, including single-objective.
std::vector<std::vector<int>> fast_nondominated_sort(
    const std::vector<std::vector<double>>& objectives);

/// Crowding distances within one front; boundary points get +inf, interior
/// points the normalized neighbor-gap sum per objective.
std::vector<double> crowding_distance(const std::vector<std::vector<double>>& objectives,
                                      const std::vector<int>& front);

bool dominates(const std::vector<double>& a, const std::vector<double>& b);

struct Individual {
  std::vector<double> genes;
  std::vector<double> objectives;
  int rank = 0;
  double crowding = 0.0;
};

/// Binary tournament on (rank, crowding).
int tournament_select(const std::vector<Individual>& pop, Rng& rng);

/// Simulated binary crossover; children genes clamped to [0,1].
std::pair<std::vector<double>, std::vector<double>> sbx_crossover(
    const std::vector<double>& p1, const std::vector<double>& p2, double eta_c, double rate,
    Rng& rng);

/// Polynomial mutation in place; genes clamped to [0,1].
void polynomial_mutation(std::vector<double>& genes, double eta_m, double rate, Rng& rng);

struct Config {
  int population = 20;
  int generations = 55;
  double eta_c = 15.0;
  double eta_m = 20.0;
  double crossover_rate = 0.9;
  double mutation_rate = -1.0;  // < 0 -> 1 / genome_len
  u64 seed = 1;
};

struct History {
  std::vector<double> best_reward;  // per generation
  std::vector<double> mean_reward;
  std::vector<double> best_genes;
  double final_best_reward = 0.0;
  i64 evaluations = 0;
};

/// Evaluator returns the reward (maximized); fitness is its inverse. The
/// eval index is a stable identifier for seed derivation. Total evaluator
/// calls equal population * generations (the initial population counts as
/// generation one).
using RewardFn = std::function<double(const std::vector<double>& genes, i64 eval_index)>;

History evolve(int genome_len, const RewardFn& reward_fn, const Config& cfg);

}  // namespace nsga2
}  // namespace cforge
