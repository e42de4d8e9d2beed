#include "cforge/nsga2.hpp"

#include <algorithm>
#include <cmath>

namespace cforge {
namespace nsga2 {

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  bool strictly_better = false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly_better = true;
  }
  return strictly_better;
}

std::vector<std::vector<int>> fast_nondominated_sort(
    const std::vector<std::vector<double>>& objectives) {
  const int n = static_cast<int>(objectives.size());
  std::vector<std::vector<int>> dominated(static_cast<size_t>(n));
  std::vector<int> dom_count(static_cast<size_t>(n), 0);
  std::vector<std::vector<int>> fronts(1);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(objectives[static_cast<size_t>(p)], objectives[static_cast<size_t>(q)]))
        dominated[static_cast<size_t>(p)].push_back(q);
      else if (dominates(objectives[static_cast<size_t>(q)], objectives[static_cast<size_t>(p)]))
        ++dom_count[static_cast<size_t>(p)];
    }
    if (dom_count[static_cast<size_t>(p)] == 0) fronts[0].push_back(p);
  }
  int fi = 0;
  while (!fronts[static_cast<size_t>(fi)].empty()) {
    std::vector<int> next;
    for (int p : fronts[static_cast<size_t>(fi)]) {
      for (int q : dominated[static_cast<size_t>(p)]) {
        if (--dom_count[static_cast<size_t>(q)] == 0) next.push_back(q);
      }
    }
    ++fi;
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<std::vector<double>>& objectives,
                                      const std::vector<int>& front) {
  const int n = static_cast<int>(front.size());
  std::vector<double> dist(static_cast<size_t>(n), 0.0);
  if (n == 0) return dist;
  const int m = static_cast<int>(objectives[static_cast<size_t>(front[0])].size());
  const double inf = std::numeric_limits<double>::infinity();
  for (int obj = 0; obj < m; ++obj) {
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return objectives[static_cast<size_t>(front[static_cast<size_t>(a)])][static_cast<size_t>(obj)] <
             objectives[static_cast<size_t>(front[static_cast<size_t>(b)])][static_cast<size_t>(obj)];
    });
    const double lo = objectives[static_cast<size_t>(front[static_cast<size_t>(order[0])])][static_cast<size_t>(obj)];
    const double hi =
        objectives[static_cast<size_t>(front[static_cast<size_t>(order[static_cast<size_t>(n - 1)])])][static_cast<size_t>(obj)];
    dist[static_cast<size_t>(order[0])] = inf;
    dist[static_cast<size_t>(order[static_cast<size_t>(n - 1)])] = inf;
    if (hi == lo) continue;
    for (int i = 1; i + 1 < n; ++i) {
      const double prev =
          objectives[static_cast<size_t>(front[static_cast<size_t>(order[static_cast<size_t>(i - 1)])])][static_cast<size_t>(obj)];
      const double next =
          objectives[static_cast<size_t>(front[static_cast<size_t>(order[static_cast<size_t>(i + 1)])])][static_cast<size_t>(obj)];
      dist[static_cast<size_t>(order[static_cast<size_t>(i)])] += (next - prev) / (hi - lo);
    }
  }
  return dist;
}

int tournament_select(const std::vector<Individual>& pop, Rng& rng) {
  const int a = rng.uniform_int(0, static_cast<int>(pop.size()) - 1);
  const int b = rng.uniform_int(0, static_cast<int>(pop.size()) - 1);
  const auto& ia = pop[static_cast<size_t>(a)];
  const auto& ib = pop[static_cast<size_t>(b)];
  if (ia.rank != ib.rank) return ia.rank < ib.rank ? a : b;
  return ia.crowding >= ib.crowding ? a : b;
}

std::pair<std::vector<double>, std::vector<double>> sbx_crossover(
    const std::vector<double>& p1, const std::vector<double>& p2, double eta_c, double rate,
    Rng& rng) {
  std::vector<double> c1 = p1, c2 = p2;
  if (rng.uniform() > rate) return {c1, c2};
  for (size_t i = 0; i < p1.size(); ++i) {
    if (rng.uniform() > 0.5) continue;  // per-gene exchange probability
    const double u = rng.uniform();
    const double beta = u <= 0.5 ? std::pow(2.0 * u, 1.0 / (eta_c + 1.0))
                                 : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta_c + 1.0));
    c1[i] = std::clamp(0.5 * ((1.0 + beta) * p1[i] + (1.0 - beta) * p2[i]), 0.0, 1.0);
    c2[i] = std::clamp(0.5 * ((1.0 - beta) * p1[i] + (1.0 + beta) * p2[i]), 0.0, 1.0);
  }
  return {c1, c2};
}

void polynomial_mutation(std::vector<double>& genes, double eta_m, double rate, Rng& rng) {
  for (double& g : genes) {
    if (rng.uniform() > rate) continue;
    const double u = rng.uniform();
    double delta;
    if (u < 0.5) {
      const double bl = g;  // distance to the lower bound (bounds are [0,1])
      delta = std::pow(2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - bl, eta_m + 1.0),
                       1.0 / (eta_m + 1.0)) -
              1.0;
    } else {
      const double bu = 1.0 - g;
      delta = 1.0 - std::pow(2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - bu, eta_m + 1.0),
                             1.0 / (eta_m + 1.0));
    }
    g = std::clamp(g + delta, 0.0, 1.0);
  }
}

namespace {

void rank_population(std::vector<Individual>& pop) {
  std::vector<std::vector<double>> objs;
  objs.reserve(pop.size());
  for (const auto& ind : pop) objs.push_back(ind.objectives);
  const auto fronts = fast_nondominated_sort(objs);
  for (size_t fi = 0; fi < fronts.size(); ++fi) {
    const auto dist = crowding_distance(objs, fronts[fi]);
    for (size_t k = 0; k < fronts[fi].size(); ++k) {
      pop[static_cast<size_t>(fronts[fi][k])].rank = static_cast<int>(fi);
      pop[static_cast<size_t>(fronts[fi][k])].crowding = dist[k];
    }
  }
}

// elitist truncation of parents + offspring to the population size
std::vector<Individual> select_survivors(std::vector<Individual> pool, int target) {
  rank_population(pool);
  std::vector<int> order(pool.size());
  for (size_t i = 0; i < pool.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&pool](int a, int b) {
    const auto& ia = pool[static_cast<size_t>(a)];
    const auto& ib = pool[static_cast<size_t>(b)];
    if (ia.rank != ib.rank) return ia.rank < ib.rank;
    return ia.crowding > ib.crowding;
  });
  std::vector<Individual> next;
  next.reserve(static_cast<size_t>(target));
  for (int i = 0; i < target; ++i) next.push_back(pool[static_cast<size_t>(order[static_cast<size_t>(i)])]);
  return next;
}

}  // namespace

History evolve(int genome_len, const RewardFn& reward_fn, const Config& cfg) {
  require(cfg.population >= 1 && cfg.generations >= 1, "nsga2: bad budget");
  History hist;
  Rng rng(cfg.seed);
  const double mut_rate = cfg.mutation_rate > 0.0 ? cfg.mutation_rate : 1.0 / genome_len;

  auto evaluate = [&](Individual& ind) {
    const double reward = reward_fn(ind.genes, hist.evaluations);
    ++hist.evaluations;
    ind.objectives = {-reward};  // single objective: inverse reward, minimized
  };

  std::vector<Individual> pop(static_cast<size_t>(cfg.population));
  for (auto& ind : pop) {
    ind.genes.resize(static_cast<size_t>(genome_len));
    for (double& g : ind.genes) g = rng.uniform();
    evaluate(ind);
  }
  rank_population(pop);

  double best = -pop[0].objectives[0];
  std::vector<double> best_genes = pop[0].genes;
  auto record_generation = [&] {
    double gen_best = -1e300, mean = 0.0;
    for (const auto& ind : pop) {
      const double r = -ind.objectives[0];
      mean += r / cfg.population;
      if (r > gen_best) gen_best = r;
      if (r > best) {
        best = r;
        best_genes = ind.genes;
      }
    }
    hist.best_reward.push_back(gen_best);
    hist.mean_reward.push_back(mean);
  };
  record_generation();

  for (int gen = 1; gen < cfg.generations; ++gen) {
    std::vector<Individual> offspring;
    offspring.reserve(static_cast<size_t>(cfg.population));
    while (static_cast<int>(offspring.size()) < cfg.population) {
      const auto& p1 = pop[static_cast<size_t>(tournament_select(pop, rng))];
      const auto& p2 = pop[static_cast<size_t>(tournament_select(pop, rng))];
      auto [c1, c2] = sbx_crossover(p1.genes, p2.genes, cfg.eta_c, cfg.crossover_rate, rng);
      polynomial_mutation(c1, cfg.eta_m, mut_rate, rng);
      polynomial_mutation(c2, cfg.eta_m, mut_rate, rng);
      Individual o1;
      o1.genes = std::move(c1);
      evaluate(o1);
      offspring.push_back(std::move(o1));
      if (static_cast<int>(offspring.size()) < cfg.population) {
        Individual o2;
        o2.genes = std::move(c2);
        evaluate(o2);
        offspring.push_back(std::move(o2));
      }
    }
    std::vector<Individual> pool = pop;
    pool.insert(pool.end(), offspring.begin(), offspring.end());
    pop = select_survivors(std::move(pool), cfg.population);
    record_generation();
  }

  hist.final_best_reward = best;
  hist.best_genes = best_genes;
  return hist;
}

}  // namespace nsga2
}  // namespace cforge
