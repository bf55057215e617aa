#pragma once

#include <array>
#include <string>
#include <vector>

#include "morl/rng.hpp"
#include "morl/types.hpp"

namespace morl {

/// Two-objective continuous bandits with exactly known Pareto fronts.
/// Rewards are the negatives of the named minimization test functions.
enum class BanditFunction { Schaffer, FonsecaFleming };

struct BanditTask {
  BanditFunction function = BanditFunction::Schaffer;

  static BanditTask schaffer() { return {BanditFunction::Schaffer}; }
  static BanditTask fonseca_fleming() { return {BanditFunction::FonsecaFleming}; }

  /// Action interval used for evaluation grids.
  std::array<double, 2> action_bounds() const;
  /// Interval of Pareto-optimal actions.
  std::array<double, 2> optimal_action_interval() const;

  std::string name() const;
};

/// (-f_1(a), -f_2(a)) for the task's test function.
std::array<double, 2> bandit_reward(const BanditTask& task, double action);

/// Dense grid of reward pairs over the Pareto-optimal action interval.
std::vector<std::array<double, 2>> true_pareto_front(const BanditTask& task,
                                                     int resolution);

// Two-objective tabular chain: moving up the chain needs large actions
// (progress reward) while the second objective penalizes action magnitude.
struct ChainMDP {
  int num_states = 5;
  std::vector<double> action_grid;  // discretized actions in [-1, 1]
  // transitions[s][a][s']
  std::vector<std::vector<std::vector<double>>> transitions;
  // rewards[k][s][a], K = 2
  std::vector<std::vector<std::vector<double>>> rewards;
  double gamma = 0.99;

  static ChainMDP standard(int num_states = 5, int num_actions = 7,
                           double gamma = 0.99);

  int num_actions() const { return static_cast<int>(action_grid.size()); }
};

/// One component of a declared 1-D Gaussian behavior mixture.
struct BehaviorComponent {
  double weight = 1.0;
  double mean = 0.0;
  double std_dev = 0.1;
};

struct BehaviorSpec {
  std::vector<BehaviorComponent> components;

  double sample(RngStream& rng) const;
  std::string describe() const;
};

struct OfflineDataset {
  TransitionBatch batch;
  std::string behavior_description;
  std::uint64_t seed = 0;
};

OfflineDataset generate_offline_dataset(const BanditTask& task,
                                        const BehaviorSpec& behavior, int size,
                                        RngStream& rng);

/// Columnar text round-trip for offline datasets (see the runner docs for the
/// schema).
void save_offline_dataset(const OfflineDataset& dataset, const std::string& path);
OfflineDataset load_offline_dataset(const std::string& path);

}  // namespace morl
