#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "morl/policy.hpp"
#include "morl/testbeds.hpp"

namespace morl {

enum class EvaluatorKind { BanditExact, TabularExact, MonteCarloV, LogDensityRatio };

// One evaluation function Q_k. Bandit and log-ratio evaluators are exact
// pointwise formulas; tabular evaluators solve the policy-evaluation linear
// system once at construction.
class ObjectiveEvaluator {
 public:
  static ObjectiveEvaluator bandit(const BanditTask& task, int objective);

  /// Exact tabular Q for the given per-state action distribution over the
  /// MDP's action grid. Continuous actions are snapped to the nearest grid
  /// action when evaluated.
  static ObjectiveEvaluator tabular(const ChainMDP& mdp, int objective,
                                    const std::vector<std::vector<double>>& policy_table);

  /// log pi_b(a|s) - log pi_i(a|s).
  static ObjectiveEvaluator log_ratio(GaussianPolicy prior, GaussianPolicy iterate);

  /// factor * inner(s, a); used by the reward-scale sensitivity experiments.
  static ObjectiveEvaluator scaled(ObjectiveEvaluator inner, double factor);

  double operator()(int state, const std::vector<double>& action) const {
    return fn_(state, action);
  }

  EvaluatorKind kind() const { return kind_; }
  int objective() const { return objective_; }

 private:
  ObjectiveEvaluator(EvaluatorKind kind, int objective,
                     std::function<double(int, const std::vector<double>&)> fn)
      : kind_(kind), objective_(objective), fn_(std::move(fn)) {}
  EvaluatorKind kind_;
  int objective_;
  std::function<double(int, const std::vector<double>&)> fn_;
};

double eval_bandit(const BanditTask& task, int objective, double action);

struct TabularSolution {
  // values[k][s], q[k][s][a]
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::vector<double>>> q;
};

/// Exact V and Q for every objective from the linear system
/// V = r_pi + gamma * P_pi V.
TabularSolution solve_tabular(const ChainMDP& mdp,
                              const std::vector<std::vector<double>>& policy_table);

double eval_tabular(const ChainMDP& mdp, int objective,
                    const std::vector<std::vector<double>>& policy_table, int state,
                    int action_index);

double eval_log_ratio(const GaussianPolicy& prior, const GaussianPolicy& iterate,
                      const std::optional<TradeOff>& conditioning,
                      const std::vector<double>& action);

/// Monte Carlo value estimate: mean of Q_k over policy samples.
double eval_value_mc(const GaussianPolicy& policy,
                     const std::optional<TradeOff>& conditioning, int state,
                     const ObjectiveEvaluator& evaluator, int sample_count,
                     RngStream& rng);

/// Index of the grid action nearest to a continuous action.
int nearest_grid_action(const ChainMDP& mdp, double action);

}  // namespace morl
