#include "morl/evaluation.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "morl/errors.hpp"

namespace morl {

double eval_bandit(const BanditTask& task, int objective, double action) {
  if (objective < 0 || objective > 1)
    throw ContractViolation("bandit objective index out of range");
  return bandit_reward(task, action)[objective];
}

int nearest_grid_action(const ChainMDP& mdp, double action) {
  int best = 0;
  double best_dist = std::abs(action - mdp.action_grid[0]);
  for (int a = 1; a < mdp.num_actions(); ++a) {
    const double d = std::abs(action - mdp.action_grid[a]);
    if (d < best_dist) {
      best_dist = d;
      best = a;
    }
  }
  return best;
}

TabularSolution solve_tabular(const ChainMDP& mdp,
                              const std::vector<std::vector<double>>& policy_table) {
  const int S = mdp.num_states;
  const int A = mdp.num_actions();
  if (static_cast<int>(policy_table.size()) != S)
    throw ContractViolation("policy table state count mismatch");
  if (!(mdp.gamma < 1.0))
    throw ContractViolation("tabular evaluation requires gamma < 1");

  const std::size_t K = mdp.rewards.size();
  TabularSolution sol;
  sol.values.resize(K);
  sol.q.resize(K);

  Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(S, S);
  for (int s = 0; s < S; ++s) {
    if (static_cast<int>(policy_table[s].size()) != A)
      throw ContractViolation("policy table action count mismatch");
    for (int a = 0; a < A; ++a)
      for (int sp = 0; sp < S; ++sp)
        p_pi(s, sp) += policy_table[s][a] * mdp.transitions[s][a][sp];
  }
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(S, S) - mdp.gamma * p_pi;

  for (std::size_t k = 0; k < K; ++k) {
    Eigen::VectorXd r_pi = Eigen::VectorXd::Zero(S);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a)
        r_pi(s) += policy_table[s][a] * mdp.rewards[k][s][a];
    const Eigen::VectorXd v = system.partialPivLu().solve(r_pi);
    if (!v.allFinite())
      throw ContractViolation("singular tabular policy-evaluation system");
    sol.values[k].assign(v.data(), v.data() + S);
    sol.q[k].assign(S, std::vector<double>(A, 0.0));
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        double q = mdp.rewards[k][s][a];
        for (int sp = 0; sp < S; ++sp)
          q += mdp.gamma * mdp.transitions[s][a][sp] * v(sp);
        sol.q[k][s][a] = q;
      }
  }
  return sol;
}

double eval_tabular(const ChainMDP& mdp, int objective,
                    const std::vector<std::vector<double>>& policy_table, int state,
                    int action_index) {
  const auto sol = solve_tabular(mdp, policy_table);
  return sol.q[objective][state][action_index];
}

double eval_log_ratio(const GaussianPolicy& prior, const GaussianPolicy& iterate,
                      const std::optional<TradeOff>& conditioning,
                      const std::vector<double>& action) {
  return prior.log_density(conditioning, action) -
         iterate.log_density(conditioning, action);
}

double eval_value_mc(const GaussianPolicy& policy,
                     const std::optional<TradeOff>& conditioning, int state,
                     const ObjectiveEvaluator& evaluator, int sample_count,
                     RngStream& rng) {
  if (sample_count < 1) throw ContractViolation("sample_count must be >= 1");
  const auto actions = sample_actions(policy, conditioning, sample_count, rng);
  double acc = 0.0;
  for (const auto& a : actions) acc += evaluator(state, a);
  return acc / sample_count;
}

ObjectiveEvaluator ObjectiveEvaluator::bandit(const BanditTask& task,
                                              int objective) {
  return ObjectiveEvaluator(
      EvaluatorKind::BanditExact, objective,
      [task, objective](int, const std::vector<double>& a) {
        return eval_bandit(task, objective, a[0]);
      });
}

ObjectiveEvaluator ObjectiveEvaluator::tabular(
    const ChainMDP& mdp, int objective,
    const std::vector<std::vector<double>>& policy_table) {
  // solve once, share the table
  auto sol = std::make_shared<TabularSolution>(solve_tabular(mdp, policy_table));
  auto grid = mdp;
  return ObjectiveEvaluator(
      EvaluatorKind::TabularExact, objective,
      [sol, grid, objective](int state, const std::vector<double>& a) {
        return sol->q[objective][state][nearest_grid_action(grid, a[0])];
      });
}

ObjectiveEvaluator ObjectiveEvaluator::log_ratio(GaussianPolicy prior,
                                                 GaussianPolicy iterate) {
  return ObjectiveEvaluator(
      EvaluatorKind::LogDensityRatio, 0,
      [prior = std::move(prior), iterate = std::move(iterate)](
          int, const std::vector<double>& a) {
        return eval_log_ratio(prior, iterate, std::nullopt, a);
      });
}

ObjectiveEvaluator ObjectiveEvaluator::scaled(ObjectiveEvaluator inner,
                                              double factor) {
  return ObjectiveEvaluator(
      inner.kind_, inner.objective_,
      [inner = std::move(inner), factor](int state, const std::vector<double>& a) {
        return factor * inner(state, a);
      });
}

}  // namespace morl
