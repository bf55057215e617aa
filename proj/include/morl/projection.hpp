#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "morl/evaluation.hpp"
#include "morl/improvement.hpp"
#include "morl/policy.hpp"
#include "morl/types.hpp"

namespace morl {

struct OptimizerConfig {
  double step_size = 1e-4;
  int max_steps = 500;
  double gradient_tolerance = 1e-7;
  bool plain_gradient = false;  // otherwise adaptive-moment ascent
};

struct ProjectionConfig {
  double beta_mean = 0.0025;
  double beta_cov = 1e-5;
  OptimizerConfig optimizer;
  double dual_step_size = 1e-2;
  // debugging alternative to the Lagrangian multipliers
  bool quadratic_penalty = false;
  double penalty_coeff = 100.0;
};

struct DistillDiagnostics {
  double objective = 0.0;  // final weighted log-likelihood
  double mean_kl = 0.0;
  double cov_kl = 0.0;
  double mean_dual = 0.0;
  double cov_dual = 0.0;
  int steps = 0;
};

struct DistillResult {
  GaussianPolicy policy;
  DistillDiagnostics diagnostics;
};

/// M-step: fit a new policy to the experts by maximizing the trade-off-weighted
/// log-likelihood under the decoupled mean/covariance trust region against the
/// iterate (Lagrangian relaxation with projected multiplier ascent).
DistillResult distill(const ExpertWeights& experts, const TradeOff& tradeoff,
                      const GaussianPolicy& iterate, const ProjectionConfig& config);

/// One expert block of conditioned training: the trade-off it was built with,
/// the actions sampled from pi_i(.|alpha), and per-objective weight rows.
struct ConditionedExpertBlock {
  TradeOff tradeoff;
  std::vector<std::vector<double>> actions;          // [N][dim]
  std::vector<std::vector<double>> weights;          // [K][N]
};

/// Fits a single conditioned policy across sampled trade-offs; each block
/// contributes its own alpha both as conditioning input and as the convex
/// distillation weights.
DistillResult distill_conditioned(const std::vector<ConditionedExpertBlock>& blocks,
                                  const GaussianPolicy& iterate,
                                  const ProjectionConfig& config);

// A task the EM loop can run on: exact per-objective evaluation given the
// current per-state policy iterate.
class EmTask {
 public:
  virtual ~EmTask() = default;
  virtual int num_objectives() const = 0;
  virtual int num_states() const = 0;
  virtual int action_dim() const = 0;
  virtual std::vector<ObjectiveEvaluator> evaluators(
      const std::vector<GaussianPolicy>& iterate) const = 0;
};

/// Bandit task; per-objective reward scales support the scale-invariance
/// experiments.
class BanditEmTask : public EmTask {
 public:
  explicit BanditEmTask(BanditTask task, std::array<double, 2> scales = {1.0, 1.0})
      : task_(task), scales_(scales) {}
  int num_objectives() const override { return 2; }
  int num_states() const override { return 1; }
  int action_dim() const override { return 1; }
  std::vector<ObjectiveEvaluator> evaluators(
      const std::vector<GaussianPolicy>&) const override;
  const BanditTask& task() const { return task_; }
  const std::array<double, 2>& scales() const { return scales_; }

 private:
  BanditTask task_;
  std::array<double, 2> scales_;
};

/// Chain MDP; the Gaussian iterate is discretized onto the action grid for the
/// exact tabular solve.
class ChainEmTask : public EmTask {
 public:
  explicit ChainEmTask(ChainMDP mdp) : mdp_(std::move(mdp)) {}
  int num_objectives() const override { return 2; }
  int num_states() const override { return mdp_.num_states; }
  int action_dim() const override { return 1; }
  std::vector<ObjectiveEvaluator> evaluators(
      const std::vector<GaussianPolicy>& iterate) const override;
  const ChainMDP& mdp() const { return mdp_; }

 private:
  ChainMDP mdp_;
};

struct EmDiagnostics {
  std::vector<double> expected_q;  // E_pi[Q_k], over the sampled actions
  double weighted_loglik = 0.0;
  std::vector<double> eta;
};

struct EmIterate {
  std::vector<GaussianPolicy> policies;  // one per state
  EmDiagnostics diagnostics;
};

struct EmConfig {
  ImprovementConfig improvement;
  ProjectionConfig projection;
  // MOMPO preference encoding: epsilon_k = mompo_epsilon_scale * alpha_k
  double mompo_epsilon_scale = 0.2;
};

/// Full evaluate / improve / project loop for a fixed trade-off.
std::vector<EmIterate> em_iterate(const EmTask& task, const EmConfig& config,
                                  const TradeOff& tradeoff, int iterations,
                                  RngStream& rng,
                                  const std::vector<GaussianPolicy>& initial);

}  // namespace morl
