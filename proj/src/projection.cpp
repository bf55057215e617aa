#include "morl/projection.hpp"

#include <cmath>
#include <string>

#include "morl/errors.hpp"
#include "morl/optim.hpp"

namespace morl {
namespace {

// One state's (or one sampled trade-off's) share of the distillation target:
// actions with their convex-combined weights, and the conditioning they were
// sampled under.
struct WeightedBlock {
  std::optional<TradeOff> cond;
  const std::vector<std::vector<double>>* actions;
  std::vector<double> u;  // per-sample weights, summing to 1
};

struct KlGrads {
  KlParts parts;
  std::vector<double> d_mean;     // wrt theta mean params
  std::vector<double> d_log_std;  // wrt theta log-std params
};

// Average over block conditionings of the decoupled KL(iterate || theta) and
// its parameter gradients.
KlGrads kl_and_grads(const GaussianPolicy& iterate, const GaussianPolicy& theta,
                     const std::vector<WeightedBlock>& blocks) {
  const int dim = theta.action_dim();
  const int f = theta.num_features();
  KlGrads out;
  out.d_mean.assign(theta.mean_params().size(), 0.0);
  out.d_log_std.assign(theta.log_std_params().size(), 0.0);
  for (const auto& block : blocks) {
    const auto phi = feature_vector(theta.feature_map_id(), block.cond);
    const auto mu_p = iterate.mean(block.cond);
    const auto ls_p = iterate.log_std(block.cond);
    const auto mu_q = theta.mean(block.cond);
    const auto ls_q = theta.log_std(block.cond);
    for (int d = 0; d < dim; ++d) {
      const double inv_var_q = std::exp(-2.0 * ls_q[d]);
      const double dmu = mu_p[d] - mu_q[d];
      out.parts.mean_part += 0.5 * dmu * dmu * inv_var_q;
      out.parts.cov_part +=
          ls_q[d] - ls_p[d] + 0.5 * std::exp(2.0 * ls_p[d]) * inv_var_q - 0.5;
      const double dmean_dmu = -dmu * inv_var_q;              // d mean_part / d mu_q
      const double dmean_dls = -dmu * dmu * inv_var_q;        // d mean_part / d ls_q
      const double dcov_dls = 1.0 - std::exp(2.0 * (ls_p[d] - ls_q[d]));
      for (int j = 0; j < f; ++j) {
        out.d_mean[d * f + j] += dmean_dmu * phi[j];
        out.d_log_std[d * f + j] += (dmean_dls + dcov_dls) * phi[j];
      }
    }
  }
  const double inv_b = 1.0 / blocks.size();
  out.parts.mean_part *= inv_b;
  out.parts.cov_part *= inv_b;
  out.parts.total = out.parts.mean_part + out.parts.cov_part;
  for (auto& v : out.d_mean) v *= inv_b;
  for (auto& v : out.d_log_std) v *= inv_b;
  return out;
}

// The gradient mixes mean_part and cov_part contributions; split by which
// parameter family they act on so the multipliers weight them separately.
struct KlGradSplit {
  KlParts parts;
  std::vector<double> mean_part_d_mean, mean_part_d_log_std, cov_part_d_log_std;
};

KlGradSplit kl_and_grads_split(const GaussianPolicy& iterate,
                               const GaussianPolicy& theta,
                               const std::vector<WeightedBlock>& blocks) {
  const int dim = theta.action_dim();
  const int f = theta.num_features();
  KlGradSplit out;
  out.mean_part_d_mean.assign(theta.mean_params().size(), 0.0);
  out.mean_part_d_log_std.assign(theta.log_std_params().size(), 0.0);
  out.cov_part_d_log_std.assign(theta.log_std_params().size(), 0.0);
  for (const auto& block : blocks) {
    const auto phi = feature_vector(theta.feature_map_id(), block.cond);
    const auto mu_p = iterate.mean(block.cond);
    const auto ls_p = iterate.log_std(block.cond);
    const auto mu_q = theta.mean(block.cond);
    const auto ls_q = theta.log_std(block.cond);
    for (int d = 0; d < dim; ++d) {
      const double inv_var_q = std::exp(-2.0 * ls_q[d]);
      const double dmu = mu_p[d] - mu_q[d];
      out.parts.mean_part += 0.5 * dmu * dmu * inv_var_q;
      out.parts.cov_part +=
          ls_q[d] - ls_p[d] + 0.5 * std::exp(2.0 * ls_p[d]) * inv_var_q - 0.5;
      const double dcov_dls = 1.0 - std::exp(2.0 * (ls_p[d] - ls_q[d]));
      for (int j = 0; j < f; ++j) {
        out.mean_part_d_mean[d * f + j] += -dmu * inv_var_q * phi[j];
        out.mean_part_d_log_std[d * f + j] += -dmu * dmu * inv_var_q * phi[j];
        out.cov_part_d_log_std[d * f + j] += dcov_dls * phi[j];
      }
    }
  }
  const double inv_b = 1.0 / blocks.size();
  out.parts.mean_part *= inv_b;
  out.parts.cov_part *= inv_b;
  out.parts.total = out.parts.mean_part + out.parts.cov_part;
  for (auto& v : out.mean_part_d_mean) v *= inv_b;
  for (auto& v : out.mean_part_d_log_std) v *= inv_b;
  for (auto& v : out.cov_part_d_log_std) v *= inv_b;
  return out;
}

double weighted_loglik(const GaussianPolicy& theta,
                       const std::vector<WeightedBlock>& blocks) {
  double acc = 0.0;
  for (const auto& block : blocks) {
    for (std::size_t j = 0; j < block.u.size(); ++j)
      acc += block.u[j] * theta.log_density(block.cond, (*block.actions)[j]);
  }
  return acc / blocks.size();
}

void loglik_grad(const GaussianPolicy& theta,
                 const std::vector<WeightedBlock>& blocks,
                 std::vector<double>& g_mean, std::vector<double>& g_log_std) {
  const int dim = theta.action_dim();
  const int f = theta.num_features();
  g_mean.assign(theta.mean_params().size(), 0.0);
  g_log_std.assign(theta.log_std_params().size(), 0.0);
  for (const auto& block : blocks) {
    const auto phi = feature_vector(theta.feature_map_id(), block.cond);
    const auto mu = theta.mean(block.cond);
    const auto ls = theta.log_std(block.cond);
    for (std::size_t j = 0; j < block.u.size(); ++j) {
      const auto& a = (*block.actions)[j];
      for (int d = 0; d < dim; ++d) {
        const double inv_var = std::exp(-2.0 * ls[d]);
        const double diff = a[d] - mu[d];
        const double dmu = diff * inv_var;
        const double dls = diff * diff * inv_var - 1.0;
        for (int p = 0; p < f; ++p) {
          g_mean[d * f + p] += block.u[j] * dmu * phi[p];
          g_log_std[d * f + p] += block.u[j] * dls * phi[p];
        }
      }
    }
  }
  const double inv_b = 1.0 / blocks.size();
  for (auto& v : g_mean) v *= inv_b;
  for (auto& v : g_log_std) v *= inv_b;
}

// Shrink the parameter deltas back toward the iterate until the decoupled
// trust region holds. The covariance delta is scaled first (cov_part is
// monotone in that scale); the mean delta then admits an exact quadratic scale.
void enforce_trust_region(const GaussianPolicy& iterate, GaussianPolicy& theta,
                          const std::vector<WeightedBlock>& blocks,
                          const ProjectionConfig& config) {
  auto parts = kl_and_grads(iterate, theta, blocks).parts;
  if (parts.cov_part > config.beta_cov) {
    std::vector<double> delta(theta.log_std_params().size());
    for (std::size_t i = 0; i < delta.size(); ++i)
      delta[i] = theta.log_std_params()[i] - iterate.log_std_params()[i];
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double t = 0.5 * (lo + hi);
      for (std::size_t i = 0; i < delta.size(); ++i)
        theta.log_std_params()[i] = iterate.log_std_params()[i] + t * delta[i];
      const auto p = kl_and_grads(iterate, theta, blocks).parts;
      if (p.cov_part > config.beta_cov)
        hi = t;
      else
        lo = t;
    }
    for (std::size_t i = 0; i < delta.size(); ++i)
      theta.log_std_params()[i] = iterate.log_std_params()[i] + lo * delta[i];
    parts = kl_and_grads(iterate, theta, blocks).parts;
  }
  if (parts.mean_part > config.beta_mean) {
    const double t = std::sqrt(config.beta_mean / parts.mean_part);
    for (std::size_t i = 0; i < theta.mean_params().size(); ++i) {
      const double base = iterate.mean_params()[i];
      theta.mean_params()[i] = base + t * (theta.mean_params()[i] - base);
    }
  }
}

DistillResult distill_blocks(const std::vector<WeightedBlock>& blocks,
                             const GaussianPolicy& iterate,
                             const ProjectionConfig& config) {
  GaussianPolicy theta = iterate;
  AdamState adam_mean(theta.mean_params().size());
  AdamState adam_ls(theta.log_std_params().size());
  double dual_mean = 0.0, dual_cov = 0.0;
  std::vector<double> g_mean, g_ls;
  int steps = 0;
  for (; steps < config.optimizer.max_steps; ++steps) {
    loglik_grad(theta, blocks, g_mean, g_ls);
    const auto kl = kl_and_grads_split(iterate, theta, blocks);
    if (config.quadratic_penalty) {
      const double pm = std::max(0.0, kl.parts.mean_part - config.beta_mean);
      const double pc = std::max(0.0, kl.parts.cov_part - config.beta_cov);
      for (std::size_t i = 0; i < g_mean.size(); ++i)
        g_mean[i] -= config.penalty_coeff * pm * kl.mean_part_d_mean[i];
      for (std::size_t i = 0; i < g_ls.size(); ++i)
        g_ls[i] -= config.penalty_coeff *
                   (pm * kl.mean_part_d_log_std[i] + pc * kl.cov_part_d_log_std[i]);
    } else {
      for (std::size_t i = 0; i < g_mean.size(); ++i)
        g_mean[i] -= dual_mean * kl.mean_part_d_mean[i];
      for (std::size_t i = 0; i < g_ls.size(); ++i)
        g_ls[i] -= dual_mean * kl.mean_part_d_log_std[i] +
                   dual_cov * kl.cov_part_d_log_std[i];
    }
    double norm2 = 0.0;
    for (double v : g_mean) norm2 += v * v;
    for (double v : g_ls) norm2 += v * v;
    if (!std::isfinite(norm2))
      throw NumericalFailure("non-finite gradient in distillation");
    if (std::sqrt(norm2) < config.optimizer.gradient_tolerance) break;

    if (config.optimizer.plain_gradient) {
      for (std::size_t i = 0; i < g_mean.size(); ++i)
        theta.mean_params()[i] += config.optimizer.step_size * g_mean[i];
      for (std::size_t i = 0; i < g_ls.size(); ++i)
        theta.log_std_params()[i] += config.optimizer.step_size * g_ls[i];
    } else {
      adam_mean.ascend(theta.mean_params(), g_mean, config.optimizer.step_size);
      adam_ls.ascend(theta.log_std_params(), g_ls, config.optimizer.step_size);
    }
    if (!config.quadratic_penalty) {
      dual_mean = std::max(
          0.0, dual_mean + config.dual_step_size *
                               (kl.parts.mean_part - config.beta_mean));
      dual_cov = std::max(0.0, dual_cov + config.dual_step_size *
                                              (kl.parts.cov_part - config.beta_cov));
    }
  }
  enforce_trust_region(iterate, theta, blocks, config);

  DistillResult out{std::move(theta), {}};
  const auto final_kl = kl_and_grads(iterate, out.policy, blocks).parts;
  out.diagnostics.objective = weighted_loglik(out.policy, blocks);
  out.diagnostics.mean_kl = final_kl.mean_part;
  out.diagnostics.cov_kl = final_kl.cov_part;
  out.diagnostics.mean_dual = dual_mean;
  out.diagnostics.cov_dual = dual_cov;
  out.diagnostics.steps = steps;
  return out;
}

std::vector<double> combine_weights(
    const std::vector<std::vector<std::vector<double>>>& weights,
    const std::vector<double>& alpha, std::size_t state) {
  const std::size_t n = weights[0][state].size();
  std::vector<double> u(n, 0.0);
  for (std::size_t k = 0; k < weights.size(); ++k)
    for (std::size_t j = 0; j < n; ++j) u[j] += alpha[k] * weights[k][state][j];
  return u;
}

}  // namespace

DistillResult distill(const ExpertWeights& experts, const TradeOff& tradeoff,
                      const GaussianPolicy& iterate,
                      const ProjectionConfig& config) {
  if (tradeoff.size() != experts.num_objectives())
    throw ContractViolation("trade-off length does not match expert objectives");
  std::vector<WeightedBlock> blocks;
  blocks.reserve(experts.num_states());
  for (std::size_t s = 0; s < experts.num_states(); ++s) {
    WeightedBlock b;
    b.cond = std::nullopt;
    b.actions = &experts.actions[s];
    b.u = combine_weights(experts.weights, tradeoff.weights(), s);
    blocks.push_back(std::move(b));
  }
  return distill_blocks(blocks, iterate, config);
}

DistillResult distill_conditioned(const std::vector<ConditionedExpertBlock>& blocks,
                                  const GaussianPolicy& iterate,
                                  const ProjectionConfig& config) {
  if (blocks.empty()) throw ContractViolation("no expert blocks to distill");
  std::vector<WeightedBlock> wb;
  wb.reserve(blocks.size());
  for (const auto& block : blocks) {
    if (block.weights.size() != block.tradeoff.size())
      throw ContractViolation("block objective count does not match trade-off");
    WeightedBlock b;
    b.cond = block.tradeoff;
    b.actions = &block.actions;
    b.u.assign(block.actions.size(), 0.0);
    for (std::size_t k = 0; k < block.weights.size(); ++k)
      for (std::size_t j = 0; j < b.u.size(); ++j)
        b.u[j] += block.tradeoff[k] * block.weights[k][j];
    wb.push_back(std::move(b));
  }
  return distill_blocks(wb, iterate, config);
}

std::vector<ObjectiveEvaluator> BanditEmTask::evaluators(
    const std::vector<GaussianPolicy>&) const {
  std::vector<ObjectiveEvaluator> out;
  for (int k = 0; k < 2; ++k) {
    auto eval = ObjectiveEvaluator::bandit(task_, k);
    if (scales_[k] != 1.0)
      eval = ObjectiveEvaluator::scaled(std::move(eval), scales_[k]);
    out.push_back(std::move(eval));
  }
  return out;
}

std::vector<ObjectiveEvaluator> ChainEmTask::evaluators(
    const std::vector<GaussianPolicy>& iterate) const {
  if (static_cast<int>(iterate.size()) != mdp_.num_states)
    throw ContractViolation("need one policy per chain state");
  // discretize each state's Gaussian onto the action grid
  std::vector<std::vector<double>> table(mdp_.num_states);
  for (int s = 0; s < mdp_.num_states; ++s) {
    table[s].resize(mdp_.num_actions());
    double z = 0.0;
    for (int a = 0; a < mdp_.num_actions(); ++a) {
      table[s][a] =
          std::exp(iterate[s].log_density(std::nullopt, {mdp_.action_grid[a]}));
      z += table[s][a];
    }
    for (auto& v : table[s]) v /= z;
  }
  std::vector<ObjectiveEvaluator> out;
  for (int k = 0; k < 2; ++k)
    out.push_back(ObjectiveEvaluator::tabular(mdp_, k, table));
  return out;
}

std::vector<EmIterate> em_iterate(const EmTask& task, const EmConfig& config,
                                  const TradeOff& tradeoff, int iterations,
                                  RngStream& rng,
                                  const std::vector<GaussianPolicy>& initial) {
  if (static_cast<int>(initial.size()) != task.num_states())
    throw ContractViolation("need one initial policy per state");
  if (static_cast<int>(tradeoff.size()) != task.num_objectives())
    throw ContractViolation("trade-off length does not match task objectives");

  const int n = config.improvement.sample_count;
  const int k_count = task.num_objectives();
  std::vector<GaussianPolicy> policies = initial;
  std::vector<EmIterate> history;
  history.reserve(iterations);

  for (int it = 0; it < iterations; ++it) {
    RngStream iter_rng = rng.child("iter-" + std::to_string(it));
    const auto evals = task.evaluators(policies);

    std::vector<std::vector<std::vector<double>>> actions(task.num_states());
    ObjectiveSamples samples;
    samples.q.assign(k_count, std::vector<std::vector<double>>(task.num_states()));
    for (int s = 0; s < task.num_states(); ++s) {
      actions[s] = sample_actions(policies[s], std::nullopt, n, iter_rng);
      for (int k = 0; k < k_count; ++k) {
        samples.q[k][s].resize(n);
        for (int j = 0; j < n; ++j)
          samples.q[k][s][j] = evals[k](s, actions[s][j]);
      }
    }

    ExpertResult experts = [&] {
      switch (config.improvement.mode) {
        case ImprovementMode::DiME:
          return expert_weights_dime(actions, samples, config.improvement,
                                     policies[0]);
        case ImprovementMode::LS:
          return expert_weights_ls(actions, samples, config.improvement, tradeoff,
                                   policies[0]);
        case ImprovementMode::MOMPO: {
          std::vector<double> eps(k_count);
          for (int k = 0; k < k_count; ++k)
            eps[k] = config.mompo_epsilon_scale * tradeoff[k];
          return expert_weights_mompo(actions, samples, config.improvement, eps,
                                      policies[0]);
        }
      }
      throw ContractViolation("unreachable improvement mode");
    }();

    // distillation trade-off: DiME applies alpha here, MOMPO distills
    // uniformly (the preference already shaped the experts), LS weights are
    // identical copies so any convex combination reproduces them
    const TradeOff distill_tradeoff =
        config.improvement.mode == ImprovementMode::MOMPO
            ? TradeOff::of(std::vector<double>(k_count, 1.0 / k_count))
            : tradeoff;

    EmIterate record{policies, {}};
    record.diagnostics.expected_q.assign(k_count, 0.0);
    record.diagnostics.eta = experts.duals.eta;
    double loglik = 0.0;
    for (int s = 0; s < task.num_states(); ++s) {
      ExpertWeights state_experts;
      state_experts.states = {s};
      state_experts.actions = {actions[s]};
      state_experts.weights.resize(k_count);
      for (int k = 0; k < k_count; ++k)
        state_experts.weights[k] = {experts.experts.weights[k][s]};
      state_experts.iterate_id = policies[s].id();
      auto res = distill(state_experts, distill_tradeoff, policies[s],
                         config.projection);
      loglik += res.diagnostics.objective;
      policies[s] = std::move(res.policy);
      for (int k = 0; k < k_count; ++k) {
        double mean_q = 0.0;
        for (int j = 0; j < n; ++j) mean_q += samples.q[k][s][j];
        record.diagnostics.expected_q[k] += mean_q / n;
      }
    }
    record.diagnostics.weighted_loglik = loglik / task.num_states();
    for (auto& v : record.diagnostics.expected_q) v /= task.num_states();
    record.policies = policies;
    history.push_back(std::move(record));
  }
  return history;
}

}  // namespace morl
