#include "morl/behavioral.hpp"

#include <algorithm>

#include "morl/errors.hpp"

namespace morl {
namespace {

// self-normalized exp(exponent) rows with max-subtraction
std::vector<std::vector<double>> normalize_exp_rows(
    const std::vector<std::vector<double>>& exponents) {
  std::vector<std::vector<double>> out(exponents.size());
  for (std::size_t s = 0; s < exponents.size(); ++s) {
    const auto& row = exponents[s];
    if (row.empty()) throw ContractViolation("empty weight row");
    const double m = *std::max_element(row.begin(), row.end());
    out[s].resize(row.size());
    double z = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      out[s][j] = std::exp(row[j] - m);
      z += out[s][j];
    }
    for (auto& w : out[s]) w /= z;
  }
  return out;
}

struct KahanAcc {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

// accumulates weight * grad log pi_theta(a | nullopt) into the result
void add_weighted_grad(const GaussianPolicy& theta, const std::vector<double>& a,
                       double weight, LossResult& out) {
  const auto g = theta.log_density_grad(std::nullopt, a);
  const auto phi = feature_vector(theta.feature_map_id(), std::nullopt);
  const int f = theta.num_features();
  for (int d = 0; d < theta.action_dim(); ++d)
    for (int p = 0; p < f; ++p) {
      out.d_mean[d * f + p] += weight * g.d_mean[d] * phi[p];
      out.d_log_std[d * f + p] += weight * g.d_log_std[d] * phi[p];
    }
}

LossResult make_result(const GaussianPolicy& theta) {
  LossResult out;
  out.d_mean.assign(theta.mean_params().size(), 0.0);
  out.d_log_std.assign(theta.log_std_params().size(), 0.0);
  return out;
}

void check_batch(const TransitionBatch& batch) {
  if (batch.size() == 0) throw ContractViolation("offline batch is empty");
}

std::vector<int> unique_states(const TransitionBatch& batch) {
  std::vector<int> states;
  for (const auto& t : batch.transitions)
    if (std::find(states.begin(), states.end(), t.state) == states.end())
      states.push_back(t.state);
  return states;
}

}  // namespace

std::vector<std::vector<double>> kickstart_weights_ls(
    const std::vector<std::vector<double>>& q_values,
    const std::vector<std::vector<double>>& log_ratios, double alpha, double eta) {
  if (alpha < 0.0 || alpha > 1.0) throw ContractViolation("alpha outside [0,1]");
  if (!(eta > 0.0)) throw ContractViolation("eta must be positive");
  if (q_values.size() != log_ratios.size())
    throw ContractViolation("Q and log-ratio state counts differ");
  std::vector<std::vector<double>> exponents(q_values.size());
  for (std::size_t s = 0; s < q_values.size(); ++s) {
    if (q_values[s].size() != log_ratios[s].size())
      throw ContractViolation("Q and log-ratio sample counts differ");
    exponents[s].resize(q_values[s].size());
    for (std::size_t j = 0; j < q_values[s].size(); ++j)
      exponents[s][j] =
          (1.0 - alpha) * q_values[s][j] / eta + (alpha / eta) * log_ratios[s][j];
  }
  return normalize_exp_rows(exponents);
}

std::vector<std::vector<double>> kickstart_weights_dime(
    const std::vector<std::vector<double>>& q_values,
    const std::vector<std::vector<double>>& log_ratios, double alpha, double eta1,
    double eta2) {
  if (alpha < 0.0 || alpha > 1.0) throw ContractViolation("alpha outside [0,1]");
  if (!(eta1 > 0.0) || !(eta2 > 0.0))
    throw ContractViolation("temperatures must be positive");
  if (q_values.size() != log_ratios.size())
    throw ContractViolation("Q and log-ratio state counts differ");
  std::vector<std::vector<double>> q_exp(q_values.size()),
      r_exp(q_values.size());
  for (std::size_t s = 0; s < q_values.size(); ++s) {
    if (q_values[s].size() != log_ratios[s].size())
      throw ContractViolation("Q and log-ratio sample counts differ");
    q_exp[s].resize(q_values[s].size());
    r_exp[s].resize(q_values[s].size());
    for (std::size_t j = 0; j < q_values[s].size(); ++j) {
      q_exp[s][j] = q_values[s][j] / eta1;
      r_exp[s][j] = log_ratios[s][j] / eta2;
    }
  }
  const auto task_w = normalize_exp_rows(q_exp);
  const auto prior_w = normalize_exp_rows(r_exp);
  std::vector<std::vector<double>> out(q_values.size());
  for (std::size_t s = 0; s < q_values.size(); ++s) {
    out[s].resize(task_w[s].size());
    for (std::size_t j = 0; j < out[s].size(); ++j)
      out[s][j] = (1.0 - alpha) * task_w[s][j] + alpha * prior_w[s][j];
  }
  return out;
}

LossResult offline_loss_ls_crr(const TransitionBatch& batch,
                               const ObjectiveEvaluator& q_eval,
                               const std::vector<double>& v_estimate, double beta,
                               const GaussianPolicy& theta) {
  check_batch(batch);
  if (!(beta > 0.0))
    throw ContractViolation("beta must be positive (use BC for beta = 0)");
  LossResult out = make_result(theta);
  KahanAcc acc;
  for (const auto& t : batch.transitions) {
    if (t.state < 0 || t.state >= static_cast<int>(v_estimate.size()))
      throw ContractViolation("transition state outside value estimate");
    const double advantage = q_eval(t.state, t.action) - v_estimate[t.state];
    double exponent = advantage / beta;
    if (exponent > kExpClip) {
      exponent = kExpClip;
      ++out.clip_count;
    }
    const double w = std::exp(exponent);
    acc.add(w * theta.log_density(std::nullopt, t.action));
    add_weighted_grad(theta, t.action, w, out);
  }
  const double inv_b = 1.0 / batch.size();
  out.loss = -acc.sum * inv_b;
  for (auto& v : out.d_mean) v *= -inv_b;
  for (auto& v : out.d_log_std) v *= -inv_b;
  return out;
}

LossResult offline_loss_dime(const TransitionBatch& batch,
                             const GaussianPolicy& iterate,
                             const ObjectiveEvaluator& q_eval, double alpha,
                             double eta, int sample_count,
                             const GaussianPolicy& theta, RngStream& rng) {
  check_batch(batch);
  if (alpha < 0.0 || alpha > 1.0) throw ContractViolation("alpha outside [0,1]");
  if (sample_count < 2) throw ContractViolation("need at least 2 policy samples");
  if (!(eta > 0.0)) throw ContractViolation("eta must be positive");
  LossResult out = make_result(theta);

  // distillation term: exp(Q/eta) experts over fresh samples from the iterate
  const auto states = unique_states(batch);
  KahanAcc distill_acc;
  if (alpha < 1.0) {
    for (int s : states) {
      const auto actions = sample_actions(iterate, std::nullopt, sample_count, rng);
      std::vector<std::vector<double>> exponents(1);
      exponents[0].resize(sample_count);
      for (int j = 0; j < sample_count; ++j)
        exponents[0][j] = q_eval(s, actions[j]) / eta;
      const auto w = normalize_exp_rows(exponents);
      for (int j = 0; j < sample_count; ++j) {
        const double c = (1.0 - alpha) * w[0][j] / states.size();
        distill_acc.add(c * theta.log_density(std::nullopt, actions[j]));
        add_weighted_grad(theta, actions[j], c, out);
      }
    }
  }

  // behavioral-cloning term on the batch
  KahanAcc bc_acc;
  if (alpha > 0.0) {
    const double c = alpha / batch.size();
    for (const auto& t : batch.transitions) {
      bc_acc.add(c * theta.log_density(std::nullopt, t.action));
      add_weighted_grad(theta, t.action, c, out);
    }
  }

  out.loss = -(distill_acc.sum + bc_acc.sum);
  for (auto& v : out.d_mean) v = -v;
  for (auto& v : out.d_log_std) v = -v;
  return out;
}

LossResult offline_loss_awbc(const TransitionBatch& batch,
                             const ObjectiveEvaluator& q_eval,
                             const std::vector<double>& v_estimate, double alpha,
                             double eta, const GaussianPolicy& iterate,
                             int sample_count, const GaussianPolicy& theta,
                             RngStream& rng) {
  check_batch(batch);
  if (alpha < 0.0 || alpha > 1.0) throw ContractViolation("alpha outside [0,1]");
  if (sample_count < 2) throw ContractViolation("need at least 2 policy samples");
  if (!(eta > 0.0)) throw ContractViolation("eta must be positive");
  LossResult out = make_result(theta);

  const auto states = unique_states(batch);
  KahanAcc distill_acc;
  if (alpha < 1.0) {
    for (int s : states) {
      const auto actions = sample_actions(iterate, std::nullopt, sample_count, rng);
      std::vector<std::vector<double>> exponents(1);
      exponents[0].resize(sample_count);
      for (int j = 0; j < sample_count; ++j)
        exponents[0][j] = q_eval(s, actions[j]) / eta;
      const auto w = normalize_exp_rows(exponents);
      for (int j = 0; j < sample_count; ++j) {
        const double c = (1.0 - alpha) * w[0][j] / states.size();
        distill_acc.add(c * theta.log_density(std::nullopt, actions[j]));
        add_weighted_grad(theta, actions[j], c, out);
      }
    }
  }

  // advantage-weighted BC at temperature 1
  KahanAcc bc_acc;
  if (alpha > 0.0) {
    const double c = alpha / batch.size();
    for (const auto& t : batch.transitions) {
      if (t.state < 0 || t.state >= static_cast<int>(v_estimate.size()))
        throw ContractViolation("transition state outside value estimate");
      double exponent = q_eval(t.state, t.action) - v_estimate[t.state];
      if (exponent > kExpClip) {
        exponent = kExpClip;
        ++out.clip_count;
      }
      const double w = c * std::exp(exponent);
      bc_acc.add(w * theta.log_density(std::nullopt, t.action));
      add_weighted_grad(theta, t.action, w, out);
    }
  }

  out.loss = -(distill_acc.sum + bc_acc.sum);
  for (auto& v : out.d_mean) v = -v;
  for (auto& v : out.d_log_std) v = -v;
  return out;
}

KickstartConfig update_learned_tradeoff(const KickstartConfig& config,
                                        double mean_q) {
  if (!config.learned) throw ContractViolation("trade-off is not in learned mode");
  KickstartConfig out = config;
  const double s = sigmoid(config.x);
  out.x = config.x - config.step_size * s * (1.0 - s) * (mean_q - config.threshold_c);
  return out;
}

}  // namespace morl
