#include "morl/improvement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "morl/errors.hpp"

namespace morl {
namespace {

void check_samples(const std::vector<std::vector<double>>& q_values) {
  if (q_values.empty()) throw ContractViolation("no states in temperature solve");
  for (const auto& row : q_values) {
    if (row.size() < 2)
      throw ContractViolation("temperature solve needs >= 2 samples per state");
    for (double v : row)
      if (!std::isfinite(v))
        throw ContractViolation("non-finite Q value in temperature solve");
  }
}

bool all_constant(const std::vector<std::vector<double>>& q_values) {
  for (const auto& row : q_values) {
    const double first = row.front();
    for (double v : row)
      if (std::abs(v - first) > 1e-15) return false;
  }
  return true;
}

// eta * (eps + mean_s log mean_j exp(Q_sj / eta)), max-subtracted per state.
double dual_value(const std::vector<std::vector<double>>& q_values, double eps,
                  double eta) {
  double acc = 0.0;
  for (const auto& row : q_values) {
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp((v - mx) / eta);
    acc += mx / eta + std::log(s / row.size());
  }
  return eta * (eps + acc / q_values.size());
}

}  // namespace

std::vector<std::vector<double>> softmax_weights(
    const std::vector<std::vector<double>>& q_values, double eta) {
  std::vector<std::vector<double>> w(q_values.size());
  for (std::size_t s = 0; s < q_values.size(); ++s) {
    const auto& row = q_values[s];
    const double mx = *std::max_element(row.begin(), row.end());
    w[s].resize(row.size());
    double z = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      w[s][j] = std::exp((row[j] - mx) / eta);
      z += w[s][j];
    }
    for (auto& v : w[s]) v /= z;
  }
  return w;
}

double empirical_kl(const std::vector<std::vector<double>>& weights) {
  double acc = 0.0;
  for (const auto& row : weights) {
    const double n = static_cast<double>(row.size());
    double kl = 0.0;
    for (double v : row)
      if (v > 0.0) kl += v * std::log(n * v);
    acc += kl;
  }
  return acc / weights.size();
}

TemperatureResult solve_temperature(const std::vector<std::vector<double>>& q_values,
                                    double epsilon, double eta_lo, double eta_hi,
                                    double tol) {
  check_samples(q_values);
  if (!(epsilon > 0.0)) throw ContractViolation("epsilon must be > 0");

  if (all_constant(q_values)) {
    // any eta is optimal; return the most conservative in-bounds one
    return {eta_hi, 0.0};
  }

  // golden-section search on t = log eta; the dual is convex in eta
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(eta_lo), b = std::log(eta_hi);
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = dual_value(q_values, epsilon, std::exp(c));
  double fd = dual_value(q_values, epsilon, std::exp(d));
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = dual_value(q_values, epsilon, std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = dual_value(q_values, epsilon, std::exp(d));
    }
  }
  const double eta = std::exp(0.5 * (a + b));
  const auto w = softmax_weights(q_values, eta);
  return {eta, empirical_kl(w)};
}

namespace {

ExpertResult assemble(const std::vector<std::vector<std::vector<double>>>& actions,
                      std::vector<std::vector<std::vector<double>>> weights,
                      std::vector<double> eta, std::vector<double> bounds,
                      const GaussianPolicy& iterate) {
  ExpertResult out;
  out.experts.actions = actions;
  out.experts.states.resize(actions.size());
  for (std::size_t s = 0; s < actions.size(); ++s)
    out.experts.states[s] = static_cast<int>(s);
  out.experts.weights = std::move(weights);
  out.experts.iterate_id = iterate.id();
  out.duals.eta = std::move(eta);
  out.duals.kl_bounds = std::move(bounds);
  return out;
}

}  // namespace

ExpertResult expert_weights_dime(
    const std::vector<std::vector<std::vector<double>>>& actions,
    const ObjectiveSamples& samples, const ImprovementConfig& config,
    const GaussianPolicy& iterate) {
  const std::size_t k_count = samples.num_objectives();
  std::vector<std::vector<std::vector<double>>> weights(k_count);
  std::vector<double> eta(k_count), bounds(k_count, config.epsilon);
  for (std::size_t k = 0; k < k_count; ++k) {
    const auto res = solve_temperature(samples.q[k], config.epsilon,
                                       config.eta_lo, config.eta_hi,
                                       config.eta_tolerance);
    eta[k] = res.eta;
    weights[k] = softmax_weights(samples.q[k], res.eta);
  }
  return assemble(actions, std::move(weights), std::move(eta), std::move(bounds),
                  iterate);
}

ExpertResult expert_weights_ls(
    const std::vector<std::vector<std::vector<double>>>& actions,
    const ObjectiveSamples& samples, const ImprovementConfig& config,
    const TradeOff& tradeoff, const GaussianPolicy& iterate) {
  const std::size_t k_count = samples.num_objectives();
  if (tradeoff.size() != k_count)
    throw ContractViolation("trade-off length does not match objective count");
  // scalarize: Qbar = sum_k alpha_k Q_k
  std::vector<std::vector<double>> scalarized(samples.num_states());
  for (std::size_t s = 0; s < samples.num_states(); ++s) {
    scalarized[s].assign(samples.q[0][s].size(), 0.0);
    for (std::size_t k = 0; k < k_count; ++k)
      for (std::size_t j = 0; j < scalarized[s].size(); ++j)
        scalarized[s][j] += tradeoff[k] * samples.q[k][s][j];
  }
  const auto res = solve_temperature(scalarized, config.epsilon, config.eta_lo,
                                     config.eta_hi, config.eta_tolerance);
  auto w = softmax_weights(scalarized, res.eta);
  std::vector<std::vector<std::vector<double>>> weights(k_count, w);
  return assemble(actions, std::move(weights),
                  std::vector<double>(k_count, res.eta),
                  std::vector<double>(k_count, config.epsilon), iterate);
}

ExpertResult expert_weights_mompo(
    const std::vector<std::vector<std::vector<double>>>& actions,
    const ObjectiveSamples& samples, const ImprovementConfig& config,
    const std::vector<double>& epsilon_per_objective,
    const GaussianPolicy& iterate) {
  const std::size_t k_count = samples.num_objectives();
  if (epsilon_per_objective.size() != k_count)
    throw ContractViolation("epsilon vector length does not match objectives");
  std::vector<std::vector<std::vector<double>>> weights(k_count);
  std::vector<double> eta(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double eps = epsilon_per_objective[k];
    if (eps < 0.0) throw ContractViolation("epsilon_k must be >= 0");
    if (eps == 0.0) {
      // zero divergence allowed: weights stay uniform
      eta[k] = config.eta_hi;
      weights[k].resize(samples.num_states());
      for (std::size_t s = 0; s < samples.num_states(); ++s)
        weights[k][s].assign(samples.q[k][s].size(),
                             1.0 / samples.q[k][s].size());
      continue;
    }
    const auto res = solve_temperature(samples.q[k], eps, config.eta_lo,
                                       config.eta_hi, config.eta_tolerance);
    eta[k] = res.eta;
    weights[k] = softmax_weights(samples.q[k], res.eta);
  }
  return assemble(actions, std::move(weights), std::move(eta),
                  epsilon_per_objective, iterate);
}

}  // namespace morl
