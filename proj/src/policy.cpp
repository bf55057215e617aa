#include "morl/policy.hpp"

#include <cmath>

#include "morl/errors.hpp"

namespace morl {

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)
}

std::vector<double> feature_vector(FeatureMapId id,
                                   const std::optional<TradeOff>& conditioning) {
  if (id == FeatureMapId::Constant1) return {1.0};
  if (!conditioning)
    throw ContractViolation("conditioned policy evaluated without a trade-off");
  const double a = conditioning->alpha();
  return {1.0, a, a * a, a * a * a};
}

GaussianPolicy::GaussianPolicy(int action_dim, FeatureMapId features)
    : action_dim_(action_dim),
      features_(features),
      mean_w_(static_cast<std::size_t>(action_dim) * feature_count(features), 0.0),
      log_std_w_(static_cast<std::size_t>(action_dim) * feature_count(features),
                 0.0) {}

GaussianPolicy GaussianPolicy::bandit(std::vector<double> mean,
                                      std::vector<double> log_std) {
  if (mean.size() != log_std.size() || mean.empty())
    throw ContractViolation("mean and log_std must have equal, positive length");
  GaussianPolicy p(static_cast<int>(mean.size()), FeatureMapId::Constant1);
  p.mean_w_ = std::move(mean);
  p.log_std_w_ = std::move(log_std);
  return p;
}

GaussianPolicy GaussianPolicy::conditioned(int action_dim, double init_log_std) {
  if (action_dim < 1) throw ContractViolation("action_dim must be >= 1");
  GaussianPolicy p(action_dim, FeatureMapId::CubicTradeoff);
  // constant feature carries the initial log-std
  for (int d = 0; d < action_dim; ++d)
    p.log_std_w_[static_cast<std::size_t>(d) * 4] = init_log_std;
  return p;
}

std::vector<double> GaussianPolicy::mean(
    const std::optional<TradeOff>& conditioning) const {
  const auto phi = feature_vector(features_, conditioning);
  const int f = num_features();
  std::vector<double> out(action_dim_, 0.0);
  for (int d = 0; d < action_dim_; ++d)
    for (int j = 0; j < f; ++j) out[d] += mean_w_[d * f + j] * phi[j];
  return out;
}

std::vector<double> GaussianPolicy::log_std(
    const std::optional<TradeOff>& conditioning) const {
  const auto phi = feature_vector(features_, conditioning);
  const int f = num_features();
  std::vector<double> out(action_dim_, 0.0);
  for (int d = 0; d < action_dim_; ++d)
    for (int j = 0; j < f; ++j) out[d] += log_std_w_[d * f + j] * phi[j];
  return out;
}

double GaussianPolicy::log_density(const std::optional<TradeOff>& conditioning,
                                   const std::vector<double>& action) const {
  if (static_cast<int>(action.size()) != action_dim_)
    throw ContractViolation("action dimension mismatch in log_density");
  const auto mu = mean(conditioning);
  const auto ls = log_std(conditioning);
  double out = 0.0;
  for (int d = 0; d < action_dim_; ++d) {
    const double z = (action[d] - mu[d]) * std::exp(-ls[d]);
    out += -0.5 * z * z - ls[d] - kHalfLog2Pi;
  }
  return out;
}

LogDensityGrad GaussianPolicy::log_density_grad(
    const std::optional<TradeOff>& conditioning,
    const std::vector<double>& action) const {
  if (static_cast<int>(action.size()) != action_dim_)
    throw ContractViolation("action dimension mismatch in log_density_grad");
  const auto mu = mean(conditioning);
  const auto ls = log_std(conditioning);
  LogDensityGrad g;
  g.d_mean.resize(action_dim_);
  g.d_log_std.resize(action_dim_);
  for (int d = 0; d < action_dim_; ++d) {
    const double inv_var = std::exp(-2.0 * ls[d]);
    const double diff = action[d] - mu[d];
    g.d_mean[d] = diff * inv_var;
    g.d_log_std[d] = diff * diff * inv_var - 1.0;
  }
  return g;
}

KlParts kl_gaussian(const GaussianPolicy& p, const GaussianPolicy& q,
                    const std::optional<TradeOff>& conditioning) {
  if (p.action_dim() != q.action_dim())
    throw ContractViolation("KL between policies of different dimension");
  const auto mu_p = p.mean(conditioning), mu_q = q.mean(conditioning);
  const auto ls_p = p.log_std(conditioning), ls_q = q.log_std(conditioning);
  KlParts out;
  for (int d = 0; d < p.action_dim(); ++d) {
    const double var_p = std::exp(2.0 * ls_p[d]);
    const double inv_var_q = std::exp(-2.0 * ls_q[d]);
    const double dmu = mu_p[d] - mu_q[d];
    out.mean_part += 0.5 * dmu * dmu * inv_var_q;
    out.cov_part += ls_q[d] - ls_p[d] + 0.5 * var_p * inv_var_q - 0.5;
  }
  out.total = out.mean_part + out.cov_part;
  return out;
}

std::vector<std::vector<double>> sample_actions(
    const GaussianPolicy& policy, const std::optional<TradeOff>& conditioning,
    int count, RngStream& rng) {
  if (count < 1) throw ContractViolation("sample count must be >= 1");
  const auto mu = policy.mean(conditioning);
  const auto ls = policy.log_std(conditioning);
  std::vector<std::vector<double>> out(count);
  for (auto& a : out) {
    a.resize(policy.action_dim());
    for (int d = 0; d < policy.action_dim(); ++d)
      a[d] = mu[d] + std::exp(ls[d]) * rng.normal();
  }
  return out;
}

}  // namespace morl
