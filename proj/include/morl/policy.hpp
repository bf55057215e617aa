#pragma once

#include <optional>
#include <string>
#include <vector>

#include "morl/rng.hpp"
#include "morl/tradeoff.hpp"

namespace morl {

/// Conditioning feature map of a policy. Unconditioned bandit policies use a
/// constant-1 feature; trade-off-conditioned policies use a cubic polynomial
/// basis in the leading trade-off weight.
enum class FeatureMapId { Constant1, CubicTradeoff };

inline int feature_count(FeatureMapId id) {
  return id == FeatureMapId::Constant1 ? 1 : 4;
}

/// Features for a conditioning input; [1] or [1, a, a^2, a^3].
std::vector<double> feature_vector(FeatureMapId id,
                                   const std::optional<TradeOff>& conditioning);

struct LogDensityGrad {
  // per action dimension
  std::vector<double> d_mean;
  std::vector<double> d_log_std;
};

struct KlParts {
  double mean_part = 0.0;
  double cov_part = 0.0;
  double total = 0.0;
};

// Diagonal Gaussian policy. Mean and log-std per action dimension are linear
// in the conditioning features; log-std is the stored quantity so the standard
// deviation is positive by representation.
class GaussianPolicy {
 public:
  static GaussianPolicy bandit(std::vector<double> mean,
                               std::vector<double> log_std);
  static GaussianPolicy conditioned(int action_dim, double init_log_std = 0.0);

  int action_dim() const { return action_dim_; }
  FeatureMapId feature_map_id() const { return features_; }
  int num_features() const { return feature_count(features_); }

  /// Per-dimension mean for the given conditioning.
  std::vector<double> mean(const std::optional<TradeOff>& conditioning = {}) const;
  /// Per-dimension log standard deviation.
  std::vector<double> log_std(const std::optional<TradeOff>& conditioning = {}) const;

  double log_density(const std::optional<TradeOff>& conditioning,
                     const std::vector<double>& action) const;

  /// d/d mu_d and d/d log sigma_d of log_density. The chain rule through the
  /// feature map is the outer product with feature_vector (see param_grad).
  LogDensityGrad log_density_grad(const std::optional<TradeOff>& conditioning,
                                  const std::vector<double>& action) const;

  // Parameter storage, row-major [action_dim x num_features]. Exposed for the
  // distillation optimizer and finite-difference tests.
  std::vector<double>& mean_params() { return mean_w_; }
  std::vector<double>& log_std_params() { return log_std_w_; }
  const std::vector<double>& mean_params() const { return mean_w_; }
  const std::vector<double>& log_std_params() const { return log_std_w_; }

  const std::string& id() const { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }

 private:
  GaussianPolicy(int action_dim, FeatureMapId features);
  int action_dim_;
  FeatureMapId features_;
  std::vector<double> mean_w_;
  std::vector<double> log_std_w_;
  std::string id_;
};

/// Closed-form diagonal-Gaussian KL(p || q), split into the mean-difference
/// term (under q's covariance) and the covariance term.
KlParts kl_gaussian(const GaussianPolicy& p, const GaussianPolicy& q,
                    const std::optional<TradeOff>& conditioning = {});

/// i.i.d. action draws; deterministic given the stream.
std::vector<std::vector<double>> sample_actions(
    const GaussianPolicy& policy, const std::optional<TradeOff>& conditioning,
    int count, RngStream& rng);

}  // namespace morl
