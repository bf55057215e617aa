#pragma once

#include <vector>

#include "morl/policy.hpp"
#include "morl/tradeoff.hpp"
#include "morl/types.hpp"

namespace morl {

enum class ImprovementMode { DiME, LS, MOMPO };

struct ImprovementConfig {
  ImprovementMode mode = ImprovementMode::DiME;
  // DiME: one bound per objective (all equal by default). LS: single scalar
  // bound on the scalarized objective. MOMPO: per-objective bounds encode the
  // preference and are passed in separately.
  double epsilon = 0.1;
  int sample_count = 30;
  double eta_lo = 1e-6;
  double eta_hi = 1e6;
  double eta_tolerance = 1e-8;
};

struct TemperatureResult {
  double eta = 0.0;
  double achieved_kl = 0.0;
};

/// Sample-based dual of the KL-constrained improvement for one objective:
/// minimizes eta * (eps + mean_s log mean_j exp(Q_sj / eta)) by golden-section
/// search on log eta. The empirical KL reported is the mean over states of the
/// divergence of the softmax weights from uniform-over-samples. Constant Q
/// (constraint slack for every eta) returns the upper bound with zero KL.
TemperatureResult solve_temperature(const std::vector<std::vector<double>>& q_values,
                                    double epsilon, double eta_lo, double eta_hi,
                                    double tol);

/// Per-state softmax(Q / eta) rows; each row sums to 1.
std::vector<std::vector<double>> softmax_weights(
    const std::vector<std::vector<double>>& q_values, double eta);

/// Mean over states of KL between weight rows and the uniform distribution
/// over samples; the sample-based estimate of KL(q_k || pi_i).
double empirical_kl(const std::vector<std::vector<double>>& weights);

struct ExpertResult {
  ExpertWeights experts;
  DualVariables duals;
};

/// DiME E-step: an independent temperature solve and weight matrix per
/// objective. Trade-offs are not applied here.
ExpertResult expert_weights_dime(
    const std::vector<std::vector<std::vector<double>>>& actions,
    const ObjectiveSamples& samples, const ImprovementConfig& config,
    const GaussianPolicy& iterate);

/// Linear-scalarization E-step: a single temperature solve on the scalarized
/// values. The one weight matrix is stored as K identical copies.
ExpertResult expert_weights_ls(
    const std::vector<std::vector<std::vector<double>>>& actions,
    const ObjectiveSamples& samples, const ImprovementConfig& config,
    const TradeOff& tradeoff, const GaussianPolicy& iterate);

/// MO-MPO-style E-step: objective-specific KL bounds encode the preference.
/// epsilon_k == 0 forces uniform weights for that objective.
ExpertResult expert_weights_mompo(
    const std::vector<std::vector<std::vector<double>>>& actions,
    const ObjectiveSamples& samples, const ImprovementConfig& config,
    const std::vector<double>& epsilon_per_objective,
    const GaussianPolicy& iterate);

}  // namespace morl
