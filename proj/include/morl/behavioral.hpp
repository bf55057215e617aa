#pragma once

#include <cmath>
#include <vector>

#include "morl/evaluation.hpp"
#include "morl/policy.hpp"
#include "morl/types.hpp"

namespace morl {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Mixing coefficient between task improvement and staying near the prior.
/// Either fixed, or learned through a sigmoid-squashed parameter driven by a
/// return threshold.
struct KickstartConfig {
  double alpha = 0.5;
  bool learned = false;
  double x = 0.0;          // pre-squash parameter (learned mode)
  double threshold_c = 0.0;
  double step_size = 1e-2;

  double effective_alpha() const { return learned ? sigmoid(x) : alpha; }
};

/// Combined-exponent kickstart weights: per state, self-normalized
/// exp((1-alpha) Q / eta + (alpha/eta) log_ratio). Indexed [s][j].
std::vector<std::vector<double>> kickstart_weights_ls(
    const std::vector<std::vector<double>>& q_values,
    const std::vector<std::vector<double>>& log_ratios, double alpha, double eta);

/// Mixture kickstart weights: per state, the task expert exp(Q/eta1) and the
/// prior expert exp(log_ratio/eta2) are normalized separately and convex-
/// combined with (1-alpha, alpha).
std::vector<std::vector<double>> kickstart_weights_dime(
    const std::vector<std::vector<double>>& q_values,
    const std::vector<std::vector<double>>& log_ratios, double alpha, double eta1,
    double eta2);

struct LossResult {
  double loss = 0.0;
  std::vector<double> d_mean;     // gradient wrt theta mean params
  std::vector<double> d_log_std;  // gradient wrt theta log-std params
  int clip_count = 0;             // exponent-clip activations (logged, expected 0)
};

/// Exponents are clipped at this value before exponentiation in the
/// advantage-weighted losses; activations are counted in LossResult.
inline constexpr double kExpClip = 20.0;

/// CRR-style advantage-weighted loss: negative mean over the batch of
/// exp(A(s,a)/beta) log pi_theta(a|s), A = Q - V. beta = alpha/(1-alpha).
LossResult offline_loss_ls_crr(const TransitionBatch& batch,
                               const ObjectiveEvaluator& q_eval,
                               const std::vector<double>& v_estimate, double beta,
                               const GaussianPolicy& theta);

/// Two-term offline loss: -[(1-alpha) * distillation toward exp(Q/eta) experts
/// over N fresh samples from the iterate + alpha * behavioral cloning on the
/// batch].
LossResult offline_loss_dime(const TransitionBatch& batch,
                             const GaussianPolicy& iterate,
                             const ObjectiveEvaluator& q_eval, double alpha,
                             double eta, int sample_count,
                             const GaussianPolicy& theta, RngStream& rng);

/// offline_loss_dime with the plain BC term replaced by advantage-weighted BC
/// at temperature 1: exp(A(s,a)) log pi_theta(a|s).
LossResult offline_loss_awbc(const TransitionBatch& batch,
                             const ObjectiveEvaluator& q_eval,
                             const std::vector<double>& v_estimate, double alpha,
                             double eta, const GaussianPolicy& iterate,
                             int sample_count, const GaussianPolicy& theta,
                             RngStream& rng);

/// One gradient step on J(alpha) = alpha (E Q - c) through the sigmoid:
/// x <- x - step * sigmoid'(x) * (E Q - c). No-op unless config.learned.
KickstartConfig update_learned_tradeoff(const KickstartConfig& config,
                                        double mean_q);

}  // namespace morl
