#pragma once

#include <optional>
#include <string>
#include <vector>

#include "morl/tradeoff.hpp"

namespace morl {

/// Q_k(s, a_j) for the N actions sampled per state; indexed [k][s][j].
struct ObjectiveSamples {
  std::vector<std::vector<std::vector<double>>> q;

  std::size_t num_objectives() const { return q.size(); }
  std::size_t num_states() const { return q.empty() ? 0 : q[0].size(); }
};

// Per-state, per-objective normalized sample weights realizing the
// nonparametric experts q_k over actions drawn from the recorded iterate.
struct ExpertWeights {
  std::vector<int> states;
  // actions[s][j] is the j-th sampled action vector for state s
  std::vector<std::vector<std::vector<double>>> actions;
  // weights[k][s][j], each row self-normalized over j
  std::vector<std::vector<std::vector<double>>> weights;
  std::string iterate_id;

  std::size_t num_objectives() const { return weights.size(); }
  std::size_t num_states() const { return states.size(); }
  std::size_t samples_per_state() const {
    return actions.empty() ? 0 : actions[0].size();
  }
};

/// Temperatures and trust-region multipliers of the convex duals.
struct DualVariables {
  std::vector<double> eta;        // eta_k > 0
  std::vector<double> kl_bounds;  // epsilon_k >= 0
  double mean_dual = 0.0;         // multiplier on the mean trust region
  double cov_dual = 0.0;          // multiplier on the covariance trust region
};

struct Transition {
  int state = 0;
  std::vector<double> action;
  std::vector<double> rewards;  // length K
  int next_state = 0;
  std::optional<TradeOff> collection_tradeoff;
};

struct TransitionBatch {
  std::vector<Transition> transitions;

  std::size_t size() const { return transitions.size(); }
};

}  // namespace morl
