#pragma once

#include <vector>

#include "morl/rng.hpp"

namespace morl {

/// Convex preference vector over K objectives: entries >= 0, summing to 1.
class TradeOff {
 public:
  /// Validates the simplex invariants (sum within 1e-12 of 1).
  static TradeOff of(std::vector<double> weights);

  /// Two-objective trade-off (alpha, 1 - alpha).
  static TradeOff scalar(double alpha);

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t k) const { return w_[k]; }
  const std::vector<double>& weights() const { return w_; }

  /// Leading weight; the scalar alpha of the two-objective case studies.
  double alpha() const { return w_[0]; }

  bool operator==(const TradeOff& o) const { return w_ == o.w_; }

 private:
  explicit TradeOff(std::vector<double> w) : w_(std::move(w)) {}
  std::vector<double> w_;
};

/// The distribution nu that trade-offs are sampled from during conditioned
/// training.
class TradeOffDistribution {
 public:
  static TradeOffDistribution uniform_simplex(std::size_t k);
  static TradeOffDistribution uniform_scalar(double lo, double hi);
  static TradeOffDistribution fixed_list(std::vector<TradeOff> list);

  TradeOff sample(RngStream& rng) const;

  /// Evenly spaced two-objective trade-offs with alpha in [lo, hi].
  static std::vector<TradeOff> linspace_scalar(double lo, double hi, int count);

 private:
  enum class Kind { UniformSimplex, UniformScalar, FixedList };
  TradeOffDistribution(Kind kind) : kind_(kind) {}
  Kind kind_;
  std::size_t k_ = 2;
  double lo_ = 0.0, hi_ = 1.0;
  std::vector<TradeOff> list_;
};

}  // namespace morl
