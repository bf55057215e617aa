#include "morl/tradeoff.hpp"

#include <cmath>
#include <numeric>

#include "morl/errors.hpp"

namespace morl {

TradeOff TradeOff::of(std::vector<double> weights) {
  if (weights.empty()) throw ContractViolation("trade-off must be non-empty");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ContractViolation("trade-off entries must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ContractViolation("trade-off entries must sum to 1");
  return TradeOff(std::move(weights));
}

TradeOff TradeOff::scalar(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ContractViolation("scalar trade-off must lie in [0, 1]");
  return TradeOff({alpha, 1.0 - alpha});
}

TradeOffDistribution TradeOffDistribution::uniform_simplex(std::size_t k) {
  if (k < 1) throw ContractViolation("simplex dimension must be >= 1");
  TradeOffDistribution d(Kind::UniformSimplex);
  d.k_ = k;
  return d;
}

TradeOffDistribution TradeOffDistribution::uniform_scalar(double lo, double hi) {
  if (!(0.0 <= lo && lo <= hi && hi <= 1.0))
    throw ContractViolation("uniform-scalar range must satisfy 0 <= lo <= hi <= 1");
  TradeOffDistribution d(Kind::UniformScalar);
  d.lo_ = lo;
  d.hi_ = hi;
  return d;
}

TradeOffDistribution TradeOffDistribution::fixed_list(std::vector<TradeOff> list) {
  if (list.empty()) throw ContractViolation("fixed-list distribution needs entries");
  TradeOffDistribution d(Kind::FixedList);
  d.list_ = std::move(list);
  return d;
}

TradeOff TradeOffDistribution::sample(RngStream& rng) const {
  switch (kind_) {
    case Kind::UniformScalar:
      return TradeOff::scalar(rng.uniform(lo_, hi_));
    case Kind::FixedList:
      return list_[rng.next_u64() % list_.size()];
    case Kind::UniformSimplex: {
      // exponential spacings normalized to the simplex
      std::vector<double> w(k_);
      double sum = 0.0;
      for (auto& v : w) {
        double u;
        do {
          u = rng.uniform();
        } while (u <= 0.0);
        v = -std::log(u);
        sum += v;
      }
      for (auto& v : w) v /= sum;
      // absorb rounding into the last entry so the sum is exact
      double partial = std::accumulate(w.begin(), w.end() - 1, 0.0);
      w.back() = 1.0 - partial;
      if (w.back() < 0.0) w.back() = 0.0;
      return TradeOff::of(std::move(w));
    }
  }
  throw ContractViolation("unreachable trade-off distribution kind");
}

std::vector<TradeOff> TradeOffDistribution::linspace_scalar(double lo, double hi,
                                                            int count) {
  if (count < 1) throw ContractViolation("linspace count must be >= 1");
  std::vector<TradeOff> out;
  out.reserve(count);
  if (count == 1) {
    out.push_back(TradeOff::scalar(lo));
    return out;
  }
  for (int i = 0; i < count; ++i) {
    const double a = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
    out.push_back(TradeOff::scalar(a));
  }
  return out;
}

}  // namespace morl
