#include "morl/pareto.hpp"

#include <algorithm>
#include <cmath>

#include "morl/errors.hpp"

namespace morl {

namespace {
bool dominates(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return a[0] >= b[0] && a[1] >= b[1] && (a[0] > b[0] || a[1] > b[1]);
}
}  // namespace

std::vector<std::array<double, 2>> nondominated(
    const std::vector<std::array<double, 2>>& points) {
  std::vector<std::array<double, 2>> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < points.size() && keep; ++j) {
      if (j == i) continue;
      if (dominates(points[j], points[i])) keep = false;
      // duplicates: keep only the first occurrence
      if (points[j] == points[i] && j < i) keep = false;
    }
    if (keep) out.push_back(points[i]);
  }
  return out;
}

double hypervolume_2d(const std::vector<std::array<double, 2>>& front,
                      const std::array<double, 2>& reference) {
  auto nd = nondominated(front);
  for (const auto& p : nd)
    if (p[0] < reference[0] || p[1] < reference[1])
      throw ContractViolation("front point below the hypervolume reference");
  std::sort(nd.begin(), nd.end(),
            [](const auto& a, const auto& b) { return a[0] > b[0]; });
  double hv = 0.0;
  double prev_y = reference[1];
  for (const auto& p : nd) {
    hv += (p[0] - reference[0]) * (p[1] - prev_y);
    prev_y = p[1];
  }
  return hv;
}

double front_coverage(const std::vector<std::array<double, 2>>& front,
                      const std::vector<std::array<double, 2>>& true_front,
                      double threshold) {
  if (true_front.empty())
    throw ContractViolation("coverage needs a non-empty true front");
  if (front.empty()) return 0.0;
  int covered = 0;
  for (const auto& t : true_front) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : front) {
      const double dx = p[0] - t[0], dy = p[1] - t[1];
      best = std::min(best, std::hypot(dx, dy));
    }
    if (best <= threshold) ++covered;
  }
  return static_cast<double>(covered) / true_front.size();
}

}  // namespace morl
