#pragma once

#include <array>
#include <vector>

namespace morl {

/// Maximal subset under componentwise->= dominance (maximization convention).
/// Input order is preserved; exact duplicates are kept once.
std::vector<std::array<double, 2>> nondominated(
    const std::vector<std::array<double, 2>>& points);

/// Exact 2-D hypervolume of the region dominated by the front relative to the
/// reference point, by a descending sweep over the nondominated points.
double hypervolume_2d(const std::vector<std::array<double, 2>>& front,
                      const std::array<double, 2>& reference);

/// Fraction of true-front grid points whose nearest achieved point lies within
/// threshold (Euclidean, reward space). Empty fronts cover nothing.
double front_coverage(const std::vector<std::array<double, 2>>& front,
                      const std::vector<std::array<double, 2>>& true_front,
                      double threshold);

}  // namespace morl
