#pragma once

#include <span>
#include <vector>

namespace revlab {

// Weighted least-squares projection of y onto nondecreasing sequences (pool adjacent violators).
// Empty weights mean unit weights.
std::vector<double> isotonic_regression(std::span<const double> y, std::span<const double> w = {});

// Number of adjacent pairs with y[i] > y[i+1] + slack.
std::size_t count_decreases(std::span<const double> y, double slack = 0.0);

}  // namespace revlab
