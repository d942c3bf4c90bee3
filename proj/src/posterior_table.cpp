#include "revlab/posterior_table.hpp"

#include <algorithm>

namespace revlab {

namespace {

// Left index of the interpolation interval and the fractional offset within it.
// Offsets outside [0,1] extrapolate from the end intervals.
std::pair<std::size_t, double> locate(const std::vector<double>& nodes, double x) {
    if (nodes.size() < 2) return {0, 0.0};
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    std::size_t i = it == nodes.begin() ? 0 : static_cast<std::size_t>(it - nodes.begin()) - 1;
    i = std::min(i, nodes.size() - 2);
    return {i, (x - nodes[i]) / (nodes[i + 1] - nodes[i])};
}

}  // namespace

double PosteriorTable::interpolate(double u, double y) const {
    const auto [i, a] = locate(u_, u);
    const auto [j, b] = locate(y_, y);
    if (u_.size() < 2 || y_.size() < 2) return mu_.empty() ? 0.0 : log_odds(i, j);
    const double m00 = log_odds(i, j), m01 = log_odds(i, j + 1);
    const double m10 = log_odds(i + 1, j), m11 = log_odds(i + 1, j + 1);
    return (1.0 - a) * ((1.0 - b) * m00 + b * m01) + a * ((1.0 - b) * m10 + b * m11);
}

}  // namespace revlab
