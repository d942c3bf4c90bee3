#pragma once

#include <cstddef>
#include <vector>

#include "revlab/grid.hpp"

namespace revlab {

/// Belief mu(u, p) on a G_u x G_p lattice. Both mu and the price axis are held in log-odds.
class PosteriorTable {
public:
    PosteriorTable() = default;
    PosteriorTable(std::vector<double> u_nodes, std::vector<double> p_log_odds, double fill = 0.0)
        : u_(std::move(u_nodes)), y_(std::move(p_log_odds)), mu_(u_.size() * y_.size(), fill) {}

    std::size_t u_size() const { return u_.size(); }
    std::size_t p_size() const { return y_.size(); }
    const std::vector<double>& u_nodes() const { return u_; }
    const std::vector<double>& p_log_odds() const { return y_; }

    double& log_odds(std::size_t iu, std::size_t ip) { return mu_[iu * y_.size() + ip]; }
    double log_odds(std::size_t iu, std::size_t ip) const { return mu_[iu * y_.size() + ip]; }
    double posterior(std::size_t iu, std::size_t ip) const { return logistic(log_odds(iu, ip)); }

    std::vector<double>& values() { return mu_; }
    const std::vector<double>& values() const { return mu_; }

    /// Bilinear interpolation in (u, logit p); linear extrapolation outside the lattice.
    double interpolate(double u, double y) const;

private:
    std::vector<double> u_;
    std::vector<double> y_;
    std::vector<double> mu_;
};

}  // namespace revlab
