#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "revlab/tensor.hpp"

namespace revlab {

/// Uniform, zero-centred grid over the centred signal u = s - 1/2.
class SignalGrid {
public:
    SignalGrid() = default;

    std::size_t size() const { return nodes_.size(); }
    double u_max() const { return u_max_; }
    double u_min() const { return -u_max_; }
    double spacing() const { return spacing_; }
    double operator[](std::size_t i) const { return nodes_[i]; }
    const std::vector<double>& nodes() const { return nodes_; }

    /// Fractional index of u, i.e. (u - u_min) / spacing.
    double position(double u) const { return (u - u_min()) / spacing_; }

    friend SignalGrid make_grid(std::size_t g, double u_max);

private:
    double u_max_ = 0.0;
    double spacing_ = 0.0;
    std::vector<double> nodes_;
};

/// Throws InvalidConfig for g < 2 or u_max <= 0.
SignalGrid make_grid(std::size_t g, double u_max = 4.0);

inline constexpr double kLogitEpsilon = 1e-15;

/// Logistic function, evaluated without overflow for any finite z.
double logistic(double z);

/// Inverse logistic. Inputs are clamped to [eps, 1 - eps].
double logit(double p);

struct FlaggedValue {
    double value;
    bool saturated;
};

/// logit() that also reports whether the clamp was hit.
FlaggedValue logit_flagged(double p);

/// Signal density f_v(u) for state v in {0,1} and precision tau.
double signal_density(int state, double tau, double u);

/// Natural log of signal_density.
double log_signal_density(int state, double tau, double u);

/// Private log-likelihood ratio ln f1(u)/f0(u) = tau * u.
double loglik_ratio(double tau, double u);

/// T* = sum_k tau_k u_k. Throws InvalidInput on length mismatch.
double sufficient_statistic(std::span<const double> tau, std::span<const double> u);

/// P(v = 1 | u) = logistic(tau u).
double private_posterior(double tau, double u);

/// Ex-ante probability of each lattice cell for three signals with precisions tau[0..2]:
/// proportional to 1/2 prod f1 + 1/2 prod f0, normalised to sum one.
Tensor3 joint_weights(const SignalGrid& grid, std::span<const double> tau);

/// Marginal ex-ante weights of one signal on the grid, normalised to sum one.
std::vector<double> marginal_weights(const SignalGrid& grid, double tau);

}  // namespace revlab
