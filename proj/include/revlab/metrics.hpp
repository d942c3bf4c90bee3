#pragma once

#include <span>
#include <string>
#include <vector>

#include "revlab/clearing.hpp"
#include "revlab/grid.hpp"
#include "revlab/posterior_table.hpp"
#include "revlab/tensor.hpp"

namespace revlab {

struct RegressionReport {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double deficit = 1.0;
    std::size_t n_cells = 0;
};

/// Weighted least squares of y on x. Throws DegenerateRegression when either variable is constant.
RegressionReport weighted_regression(std::span<const double> x, std::span<const double> y,
                                     std::span<const double> w);

/// Regresses logit P on T* over the lattice with the ex-ante cell weights.
RegressionReport revelation_deficit(const PriceTensor& prices, const SignalGrid& grid, std::span<const double> tau,
                                    const Tensor3& weights);

/// Deficit of the no-learning equilibrium for any number of groups, over the full G^K lattice.
RegressionReport no_learning_deficit(const MarketConfig& cfg, const SignalGrid& grid);

/// Half the gross position: 0.5 * sum_k |x_k|.
double trade_volume(std::span<const double> x);

/// Weighted average volume over the lattice for per-group posterior log-odds tensors.
double expected_volume(const MarketConfig& cfg, const PriceTensor& prices, const std::vector<Tensor3>& posteriors,
                       const Tensor3& weights);

/// Expected volume of the no-learning equilibrium.
double expected_volume_no_learning(const MarketConfig& cfg, const SignalGrid& grid);

/// Private posterior log-odds tensors, one per group, on the G^3 lattice.
std::vector<Tensor3> private_posterior_tensors(const MarketConfig& cfg, const SignalGrid& grid);

enum class SolveStatus { Strict, Fallback, Diverged };

std::string to_string(SolveStatus s);

struct DiagnosticsReport {
    double residual_inf = 0.0;
    std::size_t mono_violations = 0;
    SolveStatus status = SolveStatus::Fallback;
};

inline constexpr double kStrictTol = 1e-12;

/// Sup-norm of the residual over active cells (NaN entries mark inactive cells and are skipped),
/// plus monotonicity violations of the table along u and along p.
DiagnosticsReport diagnostics(std::span<const double> residual, const PosteriorTable& table,
                              double strict_tol = kStrictTol);

/// Count of adjacent decreases of the table along both axes.
std::size_t monotonicity_violations(const PosteriorTable& table, double slack = 0.0);

}  // namespace revlab
