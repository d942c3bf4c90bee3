#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "revlab/clearing.hpp"
#include "revlab/grid.hpp"
#include "revlab/metrics.hpp"
#include "revlab/posterior_table.hpp"

namespace revlab {

enum class PriceSpacing { UniformLogit, UniformProb };

/// Unknown of the fixed point. PosteriorFunction iterates on the belief tables mu(u, p);
/// PriceTensor iterates on the lattice prices with beliefs read off the contours each step.
/// Auto picks PriceTensor when every group is CARA and PosteriorFunction otherwise.
enum class ReeMethod { Auto, PosteriorFunction, PriceTensor };

struct SolverConfig {
    double damping = 0.2;
    std::size_t anderson_memory = 6;
    std::size_t max_iter = 400;
    double picard_tol = 1e-6;
    double strict_tol = kStrictTol;
    ReeMethod method = ReeMethod::Auto;

    std::size_t price_grid_size = 0;  // 0 means the signal grid size
    PriceSpacing spacing = PriceSpacing::UniformLogit;
    double price_margin = 0.1;  // fractional widening of the seed price range, in log-odds
    double price_half_width = 0.0;  // explicit half-width of the price axis in log-odds; 0 derives it from the seed
    double band = 1.0;          // extrapolation band beyond the lattice edge, in grid spacings

    bool newton = true;
    std::size_t newton_max_iter = 40;
    std::size_t krylov_max_iter = 50;
    std::size_t krylov_restart = 20;
    std::size_t max_backtracks = 8;

    bool state_symmetry = true;  // impose mu(-u, 1-p) = 1 - mu(u, p) when supply is zero
    std::size_t oscillation_window = 5;
    unsigned threads = 1;
};

/// Throws InvalidConfig when a field is out of range.
void validate(const SolverConfig& cfg);

/// One point where a sweep line meets the level set.
struct Crossing {
    int axis;            // 0: sweep along rows (u_j fixed), 1: sweep along columns (u_l fixed)
    std::size_t line;    // index of the fixed node
    double coordinate;   // interpolated off-grid signal value
    double weight;       // quadrature weight of this crossing
};

struct ContourTrace {
    std::vector<Crossing> crossings;
    double level = 0.0;  // log-odds of the traced price
    std::size_t own_index = 0;
    bool empty() const { return crossings.empty(); }
    /// Largest number of crossings produced by a single sweep direction.
    std::size_t max_sweep_count() const;
};

/// Level set {(u_j, u_l): slice(j, l) = level} of a G x G slice (row-major, log-odds values),
/// traced by a row pass and a column pass with linear interpolation. Crossings up to band
/// spacings beyond the lattice edge are obtained by linear extrapolation.
ContourTrace trace_contour(std::span<const double> slice, const SignalGrid& grid, double level, double band = 1.0);

/// Log of A_v = 1/2 sum over crossings of f_v(u_j) f_v(u_l), for v = 0 and v = 1.
struct ContourMass {
    double log_a0;
    double log_a1;
};

ContourMass contour_mass(const ContourTrace& trace, const SignalGrid& grid, double tau_j, double tau_l);

/// Posterior log-odds tau_own u + ln(A1 / A0), where A_v averages f_v(u_j) f_v(u_l) over both sweeps.
double contour_posterior(const ContourTrace& trace, const SignalGrid& grid, double own_u, double tau_own,
                         double tau_j, double tau_l);

/// The unknown of the fixed point: one posterior table per distinct agent role.
/// Homogeneous markets use a single shared table.
struct BeliefState {
    std::vector<PosteriorTable> tables;
    PriceTensor lattice_prices;  // prices the tables were read from; size 0 when unknown
};

struct MapResult {
    BeliefState next;
    PriceTensor prices;
    std::vector<double> residual;  // next - current per table entry, NaN on inactive cells
    std::size_t failed_cells = 0;
};

/// The REE problem on a fixed lattice: market, grid, price axis.
class ReeProblem {
public:
    ReeProblem(MarketConfig cfg, SignalGrid grid, SolverConfig solver);

    const MarketConfig& market() const { return cfg_; }
    const SignalGrid& grid() const { return grid_; }
    const SolverConfig& solver() const { return solver_; }
    const std::vector<double>& price_nodes() const { return price_nodes_; }
    bool shared_table() const { return shared_; }
    const Tensor3& weights() const { return weights_; }
    /// The method actually used, with Auto resolved.
    ReeMethod method() const { return method_; }

    /// Private posterior log-odds tau u at every (u, p) node.
    BeliefState no_learning_seed() const;

    /// Full-revelation beliefs mu(u, p) = p.
    BeliefState full_revelation_seed() const;

    /// Clears every lattice cell with beliefs interpolated in the price. warm_start may be empty.
    PriceTensor clear_lattice(const BeliefState& beliefs, const PriceTensor* warm_start = nullptr,
                              std::size_t* failed = nullptr) const;

    /// One application of the contour map.
    MapResult apply(const BeliefState& beliefs, const PriceTensor* warm_start = nullptr) const;

    /// Beliefs read off the contours of a price tensor at every (u, p) node. Rows whose levels are never
    /// traced keep the private posterior.
    BeliefState beliefs_from_prices(const PriceTensor& prices) const;

    /// One step of the price-tensor map: every group forms its contour posterior at the cell's own price,
    /// and the cell is cleared again with those posteriors.
    PriceTensor price_map(const PriceTensor& prices) const;

    /// Posterior log-odds of group k at every cell, from the contour of its own slice at the cell price.
    std::vector<Tensor3> contour_cell_posteriors(const PriceTensor& prices) const;

    /// Contour posterior of group k holding signal own_u when the price log-odds is level. Off-node signals
    /// use the slice interpolated linearly between the neighbouring own indices.
    double contour_posterior_at(const PriceTensor& prices, std::size_t k, double own_u, double level) const;

    /// Posterior log-odds of group k at every lattice cell, evaluated at the cell price.
    std::vector<Tensor3> cell_posteriors(const BeliefState& beliefs, const PriceTensor& prices) const;

    std::size_t unknowns() const;
    std::vector<double> flatten(const BeliefState& s) const;
    BeliefState unflatten(std::span<const double> x) const;

private:
    void contour_update(const PriceTensor& prices, BeliefState& next, const BeliefState* current,
                        std::vector<double>* residual) const;

    MarketConfig cfg_;
    SignalGrid grid_;
    SolverConfig solver_;
    std::vector<double> price_nodes_;
    std::vector<double> tau_;
    Tensor3 weights_;
    bool shared_ = false;
    ReeMethod method_ = ReeMethod::PosteriorFunction;
};

/// Pool-adjacent-violators projection along u (weighted by u-marginal weights) and along p
/// (unit weights), alternated until clean or ten rounds.
PosteriorTable project_monotone(const PosteriorTable& table, std::span<const double> u_weights = {});

/// Average over the six index permutations.
PriceTensor symmetrise(const PriceTensor& prices);

/// Throws InvalidConfig for heterogeneous markets, otherwise symmetrise(prices).
PriceTensor symmetrise(const PriceTensor& prices, const MarketConfig& cfg);

struct IterationRecord {
    std::size_t iteration;
    double residual;
    std::string phase;  // "picard", "anderson" or "newton"
};

struct ReeSolution {
    BeliefState beliefs;
    PriceTensor prices;
    DiagnosticsReport diagnostics;
    RegressionReport regression;
    std::vector<IterationRecord> history;
    std::size_t iterations = 0;
};

enum class SeedKind { NoLearning, FullRevelation, Custom };

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Damped Picard with monotone projection and Anderson mixing, then Newton-Krylov polishing.
ReeSolution solve_ree(const ReeProblem& problem, SeedKind seed = SeedKind::NoLearning,
                      const BeliefState* custom_seed = nullptr, const IterationCallback& on_iteration = {});

/// Solves a market whose groups differ in risk aversion by continuation: the first stage gives every
/// group the geometric-mean parameter and starts from no learning, and each of the `steps` later stages
/// moves the parameters toward their targets, warm-started from the previous equilibrium. The returned
/// history and iteration count cover all stages.
ReeSolution solve_ree_continuation(const MarketConfig& cfg, const SignalGrid& grid, const SolverConfig& solver,
                                   std::size_t steps = 4, const IterationCallback& on_iteration = {});

struct AgentView {
    double mu1, mu2, mu3, price;
};

/// Posteriors of the three groups and the price at a signal triple (lattice nodes or interpolated).
AgentView posteriors_at(const ReeProblem& problem, const ReeSolution& solution, std::span<const double> u);

struct LevelCurvature {
    double level;            // price
    std::size_t crossings;
    double min_second_difference;
    double max_second_difference;
    int sign;                // +1, -1, 0 (flat), or 2 when mixed
    std::string note;
};

struct CurvatureSummary {
    std::vector<LevelCurvature> levels;
    double critical_level = -1.0;  // price where the curvature sign flips, -1 when it never does
};

/// Second differences of the traced u_l-versus-u_j curve of own slice own_index at each level.
CurvatureSummary contour_curvature_report(const PriceTensor& prices, const SignalGrid& grid, std::size_t own_index,
                                          std::span<const double> levels, double band = 1.0);

/// Expected trade volume at the equilibrium.
double expected_volume(const ReeProblem& problem, const ReeSolution& solution);

/// Versioned text checkpoint of the beliefs, lattice prices and residual history.
void save_checkpoint(std::ostream& out, const ReeProblem& problem, const ReeSolution& solution);
/// Reads a checkpoint written for the same lattice. Throws InvalidInput on mismatch.
BeliefState load_checkpoint(std::istream& in, const ReeProblem& problem, std::vector<IterationRecord>* history = nullptr);

}  // namespace revlab
