#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "poc/core_model.hpp"
#include "poc/lp.hpp"
#include "poc/program_builder.hpp"

namespace poc {

enum class SolveStatus { optimal, infeasible, node_budget_exhausted, tolerance_reached };

std::string to_string(SolveStatus status);

/// Result of optimizing one sense.
struct OptimumReport {
    SolveStatus status = SolveStatus::infeasible;
    /// Certified bound on the normalized optimum: <= the true minimum, or
    /// >= the true maximum. Exact for LPs.
    double value = 0.0;
    /// Best bilinear-feasible normalized objective found (never a bound).
    std::optional<double> incumbent;
    /// LP solution, or the incumbent point for branch-and-bound.
    std::vector<double> point;
    double max_residual = 0.0;
    /// |primal - dual| of the LP certificate (normalized), LP solves only.
    double dual_gap = 0.0;
    double dual_infeasibility = 0.0;
    std::size_t nodes_explored = 0;
    std::size_t lp_solves = 0;
    std::size_t lp_iterations = 0;
    double runtime_ms = 0.0;
    std::vector<std::string> infeasible_families;
};

struct SolveReport {
    SolveStatus status = SolveStatus::infeasible;
    BoundsInterval bounds;
    /// Heuristic feasible values; diagnostics only, never reported as bounds.
    std::optional<BoundsInterval> inner_bounds;
    double inner_residual = 0.0;
    std::size_t nodes_explored = 0;
    std::size_t lp_solves = 0;
    double runtime_ms = 0.0;
    double max_residual = 0.0;
    std::vector<std::string> infeasible_families;
};

struct BbOptions {
    std::size_t node_budget = 2000;
    double gap_tol = 1e-3;
    /// Shrink each aggregate's [0,1] box to its range over the linear rows first.
    bool tighten_boxes = true;
    /// Search for feasible points by alternating ratio linearizations.
    bool incumbent_search = true;
    /// Bilinear residual under which a relaxation optimum counts as feasible.
    double feasibility_tol = 1e-9;
    LpOptions lp;
};

/// Exact LP optimum of a program without bilinear rows, divided by its
/// normalizer. Throws ArgumentError if bilinear rows are present.
OptimumReport solve_lp(const ConstraintProgram& program, Sense sense, const LpOptions& options = {});

/// Spatial branch-and-bound, best-first on the relaxation bound, splitting
/// boxes at their midpoint. When the bilinear rows have ratio classes, each
/// class ratio t gets a box [l,h] relaxing N = t*D to l*D <= N <= h*D, and the
/// class with the most spread-out ratios is split. Otherwise aggregate
/// McCormick envelopes are used and the wider factor of the most violated
/// product is split. Deterministic; more budget never loosens the bound.
OptimumReport bb_solve(const ConstraintProgram& program, Sense sense, const BbOptions& options = {});

/// Range of every aggregate over the linear rows, as boxes inside [0,1].
/// nullopt when the linear rows are infeasible.
std::optional<std::vector<Interval>> tighten_aggregate_boxes(const ConstraintProgram& program,
                                                            const LpOptions& options = {});

/// Aggregates whose quotient is a conditional probability (num cells are a
/// subset of den cells, so the quotient lies in [0,1]).
struct RatioPair {
    std::size_t num = 0;
    std::size_t den = 0;
};

/// Quotients the bilinear rows force to be equal. A row A*D = B*C equates
/// A/C with B/D, or alternatively A/B with C/D.
using RatioClass = std::vector<RatioPair>;

/// Equal-ratio classes of every bilinear row; `alternate` prefers the A/B = C/D
/// pairing. nullopt when some row admits neither pairing with nested cells.
std::optional<std::vector<RatioClass>> ratio_classes(const ConstraintProgram& program,
                                                     bool alternate = false);

/// Feasible point search by ratio linearization: fixes every class ratio at
/// its pooled value in `start`, solves the resulting LP and alternates between
/// the two class families until the objective stops improving. Returns a point that is
/// feasible up to LP tolerances, or nullopt.
std::optional<std::vector<double>> ratio_linearization_search(const ConstraintProgram& program,
                                                              Sense sense,
                                                              const std::vector<double>& start,
                                                              std::size_t rounds = 4,
                                                              const LpOptions& options = {});

struct InnerOptions {
    std::size_t restarts = 4;
    std::uint64_t seed = 0;
    /// Projected-gradient steps per restart; 0 evaluates the starts as given.
    std::size_t iterations = 4000;
    double eps_inner = 1e-6;
    /// Points tried before the random restarts.
    std::vector<std::vector<double>> starts;
};

struct InnerReport {
    std::optional<double> value;  // normalized objective of the best feasible point
    std::vector<double> point;
    double residual = 0.0;
    std::size_t restarts_run = 0;
};

/// Multi-start projected descent on the simplex with an augmented-Lagrangian
/// penalty over every linear and bilinear row. Heuristic inner value only.
InnerReport local_search_inner(const ConstraintProgram& program, Sense sense,
                               const InnerOptions& options = {});

/// Both senses: LP for linear programs, branch-and-bound otherwise.
SolveReport solve_bounds(const ConstraintProgram& program, const BbOptions& options = {});

}  // namespace poc
