#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace poc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { eq, le, ge };

struct Term {
    std::size_t col = 0;
    double coef = 0.0;
};

struct LinearConstraint {
    std::vector<Term> terms;
    Relation rel = Relation::eq;
    double rhs = 0.0;
    std::string tag;  // provenance, reported in infeasibility hints
};

/// min/max c.x  s.t. rows, lower <= x <= upper. Lower bounds must be finite.
struct LpModel {
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> objective;
    std::vector<LinearConstraint> rows;

    std::size_t num_cols() const { return lower.size(); }
    std::size_t add_column(double lo, double hi, double cost = 0.0) {
        lower.push_back(lo);
        upper.push_back(hi);
        objective.push_back(cost);
        return lower.size() - 1;
    }
};

enum class Sense { minimize, maximize };

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

std::string to_string(LpStatus status);

struct LpOptions {
    double pivot_tol = 1e-9;
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    std::size_t max_iterations = 0;  // 0: scale with problem size
    /// Consecutive degenerate pivots before switching to Bland's rule.
    std::size_t degenerate_limit = 40;
    /// Fix columns of zero-sum rows over nonnegative terms before pivoting.
    bool presolve = true;
};

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    double objective = 0.0;
    std::vector<double> x;
    /// Row multipliers of the optimal basis, for the minimization form of the
    /// problem (negated objective when maximizing).
    std::vector<double> duals;
    /// Lagrangian bound from `duals` (sign-clipped), reported in the caller's
    /// sense. A valid bound on the optimum when every column with a negative
    /// reduced cost has a finite upper bound (dual_infeasibility is then the
    /// clipped amount only).
    double dual_objective = 0.0;
    double dual_infeasibility = 0.0;
    double primal_residual = 0.0;
    std::size_t iterations = 0;
    /// Tags of rows carrying the phase-one infeasibility certificate.
    std::vector<std::string> conflict_tags;
};

/// Dense bounded-variable primal simplex, two phases, Dantzig pricing with a
/// Bland fallback on degenerate stalls. Rows of the form sum(a_j x_j) = 0 with
/// positive a_j over nonnegative columns are presolved away.
LpResult solve_simplex(const LpModel& model, Sense sense, const LpOptions& options = {});

}  // namespace poc
