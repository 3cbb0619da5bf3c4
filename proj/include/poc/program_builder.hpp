#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "poc/core_model.hpp"
#include "poc/lp.hpp"

namespace poc {

class IntervalError : public PocError {
public:
    using PocError::PocError;
};

/// Sorted flat offsets of the cells summed by an indicator row.
using CellRow = std::vector<std::size_t>;

/// (A.p)(D.p) = (B.p)(C.p); entries index ConstraintProgram::aggregates in
/// the order {A, B, C, D}.
struct BilinearConstraint {
    std::array<std::size_t, 4> agg{};
    std::string tag;
};

/// How the two product families of the mediator program are oriented.
enum class BilinearOrientation {
    /// a*d = b*c and f*g = e*h: the conditional independencies the
    /// constraints are meant to enforce.
    independence,
    /// a*c = b*d and e*g = f*h, exactly as printed. Kept for audits only.
    literal,
};

struct BuildOptions {
    /// Rows forcing W = W_{x_t} on cells with X = x_t (mediator program only).
    bool mediator_consistency = true;
    BilinearOrientation orientation = BilinearOrientation::independence;
};

enum class ProgramFamily { balke, nondescendant, covariate_specific, mediator };

std::string to_string(ProgramFamily family);

struct ConstraintProgram {
    CounterfactualSpace space;
    ProgramFamily family = ProgramFamily::balke;
    CellRow objective;
    std::vector<LinearConstraint> linear;
    std::vector<CellRow> aggregates;
    std::vector<BilinearConstraint> bilinear;
    /// Divisor applied to the optimum (P(x,y) for PN/PS, 1 for PNS).
    double normalizer = 1.0;

    std::size_t variable_count() const { return space.total_size(); }
    std::size_t equality_count() const;

    /// Largest violation over all linear rows, bilinear rows and p >= 0.
    double max_residual(std::span<const double> p) const;
    double max_bilinear_residual(std::span<const double> p) const;
    double objective_value(std::span<const double> p) const;
    double aggregate_value(std::size_t aggregate, std::span<const double> p) const;

    /// The same program without bilinear rows (its linear relaxation).
    ConstraintProgram linear_part() const;
};

struct QueryObjective {
    CellRow cells;
    double normalizer = 1.0;
};

/// Objective row for a query: PNS(k) sums cells with Y_{x_t} = y_t; PN/PS sum
/// cells with the counterfactual event plus the factual (X, Y_X) event, and
/// are normalized by the factual cell P(x, y) read from evidence.
QueryObjective objective_for_query(const CounterfactualSpace& space, const QuerySpec& query,
                                   const EvidenceSet& evidence);

/// Non-descendant covariates, any mix of joint or partial families.
ConstraintProgram build_thm1_program(const EvidenceSet& evidence, const QuerySpec& query);
/// Covariate-specific families only (each conditions on at most one covariate).
ConstraintProgram build_cor2_program(const EvidenceSet& evidence, const QuerySpec& query);
/// Back-door covariates plus one mediator; adds the bilinear independence rows.
ConstraintProgram build_thm3_program(const EvidenceSet& evidence, const QuerySpec& query,
                                     const BuildOptions& options = {});

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
};

/// McCormick relaxation: columns are [cells | aggregates | products].
struct RelaxedProgram {
    LpModel lp;
    std::size_t cell_count = 0;
    std::size_t aggregate_offset = 0;
    std::size_t product_offset = 0;
    /// Aggregate pair of each product column.
    std::vector<std::pair<std::size_t, std::size_t>> products;
    /// Product indices {A*D, B*C} per bilinear constraint.
    std::vector<std::pair<std::size_t, std::size_t>> bilinear_products;
};

/// Four-inequality envelope of w = u*v over u in bu, v in bv, as rows on the
/// given columns.
std::array<LinearConstraint, 4> mccormick_envelope(std::size_t w, std::size_t u, std::size_t v,
                                                   Interval bu, Interval bv);

/// Linear relaxation of `program` given one box per aggregate. Objective
/// coefficients are set on the cell columns (not normalized).
RelaxedProgram mccormick_relax(const ConstraintProgram& program, std::span<const Interval> boxes);

/// Plain LP form of the linear part (cells only, each in [0,1]).
LpModel to_lp_model(const ConstraintProgram& program);

}  // namespace poc
