#include "poc/program_builder.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace poc {

std::string to_string(ProgramFamily family) {
    switch (family) {
    case ProgramFamily::balke: return "balke-lp";
    case ProgramFamily::nondescendant: return "nondescendant-lp";
    case ProgramFamily::covariate_specific: return "covariate-specific-lp";
    case ProgramFamily::mediator: return "mediator-bilinear";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// ConstraintProgram

std::size_t ConstraintProgram::equality_count() const {
    return static_cast<std::size_t>(std::count_if(linear.begin(), linear.end(), [](const auto& r) {
        return r.rel == Relation::eq;
    }));
}

double ConstraintProgram::aggregate_value(std::size_t aggregate, std::span<const double> p) const {
    double s = 0.0;
    for (auto c : aggregates[aggregate]) s += p[c];
    return s;
}

double ConstraintProgram::max_bilinear_residual(std::span<const double> p) const {
    std::vector<double> agg(aggregates.size());
    for (std::size_t a = 0; a < aggregates.size(); ++a) agg[a] = aggregate_value(a, p);
    double worst = 0.0;
    for (const auto& b : bilinear)
        worst = std::max(worst, std::abs(agg[b.agg[0]] * agg[b.agg[3]] - agg[b.agg[1]] * agg[b.agg[2]]));
    return worst;
}

double ConstraintProgram::max_residual(std::span<const double> p) const {
    double worst = 0.0;
    for (double v : p) worst = std::max(worst, -v);
    for (const auto& row : linear) {
        double lhs = 0.0;
        for (const auto& t : row.terms) lhs += t.coef * p[t.col];
        double viol = 0.0;
        switch (row.rel) {
        case Relation::eq: viol = std::abs(lhs - row.rhs); break;
        case Relation::le: viol = lhs - row.rhs; break;
        case Relation::ge: viol = row.rhs - lhs; break;
        }
        worst = std::max(worst, viol);
    }
    return std::max(worst, max_bilinear_residual(p));
}

double ConstraintProgram::objective_value(std::span<const double> p) const {
    double s = 0.0;
    for (auto c : objective) s += p[c];
    return s / normalizer;
}

ConstraintProgram ConstraintProgram::linear_part() const {
    ConstraintProgram out = *this;
    out.aggregates.clear();
    out.bilinear.clear();
    return out;
}

// ---------------------------------------------------------------------------
// Builders

namespace {

using Fixed = std::vector<std::pair<int, int>>;

LinearConstraint indicator_row(const CellRow& cells, Relation rel, double rhs, std::string tag) {
    LinearConstraint row;
    row.terms.reserve(cells.size());
    for (auto c : cells) row.terms.push_back({c, 1.0});
    row.rel = rel;
    row.rhs = rhs;
    row.tag = std::move(tag);
    return row;
}

/// Appends equality rows, skipping exact repeats of (cells, rhs).
class RowSink {
public:
    explicit RowSink(std::vector<LinearConstraint>& rows) : rows_(rows) {}

    void add(CellRow cells, double rhs, const std::string& tag) {
        auto& seen = seen_[cells];
        if (std::find(seen.begin(), seen.end(), rhs) != seen.end()) return;
        seen.push_back(rhs);
        rows_.push_back(indicator_row(cells, Relation::eq, rhs, tag));
    }

private:
    std::vector<LinearConstraint>& rows_;
    std::map<CellRow, std::vector<double>> seen_;
};

void check_family_covariates(const EvidenceSet& evidence, const CounterfactualSpace& space) {
    for (const auto& f : evidence.families())
        for (auto c : f.covariates())
            if (space.covariate_axis(c) < 0)
                throw SchemaError(f.name() + " references an undeclared covariate");
}

/// Experimental cells fix Y_{x_t}; observational cells also fix X = x_t (so
/// the observed Y is Y_{x_t}) and, when present, the observed mediator.
void emit_family(const CounterfactualSpace& space, const EvidenceFamily& family, RowSink& sink) {
    for (std::size_t cell = 0; cell < family.cell_count(); ++cell) {
        const auto idx = family.cell_indices(cell);
        const int t = idx[0];
        Fixed fixed{{space.outcome_axis(t), idx[1]}};
        if (family.kind() == EvidenceKind::observational) {
            fixed.emplace_back(space.treatment_axis(), t);
            if (family.with_mediator()) {
                if (space.observed_mediator_axis() < 0)
                    throw SchemaError(family.name() + ": mediator evidence needs the mediator program");
                fixed.emplace_back(space.observed_mediator_axis(), idx[2]);
            }
        }
        for (std::size_t k = 0; k < family.covariates().size(); ++k)
            fixed.emplace_back(space.covariate_axis(family.covariates()[k]), idx[3 + k]);
        sink.add(space.cells_matching(fixed), family.at_flat(cell), family.name());
    }
}

void set_objective(ConstraintProgram& program, const QuerySpec& query,
                   const EvidenceSet& evidence) {
    auto obj = objective_for_query(program.space, query, evidence);
    program.objective = std::move(obj.cells);
    program.normalizer = obj.normalizer;
}

ConstraintProgram build_nondescendant(const EvidenceSet& evidence, const QuerySpec& query,
                                      bool covariate_specific) {
    const auto& schema = evidence.schema();
    query.validate(schema.nx(), schema.ny());
    const auto cards = schema.covariate_cards();
    ConstraintProgram program;
    program.space = CounterfactualSpace::nondescendant_layout(schema.nx(), schema.ny(), cards);
    program.family = cards.empty() ? ProgramFamily::balke
                     : covariate_specific ? ProgramFamily::covariate_specific
                                          : ProgramFamily::nondescendant;
    check_family_covariates(evidence, program.space);
    for (const auto& f : evidence.families()) {
        if (f.with_mediator())
            throw SchemaError(f.name() + ": mediator evidence requires build_thm3_program");
        if (covariate_specific && f.covariates().size() > 1)
            throw SchemaError(f.name() +
                              " conditions on several covariates; use build_thm1_program");
    }
    RowSink sink(program.linear);
    sink.add(program.space.cells_matching({}), 1.0, "normalization");
    for (const auto& f : evidence.families()) emit_family(program.space, f, sink);
    set_objective(program, query, evidence);
    return program;
}

std::vector<std::vector<int>> covariate_cells(const std::vector<int>& cards) {
    std::vector<std::vector<int>> out{{}};
    for (int card : cards) {
        std::vector<std::vector<int>> next;
        for (const auto& prefix : out)
            for (int v = 0; v < card; ++v) {
                next.push_back(prefix);
                next.back().push_back(v);
            }
        out = std::move(next);
    }
    return out;
}

}  // namespace

QueryObjective objective_for_query(const CounterfactualSpace& space, const QuerySpec& query,
                                   const EvidenceSet& evidence) {
    const int nx = space.arm_count();
    const int ny = nx > 0 ? space.axes()[space.outcome_axis(0)].cardinality : 0;
    query.validate(nx, ny);
    QueryObjective out;
    Fixed fixed;
    if (query.kind == QueryKind::pns) {
        for (auto [arm, y] : query.targets) fixed.emplace_back(space.outcome_axis(arm), y);
        out.cells = space.cells_matching(fixed);
        return out;
    }
    const auto [fx, fy] = query.factual;
    const auto [cx, cy] = query.counterfactual;
    fixed = {{space.outcome_axis(cx), cy}, {space.treatment_axis(), fx}, {space.outcome_axis(fx), fy}};
    out.cells = space.cells_matching(fixed);
    const auto denom = evidence.observational_cell(fx, fy);
    if (!denom)
        throw SchemaError("missing normalizer: " + to_string(query.kind) +
                          " needs the observational cell P(x,y) in evidence");
    if (*denom <= 0.0)
        throw UndefinedConditionalError(to_string(query.kind) +
                                        " is undefined: conditioning cell has probability 0");
    out.normalizer = *denom;
    return out;
}

ConstraintProgram build_thm1_program(const EvidenceSet& evidence, const QuerySpec& query) {
    return build_nondescendant(evidence, query, false);
}

ConstraintProgram build_cor2_program(const EvidenceSet& evidence, const QuerySpec& query) {
    return build_nondescendant(evidence, query, true);
}

ConstraintProgram build_thm3_program(const EvidenceSet& evidence, const QuerySpec& query,
                                     const BuildOptions& options) {
    const auto& schema = evidence.schema();
    if (!schema.mediator()) throw SchemaError("the mediator program needs a declared mediator");
    for (std::size_t i = 0; i < schema.covariate_count(); ++i)
        if (schema.covariate(i).role != Role::backdoor_covariate)
            throw SchemaError("covariate '" + schema.covariate(i).name +
                              "' must be a back-door covariate in the mediator program");
    query.validate(schema.nx(), schema.ny());

    const int nx = schema.nx();
    const int ny = schema.ny();
    const int nw = schema.nw();
    const auto cards = schema.covariate_cards();
    ConstraintProgram program;
    program.family = ProgramFamily::mediator;
    program.space = CounterfactualSpace::mediator_layout(nx, ny, nw, cards);
    const auto& space = program.space;
    check_family_covariates(evidence, space);

    RowSink sink(program.linear);
    sink.add(space.cells_matching({}), 1.0, "normalization");
    for (const auto& f : evidence.families()) emit_family(space, f, sink);

    if (options.mediator_consistency) {
        for (int t = 0; t < nx; ++t)
            for (int u = 0; u < nw; ++u) {
                CellRow cells;
                for (int other = 0; other < nw; ++other) {
                    if (other == u) continue;
                    auto part = space.cells_matching({{space.treatment_axis(), t},
                                                      {space.observed_mediator_axis(), u},
                                                      {space.mediator_axis(t), other}});
                    cells.insert(cells.end(), part.begin(), part.end());
                }
                std::sort(cells.begin(), cells.end());
                sink.add(std::move(cells), 0.0, "mediator-consistency");
            }
    }

    // z-cells with zero mass make the independence rows vacuous
    const auto zcells = covariate_cells(cards);
    const auto pz = evidence.joint_covariate_distribution();
    std::vector<std::vector<int>> live;
    for (std::size_t k = 0; k < zcells.size(); ++k)
        if (!pz || (*pz)[k] > 0.0) live.push_back(zcells[k]);

    std::map<CellRow, std::size_t> interned;
    auto aggregate = [&](Fixed fixed, const std::vector<int>& z) {
        for (std::size_t i = 0; i < z.size(); ++i) fixed.emplace_back(space.covariate_axis(i), z[i]);
        auto cells = space.cells_matching(fixed);
        auto [it, fresh] = interned.emplace(cells, program.aggregates.size());
        if (fresh) program.aggregates.push_back(std::move(cells));
        return it->second;
    };
    const bool literal = options.orientation == BilinearOrientation::literal;

    // Y_x independent of X given W_x, Z
    for (int s = 0; s < ny; ++s)
        for (int t = 0; t < nx; ++t)
            for (int v = 0; v < nx; ++v)
                for (int u = 0; u < nw; ++u)
                    for (const auto& z : live) {
                        const int yt = space.outcome_axis(t);
                        const int wt = space.mediator_axis(t);
                        const int xa = space.treatment_axis();
                        const auto a = aggregate({{yt, s}, {wt, u}}, z);
                        const auto b = aggregate({{yt, s}, {wt, u}, {xa, v}}, z);
                        const auto c = aggregate({{wt, u}}, z);
                        const auto d = aggregate({{wt, u}, {xa, v}}, z);
                        BilinearConstraint bc;
                        bc.agg = literal ? std::array{a, b, d, c} : std::array{a, b, c, d};
                        bc.tag = "Y_x" + std::to_string(t) + " indep X | W_x" + std::to_string(t) + ",Z";
                        program.bilinear.push_back(std::move(bc));
                    }
    // Y_x independent of W_x' given W_x, Z
    for (int s = 0; s < ny; ++s)
        for (int t = 0; t < nx; ++t)
            for (int t2 = t + 1; t2 < nx; ++t2)
                for (int u = 0; u < nw; ++u)
                    for (int v = 0; v < nw; ++v)
                        for (const auto& z : live) {
                            const int yt = space.outcome_axis(t);
                            const int wt = space.mediator_axis(t);
                            const int wt2 = space.mediator_axis(t2);
                            const auto e = aggregate({{yt, s}, {wt, u}}, z);
                            const auto f = aggregate({{yt, s}, {wt, u}, {wt2, v}}, z);
                            const auto g = aggregate({{wt, u}}, z);
                            const auto h = aggregate({{wt, u}, {wt2, v}}, z);
                            BilinearConstraint bc;
                            bc.agg = literal ? std::array{e, f, h, g} : std::array{f, e, h, g};
                            bc.tag = "Y_x" + std::to_string(t) + " indep W_x" + std::to_string(t2) +
                                     " | W_x" + std::to_string(t) + ",Z";
                            program.bilinear.push_back(std::move(bc));
                        }

    set_objective(program, query, evidence);
    return program;
}

// ---------------------------------------------------------------------------
// Relaxation

LpModel to_lp_model(const ConstraintProgram& program) {
    LpModel lp;
    const std::size_t n = program.variable_count();
    lp.lower.assign(n, 0.0);
    lp.upper.assign(n, 1.0);
    lp.objective.assign(n, 0.0);
    for (auto c : program.objective) lp.objective[c] = 1.0;
    lp.rows = program.linear;
    return lp;
}

std::array<LinearConstraint, 4> mccormick_envelope(std::size_t w, std::size_t u, std::size_t v,
                                                   Interval bu, Interval bv) {
    auto row = [&](double cu, double cv, Relation rel, double rhs) {
        LinearConstraint r;
        r.terms.push_back({w, 1.0});
        if (u == v) {
            r.terms.push_back({u, -(cu + cv)});
        } else {
            r.terms.push_back({u, -cu});
            r.terms.push_back({v, -cv});
        }
        r.rel = rel;
        r.rhs = rhs;
        r.tag = "mccormick";
        return r;
    };
    // w >= lu v + lv u - lu lv ; w >= hu v + hv u - hu hv
    // w <= hu v + lv u - hu lv ; w <= lu v + hv u - lu hv
    return {row(bv.lo, bu.lo, Relation::ge, -bu.lo * bv.lo),
            row(bv.hi, bu.hi, Relation::ge, -bu.hi * bv.hi),
            row(bv.lo, bu.hi, Relation::le, -bu.hi * bv.lo),
            row(bv.hi, bu.lo, Relation::le, -bu.lo * bv.hi)};
}

RelaxedProgram mccormick_relax(const ConstraintProgram& program, std::span<const Interval> boxes) {
    if (boxes.size() != program.aggregates.size())
        throw ArgumentError("one box per aggregate is required");
    for (const auto& b : boxes)
        if (!(b.lo <= b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi))
            throw IntervalError("aggregate box with lower > upper or non-finite ends");

    RelaxedProgram out;
    out.lp = to_lp_model(program);
    out.cell_count = program.variable_count();
    out.aggregate_offset = out.lp.num_cols();
    for (std::size_t a = 0; a < program.aggregates.size(); ++a) {
        const auto col = out.lp.add_column(boxes[a].lo, boxes[a].hi);
        auto tie = indicator_row(program.aggregates[a], Relation::eq, 0.0, "aggregate");
        for (auto& t : tie.terms) t.coef = -1.0;
        tie.terms.push_back({col, 1.0});
        out.lp.rows.push_back(std::move(tie));
    }
    out.product_offset = out.lp.num_cols();
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> product_index;
    auto product = [&](std::size_t u, std::size_t v) {
        const auto key = std::minmax(u, v);
        auto [it, fresh] = product_index.emplace(key, out.products.size());
        if (!fresh) return it->second;
        out.products.push_back(key);
        const auto bu = boxes[key.first];
        const auto bv = boxes[key.second];
        const double corners[] = {bu.lo * bv.lo, bu.lo * bv.hi, bu.hi * bv.lo, bu.hi * bv.hi};
        const auto [lo, hi] = std::minmax_element(std::begin(corners), std::end(corners));
        const auto w = out.lp.add_column(*lo, *hi);
        for (auto& row : mccormick_envelope(w, out.aggregate_offset + key.first,
                                            out.aggregate_offset + key.second, bu, bv))
            out.lp.rows.push_back(std::move(row));
        return it->second;
    };
    for (const auto& b : program.bilinear) {
        const auto lhs = product(b.agg[0], b.agg[3]);
        const auto rhs = product(b.agg[1], b.agg[2]);
        out.bilinear_products.emplace_back(lhs, rhs);
        if (lhs == rhs) continue;
        LinearConstraint eq;
        eq.terms = {{out.product_offset + lhs, 1.0}, {out.product_offset + rhs, -1.0}};
        eq.rel = Relation::eq;
        eq.rhs = 0.0;
        eq.tag = b.tag;
        out.lp.rows.push_back(std::move(eq));
    }
    return out;
}

}  // namespace poc
