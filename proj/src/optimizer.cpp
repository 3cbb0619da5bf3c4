#include "poc/optimizer.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <map>
#include <memory>
#include <cmath>
#include <queue>
#include <random>

#include "poc/rng.hpp"

namespace poc {

std::string to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::node_budget_exhausted: return "node_budget_exhausted";
    case SolveStatus::tolerance_reached: return "tolerance_reached";
    }
    return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double sign_of(Sense sense) { return sense == Sense::minimize ? 1.0 : -1.0; }

/// Certified LP value: the Lagrangian bound of the returned multipliers. It
/// holds for any multipliers since every column is bounded, while the primal
/// point of an ill-conditioned relaxation can miss its rows.
double safe_value(const LpResult& lp) { return lp.dual_objective; }

std::vector<double> aggregate_values(const ConstraintProgram& program, std::span<const double> p) {
    std::vector<double> agg(program.aggregates.size());
    for (std::size_t a = 0; a < agg.size(); ++a) agg[a] = program.aggregate_value(a, p);
    return agg;
}

/// sum(num cells) - ratio * sum(den cells) {rel} 0, merged per column.
LinearConstraint ratio_row(const ConstraintProgram& program, RatioPair pair, double ratio,
                           Relation rel) {
    std::vector<std::pair<std::size_t, double>> coef;
    for (auto c : program.aggregates[pair.num]) coef.emplace_back(c, 1.0);
    for (auto c : program.aggregates[pair.den]) coef.emplace_back(c, -ratio);
    std::sort(coef.begin(), coef.end());
    LinearConstraint row;
    for (const auto& [c, v] : coef) {
        if (!row.terms.empty() && row.terms.back().col == c)
            row.terms.back().coef += v;
        else
            row.terms.push_back({c, v});
    }
    std::erase_if(row.terms, [](const Term& t) { return t.coef == 0.0; });
    row.rel = rel;
    row.rhs = 0.0;
    row.tag = "ratio";
    return row;
}

bool nested(const CellRow& inner, const CellRow& outer) {
    return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

/// X/Y = U/V oriented so both numerators are nested in their denominators.
std::optional<std::pair<RatioPair, RatioPair>> orient(const ConstraintProgram& program, std::size_t x,
                                                      std::size_t y, std::size_t u, std::size_t v) {
    const auto& ag = program.aggregates;
    if (nested(ag[x], ag[y]) && nested(ag[u], ag[v])) return std::pair{RatioPair{x, y}, RatioPair{u, v}};
    if (nested(ag[y], ag[x]) && nested(ag[v], ag[u])) return std::pair{RatioPair{y, x}, RatioPair{v, u}};
    return std::nullopt;
}

/// Pooled ratio sum(N)/sum(D) of a class at aggregate values `agg`.
double pooled_ratio(const RatioClass& cls, const std::vector<double>& agg) {
    double num = 0.0, den = 0.0;
    for (const auto& p : cls) {
        num += agg[p.num];
        den += agg[p.den];
    }
    return den > 1e-12 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
}

/// Largest |N - t*D| over the class, t the pooled ratio.
double class_violation(const RatioClass& cls, const std::vector<double>& agg) {
    const double t = pooled_ratio(cls, agg);
    double worst = 0.0;
    for (const auto& p : cls) worst = std::max(worst, std::abs(agg[p.num] - t * agg[p.den]));
    return worst;
}

LpModel fixed_ratio_model(const ConstraintProgram& program, const std::vector<RatioClass>& classes,
                          const std::vector<double>& agg) {
    LpModel lp = to_lp_model(program);
    for (const auto& cls : classes) {
        const double t = pooled_ratio(cls, agg);
        for (const auto& p : cls) lp.rows.push_back(ratio_row(program, p, t, Relation::eq));
    }
    return lp;
}

/// Class ratio boxes implied by aggregate boxes: N/D lies in
/// [N.lo / D.hi, N.hi / D.lo] for every pair, intersected over the class.
/// An empty intersection is returned as lo > hi.
std::vector<Interval> ratio_boxes(const std::vector<RatioClass>& classes,
                                  const std::vector<Interval>& agg) {
    std::vector<Interval> out(classes.size(), Interval{0.0, 1.0});
    for (std::size_t k = 0; k < classes.size(); ++k)
        for (const auto& p : classes[k]) {
            const auto n = agg[p.num];
            const auto d = agg[p.den];
            const double lo = d.hi > 0.0 ? n.lo / d.hi : 0.0;
            const double hi = d.lo > 0.0 ? n.hi / d.lo : 1.0;
            out[k].lo = std::max(out[k].lo, std::clamp(lo, 0.0, 1.0));
            out[k].hi = std::min(out[k].hi, std::clamp(hi, 0.0, 1.0));
        }
    return out;
}

/// How a branch-and-bound node is relaxed and split.
class Relaxation {
public:
    virtual ~Relaxation() = default;
    virtual LpModel model(const std::vector<Interval>& boxes) const = 0;
    /// Box to split at the relaxation optimum, or nullopt to close the node.
    virtual std::optional<std::size_t> branch(const std::vector<Interval>& boxes,
                                              const std::vector<double>& x) const = 0;
};

class RatioRelaxation final : public Relaxation {
public:
    RatioRelaxation(const ConstraintProgram& program, std::vector<RatioClass> classes)
        : program_(program), classes_(std::move(classes)) {}

    std::size_t dims() const { return classes_.size(); }

    LpModel model(const std::vector<Interval>& boxes) const override {
        LpModel lp = to_lp_model(program_);
        for (std::size_t k = 0; k < classes_.size(); ++k)
            for (const auto& p : classes_[k]) {
                if (boxes[k].lo > 0.0) lp.rows.push_back(ratio_row(program_, p, boxes[k].lo, Relation::ge));
                if (boxes[k].hi < 1.0) lp.rows.push_back(ratio_row(program_, p, boxes[k].hi, Relation::le));
            }
        return lp;
    }

    std::optional<std::size_t> branch(const std::vector<Interval>& boxes,
                                      const std::vector<double>& x) const override {
        const auto agg = aggregate_values(program_, std::span(x).first(program_.variable_count()));
        std::optional<std::size_t> pick;
        double worst = 0.0;
        for (std::size_t k = 0; k < classes_.size(); ++k) {
            if (boxes[k].width() < 1e-12) continue;
            const double v = class_violation(classes_[k], agg);
            if (v > worst) {
                worst = v;
                pick = k;
            }
        }
        return pick;
    }

private:
    const ConstraintProgram& program_;
    std::vector<RatioClass> classes_;
};

class McCormickRelaxation final : public Relaxation {
public:
    explicit McCormickRelaxation(const ConstraintProgram& program) : program_(program) {}

    LpModel model(const std::vector<Interval>& boxes) const override {
        return mccormick_relax(program_, boxes).lp;
    }

    std::optional<std::size_t> branch(const std::vector<Interval>& boxes,
                                      const std::vector<double>& x) const override {
        const auto relaxed = mccormick_relax(program_, boxes);
        std::optional<std::size_t> pick;
        double worst = 0.0;
        for (std::size_t j = 0; j < relaxed.products.size(); ++j) {
            const auto [u, v] = relaxed.products[j];
            const double w = x[relaxed.product_offset + j];
            const double gap = std::abs(w - x[relaxed.aggregate_offset + u] * x[relaxed.aggregate_offset + v]);
            if (gap > worst) {
                worst = gap;
                pick = j;
            }
        }
        if (!pick) return std::nullopt;
        const auto [u, v] = relaxed.products[*pick];
        const std::size_t split = boxes[v].width() > boxes[u].width() ? v : u;
        if (boxes[split].width() < 1e-12) return std::nullopt;
        return split;
    }

private:
    const ConstraintProgram& program_;
};

}  // namespace

// ---------------------------------------------------------------------------

OptimumReport solve_lp(const ConstraintProgram& program, Sense sense, const LpOptions& options) {
    if (!program.bilinear.empty())
        throw ArgumentError("solve_lp: program has bilinear rows; use bb_solve");
    const auto start = Clock::now();
    OptimumReport out;
    const auto lp = solve_simplex(to_lp_model(program), sense, options);
    out.lp_solves = 1;
    out.lp_iterations = lp.iterations;
    if (lp.status == LpStatus::infeasible) {
        out.status = SolveStatus::infeasible;
        out.infeasible_families = lp.conflict_tags;
    } else if (lp.status == LpStatus::optimal) {
        out.status = SolveStatus::optimal;
        out.value = safe_value(lp) / program.normalizer;
        out.incumbent = lp.objective / program.normalizer;
        out.point = lp.x;
        out.max_residual = program.max_residual(lp.x);
        out.dual_gap = std::abs(lp.objective - lp.dual_objective) / program.normalizer;
        out.dual_infeasibility = lp.dual_infeasibility;
    } else {
        throw PocError("simplex ended with status " + to_string(lp.status));
    }
    out.runtime_ms = elapsed_ms(start);
    return out;
}

std::optional<std::vector<Interval>> tighten_aggregate_boxes(const ConstraintProgram& program,
                                                            const LpOptions& options) {
    LpModel lp = to_lp_model(program);
    std::vector<Interval> boxes(program.aggregates.size());
    for (std::size_t a = 0; a < boxes.size(); ++a) {
        std::fill(lp.objective.begin(), lp.objective.end(), 0.0);
        for (auto c : program.aggregates[a]) lp.objective[c] = 1.0;
        const auto lo = solve_simplex(lp, Sense::minimize, options);
        if (lo.status == LpStatus::infeasible) return std::nullopt;
        const auto hi = solve_simplex(lp, Sense::maximize, options);
        double l = lo.status == LpStatus::optimal ? safe_value(lo) - 1e-9 : 0.0;
        double h = hi.status == LpStatus::optimal ? safe_value(hi) + 1e-9 : 1.0;
        l = std::clamp(l, 0.0, 1.0);
        h = std::clamp(h, 0.0, 1.0);
        if (h < l) h = l;
        boxes[a] = {l, h};
    }
    return boxes;
}

std::optional<std::vector<RatioClass>> ratio_classes(const ConstraintProgram& program, bool alternate) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
    std::vector<RatioPair> pairs;
    std::vector<std::size_t> parent;
    auto id = [&](RatioPair p) {
        auto [it, fresh] = index.emplace(std::pair{p.num, p.den}, pairs.size());
        if (fresh) {
            pairs.push_back(p);
            parent.push_back(parent.size());
        }
        return it->second;
    };
    auto root = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (const auto& b : program.bilinear) {
        const auto [A, B, C, D] = b.agg;
        const auto first = orient(program, A, C, B, D);   // A/C = B/D
        const auto second = orient(program, A, B, C, D);  // A/B = C/D
        const auto& pick = alternate ? (second ? second : first) : (first ? first : second);
        if (!pick) return std::nullopt;
        const auto i = root(id(pick->first));
        const auto j = root(id(pick->second));
        if (i != j) parent[std::max(i, j)] = std::min(i, j);
    }
    std::vector<RatioClass> classes;
    std::map<std::size_t, std::size_t> slot;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto [it, fresh] = slot.emplace(root(i), classes.size());
        if (fresh) classes.emplace_back();
        classes[it->second].push_back(pairs[i]);
    }
    return classes;
}

std::optional<std::vector<double>> ratio_linearization_search(const ConstraintProgram& program,
                                                              Sense sense,
                                                              const std::vector<double>& start,
                                                              std::size_t rounds,
                                                              const LpOptions& options) {
    const std::array<std::optional<std::vector<RatioClass>>, 2> families{ratio_classes(program, false),
                                                                         ratio_classes(program, true)};
    if (!families[0] || !families[1]) return std::nullopt;
    const double s = sign_of(sense);
    std::optional<std::vector<double>> best;
    double best_value = kInf;
    std::vector<double> point = start;
    int stalls = 0;
    for (std::size_t r = 0; r < 2 * rounds && stalls < 2; ++r) {
        const auto& classes = *families[r % 2];
        const auto lp = solve_simplex(fixed_ratio_model(program, classes, aggregate_values(program, point)),
                                      sense, options);
        if (lp.status != LpStatus::optimal || program.max_residual(lp.x) > 1e-7) {
            ++stalls;
            continue;
        }
        const double v = s * lp.objective;
        if (v < best_value - 1e-12) {
            best_value = v;
            best = lp.x;
            stalls = 0;
        } else {
            ++stalls;
        }
        point = lp.x;
    }
    return best;
}

// ---------------------------------------------------------------------------

OptimumReport bb_solve(const ConstraintProgram& program, Sense sense, const BbOptions& options) {
    if (program.bilinear.empty()) return solve_lp(program, sense, options.lp);
    const auto start = Clock::now();
    const double s = sign_of(sense);
    const double norm = program.normalizer;
    OptimumReport out;

    std::unique_ptr<Relaxation> relaxation;
    std::vector<Interval> root_boxes;
    if (auto classes = ratio_classes(program)) {
        root_boxes.assign(classes->size(), Interval{0.0, 1.0});
        if (options.tighten_boxes) {
            const auto agg = tighten_aggregate_boxes(program, options.lp);
            out.lp_solves += 2 * program.aggregates.size();
            if (agg) root_boxes = ratio_boxes(*classes, *agg);
            if (!agg || std::any_of(root_boxes.begin(), root_boxes.end(),
                                    [](const Interval& b) { return b.lo > b.hi; })) {
                const auto lin = solve_simplex(to_lp_model(program), sense, options.lp);
                out.status = SolveStatus::infeasible;
                out.infeasible_families = lin.conflict_tags;
                out.runtime_ms = elapsed_ms(start);
                return out;
            }
        }
        relaxation = std::make_unique<RatioRelaxation>(program, std::move(*classes));
    } else {
        root_boxes.assign(program.aggregates.size(), Interval{0.0, 1.0});
        if (options.tighten_boxes) {
            auto tightened = tighten_aggregate_boxes(program, options.lp);
            out.lp_solves += 2 * program.aggregates.size();
            if (!tightened) {
                const auto lin = solve_simplex(to_lp_model(program), sense, options.lp);
                out.status = SolveStatus::infeasible;
                out.infeasible_families = lin.conflict_tags;
                out.runtime_ms = elapsed_ms(start);
                return out;
            }
            root_boxes = std::move(*tightened);
        }
        relaxation = std::make_unique<McCormickRelaxation>(program);
    }

    // Everything below minimizes s * objective in unnormalized units.
    struct Node {
        std::vector<Interval> boxes;
        double bound;
        std::size_t id;
    };
    auto worse = [](const Node& a, const Node& b) {
        return a.bound > b.bound || (a.bound == b.bound && a.id > b.id);
    };
    // The linear part is well conditioned and contains every node's feasible
    // set, so its bound floors all node bounds.
    const auto linear = solve_simplex(to_lp_model(program), sense, options.lp);
    ++out.lp_solves;
    if (linear.status == LpStatus::infeasible) {
        out.status = SolveStatus::infeasible;
        out.infeasible_families = linear.conflict_tags;
        out.runtime_ms = elapsed_ms(start);
        return out;
    }
    const double floor = linear.status == LpStatus::optimal ? s * safe_value(linear) : -kInf;

    std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
    std::size_t next_id = 0;
    open.push({std::move(root_boxes), floor, next_id++});

    double closed_floor = kInf;
    double incumbent = kInf;
    std::vector<double> incumbent_point;
    std::vector<std::string> conflicts;
    bool root = true;
    SolveStatus status = SolveStatus::optimal;

    auto offer = [&](const std::vector<double>& p) {
        if (program.max_residual(p) > 1e-7) return;
        const double v = s * program.objective_value(p) * norm;
        if (v < incumbent) {
            incumbent = v;
            incumbent_point = p;
        }
    };
    auto close = [&](double bound) { closed_floor = std::min(closed_floor, bound); };

    while (true) {
        if (open.empty()) {
            status = SolveStatus::optimal;
            break;
        }
        const double certified = std::min(closed_floor, open.top().bound);
        if (incumbent - certified <= options.gap_tol * norm) {
            status = SolveStatus::tolerance_reached;
            break;
        }
        if (out.nodes_explored >= options.node_budget) {
            status = SolveStatus::node_budget_exhausted;
            break;
        }
        Node node = open.top();
        open.pop();
        if (node.bound >= incumbent) {
            close(node.bound);
            continue;
        }
        const auto lp = solve_simplex(relaxation->model(node.boxes), sense, options.lp);
        const bool was_root = root;
        root = false;
        ++out.nodes_explored;
        ++out.lp_solves;
        out.lp_iterations += lp.iterations;
        if (lp.status == LpStatus::infeasible) {
            if (was_root) conflicts = lp.conflict_tags;
            continue;
        }
        if (lp.status != LpStatus::optimal) {
            // Keep the inherited bound; the node is closed without improvement.
            close(node.bound);
            continue;
        }
        const double bound = std::max(node.bound, s * safe_value(lp));
        const std::vector<double> p(lp.x.begin(), lp.x.begin() + static_cast<long>(program.variable_count()));

        if (program.max_bilinear_residual(p) <= options.feasibility_tol) {
            offer(p);
            close(bound);
            continue;
        }
        if (options.incumbent_search && (was_root || out.nodes_explored % 16 == 0)) {
            if (auto q = ratio_linearization_search(program, sense, p, 3, options.lp)) offer(*q);
        }
        if (bound >= incumbent) {
            close(bound);
            continue;
        }
        const auto split = relaxation->branch(node.boxes, lp.x);
        if (!split) {
            close(bound);
            continue;
        }
        const double mid = node.boxes[*split].mid();
        Node left{node.boxes, bound, next_id++};
        Node right{std::move(node.boxes), bound, next_id++};
        left.boxes[*split].hi = mid;
        right.boxes[*split].lo = mid;
        open.push(std::move(left));
        open.push(std::move(right));
    }

    double certified = closed_floor;
    if (!open.empty()) certified = std::min(certified, open.top().bound);
    if (certified == kInf && incumbent == kInf) {
        out.status = SolveStatus::infeasible;
        out.infeasible_families = conflicts;
        out.runtime_ms = elapsed_ms(start);
        return out;
    }
    // an incumbent is feasible only up to tolerance, so it never lowers the
    // certified bound; it stands in only when every node was infeasible
    if (certified == kInf) certified = incumbent;
    out.status = status;
    out.value = s * certified / norm;
    if (incumbent < kInf) {
        out.incumbent = s * incumbent / norm;
        out.point = incumbent_point;
        out.max_residual = program.max_residual(incumbent_point);
    }
    out.runtime_ms = elapsed_ms(start);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

// Euclidean projection onto {p >= 0, sum p = 1}.
void project_simplex(std::vector<double>& p) {
    std::vector<double> u(p);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        const double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0) theta = t;
    }
    for (auto& v : p) v = std::max(0.0, v - theta);
}

struct Penalty {
    const ConstraintProgram& program;
    double sign;
    std::vector<double> lambda_lin, lambda_bil;
    double mu = 10.0;

    std::vector<double> lin_res(std::span<const double> p) const {
        std::vector<double> r(program.linear.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            const auto& row = program.linear[i];
            double lhs = 0.0;
            for (const auto& t : row.terms) lhs += t.coef * p[t.col];
            double v = lhs - row.rhs;
            if (row.rel == Relation::le) v = std::max(v, -lambda_lin[i] / mu);
            if (row.rel == Relation::ge) v = std::min(v, -lambda_lin[i] / mu);
            r[i] = v;
        }
        return r;
    }
    std::vector<double> bil_res(const std::vector<double>& agg) const {
        std::vector<double> r(program.bilinear.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            const auto& b = program.bilinear[i].agg;
            r[i] = agg[b[0]] * agg[b[3]] - agg[b[1]] * agg[b[2]];
        }
        return r;
    }
    double value(std::span<const double> p) const {
        double f = sign * program.objective_value(p);
        const auto rl = lin_res(p);
        for (std::size_t i = 0; i < rl.size(); ++i) f += lambda_lin[i] * rl[i] + 0.5 * mu * rl[i] * rl[i];
        const auto rb = bil_res(aggregate_values(program, p));
        for (std::size_t i = 0; i < rb.size(); ++i) f += lambda_bil[i] * rb[i] + 0.5 * mu * rb[i] * rb[i];
        return f;
    }
    std::vector<double> gradient(std::span<const double> p) const {
        std::vector<double> g(p.size(), 0.0);
        for (auto c : program.objective) g[c] += sign / program.normalizer;
        const auto rl = lin_res(p);
        for (std::size_t i = 0; i < rl.size(); ++i) {
            const double m = lambda_lin[i] + mu * rl[i];
            if (m == 0.0) continue;
            for (const auto& t : program.linear[i].terms) g[t.col] += m * t.coef;
        }
        const auto agg = aggregate_values(program, p);
        const auto rb = bil_res(agg);
        std::vector<double> ga(agg.size(), 0.0);
        for (std::size_t i = 0; i < rb.size(); ++i) {
            const double m = lambda_bil[i] + mu * rb[i];
            const auto& b = program.bilinear[i].agg;
            ga[b[0]] += m * agg[b[3]];
            ga[b[3]] += m * agg[b[0]];
            ga[b[1]] -= m * agg[b[2]];
            ga[b[2]] -= m * agg[b[1]];
        }
        for (std::size_t a = 0; a < agg.size(); ++a)
            if (ga[a] != 0.0)
                for (auto c : program.aggregates[a]) g[c] += ga[a];
        return g;
    }
};

/// Penalty descent from `p`; `visit` sees the start and every outer-round
/// iterate, so feasible points passed on the way are not lost.
template <class Visit>
void descend(const ConstraintProgram& program, double sign, std::vector<double> p, std::size_t iterations,
             Visit&& visit) {
    visit(p);
    Penalty pen{program, sign, std::vector<double>(program.linear.size(), 0.0),
                std::vector<double>(program.bilinear.size(), 0.0)};
    const std::size_t outer = 12;
    const std::size_t inner = std::max<std::size_t>(1, iterations / outer);
    double step = 1.0;
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t it = 0; it < inner; ++it) {
            const double f0 = pen.value(p);
            const auto g = pen.gradient(p);
            bool moved = false;
            for (int ls = 0; ls < 40; ++ls) {
                std::vector<double> q(p.size());
                for (std::size_t i = 0; i < p.size(); ++i) q[i] = p[i] - step * g[i];
                project_simplex(q);
                double dec = 0.0;
                for (std::size_t i = 0; i < p.size(); ++i) dec += g[i] * (p[i] - q[i]);
                if (pen.value(q) <= f0 - 1e-4 * dec) {
                    p = std::move(q);
                    step *= 1.5;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        const auto rl = pen.lin_res(p);
        for (std::size_t i = 0; i < rl.size(); ++i) {
            pen.lambda_lin[i] += pen.mu * rl[i];
            if (program.linear[i].rel == Relation::le) pen.lambda_lin[i] = std::max(0.0, pen.lambda_lin[i]);
            if (program.linear[i].rel == Relation::ge) pen.lambda_lin[i] = std::min(0.0, pen.lambda_lin[i]);
        }
        const auto rb = pen.bil_res(aggregate_values(program, p));
        for (std::size_t i = 0; i < rb.size(); ++i) pen.lambda_bil[i] += pen.mu * rb[i];
        pen.mu = std::min(pen.mu * 4.0, 1e7);
        step = 1.0 / pen.mu;
        visit(p);
    }
}

}  // namespace

InnerReport local_search_inner(const ConstraintProgram& program, Sense sense,
                               const InnerOptions& options) {
    const double s = sign_of(sense);
    const std::size_t n = program.variable_count();
    InnerReport out;
    double best = kInf;
    std::mt19937_64 rng(options.seed);
    auto record = [&](const std::vector<double>& p) {
        const double res = program.max_residual(p);
        if (res > options.eps_inner) return;
        const double v = s * program.objective_value(p);
        if (v < best) {
            best = v;
            out.value = program.objective_value(p);
            out.point = p;
            out.residual = res;
        }
    };
    auto consider = [&](std::vector<double> p) {
        ++out.restarts_run;
        if (options.iterations > 0)
            descend(program, s, std::move(p), options.iterations, record);
        else
            record(p);
    };
    for (const auto& st : options.starts) {
        if (st.size() != n) throw ArgumentError("local search start has the wrong length");
        consider(st);
    }
    for (std::size_t r = 0; r < options.restarts; ++r) {
        std::vector<double> p(n);
        double total = 0.0;
        for (auto& v : p) {
            v = -std::log(uniform01(rng));
            total += v;
        }
        for (auto& v : p) v /= total;
        consider(std::move(p));
    }
    return out;
}

SolveReport solve_bounds(const ConstraintProgram& program, const BbOptions& options) {
    const auto start = Clock::now();
    const auto lo = bb_solve(program, Sense::minimize, options);
    const auto hi = bb_solve(program, Sense::maximize, options);
    SolveReport out;
    out.nodes_explored = lo.nodes_explored + hi.nodes_explored;
    out.lp_solves = lo.lp_solves + hi.lp_solves;
    out.runtime_ms = elapsed_ms(start);
    if (lo.status == SolveStatus::infeasible || hi.status == SolveStatus::infeasible) {
        out.status = SolveStatus::infeasible;
        out.infeasible_families = lo.status == SolveStatus::infeasible ? lo.infeasible_families
                                                                       : hi.infeasible_families;
        return out;
    }
    if (lo.status == SolveStatus::optimal && hi.status == SolveStatus::optimal)
        out.status = SolveStatus::optimal;
    else if (lo.status == SolveStatus::node_budget_exhausted ||
             hi.status == SolveStatus::node_budget_exhausted)
        out.status = SolveStatus::node_budget_exhausted;
    else
        out.status = SolveStatus::tolerance_reached;
    out.bounds = {std::clamp(lo.value, 0.0, 1.0), std::clamp(hi.value, 0.0, 1.0), true};
    out.max_residual = std::max(lo.max_residual, hi.max_residual);
    if (lo.incumbent && hi.incumbent) {
        out.inner_bounds = BoundsInterval{*lo.incumbent, *hi.incumbent, false};
        out.inner_residual = out.max_residual;
    }
    return out;
}

}  // namespace poc
