#include <doctest.h>

#include <random>

#include "poc/lp.hpp"
#include "poc/optimizer.hpp"
#include "support.hpp"

using namespace poc;

namespace {

LinearConstraint row(std::vector<Term> terms, Relation rel, double rhs, std::string tag = {}) {
    return LinearConstraint{std::move(terms), rel, rhs, std::move(tag)};
}

double violation(const LpModel& m, const std::vector<double>& x) {
    double worst = 0.0;
    for (const auto& r : m.rows) {
        double lhs = 0.0;
        for (const auto& t : r.terms) lhs += t.coef * x[t.col];
        if (r.rel != Relation::ge) worst = std::max(worst, lhs - r.rhs);
        if (r.rel != Relation::le) worst = std::max(worst, r.rhs - lhs);
    }
    for (std::size_t j = 0; j < x.size(); ++j)
        worst = std::max({worst, m.lower[j] - x[j], x[j] - m.upper[j]});
    return worst;
}

/// Class-ratio relaxation of a mediator program at its tightened root boxes.
LpModel ratio_relaxation(const ConstraintProgram& prog) {
    const auto classes = *ratio_classes(prog);
    const auto agg = *tighten_aggregate_boxes(prog);
    LpModel lp = to_lp_model(prog);
    for (const auto& cls : classes) {
        double lo = 0.0, hi = 1.0;
        for (auto pr : cls) {
            const auto n = agg[pr.num], d = agg[pr.den];
            lo = std::max(lo, d.hi > 0 ? n.lo / d.hi : 0.0);
            hi = std::min(hi, d.lo > 0 ? n.hi / d.lo : 1.0);
        }
        for (auto pr : cls) {
            auto add = [&](double r, Relation rel) {
                LinearConstraint c;
                for (auto x : prog.aggregates[pr.num]) c.terms.push_back({x, 1.0});
                for (auto x : prog.aggregates[pr.den]) c.terms.push_back({x, -r});
                c.rel = rel;
                lp.rows.push_back(c);
            };
            if (lo > 0) add(lo, Relation::ge);
            if (hi < 1) add(hi, Relation::le);
        }
    }
    return lp;
}

}  // namespace

TEST_CASE("vertex of the one-simplex") {
    LpModel m;
    m.add_column(0, kInf, 1.0);
    m.add_column(0, kInf, 0.0);
    m.rows.push_back(row({{0, 1}, {1, 1}}, Relation::eq, 1));
    const auto r = solve_simplex(m, Sense::maximize);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == doctest::Approx(1.0));
    CHECK(r.dual_objective == doctest::Approx(1.0));
}

TEST_CASE("contradictory rows are infeasible and tagged") {
    LpModel m;
    m.add_column(0, kInf);
    m.rows.push_back(row({{0, 1}}, Relation::eq, 0.6, "first"));
    m.rows.push_back(row({{0, 1}}, Relation::eq, 0.4, "second"));
    const auto r = solve_simplex(m, Sense::minimize);
    CHECK(r.status == LpStatus::infeasible);
    CHECK_FALSE(r.conflict_tags.empty());
}

TEST_CASE("bounded columns, inequalities and unboundedness") {
    LpModel m;
    m.add_column(0, 2.0, -1.0);
    m.add_column(1.0, kInf, -1.0);
    m.rows.push_back(row({{0, 1}, {1, 1}}, Relation::le, 4));
    m.rows.push_back(row({{0, 1}, {1, -1}}, Relation::ge, -2.5));
    auto r = solve_simplex(m, Sense::minimize);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == doctest::Approx(-4.0));
    CHECK(violation(m, r.x) < 1e-9);

    LpModel u;
    u.add_column(0, kInf, 1.0);
    u.add_column(0, kInf, 0.0);
    u.rows.push_back(row({{0, 1}, {1, -1}}, Relation::eq, 0));
    CHECK(solve_simplex(u, Sense::maximize).status == LpStatus::unbounded);
}

TEST_CASE("property: random feasible LPs have matching dual certificates") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + rng() % 8, m = 1 + rng() % 6;
        LpModel lp;
        std::vector<double> x0(n);
        for (std::size_t j = 0; j < n; ++j) {
            x0[j] = std::abs(coef(rng));
            lp.add_column(0.0, 2.0, coef(rng));
        }
        for (std::size_t i = 0; i < m; ++i) {
            LinearConstraint r;
            double lhs = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double a = coef(rng);
                r.terms.push_back({j, a});
                lhs += a * x0[j];
            }
            const int kind = static_cast<int>(rng() % 3);
            r.rel = kind == 0 ? Relation::eq : kind == 1 ? Relation::le : Relation::ge;
            r.rhs = lhs + (kind == 1 ? 0.3 : kind == 2 ? -0.3 : 0.0);
            lp.rows.push_back(r);
        }
        for (auto sense : {Sense::minimize, Sense::maximize}) {
            const auto r = solve_simplex(lp, sense);
            REQUIRE(r.status == LpStatus::optimal);
            REQUIRE(violation(lp, r.x) < 1e-8);
            REQUIRE(r.dual_infeasibility < 1e-8);
            REQUIRE(r.dual_objective == doctest::Approx(r.objective).epsilon(1e-8));
        }
    }
}

TEST_CASE("regression: degenerate ratio relaxations of mediator programs") {
    // near-point ratio boxes once drove phase one to a false infeasible and a
    // later pivot on a tiny leftover artificial to a wrong optimum
    for (std::uint64_t seed : {std::uint64_t{1000}, std::uint64_t{1002}, derive_seed(1, 95)}) {
        const auto scm = sample_scm(GraphFamily::mediator, {}, 1, seed);
        const auto prog = build_thm3_program(scm_to_evidence(scm, Availability::joint), QuerySpec::pns());
        const auto lp = ratio_relaxation(prog);
        const auto truth = ground_truth_joint(scm);
        REQUIRE(violation(lp, truth) < 1e-12);
        const auto linear = solve_lp(prog.linear_part(), Sense::minimize);
        for (bool presolve : {true, false}) {
            LpOptions o;
            o.presolve = presolve;
            const auto r = solve_simplex(lp, Sense::minimize, o);
            REQUIRE(r.status == LpStatus::optimal);
            CHECK(r.primal_residual < 1e-7);
            CHECK(r.objective <= true_poc(scm, QuerySpec::pns()) + 1e-7);
            CHECK(r.objective >= linear.value - 1e-7);
            CHECK(r.dual_objective == doctest::Approx(r.objective).epsilon(1e-7));
        }
    }
}

TEST_CASE("presolve does not change the optimum") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto scm = sample_scm(GraphFamily::nondesc, {}, 2, seed);
        const auto lp = to_lp_model(build_thm1_program(scm_to_evidence(scm, Availability::joint), QuerySpec::pns()));
        LpOptions off;
        off.presolve = false;
        for (auto sense : {Sense::minimize, Sense::maximize}) {
            const auto a = solve_simplex(lp, sense);
            const auto b = solve_simplex(lp, sense, off);
            REQUIRE(a.status == LpStatus::optimal);
            REQUIRE(b.status == LpStatus::optimal);
            CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
        }
    }
}
