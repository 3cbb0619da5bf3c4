#include <doctest.h>

#include <algorithm>
#include <random>

#include "poc/program_builder.hpp"
#include "support.hpp"

using namespace poc;
using namespace poc::test;

namespace {

std::size_t count_tagged(const ConstraintProgram& p, const std::string& tag) {
    return static_cast<std::size_t>(std::count_if(
        p.linear.begin(), p.linear.end(), [&](const auto& r) { return r.tag == tag; }));
}

}  // namespace

TEST_CASE("balke program: sizes and PNS objective") {
    const auto prog = build_thm1_program(binary_evidence(dataset_third()), QuerySpec::pns());
    CHECK(prog.family == ProgramFamily::balke);
    CHECK(prog.variable_count() == 8);
    CHECK(prog.equality_count() == 9);
    CHECK(prog.bilinear.empty());
    CHECK(prog.normalizer == 1.0);
    // Y_x = y and Y_x' = y', X free
    REQUIRE(prog.objective.size() == 2);
    for (auto c : prog.objective) {
        const auto a = prog.space.unflatten(c);
        CHECK(a[prog.space.outcome_axis(0)] == 0);
        CHECK(a[prog.space.outcome_axis(1)] == 1);
    }
}

TEST_CASE("nondescendant programs: row counts grow by 16 per covariate") {
    for (std::size_t m = 0; m <= 3; ++m) {
        const auto scm = sample_scm(GraphFamily::nondesc, {}, m, 5 + m);
        const auto joint = build_thm1_program(scm_to_evidence(scm, Availability::joint), QuerySpec::pns());
        CHECK(joint.variable_count() == (std::size_t{8} << m));
        const auto spec = build_cor2_program(scm_to_evidence(scm, Availability::covariate_specific),
                                             QuerySpec::pns());
        CHECK(spec.variable_count() == (std::size_t{8} << m));
        CHECK(spec.equality_count() == 9 + 16 * m);
        if (m >= 1) {
            CHECK(spec.family == ProgramFamily::covariate_specific);
            CHECK(joint.family == ProgramFamily::nondescendant);
        }
    }
}

TEST_CASE("mediator program: sizes and bilinear families") {
    const auto scm = sample_scm(GraphFamily::mediator, {}, 1, 11);
    const auto ev = scm_to_evidence(scm, Availability::joint);
    const auto prog = build_thm3_program(ev, QuerySpec::pns());
    CHECK(prog.family == ProgramFamily::mediator);
    CHECK(prog.variable_count() == 128);
    CHECK(prog.bilinear.size() == 32 + 16);
    CHECK(count_tagged(prog, "mediator-consistency") == 4);
    BuildOptions off;
    off.mediator_consistency = false;
    const auto plain = build_thm3_program(ev, QuerySpec::pns(), off);
    CHECK(plain.linear.size() + 4 == prog.linear.size());
    CHECK(count_tagged(plain, "mediator-consistency") == 0);
}

TEST_CASE("indicator rows have 0/1 coefficients and probability right-hand sides") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto scm = sample_scm(seed % 2 ? GraphFamily::mediator : GraphFamily::nondesc, {}, 1 + seed % 2, seed);
        const auto ev = scm_to_evidence(scm, Availability::joint);
        const auto prog = scm.family == GraphFamily::mediator ? build_thm3_program(ev, QuerySpec::pns())
                                                              : build_thm1_program(ev, QuerySpec::pns());
        for (const auto& r : prog.linear) {
            REQUIRE(r.rel == Relation::eq);
            REQUIRE(r.rhs >= 0.0);
            REQUIRE(r.rhs <= 1.0);
            for (const auto& t : r.terms) REQUIRE(t.coef == 1.0);
        }
    }
}

TEST_CASE("property: the true joint satisfies every row and evaluates to the truth") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto family = seed % 3 == 0 ? GraphFamily::mediator : GraphFamily::nondesc;
        const std::size_t m = family == GraphFamily::mediator ? 1 : 1 + seed % 3;
        const auto scm = sample_scm(family, {}, m, 100 + seed);
        const auto truth = ground_truth_joint(scm);
        for (auto query : {QuerySpec::pns(), QuerySpec::pn(), QuerySpec::ps()}) {
            const auto ev = scm_to_evidence(scm, Availability::joint);
            const auto prog = family == GraphFamily::mediator ? build_thm3_program(ev, query)
                                                              : build_thm1_program(ev, query);
            REQUIRE(prog.max_residual(truth) < 1e-12);
            REQUIRE(prog.objective_value(truth) == doctest::Approx(true_poc(scm, query)).epsilon(1e-12));
        }
    }
}

TEST_CASE("PN objective is normalized by the factual cell") {
    const auto ev = dataset_third();
    const auto prog = build_thm1_program(binary_evidence(ev), QuerySpec::pn());
    CHECK(prog.normalizer == doctest::Approx(ev.p_xy));
    // factual X = x, Y_x = y; counterfactual Y_x' = y'
    REQUIRE(prog.objective.size() == 1);
    const auto a = prog.space.unflatten(prog.objective[0]);
    CHECK(a[prog.space.treatment_axis()] == 0);
    CHECK(a[prog.space.outcome_axis(0)] == 0);
    CHECK(a[prog.space.outcome_axis(1)] == 1);
}

TEST_CASE("builder errors") {
    const auto med = scm_to_evidence(sample_scm(GraphFamily::mediator, {}, 1, 2), Availability::joint);
    CHECK_THROWS_AS(build_thm1_program(med, QuerySpec::pns()), SchemaError);

    const auto nondesc = scm_to_evidence(sample_scm(GraphFamily::nondesc, {}, 2, 2), Availability::joint);
    CHECK_THROWS_AS(build_cor2_program(nondesc, QuerySpec::pns()), SchemaError);
    CHECK_THROWS_AS(build_thm3_program(nondesc, QuerySpec::pns()), SchemaError);

    EvidenceSet exp_only(Schema::simple(2, 2, {}));
    auto& exp = exp_only.new_family(EvidenceKind::experimental, {});
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) exp.set(x, y, std::nullopt, {}, 0.5);
    CHECK_NOTHROW(build_thm1_program(exp_only, QuerySpec::pns()));
    CHECK_THROWS_AS(build_thm1_program(exp_only, QuerySpec::pn()), SchemaError);

    const auto zero = BinaryEvidence::from_cells(0.5, 0.5, 0.0, 0.5, 0.25, 0.25);
    CHECK_THROWS_AS(build_thm1_program(binary_evidence(zero), QuerySpec::pn()),
                    UndefinedConditionalError);
}

TEST_CASE("McCormick envelope examples") {
    // columns: u = 0, v = 1, w = 2
    const auto rows = mccormick_envelope(2, 0, 1, {0.0, 1.0}, {0.0, 1.0});
    auto holds = [&](double u, double v, double w) {
        const double x[3] = {u, v, w};
        for (const auto& r : rows) {
            double lhs = 0.0;
            for (const auto& t : r.terms) lhs += t.coef * x[t.col];
            if (r.rel == Relation::ge && lhs < r.rhs - 1e-12) return false;
            if (r.rel == Relation::le && lhs > r.rhs + 1e-12) return false;
        }
        return true;
    };
    CHECK(holds(0.5, 0.5, 0.0));
    CHECK(holds(0.5, 0.5, 0.5));
    CHECK_FALSE(holds(0.5, 0.5, 0.51));
    CHECK(holds(1.0, 1.0, 1.0));
    CHECK_FALSE(holds(1.0, 1.0, 0.99));
    CHECK_FALSE(holds(0.8, 0.7, 0.49));
}

TEST_CASE("property: McCormick envelopes contain the product surface") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        double a = unit(rng), b = unit(rng), c = unit(rng), d = unit(rng);
        const Interval bu{std::min(a, b), std::max(a, b)};
        const Interval bv{std::min(c, d), std::max(c, d)};
        const double u = bu.lo + unit(rng) * bu.width();
        const double v = bv.lo + unit(rng) * bv.width();
        const double x[3] = {u, v, u * v};
        for (const auto& r : mccormick_envelope(2, 0, 1, bu, bv)) {
            double lhs = 0.0;
            for (const auto& t : r.terms) lhs += t.coef * x[t.col];
            if (r.rel == Relation::ge) REQUIRE(lhs >= r.rhs - 1e-12);
            if (r.rel == Relation::le) REQUIRE(lhs <= r.rhs + 1e-12);
        }
    }
}

TEST_CASE("mccormick_relax rejects malformed boxes") {
    const auto prog = build_thm3_program(
        scm_to_evidence(sample_scm(GraphFamily::mediator, {}, 1, 4), Availability::joint), QuerySpec::pns());
    std::vector<Interval> boxes(prog.aggregates.size());
    CHECK_NOTHROW(mccormick_relax(prog, boxes));
    boxes[3] = {0.7, 0.2};
    CHECK_THROWS_AS(mccormick_relax(prog, boxes), IntervalError);
    boxes.pop_back();
    CHECK_THROWS_AS(mccormick_relax(prog, boxes), ArgumentError);
}

TEST_CASE("literal orientation does not encode the independencies") {
    BuildOptions literal;
    literal.orientation = BilinearOrientation::literal;
    std::size_t violated = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto scm = sample_scm(GraphFamily::mediator, {}, 1, seed);
        const auto ev = scm_to_evidence(scm, Availability::joint);
        const auto truth = ground_truth_joint(scm);
        CHECK(build_thm3_program(ev, QuerySpec::pns()).max_bilinear_residual(truth) < 1e-12);
        if (build_thm3_program(ev, QuerySpec::pns(), literal).max_bilinear_residual(truth) > 1e-6)
            ++violated;
    }
    CHECK(violated > 0);
}
