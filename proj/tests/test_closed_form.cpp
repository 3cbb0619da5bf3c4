#include <doctest.h>

#include <algorithm>

#include "poc/closed_form.hpp"
#include "support.hpp"

using namespace poc;

namespace {

/// Independent evaluation of the PNS lower and upper terms.
BoundsInterval pns_terms(const BinaryEvidence& e) {
    const double p_ypxp = 1.0 - e.p_yxp;
    const double lb = std::max({0.0, e.p_yx - e.p_yxp, e.p_y - e.p_yxp, e.p_yx - e.p_y});
    const double ub = std::min({e.p_yx, p_ypxp, e.p_xy + e.p_xpyp, e.p_yx - e.p_yxp + e.p_xyp + e.p_xpy});
    return {std::clamp(lb, 0.0, 1.0), std::clamp(ub, 0.0, 1.0), true};
}

}  // namespace

TEST_CASE("PNS closed form on the reference datasets") {
    auto b = tp_pns_bounds(test::dataset_deterministic());
    CHECK(b.lb == doctest::Approx(1.0));
    CHECK(b.ub == doctest::Approx(1.0));
    CHECK(b.certified);

    b = tp_pns_bounds(test::dataset_uniform());
    CHECK(b.lb == doctest::Approx(0.0));
    CHECK(b.ub == doctest::Approx(0.5));

    b = tp_pns_bounds(test::dataset_third());
    CHECK(b.lb == doctest::Approx(0.5));
    CHECK(b.ub == doctest::Approx(0.7));
}

TEST_CASE("PN closed form on the reference datasets") {
    auto b = tp_pn_bounds(test::dataset_third());
    CHECK(b.lb == doctest::Approx(0.25 / 0.35));
    CHECK(b.ub == doctest::Approx(1.0));

    // no outcome without treatment
    const auto forced = BinaryEvidence::from_cells(0.7, 0.0, 0.4, 0.0, 0.0, 0.6);
    b = tp_pn_bounds(forced);
    CHECK(b.lb == doctest::Approx(1.0));
    CHECK(b.ub == doctest::Approx(1.0));

    b = tp_pn_bounds(test::dataset_uniform());
    CHECK(b.lb == doctest::Approx(0.0));
    CHECK(b.ub == doctest::Approx(1.0));
}

TEST_CASE("PS closed form on the reference datasets") {
    auto b = tp_ps_bounds(test::dataset_uniform());
    CHECK(b.lb == doctest::Approx(0.0));
    CHECK(b.ub == doctest::Approx(1.0));

    b = tp_ps_bounds(test::dataset_third());
    CHECK(b.lb == doctest::Approx(0.625));
    CHECK(b.ub == doctest::Approx(0.875));
}

TEST_CASE("undefined conditionals") {
    const auto no_xy = BinaryEvidence::from_cells(0.3, 0.5, 0.0, 0.5, 0.3, 0.2);
    CHECK_THROWS_AS(tp_pn_bounds(no_xy), UndefinedConditionalError);
    const auto no_xpyp = BinaryEvidence::from_cells(0.5, 0.9, 0.3, 0.2, 0.5, 0.0);
    CHECK_THROWS_AS(tp_ps_bounds(no_xpyp), UndefinedConditionalError);
}

TEST_CASE("inconsistent evidence is rejected, not projected") {
    auto bad = test::dataset_third();
    bad.p_y = 0.6;
    CHECK_THROWS_AS(tp_pns_bounds(bad), EvidenceError);
    bad = test::dataset_third();
    bad.p_xpyp = 0.5;
    CHECK_THROWS_AS(tp_pns_bounds(bad), EvidenceError);
    bad = test::dataset_third();
    bad.p_yx = 1.2;
    CHECK_THROWS_AS(tp_pns_bounds(bad), EvidenceError);
}

TEST_CASE("property: PS equals PN of the relabeled evidence") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto ev = test::random_binary(seed);
        const auto ps = tp_ps_bounds(ev);
        const auto pn = tp_pn_bounds(swap_labels(ev));
        REQUIRE(ps.lb == doctest::Approx(pn.lb).epsilon(1e-12));
        REQUIRE(ps.ub == doctest::Approx(pn.ub).epsilon(1e-12));
    }
}

TEST_CASE("property: PNS bounds match an independent term evaluation and are ordered") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto ev = test::random_binary(seed);
        const auto b = tp_pns_bounds(ev);
        const auto ref = pns_terms(ev);
        REQUIRE(b.lb == doctest::Approx(ref.lb).epsilon(1e-12));
        REQUIRE(b.ub == doctest::Approx(ref.ub).epsilon(1e-12));
        REQUIRE(b.lb <= b.ub + 1e-12);
    }
}

TEST_CASE("property: closed forms contain the true values of random models") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto scm = sample_scm(GraphFamily::nondesc, {}, seed % 3, seed);
        const auto ev = BinaryEvidence::from_evidence(scm_to_evidence(scm, Availability::marginal_only));
        REQUIRE(tp_pns_bounds(ev).contains(true_poc(scm, QuerySpec::pns()), 1e-9));
        REQUIRE(tp_pn_bounds(ev).contains(true_poc(scm, QuerySpec::pn()), 1e-9));
        REQUIRE(tp_ps_bounds(ev).contains(true_poc(scm, QuerySpec::ps()), 1e-9));
    }
}
