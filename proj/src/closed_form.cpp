#include "poc/closed_form.hpp"

#include <algorithm>
#include <cmath>

namespace poc {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

BinaryEvidence BinaryEvidence::from_cells(double p_yx, double p_yxp, double p_xy, double p_xyp,
                                          double p_xpy, double p_xpyp) {
    return {p_yx, p_yxp, p_xy, p_xyp, p_xpy, p_xpyp, p_xy + p_xpy};
}

BinaryEvidence BinaryEvidence::from_evidence(const EvidenceSet& evidence) {
    const auto& s = evidence.schema();
    if (s.nx() != 2 || s.ny() != 2)
        throw SchemaError("closed-form bounds need binary treatment and outcome");
    auto exp = [&](int x) {
        auto v = evidence.experimental_cell(x, 0);
        if (!v) throw SchemaError("closed-form bounds need experimental data");
        return *v;
    };
    auto obs = [&](int x, int y) {
        auto v = evidence.observational_cell(x, y);
        if (!v) throw SchemaError("closed-form bounds need observational data");
        return *v;
    };
    return from_cells(exp(0), exp(1), obs(0, 0), obs(0, 1), obs(1, 0), obs(1, 1));
}

void BinaryEvidence::validate(double tol) const {
    for (double v : {p_yx, p_yxp, p_xy, p_xyp, p_xpy, p_xpyp, p_y})
        if (!std::isfinite(v) || v < -tol || v > 1.0 + tol)
            throw EvidenceError("binary evidence entry outside [0,1]");
    const double total = p_xy + p_xyp + p_xpy + p_xpyp;
    if (std::abs(total - 1.0) > tol)
        throw EvidenceError("observational cells sum to " + std::to_string(total));
    if (std::abs(p_y - (p_xy + p_xpy)) > tol)
        throw EvidenceError("P(y) disagrees with P(x,y) + P(x',y)");
}

BinaryEvidence swap_labels(const BinaryEvidence& ev) {
    BinaryEvidence s;
    s.p_yx = 1.0 - ev.p_yxp;  // P(y'_{x'})
    s.p_yxp = 1.0 - ev.p_yx;  // P(y'_x)
    s.p_xy = ev.p_xpyp;
    s.p_xyp = ev.p_xpy;
    s.p_xpy = ev.p_xyp;
    s.p_xpyp = ev.p_xy;
    s.p_y = 1.0 - ev.p_y;
    return s;
}

BoundsInterval tp_pns_bounds(const BinaryEvidence& ev, double tol) {
    ev.validate(tol);
    const double lb = std::max({0.0, ev.p_yx - ev.p_yxp, ev.p_y - ev.p_yxp, ev.p_yx - ev.p_y});
    const double ub = std::min({ev.p_yx, 1.0 - ev.p_yxp, ev.p_xy + ev.p_xpyp,
                                ev.p_yx - ev.p_yxp + ev.p_xyp + ev.p_xpy});
    return {clamp01(lb), clamp01(ub), true};
}

BoundsInterval tp_pn_bounds(const BinaryEvidence& ev, double tol) {
    ev.validate(tol);
    if (ev.p_xy <= 0.0) throw UndefinedConditionalError("PN is undefined when P(x,y) = 0");
    const double lb = std::max(0.0, (ev.p_y - ev.p_yxp) / ev.p_xy);
    const double ub = std::min(1.0, ((1.0 - ev.p_yxp) - ev.p_xpyp) / ev.p_xy);
    return {clamp01(lb), clamp01(ub), true};
}

BoundsInterval tp_ps_bounds(const BinaryEvidence& ev, double tol) {
    if (ev.p_xpyp <= 0.0) throw UndefinedConditionalError("PS is undefined when P(x',y') = 0");
    return tp_pn_bounds(swap_labels(ev), tol);
}

BoundsInterval tp_bounds(const BinaryEvidence& ev, const QuerySpec& query, double tol) {
    switch (query.kind) {
    case QueryKind::pns:
        if (query.targets != QuerySpec::pns(2).targets)
            throw SchemaError("closed-form PNS covers P(y_x, y'_x') only");
        return tp_pns_bounds(ev, tol);
    case QueryKind::pn:
        if (query.factual != QuerySpec::pn().factual ||
            query.counterfactual != QuerySpec::pn().counterfactual)
            throw SchemaError("closed-form PN covers P(y'_x' | x, y) only");
        return tp_pn_bounds(ev, tol);
    case QueryKind::ps:
        if (query.factual != QuerySpec::ps().factual ||
            query.counterfactual != QuerySpec::ps().counterfactual)
            throw SchemaError("closed-form PS covers P(y_x | x', y') only");
        return tp_ps_bounds(ev, tol);
    }
    return {};
}

}  // namespace poc
