#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "poc/closed_form.hpp"
#include "poc/core_model.hpp"
#include "poc/rng.hpp"
#include "poc/scm_lab.hpp"

namespace poc::test {

/// m = 0 binary evidence: P(X,Y) and P(Y_X) tables.
inline EvidenceSet binary_evidence(const BinaryEvidence& ev) {
    EvidenceSet set(Schema::simple(2, 2, {}));
    auto& obs = set.new_family(EvidenceKind::observational, {});
    obs.set(0, 0, std::nullopt, {}, ev.p_xy);
    obs.set(0, 1, std::nullopt, {}, ev.p_xyp);
    obs.set(1, 0, std::nullopt, {}, ev.p_xpy);
    obs.set(1, 1, std::nullopt, {}, ev.p_xpyp);
    auto& exp = set.new_family(EvidenceKind::experimental, {});
    exp.set(0, 0, std::nullopt, {}, ev.p_yx);
    exp.set(0, 1, std::nullopt, {}, 1.0 - ev.p_yx);
    exp.set(1, 0, std::nullopt, {}, ev.p_yxp);
    exp.set(1, 1, std::nullopt, {}, 1.0 - ev.p_yxp);
    return set;
}

inline BinaryEvidence dataset_uniform() {
    return BinaryEvidence::from_cells(0.5, 0.5, 0.25, 0.25, 0.25, 0.25);
}

inline BinaryEvidence dataset_deterministic() {
    return BinaryEvidence::from_cells(1.0, 0.0, 0.5, 0.0, 0.0, 0.5);
}

inline BinaryEvidence dataset_third() {
    return BinaryEvidence::from_cells(0.7, 0.2, 0.35, 0.15, 0.10, 0.40);
}

/// Consistent binary evidence drawn from a random covariate-free model.
inline BinaryEvidence random_binary(std::uint64_t seed) {
    const auto scm = sample_scm(GraphFamily::nondesc, {}, 0, seed);
    return BinaryEvidence::from_evidence(scm_to_evidence(scm, Availability::marginal_only));
}

/// Evidence without the mediator family: what a back-door-only analysis sees.
inline EvidenceSet without_mediator(const EvidenceSet& evidence) {
    EvidenceSet out(evidence.schema());
    for (const auto& f : evidence.families())
        if (!f.with_mediator()) out.add(f);
    return out;
}

}  // namespace poc::test
