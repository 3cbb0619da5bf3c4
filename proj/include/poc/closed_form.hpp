#pragma once

#include "poc/core_model.hpp"

namespace poc {

/// Binary treatment/outcome summary. Index 0 is the "true" level (x, y),
/// index 1 its complement (x', y').
struct BinaryEvidence {
    double p_yx = 0.0;    // P(y_x)
    double p_yxp = 0.0;   // P(y_{x'})
    double p_xy = 0.0;    // P(x, y)
    double p_xyp = 0.0;   // P(x, y')
    double p_xpy = 0.0;   // P(x', y)
    double p_xpyp = 0.0;  // P(x', y')
    double p_y = 0.0;     // P(y)

    /// Builds p_y from the joint cells.
    static BinaryEvidence from_cells(double p_yx, double p_yxp, double p_xy, double p_xyp,
                                     double p_xpy, double p_xpyp);
    /// Marginal experimental and observational tables of a binary problem.
    static BinaryEvidence from_evidence(const EvidenceSet& evidence);

    /// Throws EvidenceError on entries outside [0,1] or inconsistent sums.
    void validate(double tol = kDefaultEvidenceTol) const;
};

/// x <-> x' and y <-> y'.
BinaryEvidence swap_labels(const BinaryEvidence& ev);

BoundsInterval tp_pns_bounds(const BinaryEvidence& ev, double tol = kDefaultEvidenceTol);
/// Throws UndefinedConditionalError when P(x,y) = 0.
BoundsInterval tp_pn_bounds(const BinaryEvidence& ev, double tol = kDefaultEvidenceTol);
/// Throws UndefinedConditionalError when P(x',y') = 0.
BoundsInterval tp_ps_bounds(const BinaryEvidence& ev, double tol = kDefaultEvidenceTol);

/// Dispatch on the query kind; only the default binary events are supported.
BoundsInterval tp_bounds(const BinaryEvidence& ev, const QuerySpec& query,
                         double tol = kDefaultEvidenceTol);

}  // namespace poc
