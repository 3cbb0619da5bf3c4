#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "poc/core_model.hpp"
#include "poc/optimizer.hpp"
#include "poc/program_builder.hpp"

namespace poc {

enum class GraphFamily { nondesc, mediator };
enum class Availability { joint, covariate_specific, marginal_only };

std::string to_string(GraphFamily family);
GraphFamily graph_family_from_string(const std::string& text);
std::string to_string(Availability availability);
Availability availability_from_string(const std::string& text);

/// Random structural model over X, Y, independent covariates Z_1..Z_m and, in
/// the mediator family, a mediator W between X and Y.
///
/// Response functions f: A -> B are indexed in base |B| with the value at
/// a = 0 as the least significant digit. Conditional rows are indexed by the
/// covariate vector z in row-major order (Z_1 most significant).
struct ScmSpec {
    GraphFamily family = GraphFamily::nondesc;
    int nx = 2;
    int ny = 2;
    int nw = 0;
    std::vector<int> z_cards;

    std::vector<std::vector<double>> covariate_priors;  // [i][z_i]
    std::vector<std::vector<double>> treatment_cpt;     // [z][x]
    /// nondesc: [z][r] over r: X -> Y.
    std::vector<std::vector<double>> outcome_response;
    /// mediator: [z][r] over r: X -> W and [z][r] over r: W -> Y.
    std::vector<std::vector<double>> mediator_response;
    std::vector<std::vector<double>> outcome_given_mediator;

    std::size_t z_count() const;
    double z_probability(std::size_t z) const;
    std::vector<int> z_values(std::size_t z) const;

    Schema schema() const;
    /// Throws ArgumentError on bad shapes or rows that do not sum to 1.
    void validate() const;
};

/// Value of response function `r` at input `a` (base `out_card`).
int response_value(std::size_t r, int a, int out_card);

struct ScmCardinalities {
    int nx = 2;
    int ny = 2;
    int nw = 2;
    int nz = 2;
};

/// Every conditional row is drawn independently from the flat Dirichlet.
ScmSpec sample_scm(GraphFamily family, const ScmCardinalities& cards, std::size_t m,
                   std::uint64_t seed);

/// Joint of the counterfactual space the matching program uses:
/// nondescendant layout for nondesc, mediator layout for mediator.
std::vector<double> ground_truth_joint(const ScmSpec& scm);
CounterfactualSpace ground_truth_space(const ScmSpec& scm);

/// Exact evidence. Marginal tables P(X,Y), P(Y_X) are always emitted; joint
/// adds the families on all covariates, covariate_specific one pair per
/// covariate. The mediator family also emits P(X,Y,W,Z) on all covariates.
EvidenceSet scm_to_evidence(const ScmSpec& scm, Availability availability);

/// True probability of causation by enumerating response functions.
/// Throws UndefinedConditionalError when the PN/PS conditioning cell is 0.
double true_poc(const ScmSpec& scm, const QuerySpec& query);

/// Best single-covariate LP: intersection over i of the bounds from the
/// families restricted to {Z_i}. Falls back to the closed form (with `warning`
/// set) when there are no covariates.
BoundsInterval mlp_baseline_bounds(const EvidenceSet& evidence, const QuerySpec& query,
                                   std::string* warning = nullptr);

struct TrialConfig {
    GraphFamily family = GraphFamily::nondesc;
    std::size_t m = 1;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    Availability availability = Availability::covariate_specific;
    QuerySpec query = QuerySpec::pns();
    ScmCardinalities cards;
    BbOptions bb;
    BuildOptions build;
    unsigned jobs = 1;
};

struct TrialRecord {
    std::size_t trial = 0;
    BoundsInterval tp;
    BoundsInterval mlp;
    BoundsInterval proposed;
    double truth = 0.0;
    /// False when a PN/PS query is undefined on this draw; bounds are unset.
    bool defined = true;
    SolveStatus status = SolveStatus::optimal;
    std::size_t nodes = 0;
    double runtime_ms = 0.0;
};

/// Bounds of one trial; trial i depends only on (seed, i).
TrialRecord run_trial(const TrialConfig& config, std::size_t index);
/// All trials, merged in index order regardless of `jobs`.
std::vector<TrialRecord> run_trials(const TrialConfig& config);

struct SummaryStats {
    double avg_tp_lb_gain = 0.0;
    double avg_tp_ub_drop = 0.0;
    double avg_mlp_lb_gain = 0.0;
    double avg_mlp_ub_drop = 0.0;
    double avg_gap_tp = 0.0;
    double avg_gap_mlp = 0.0;
    double avg_gap_proposed = 0.0;
    std::size_t count_improved_tp = 0;
    std::size_t count_improved_mlp = 0;
    std::size_t trials = 0;  // defined records used
    std::size_t skipped = 0;
};

inline constexpr double kImprovementTol = 1e-9;

/// Averages over defined records; throws ArgumentError if there are none.
SummaryStats summarize(const std::vector<TrialRecord>& records);

struct PlotRow {
    std::size_t rank = 0;
    double tp = 0.0;
    double mlp = 0.0;
    double proposed = 0.0;
};

struct PlotSeries {
    std::vector<PlotRow> lower;
    std::vector<PlotRow> upper;
};

/// Uniform subsample without replacement, then the lower-bound series sorted
/// by tp.lb and the upper-bound series sorted by tp.ub.
PlotSeries sorted_plot_series(const std::vector<TrialRecord>& records, std::size_t sample,
                              std::uint64_t seed);

}  // namespace poc
