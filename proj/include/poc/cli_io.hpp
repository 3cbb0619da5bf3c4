#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "poc/core_model.hpp"
#include "poc/optimizer.hpp"
#include "poc/program_builder.hpp"
#include "poc/scm_lab.hpp"

namespace poc {

/// Process exit codes; a stable contract of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitUsage = 2,
    kExitEvidence = 3,
    kExitInfeasible = 4,
    kExitUndefined = 5,
};

struct ProblemOptions {
    double tol = kDefaultEvidenceTol;
    std::size_t node_budget = 2000;
    double gap_tol = 1e-3;
    bool mediator_consistency = true;
    BilinearOrientation orientation = BilinearOrientation::independence;
};

/// Declared variables, evidence families, query and solver options. The
/// evidence carries the schema.
struct ProblemDocument {
    EvidenceSet evidence;
    QuerySpec query = QuerySpec::pns();
    ProblemOptions options;
    /// Known true value, set by the oracle.
    std::optional<double> truth;
};

/// JSON text. Doubles are written in shortest round-trip form, so reading the
/// text back reproduces every probability bit for bit.
std::string write_problem(const ProblemDocument& doc);
/// Throws SchemaError on malformed documents.
ProblemDocument read_problem(const std::string& text);

ProblemDocument load_problem_file(const std::string& path);
void save_problem_file(const std::string& path, const ProblemDocument& doc);

/// Document holding the exact evidence of `scm` and its true value (if defined).
ProblemDocument problem_from_scm(const ScmSpec& scm, Availability availability,
                                 const QuerySpec& query);

QuerySpec parse_query(const std::string& text);

/// Method selected from the declared roles and the evidence shape.
enum class Method { balke_lp, nondescendant_lp, covariate_specific_lp, mediator_bb };

std::string to_string(Method method);
Method select_method(const EvidenceSet& evidence);

struct BoundsResult {
    Method method = Method::balke_lp;
    SolveReport report;
    ValidationReport validation;
    std::optional<BoundsInterval> tian_pearl;
    std::vector<std::string> warnings;
};

/// Validates the evidence (EvidenceError with the offending families when it
/// fails), builds the selected program and solves both senses.
BoundsResult compute_bounds(const ProblemDocument& doc);

/// Result document as JSON text.
std::string write_result(const ProblemDocument& doc, const BoundsResult& result);

/// Fixed-precision number for CSV and text output (%.17g).
std::string format_number(double value);

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records, bool timing);
void write_summary_csv(std::ostream& out, const SummaryStats& stats);
void write_plot_csv(std::ostream& out, const std::vector<PlotRow>& rows);

struct GlobalFlags {
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::optional<double> tol;
};

struct BoundsFlags {
    std::string problem;
    /// Result document path; defaults to the problem path with ".result.json".
    std::optional<std::string> out;
    std::optional<std::size_t> budget;
    std::optional<double> gap;
};

struct SimulateFlags {
    std::string family = "nondesc";
    std::size_t m = 1;
    std::size_t trials = 100;
    std::string availability = "covariate_specific";
    std::string query = "pns";
    std::string out_dir = ".";
    std::size_t budget = 2000;
    /// Records per plot series; 0 uses min(100, usable records).
    std::size_t plot_sample = 0;
    /// Write measured solve times; otherwise runtime_ms is 0 so output is
    /// byte-reproducible.
    bool timing = false;
};

struct OracleFlags {
    std::string family = "nondesc";
    std::size_t m = 1;
    std::string availability;  // empty: joint for mediator, covariate_specific otherwise
    std::string query = "pns";
    std::optional<std::string> emit_evidence;
};

int cmd_bounds(const BoundsFlags& flags, const GlobalFlags& global, std::ostream& out,
               std::ostream& err);
int cmd_simulate(const SimulateFlags& flags, const GlobalFlags& global, std::ostream& out,
                 std::ostream& err);
int cmd_oracle(const OracleFlags& flags, const GlobalFlags& global, std::ostream& out,
               std::ostream& err);

}  // namespace poc
