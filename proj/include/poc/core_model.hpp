#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace poc {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class PocError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Out-of-range index or offset.
class IndexError : public PocError {
public:
    using PocError::PocError;
};

/// Malformed problem: undeclared covariates, wrong roles, bad shapes.
class SchemaError : public PocError {
public:
    using PocError::PocError;
};

/// Evidence that fails normalization or cross-family consistency.
class EvidenceError : public PocError {
public:
    using PocError::PocError;
};

/// A conditional quantity whose conditioning event has probability zero.
class UndefinedConditionalError : public PocError {
public:
    using PocError::PocError;
};

class ArgumentError : public PocError {
public:
    using PocError::PocError;
};

inline constexpr double kDefaultEvidenceTol = 1e-6;
inline constexpr double kDefaultNumericTol = 1e-8;

// ---------------------------------------------------------------------------
// Variables
// ---------------------------------------------------------------------------

enum class Role { treatment, outcome, nondescendant_covariate, backdoor_covariate, mediator };

std::string to_string(Role role);
Role role_from_string(const std::string& text);

struct VariableSpec {
    std::string name;
    int cardinality = 2;
    Role role = Role::treatment;
};

/// The declared variables of one problem. Covariates keep declaration order;
/// a covariate's position in that order is its covariate index everywhere else.
class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<VariableSpec> variables);

    /// X, Y, covariates Z1..Zm and an optional mediator W.
    static Schema simple(int nx, int ny, std::vector<int> covariate_cards,
                         Role covariate_role = Role::nondescendant_covariate,
                         std::optional<int> mediator_card = std::nullopt);

    const std::vector<VariableSpec>& variables() const { return variables_; }
    const VariableSpec& treatment() const { return variables_[treatment_]; }
    const VariableSpec& outcome() const { return variables_[outcome_]; }
    const VariableSpec* mediator() const {
        return mediator_ ? &variables_[*mediator_] : nullptr;
    }
    std::size_t covariate_count() const { return covariates_.size(); }
    const VariableSpec& covariate(std::size_t i) const { return variables_[covariates_[i]]; }
    std::vector<int> covariate_cards() const;
    int nx() const { return treatment().cardinality; }
    int ny() const { return outcome().cardinality; }
    int nw() const { return mediator() ? mediator()->cardinality : 0; }

    /// Covariate index for a variable name; throws SchemaError if the name is
    /// not a declared covariate.
    std::size_t covariate_index(const std::string& name) const;

private:
    std::vector<VariableSpec> variables_;
    std::size_t treatment_ = 0;
    std::size_t outcome_ = 0;
    std::optional<std::size_t> mediator_;
    std::vector<std::size_t> covariates_;
};

// ---------------------------------------------------------------------------
// Counterfactual index space
// ---------------------------------------------------------------------------

enum class AxisKind { potential_outcome, potential_mediator, covariate, mediator, treatment };

struct Axis {
    std::string label;
    int cardinality = 0;
    AxisKind kind = AxisKind::treatment;
    int ref = 0;  // treatment arm for potential axes, covariate index for covariates
};

/// Row-major multi-index over the joint counterfactual distribution; the
/// first axis is the most significant.
class CounterfactualSpace {
public:
    CounterfactualSpace() = default;
    explicit CounterfactualSpace(std::vector<Axis> axes);

    /// [Y_x1..Y_xn, Z_1..Z_m, X]
    static CounterfactualSpace nondescendant_layout(int nx, int ny, std::span<const int> z_cards);
    /// [Y_x1..Y_xn, W_x1..W_xn, Z_1..Z_m, W, X]
    static CounterfactualSpace mediator_layout(int nx, int ny, int nw,
                                               std::span<const int> z_cards);

    const std::vector<Axis>& axes() const { return axes_; }
    std::size_t axis_count() const { return axes_.size(); }
    std::size_t total_size() const { return total_; }
    std::size_t stride(std::size_t axis) const { return strides_[axis]; }

    std::size_t flatten(std::span<const int> assignment) const;
    std::vector<int> unflatten(std::size_t offset) const;

    /// Axis positions by role; -1 when absent.
    int outcome_axis(int arm) const;
    int mediator_axis(int arm) const;
    int covariate_axis(std::size_t covariate) const;
    int observed_mediator_axis() const { return observed_mediator_; }
    int treatment_axis() const { return treatment_; }
    int arm_count() const { return static_cast<int>(outcome_axes_.size()); }
    std::size_t covariate_axis_count() const { return covariate_axes_.size(); }

    /// Offsets of every cell whose assignment agrees with `fixed` (axis -> value).
    std::vector<std::size_t> cells_matching(const std::vector<std::pair<int, int>>& fixed) const;

private:
    std::vector<Axis> axes_;
    std::vector<std::size_t> strides_;
    std::size_t total_ = 1;
    std::vector<int> outcome_axes_;
    std::vector<int> mediator_axes_;
    std::vector<int> covariate_axes_;
    int observed_mediator_ = -1;
    int treatment_ = -1;
};

// ---------------------------------------------------------------------------
// Evidence
// ---------------------------------------------------------------------------

enum class EvidenceKind { experimental, observational };

std::string to_string(EvidenceKind kind);

/// One probability cell. For experimental entries `x` is the intervention arm;
/// for observational entries it is the observed treatment value.
struct EvidenceEntry {
    EvidenceKind kind = EvidenceKind::observational;
    int x = 0;
    int y = 0;
    std::map<std::size_t, int> z;  // covariate index -> value
    std::optional<int> w;
    double p = 0.0;
};

/// A complete table P(x, y[, w], z_S) (observational) or P(y_x, z_S) for
/// every arm x (experimental). Cells are stored dense in the order
/// [x, y, (w), z_S...], with S sorted ascending.
class EvidenceFamily {
public:
    EvidenceFamily() = default;
    EvidenceFamily(EvidenceKind kind, std::vector<std::size_t> covariates, bool with_mediator,
                   const Schema& schema);

    EvidenceKind kind() const { return kind_; }
    const std::vector<std::size_t>& covariates() const { return covariates_; }
    bool with_mediator() const { return with_mediator_; }
    const std::string& name() const { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }

    /// Cell dimensions in storage order.
    const std::vector<int>& dims() const { return dims_; }
    std::size_t cell_count() const { return values_.size(); }

    /// Records a cell; a second write to the same cell is remembered as a
    /// duplicate (reported by validate_evidence) and does not overwrite.
    void set(int x, int y, std::optional<int> w, std::span<const int> z_values, double p);
    void set_flat(std::size_t cell, double p);
    void add(const EvidenceEntry& entry);

    double at(int x, int y, std::optional<int> w, std::span<const int> z_values) const;
    double at_flat(std::size_t cell) const { return values_[cell]; }
    bool present_flat(std::size_t cell) const { return present_[cell] != 0; }
    std::size_t flat(int x, int y, std::optional<int> w, std::span<const int> z_values) const;
    /// Inverse of flat(): {x, y, w (0 when absent), z...}.
    std::vector<int> cell_indices(std::size_t cell) const;

    const std::vector<std::size_t>& duplicate_cells() const { return duplicates_; }
    bool complete() const;
    std::vector<EvidenceEntry> entries() const;

    /// Same kind, summed down to `keep` (a subset of covariates()) and
    /// optionally dropping the mediator column.
    EvidenceFamily marginalize(const std::vector<std::size_t>& keep, bool keep_mediator,
                               const Schema& schema) const;

private:
    EvidenceKind kind_ = EvidenceKind::observational;
    std::vector<std::size_t> covariates_;
    bool with_mediator_ = false;
    std::string name_;
    std::vector<int> dims_;
    std::vector<double> values_;
    std::vector<std::uint8_t> present_;
    std::vector<std::size_t> duplicates_;
};

/// Default display name, e.g. "P(X,Y,W,Z1)" or "P(Y_X,Z2)".
std::string family_label(EvidenceKind kind, const std::vector<std::size_t>& covariates,
                         bool with_mediator, const Schema& schema);

class EvidenceSet {
public:
    EvidenceSet() = default;
    explicit EvidenceSet(Schema schema) : schema_(std::move(schema)) {}

    const Schema& schema() const { return schema_; }
    const std::vector<EvidenceFamily>& families() const { return families_; }

    /// Appends a family; the family must have been built against this schema.
    void add(EvidenceFamily family);
    EvidenceFamily& new_family(EvidenceKind kind, std::vector<std::size_t> covariates,
                               bool with_mediator = false);

    const EvidenceFamily* find(EvidenceKind kind, const std::vector<std::size_t>& covariates,
                               bool with_mediator) const;

    /// P(X=x, Y=y) from any observational family, or nullopt.
    std::optional<double> observational_cell(int x, int y) const;
    /// P(Y_x = y) from any experimental family, or nullopt.
    std::optional<double> experimental_cell(int x, int y) const;
    /// Distribution of the full covariate vector (row-major over all
    /// covariates) if some family conditions on all of them.
    std::optional<std::vector<double>> joint_covariate_distribution() const;

    /// Families conditioning only on covariates in `keep`, with each family
    /// marginalized to its intersection with `keep` and the mediator dropped.
    /// One family per (kind, pattern) survives, the first in order.
    EvidenceSet restricted_to(const std::vector<std::size_t>& keep) const;

private:
    Schema schema_;
    std::vector<EvidenceFamily> families_;
};

struct ValidationIssue {
    enum class Severity { warning, error } severity = Severity::error;
    std::string message;
    std::vector<std::string> families;
    double magnitude = 0.0;
};

struct ValidationReport {
    struct FamilyResidual {
        std::string family;
        double residual = 0.0;
    };
    std::vector<FamilyResidual> residuals;
    std::vector<ValidationIssue> issues;

    bool ok() const;
    double max_residual() const;
    std::vector<const ValidationIssue*> errors() const;
    /// Joined error messages, for exceptions and CLI output.
    std::string summary() const;
};

/// Checks completeness, duplicates, signs, per-family normalization and
/// cross-family marginal agreement. Residuals above `tol` are errors.
ValidationReport validate_evidence(const EvidenceSet& evidence, double tol = kDefaultEvidenceTol);

// ---------------------------------------------------------------------------
// Queries and results
// ---------------------------------------------------------------------------

enum class QueryKind { pns, pn, ps };

std::string to_string(QueryKind kind);
QueryKind query_kind_from_string(const std::string& text);

struct QuerySpec {
    QueryKind kind = QueryKind::pns;
    /// PNS(k): (arm, outcome) pairs, one per counterfactual event.
    std::vector<std::pair<int, int>> targets;
    /// PN/PS: P(Y_{cf.x} = cf.y | X = factual.x, Y = factual.y).
    std::pair<int, int> factual{0, 0};
    std::pair<int, int> counterfactual{1, 1};

    /// Y_{x_t} = y_t for t < k.
    static QuerySpec pns(int k = 2);
    /// P(y'_{x'} | x, y) with x, y at index 0.
    static QuerySpec pn();
    /// P(y_x | x', y').
    static QuerySpec ps();

    void validate(int nx, int ny) const;
};

struct BoundsInterval {
    double lb = 0.0;
    double ub = 1.0;
    bool certified = false;

    double width() const { return ub - lb; }
    bool contains(double value, double slack = 0.0) const {
        return value >= lb - slack && value <= ub + slack;
    }
    bool within(const BoundsInterval& outer, double slack = 0.0) const {
        return lb >= outer.lb - slack && ub <= outer.ub + slack;
    }
};

}  // namespace poc
