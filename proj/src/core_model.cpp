#include "poc/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace poc {

std::string to_string(Role role) {
    switch (role) {
    case Role::treatment: return "treatment";
    case Role::outcome: return "outcome";
    case Role::nondescendant_covariate: return "nondescendant_covariate";
    case Role::backdoor_covariate: return "backdoor_covariate";
    case Role::mediator: return "mediator";
    }
    return "?";
}

Role role_from_string(const std::string& text) {
    if (text == "treatment") return Role::treatment;
    if (text == "outcome") return Role::outcome;
    if (text == "nondescendant_covariate") return Role::nondescendant_covariate;
    if (text == "backdoor_covariate") return Role::backdoor_covariate;
    if (text == "mediator") return Role::mediator;
    throw SchemaError("unknown variable role '" + text + "'");
}

std::string to_string(EvidenceKind kind) {
    return kind == EvidenceKind::experimental ? "experimental" : "observational";
}

std::string to_string(QueryKind kind) {
    switch (kind) {
    case QueryKind::pns: return "PNS";
    case QueryKind::pn: return "PN";
    case QueryKind::ps: return "PS";
    }
    return "?";
}

QueryKind query_kind_from_string(const std::string& text) {
    if (text == "PNS" || text == "pns") return QueryKind::pns;
    if (text == "PN" || text == "pn") return QueryKind::pn;
    if (text == "PS" || text == "ps") return QueryKind::ps;
    throw SchemaError("unknown query kind '" + text + "'");
}

// ---------------------------------------------------------------------------
// Schema

Schema::Schema(std::vector<VariableSpec> variables) : variables_(std::move(variables)) {
    std::set<std::string> names;
    int treatments = 0;
    int outcomes = 0;
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const auto& v = variables_[i];
        if (v.name.empty()) throw SchemaError("variable with empty name");
        if (!names.insert(v.name).second) throw SchemaError("duplicate variable '" + v.name + "'");
        if (v.cardinality < 2)
            throw SchemaError("variable '" + v.name + "' has cardinality < 2");
        switch (v.role) {
        case Role::treatment:
            treatment_ = i;
            ++treatments;
            break;
        case Role::outcome:
            outcome_ = i;
            ++outcomes;
            break;
        case Role::mediator:
            if (mediator_) throw SchemaError("at most one mediator may be declared");
            mediator_ = i;
            break;
        default:
            covariates_.push_back(i);
        }
    }
    if (treatments != 1) throw SchemaError("exactly one treatment variable is required");
    if (outcomes != 1) throw SchemaError("exactly one outcome variable is required");
}

Schema Schema::simple(int nx, int ny, std::vector<int> covariate_cards, Role covariate_role,
                      std::optional<int> mediator_card) {
    std::vector<VariableSpec> vars{{"X", nx, Role::treatment}, {"Y", ny, Role::outcome}};
    for (std::size_t i = 0; i < covariate_cards.size(); ++i)
        vars.push_back({"Z" + std::to_string(i + 1), covariate_cards[i], covariate_role});
    if (mediator_card) vars.push_back({"W", *mediator_card, Role::mediator});
    return Schema(std::move(vars));
}

std::vector<int> Schema::covariate_cards() const {
    std::vector<int> cards;
    for (auto i : covariates_) cards.push_back(variables_[i].cardinality);
    return cards;
}

std::size_t Schema::covariate_index(const std::string& name) const {
    for (std::size_t i = 0; i < covariates_.size(); ++i)
        if (variables_[covariates_[i]].name == name) return i;
    throw SchemaError("'" + name + "' is not a declared covariate");
}

// ---------------------------------------------------------------------------
// CounterfactualSpace

CounterfactualSpace::CounterfactualSpace(std::vector<Axis> axes) : axes_(std::move(axes)) {
    strides_.assign(axes_.size(), 1);
    total_ = 1;
    for (std::size_t i = axes_.size(); i-- > 0;) {
        if (axes_[i].cardinality < 1) throw SchemaError("axis '" + axes_[i].label + "' is empty");
        strides_[i] = total_;
        total_ *= static_cast<std::size_t>(axes_[i].cardinality);
    }
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        const auto& a = axes_[i];
        auto place = [&](std::vector<int>& slots) {
            if (slots.size() <= static_cast<std::size_t>(a.ref)) slots.resize(a.ref + 1, -1);
            slots[a.ref] = static_cast<int>(i);
        };
        switch (a.kind) {
        case AxisKind::potential_outcome: place(outcome_axes_); break;
        case AxisKind::potential_mediator: place(mediator_axes_); break;
        case AxisKind::covariate: place(covariate_axes_); break;
        case AxisKind::mediator: observed_mediator_ = static_cast<int>(i); break;
        case AxisKind::treatment: treatment_ = static_cast<int>(i); break;
        }
    }
}

CounterfactualSpace CounterfactualSpace::nondescendant_layout(int nx, int ny,
                                                              std::span<const int> z_cards) {
    std::vector<Axis> axes;
    for (int t = 0; t < nx; ++t)
        axes.push_back({"Y_x" + std::to_string(t), ny, AxisKind::potential_outcome, t});
    for (std::size_t i = 0; i < z_cards.size(); ++i)
        axes.push_back({"Z" + std::to_string(i + 1), z_cards[i], AxisKind::covariate,
                        static_cast<int>(i)});
    axes.push_back({"X", nx, AxisKind::treatment, 0});
    return CounterfactualSpace(std::move(axes));
}

CounterfactualSpace CounterfactualSpace::mediator_layout(int nx, int ny, int nw,
                                                         std::span<const int> z_cards) {
    std::vector<Axis> axes;
    for (int t = 0; t < nx; ++t)
        axes.push_back({"Y_x" + std::to_string(t), ny, AxisKind::potential_outcome, t});
    for (int t = 0; t < nx; ++t)
        axes.push_back({"W_x" + std::to_string(t), nw, AxisKind::potential_mediator, t});
    for (std::size_t i = 0; i < z_cards.size(); ++i)
        axes.push_back({"Z" + std::to_string(i + 1), z_cards[i], AxisKind::covariate,
                        static_cast<int>(i)});
    axes.push_back({"W", nw, AxisKind::mediator, 0});
    axes.push_back({"X", nx, AxisKind::treatment, 0});
    return CounterfactualSpace(std::move(axes));
}

std::size_t CounterfactualSpace::flatten(std::span<const int> assignment) const {
    if (assignment.size() != axes_.size())
        throw IndexError("assignment has " + std::to_string(assignment.size()) +
                         " indices, space has " + std::to_string(axes_.size()) + " axes");
    std::size_t offset = 0;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        if (assignment[i] < 0 || assignment[i] >= axes_[i].cardinality)
            throw IndexError("index " + std::to_string(assignment[i]) + " out of range for axis " +
                             axes_[i].label);
        offset += static_cast<std::size_t>(assignment[i]) * strides_[i];
    }
    return offset;
}

std::vector<int> CounterfactualSpace::unflatten(std::size_t offset) const {
    if (offset >= total_)
        throw IndexError("offset " + std::to_string(offset) + " out of range [0, " +
                         std::to_string(total_) + ")");
    std::vector<int> out(axes_.size());
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        out[i] = static_cast<int>(offset / strides_[i]);
        offset %= strides_[i];
    }
    return out;
}

namespace {
int slot(const std::vector<int>& slots, std::size_t i) {
    return i < slots.size() ? slots[i] : -1;
}
}  // namespace

int CounterfactualSpace::outcome_axis(int arm) const { return slot(outcome_axes_, arm); }
int CounterfactualSpace::mediator_axis(int arm) const { return slot(mediator_axes_, arm); }
int CounterfactualSpace::covariate_axis(std::size_t covariate) const {
    return slot(covariate_axes_, covariate);
}

std::vector<std::size_t> CounterfactualSpace::cells_matching(
    const std::vector<std::pair<int, int>>& fixed) const {
    std::vector<int> pinned(axes_.size(), -1);
    std::size_t base = 0;
    for (auto [axis, value] : fixed) {
        if (axis < 0 || static_cast<std::size_t>(axis) >= axes_.size())
            throw IndexError("axis " + std::to_string(axis) + " out of range");
        if (value < 0 || value >= axes_[axis].cardinality)
            throw IndexError("value out of range for axis " + axes_[axis].label);
        if (pinned[axis] >= 0) {
            if (pinned[axis] != value) return {};
            continue;
        }
        pinned[axis] = value;
        base += static_cast<std::size_t>(value) * strides_[axis];
    }
    std::vector<std::size_t> free_axes;
    std::size_t count = 1;
    for (std::size_t i = 0; i < axes_.size(); ++i)
        if (pinned[i] < 0) {
            free_axes.push_back(i);
            count *= axes_[i].cardinality;
        }
    std::vector<std::size_t> cells;
    cells.reserve(count);
    std::vector<int> counter(free_axes.size(), 0);
    std::size_t offset = base;
    for (std::size_t n = 0; n < count; ++n) {
        cells.push_back(offset);
        // odometer, last free axis fastest, which keeps offsets ascending
        for (std::size_t k = free_axes.size(); k-- > 0;) {
            const auto ax = free_axes[k];
            if (++counter[k] < axes_[ax].cardinality) {
                offset += strides_[ax];
                break;
            }
            offset -= static_cast<std::size_t>(counter[k] - 1) * strides_[ax];
            counter[k] = 0;
        }
    }
    return cells;
}

// ---------------------------------------------------------------------------
// EvidenceFamily

std::string family_label(EvidenceKind kind, const std::vector<std::size_t>& covariates,
                         bool with_mediator, const Schema& schema) {
    std::string s = "P(";
    if (kind == EvidenceKind::experimental) {
        s += schema.outcome().name + "_" + schema.treatment().name;
    } else {
        s += schema.treatment().name + "," + schema.outcome().name;
        if (with_mediator && schema.mediator()) s += "," + schema.mediator()->name;
    }
    for (auto c : covariates) s += "," + schema.covariate(c).name;
    return s + ")";
}

EvidenceFamily::EvidenceFamily(EvidenceKind kind, std::vector<std::size_t> covariates,
                               bool with_mediator, const Schema& schema)
    : kind_(kind), covariates_(std::move(covariates)), with_mediator_(with_mediator) {
    std::sort(covariates_.begin(), covariates_.end());
    if (std::adjacent_find(covariates_.begin(), covariates_.end()) != covariates_.end())
        throw SchemaError("family lists a covariate twice");
    for (auto c : covariates_)
        if (c >= schema.covariate_count())
            throw SchemaError("family references undeclared covariate #" + std::to_string(c));
    if (with_mediator_) {
        if (kind_ == EvidenceKind::experimental)
            throw SchemaError("experimental families cannot carry a mediator column");
        if (!schema.mediator()) throw SchemaError("family has a mediator column but none declared");
    }
    dims_ = {schema.nx(), schema.ny()};
    if (with_mediator_) dims_.push_back(schema.nw());
    for (auto c : covariates_) dims_.push_back(schema.covariate(c).cardinality);
    std::size_t n = 1;
    for (int d : dims_) n *= static_cast<std::size_t>(d);
    values_.assign(n, 0.0);
    present_.assign(n, 0);
    name_ = family_label(kind_, covariates_, with_mediator_, schema);
}

std::size_t EvidenceFamily::flat(int x, int y, std::optional<int> w,
                                 std::span<const int> z_values) const {
    if (z_values.size() != covariates_.size())
        throw IndexError(name_ + ": expected " + std::to_string(covariates_.size()) +
                         " covariate values");
    if (with_mediator_ != w.has_value())
        throw IndexError(name_ + ": mediator value " +
                         std::string(with_mediator_ ? "missing" : "not expected"));
    std::vector<int> idx{x, y};
    if (w) idx.push_back(*w);
    idx.insert(idx.end(), z_values.begin(), z_values.end());
    std::size_t offset = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= dims_[i]) throw IndexError(name_ + ": cell index out of range");
        offset = offset * dims_[i] + static_cast<std::size_t>(idx[i]);
    }
    return offset;
}

std::vector<int> EvidenceFamily::cell_indices(std::size_t cell) const {
    std::vector<int> idx(dims_.size());
    for (std::size_t i = dims_.size(); i-- > 0;) {
        idx[i] = static_cast<int>(cell % dims_[i]);
        cell /= dims_[i];
    }
    if (!with_mediator_) idx.insert(idx.begin() + 2, 0);
    return idx;
}

void EvidenceFamily::set_flat(std::size_t cell, double p) {
    if (cell >= values_.size()) throw IndexError(name_ + ": cell out of range");
    if (present_[cell]) {
        duplicates_.push_back(cell);
        return;
    }
    present_[cell] = 1;
    values_[cell] = p;
}

void EvidenceFamily::set(int x, int y, std::optional<int> w, std::span<const int> z_values,
                         double p) {
    set_flat(flat(x, y, w, z_values), p);
}

void EvidenceFamily::add(const EvidenceEntry& entry) {
    if (entry.kind != kind_) throw SchemaError(name_ + ": entry kind mismatch");
    if (entry.z.size() != covariates_.size())
        throw SchemaError(name_ + ": entry conditions on a different covariate set");
    std::vector<int> z;
    for (auto c : covariates_) {
        auto it = entry.z.find(c);
        if (it == entry.z.end()) throw SchemaError(name_ + ": entry conditions on a different covariate set");
        z.push_back(it->second);
    }
    set(entry.x, entry.y, entry.w, z, entry.p);
}

double EvidenceFamily::at(int x, int y, std::optional<int> w,
                          std::span<const int> z_values) const {
    return values_[flat(x, y, w, z_values)];
}

bool EvidenceFamily::complete() const {
    return std::all_of(present_.begin(), present_.end(), [](auto b) { return b != 0; });
}

std::vector<EvidenceEntry> EvidenceFamily::entries() const {
    std::vector<EvidenceEntry> out;
    for (std::size_t cell = 0; cell < values_.size(); ++cell) {
        if (!present_[cell]) continue;
        auto idx = cell_indices(cell);
        EvidenceEntry e;
        e.kind = kind_;
        e.x = idx[0];
        e.y = idx[1];
        if (with_mediator_) e.w = idx[2];
        for (std::size_t k = 0; k < covariates_.size(); ++k) e.z[covariates_[k]] = idx[3 + k];
        e.p = values_[cell];
        out.push_back(std::move(e));
    }
    return out;
}

EvidenceFamily EvidenceFamily::marginalize(const std::vector<std::size_t>& keep,
                                           bool keep_mediator, const Schema& schema) const {
    std::vector<std::size_t> kept;
    for (auto c : covariates_)
        if (std::find(keep.begin(), keep.end(), c) != keep.end()) kept.push_back(c);
    if (kept.size() != keep.size())
        throw SchemaError(name_ + ": cannot marginalize to covariates it does not carry");
    EvidenceFamily out(kind_, kept, keep_mediator && with_mediator_, schema);
    std::fill(out.present_.begin(), out.present_.end(), 1);
    for (std::size_t cell = 0; cell < values_.size(); ++cell) {
        auto idx = cell_indices(cell);
        std::vector<int> z;
        for (std::size_t k = 0; k < covariates_.size(); ++k)
            if (std::find(kept.begin(), kept.end(), covariates_[k]) != kept.end())
                z.push_back(idx[3 + k]);
        std::optional<int> w;
        if (out.with_mediator_) w = idx[2];
        out.values_[out.flat(idx[0], idx[1], w, z)] += values_[cell];
    }
    return out;
}

// ---------------------------------------------------------------------------
// EvidenceSet

void EvidenceSet::add(EvidenceFamily family) { families_.push_back(std::move(family)); }

EvidenceFamily& EvidenceSet::new_family(EvidenceKind kind, std::vector<std::size_t> covariates,
                                        bool with_mediator) {
    families_.emplace_back(kind, std::move(covariates), with_mediator, schema_);
    return families_.back();
}

const EvidenceFamily* EvidenceSet::find(EvidenceKind kind,
                                        const std::vector<std::size_t>& covariates,
                                        bool with_mediator) const {
    auto sorted = covariates;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& f : families_)
        if (f.kind() == kind && f.covariates() == sorted && f.with_mediator() == with_mediator)
            return &f;
    return nullptr;
}

namespace {

const EvidenceFamily* smallest_family(const std::vector<EvidenceFamily>& families,
                                      EvidenceKind kind) {
    const EvidenceFamily* best = nullptr;
    for (const auto& f : families)
        if (f.kind() == kind && (!best || f.cell_count() < best->cell_count())) best = &f;
    return best;
}

}  // namespace

std::optional<double> EvidenceSet::observational_cell(int x, int y) const {
    const auto* f = smallest_family(families_, EvidenceKind::observational);
    if (!f) return std::nullopt;
    return f->marginalize({}, false, schema_).at(x, y, std::nullopt, {});
}

std::optional<double> EvidenceSet::experimental_cell(int x, int y) const {
    const auto* f = smallest_family(families_, EvidenceKind::experimental);
    if (!f) return std::nullopt;
    return f->marginalize({}, false, schema_).at(x, y, std::nullopt, {});
}

std::optional<std::vector<double>> EvidenceSet::joint_covariate_distribution() const {
    const std::size_t m = schema_.covariate_count();
    if (m == 0) return std::vector<double>{1.0};
    const EvidenceFamily* source = nullptr;
    for (const auto& f : families_)
        if (f.covariates().size() == m &&
            (!source || (source->kind() == EvidenceKind::experimental &&
                         f.kind() == EvidenceKind::observational)))
            source = &f;
    if (!source) return std::nullopt;
    const auto cards = schema_.covariate_cards();
    std::size_t cells = 1;
    for (int c : cards) cells *= c;
    std::vector<double> pz(cells, 0.0);
    for (std::size_t cell = 0; cell < source->cell_count(); ++cell) {
        auto idx = source->cell_indices(cell);
        if (source->kind() == EvidenceKind::experimental && idx[0] != 0) continue;
        std::size_t zc = 0;
        for (std::size_t k = 0; k < m; ++k) zc = zc * cards[k] + idx[3 + k];
        pz[zc] += source->at_flat(cell);
    }
    return pz;
}

EvidenceSet EvidenceSet::restricted_to(const std::vector<std::size_t>& keep) const {
    EvidenceSet out(schema_);
    for (const auto& f : families_) {
        std::vector<std::size_t> common;
        for (auto c : f.covariates())
            if (std::find(keep.begin(), keep.end(), c) != keep.end()) common.push_back(c);
        if (out.find(f.kind(), common, false)) continue;
        out.add(f.marginalize(common, false, schema_));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::ok() const { return errors().empty(); }

double ValidationReport::max_residual() const {
    double r = 0.0;
    for (const auto& fr : residuals) r = std::max(r, fr.residual);
    return r;
}

std::vector<const ValidationIssue*> ValidationReport::errors() const {
    std::vector<const ValidationIssue*> out;
    for (const auto& i : issues)
        if (i.severity == ValidationIssue::Severity::error) out.push_back(&i);
    return out;
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    bool first = true;
    for (const auto* e : errors()) {
        if (!first) os << "; ";
        os << e->message;
        first = false;
    }
    return os.str();
}

namespace {

/// Per-arm (experimental) or single (observational) distribution of the
/// covariates in `keep`, row-major over those covariates.
std::vector<std::vector<double>> covariate_marginals(const EvidenceFamily& f,
                                                     const std::vector<std::size_t>& keep,
                                                     const Schema& schema) {
    const auto reduced = f.marginalize(keep, false, schema);
    const int nx = schema.nx();
    const int ny = schema.ny();
    std::size_t zcells = reduced.cell_count() / (static_cast<std::size_t>(nx) * ny);
    const std::size_t arms = f.kind() == EvidenceKind::experimental ? nx : 1;
    std::vector<std::vector<double>> out(arms, std::vector<double>(zcells, 0.0));
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y)
            for (std::size_t zc = 0; zc < zcells; ++zc) {
                const double v = reduced.at_flat((static_cast<std::size_t>(x) * ny + y) * zcells + zc);
                out[arms == 1 ? 0 : x][zc] += v;
            }
    return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

ValidationReport validate_evidence(const EvidenceSet& evidence, double tol) {
    using Sev = ValidationIssue::Severity;
    ValidationReport report;
    const auto& schema = evidence.schema();
    const auto& families = evidence.families();
    std::vector<bool> usable(families.size(), false);

    for (std::size_t fi = 0; fi < families.size(); ++fi) {
        const auto& f = families[fi];
        for (std::size_t fj = 0; fj < fi; ++fj) {
            const auto& g = families[fj];
            if (g.kind() == f.kind() && g.covariates() == f.covariates() &&
                g.with_mediator() == f.with_mediator())
                report.issues.push_back({Sev::error, "family " + f.name() + " declared twice",
                                         {f.name()}, 0.0});
        }
        if (!f.duplicate_cells().empty()) {
            report.issues.push_back({Sev::error,
                                     "duplicate cell in family " + f.name() + " (" +
                                         std::to_string(f.duplicate_cells().size()) + " repeats)",
                                     {f.name()}, 0.0});
            continue;
        }
        if (!f.complete()) {
            std::size_t missing = 0;
            for (std::size_t c = 0; c < f.cell_count(); ++c) missing += f.present_flat(c) ? 0 : 1;
            report.issues.push_back({Sev::error,
                                     "incomplete family " + f.name() + ": " +
                                         std::to_string(missing) + " of " +
                                         std::to_string(f.cell_count()) + " cells missing",
                                     {f.name()}, static_cast<double>(missing)});
            continue;
        }
        bool bad_entry = false;
        for (std::size_t c = 0; c < f.cell_count(); ++c) {
            const double p = f.at_flat(c);
            if (!std::isfinite(p) || p < -tol || p > 1.0 + tol) {
                report.issues.push_back({Sev::error, "family " + f.name() +
                                                         " has an entry outside [0,1]",
                                         {f.name()}, p});
                bad_entry = true;
                break;
            }
            if (p < 0.0)
                report.issues.push_back({Sev::warning, "family " + f.name() +
                                                           " has a slightly negative entry",
                                         {f.name()}, p});
        }
        if (bad_entry) continue;

        // normalization: whole table, or per intervention arm
        const auto sums = covariate_marginals(f, {}, schema);
        double residual = 0.0;
        for (const auto& arm : sums) residual = std::max(residual, std::abs(arm[0] - 1.0));
        report.residuals.push_back({f.name(), residual});
        if (residual > tol) {
            report.issues.push_back({Sev::error,
                                     "family " + f.name() + " does not sum to 1 (residual " +
                                         std::to_string(residual) + ")",
                                     {f.name()}, residual});
            continue;
        }
        usable[fi] = true;
    }

    auto flag = [&](double residual, const std::string& what, const EvidenceFamily& a,
                    const EvidenceFamily* b) {
        if (residual <= 1e-12) return;
        std::vector<std::string> names{a.name()};
        std::string msg = what + " " + a.name();
        if (b) {
            names.push_back(b->name());
            msg += " vs " + b->name();
        }
        msg += " differ by " + std::to_string(residual);
        report.issues.push_back({residual > tol ? Sev::error : Sev::warning, msg, names, residual});
    };

    for (std::size_t fi = 0; fi < families.size(); ++fi) {
        if (!usable[fi]) continue;
        const auto& f = families[fi];
        // every intervention arm must imply the same covariate distribution
        if (f.kind() == EvidenceKind::experimental && !f.covariates().empty()) {
            const auto arms = covariate_marginals(f, f.covariates(), schema);
            double r = 0.0;
            for (std::size_t a = 1; a < arms.size(); ++a) r = std::max(r, max_abs_diff(arms[0], arms[a]));
            flag(r, "covariate marginals across arms of", f, nullptr);
        }
        for (std::size_t fj = fi + 1; fj < families.size(); ++fj) {
            if (!usable[fj]) continue;
            const auto& g = families[fj];
            std::vector<std::size_t> common;
            std::set_intersection(f.covariates().begin(), f.covariates().end(),
                                  g.covariates().begin(), g.covariates().end(),
                                  std::back_inserter(common));
            if (f.kind() == g.kind()) {
                const bool med = f.with_mediator() && g.with_mediator();
                const auto a = f.marginalize(common, med, schema);
                const auto b = g.marginalize(common, med, schema);
                double r = 0.0;
                for (std::size_t c = 0; c < a.cell_count(); ++c)
                    r = std::max(r, std::abs(a.at_flat(c) - b.at_flat(c)));
                flag(r, "shared marginals of", f, &g);
            } else if (!common.empty()) {
                const auto a = covariate_marginals(f, common, schema);
                const auto b = covariate_marginals(g, common, schema);
                double r = 0.0;
                for (const auto& x : a)
                    for (const auto& y : b) r = std::max(r, max_abs_diff(x, y));
                flag(r, "covariate marginals of", f, &g);
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// QuerySpec

QuerySpec QuerySpec::pns(int k) {
    QuerySpec q;
    q.kind = QueryKind::pns;
    for (int t = 0; t < k; ++t) q.targets.emplace_back(t, t);
    return q;
}

QuerySpec QuerySpec::pn() {
    QuerySpec q;
    q.kind = QueryKind::pn;
    q.factual = {0, 0};
    q.counterfactual = {1, 1};
    return q;
}

QuerySpec QuerySpec::ps() {
    QuerySpec q;
    q.kind = QueryKind::ps;
    q.factual = {1, 1};
    q.counterfactual = {0, 0};
    return q;
}

void QuerySpec::validate(int nx, int ny) const {
    auto in_range = [&](std::pair<int, int> e) {
        return e.first >= 0 && e.first < nx && e.second >= 0 && e.second < ny;
    };
    if (kind == QueryKind::pns) {
        const int k = static_cast<int>(targets.size());
        if (k < 1) throw SchemaError("PNS(k) needs k >= 1");
        if (k > std::min(nx, ny)) throw SchemaError("PNS(k) needs k <= min(|X|, |Y|)");
        std::set<int> arms;
        for (auto e : targets) {
            if (!in_range(e)) throw SchemaError("PNS target out of range");
            if (!arms.insert(e.first).second) throw SchemaError("PNS targets repeat an arm");
        }
        return;
    }
    if (!in_range(factual) || !in_range(counterfactual))
        throw SchemaError(to_string(kind) + " event out of range");
    if (factual.first == counterfactual.first)
        throw SchemaError(to_string(kind) + " needs distinct factual and counterfactual arms");
}

}  // namespace poc
