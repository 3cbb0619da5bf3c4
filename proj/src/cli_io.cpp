#include "poc/cli_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "poc/closed_form.hpp"
#include "poc/rng.hpp"

namespace poc {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
    return j.at(key);
}

template <class T>
T get(const json& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return get<T>(j, key);
}

json pair_json(std::pair<int, int> p) { return json::array({p.first, p.second}); }

std::pair<int, int> pair_from(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw SchemaError(std::string(what) + " must be a pair of integers");
    return {j[0].get<int>(), j[1].get<int>()};
}

json query_json(const QuerySpec& q) {
    json j{{"kind", to_string(q.kind)}};
    if (q.kind == QueryKind::pns) {
        j["targets"] = json::array();
        for (auto t : q.targets) j["targets"].push_back(pair_json(t));
    } else {
        j["factual"] = pair_json(q.factual);
        j["counterfactual"] = pair_json(q.counterfactual);
    }
    return j;
}

QuerySpec query_from(const json& j) {
    QuerySpec q;
    try {
        q.kind = query_kind_from_string(get<std::string>(j, "kind"));
    } catch (const PocError& e) {
        throw SchemaError(e.what());
    }
    if (q.kind == QueryKind::pns) {
        q = QuerySpec::pns();
        if (j.contains("targets")) {
            q.targets.clear();
            for (const auto& t : j.at("targets")) q.targets.push_back(pair_from(t, "query target"));
        }
    } else {
        q = q.kind == QueryKind::pn ? QuerySpec::pn() : QuerySpec::ps();
        if (j.contains("factual")) q.factual = pair_from(j.at("factual"), "query factual");
        if (j.contains("counterfactual")) q.counterfactual = pair_from(j.at("counterfactual"), "query counterfactual");
    }
    return q;
}

std::string orientation_name(BilinearOrientation o) {
    return o == BilinearOrientation::independence ? "independence" : "literal";
}

json interval_json(const BoundsInterval& b) {
    return json{{"lb", b.lb}, {"ub", b.ub}, {"certified", b.certified}};
}

bool binary_default(const Schema& s, const QuerySpec& q) {
    if (s.nx() != 2 || s.ny() != 2) return false;
    if (q.kind == QueryKind::pns) return q.targets == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}};
    const auto expect_f = q.kind == QueryKind::pn ? std::pair{0, 0} : std::pair{1, 1};
    const auto expect_c = q.kind == QueryKind::pn ? std::pair{1, 1} : std::pair{0, 0};
    return q.factual == expect_f && q.counterfactual == expect_c;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ArgumentError("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw ArgumentError("write to '" + path + "' failed");
}

/// Maps a library exception to an exit code and prints it.
int report_error(std::ostream& err, const std::exception& e) {
    err << "error: " << e.what() << "\n";
    if (dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const ArgumentError*>(&e) ||
        dynamic_cast<const IndexError*>(&e))
        return kExitUsage;
    if (dynamic_cast<const EvidenceError*>(&e)) return kExitEvidence;
    if (dynamic_cast<const UndefinedConditionalError*>(&e)) return kExitUndefined;
    return kExitFailure;
}

BbOptions bb_options(const ProblemOptions& o) {
    BbOptions bb;
    bb.node_budget = o.node_budget;
    bb.gap_tol = o.gap_tol;
    return bb;
}

}  // namespace

// ---------------------------------------------------------------------------
// Problem documents

std::string write_problem(const ProblemDocument& doc) {
    const auto& schema = doc.evidence.schema();
    json j;
    j["variables"] = json::array();
    for (const auto& v : schema.variables())
        j["variables"].push_back({{"name", v.name}, {"cardinality", v.cardinality}, {"role", to_string(v.role)}});
    j["families"] = json::array();
    for (const auto& f : doc.evidence.families()) {
        json covs = json::array();
        for (auto c : f.covariates()) covs.push_back(schema.covariate(c).name);
        json cells = json::array();
        for (std::size_t c = 0; c < f.cell_count(); ++c) {
            if (f.present_flat(c))
                cells.push_back(f.at_flat(c));
            else
                cells.push_back(nullptr);
        }
        j["families"].push_back({{"name", f.name()},
                                 {"kind", to_string(f.kind())},
                                 {"covariates", covs},
                                 {"mediator", f.with_mediator()},
                                 {"cells", cells}});
    }
    j["query"] = query_json(doc.query);
    j["options"] = {{"tol", doc.options.tol},
                    {"node_budget", doc.options.node_budget},
                    {"gap_tol", doc.options.gap_tol},
                    {"mediator_consistency", doc.options.mediator_consistency},
                    {"orientation", orientation_name(doc.options.orientation)}};
    if (doc.truth) j["truth"] = *doc.truth;
    return j.dump(2) + "\n";
}

ProblemDocument read_problem(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("problem document is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("problem document must be a JSON object");

    std::vector<VariableSpec> vars;
    for (const auto& v : field(j, "variables")) {
        VariableSpec spec;
        spec.name = get<std::string>(v, "name");
        spec.cardinality = get<int>(v, "cardinality");
        spec.role = role_from_string(get<std::string>(v, "role"));
        vars.push_back(std::move(spec));
    }
    Schema schema(std::move(vars));

    ProblemDocument doc;
    doc.evidence = EvidenceSet(schema);
    for (const auto& fj : field(j, "families")) {
        const auto kind_text = get<std::string>(fj, "kind");
        EvidenceKind kind;
        if (kind_text == "observational")
            kind = EvidenceKind::observational;
        else if (kind_text == "experimental")
            kind = EvidenceKind::experimental;
        else
            throw SchemaError("unknown evidence kind '" + kind_text + "'");
        std::vector<std::size_t> covs;
        for (const auto& name : get_or<std::vector<std::string>>(fj, "covariates", {}))
            covs.push_back(schema.covariate_index(name));
        const bool with_w = get_or<bool>(fj, "mediator", false);
        if (with_w && !schema.mediator()) throw SchemaError("family uses a mediator column but none is declared");
        EvidenceFamily family(kind, covs, with_w, schema);
        if (fj.contains("name") && !get<std::string>(fj, "name").empty()) family.set_name(get<std::string>(fj, "name"));
        const auto& cells = field(fj, "cells");
        if (!cells.is_array() || cells.size() != family.cell_count())
            throw SchemaError("family " + family.name() + ": expected " + std::to_string(family.cell_count()) +
                              " cells");
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (cells[c].is_null()) continue;
            if (!cells[c].is_number()) throw SchemaError("family " + family.name() + ": non-numeric cell");
            family.set_flat(c, cells[c].get<double>());
        }
        doc.evidence.add(std::move(family));
    }
    if (j.contains("query")) doc.query = query_from(j.at("query"));
    doc.query.validate(schema.nx(), schema.ny());
    if (j.contains("options")) {
        const auto& o = j.at("options");
        doc.options.tol = get_or<double>(o, "tol", doc.options.tol);
        doc.options.node_budget = get_or<std::size_t>(o, "node_budget", doc.options.node_budget);
        doc.options.gap_tol = get_or<double>(o, "gap_tol", doc.options.gap_tol);
        doc.options.mediator_consistency =
            get_or<bool>(o, "mediator_consistency", doc.options.mediator_consistency);
        const auto orient = get_or<std::string>(o, "orientation", "independence");
        if (orient == "independence")
            doc.options.orientation = BilinearOrientation::independence;
        else if (orient == "literal")
            doc.options.orientation = BilinearOrientation::literal;
        else
            throw SchemaError("unknown orientation '" + orient + "'");
    }
    if (j.contains("truth")) doc.truth = get<double>(j, "truth");
    return doc;
}

ProblemDocument load_problem_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ArgumentError("cannot read problem file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return read_problem(ss.str());
}

void save_problem_file(const std::string& path, const ProblemDocument& doc) {
    write_text(path, write_problem(doc));
}

ProblemDocument problem_from_scm(const ScmSpec& scm, Availability availability, const QuerySpec& query) {
    ProblemDocument doc;
    doc.evidence = scm_to_evidence(scm, availability);
    doc.query = query;
    try {
        doc.truth = true_poc(scm, query);
    } catch (const UndefinedConditionalError&) {
        doc.truth.reset();
    }
    return doc;
}

QuerySpec parse_query(const std::string& text) {
    if (text == "pns") return QuerySpec::pns();
    if (text == "pn") return QuerySpec::pn();
    if (text == "ps") return QuerySpec::ps();
    throw ArgumentError("unknown query '" + text + "' (expected pns, pn or ps)");
}

// ---------------------------------------------------------------------------
// Bounds

std::string to_string(Method method) {
    switch (method) {
    case Method::balke_lp: return "balke-lp";
    case Method::nondescendant_lp: return "nondescendant-lp";
    case Method::covariate_specific_lp: return "covariate-specific-lp";
    case Method::mediator_bb: return "mediator-bb";
    }
    return "?";
}

Method select_method(const EvidenceSet& evidence) {
    bool mediator = false;
    std::size_t widest = 0;
    for (const auto& f : evidence.families()) {
        mediator = mediator || f.with_mediator();
        widest = std::max(widest, f.covariates().size());
    }
    if (mediator) return Method::mediator_bb;
    if (widest >= 2) return Method::nondescendant_lp;
    if (widest == 1) return Method::covariate_specific_lp;
    return Method::balke_lp;
}

BoundsResult compute_bounds(const ProblemDocument& doc) {
    BoundsResult out;
    const auto& evidence = doc.evidence;
    const auto& schema = evidence.schema();
    doc.query.validate(schema.nx(), schema.ny());
    out.validation = validate_evidence(evidence, doc.options.tol);
    if (!out.validation.ok()) {
        std::vector<std::string> names;
        for (const auto* e : out.validation.errors())
            for (const auto& f : e->families)
                if (std::find(names.begin(), names.end(), f) == names.end()) names.push_back(f);
        std::string msg = "evidence is inconsistent: " + out.validation.summary();
        if (!names.empty()) {
            msg += " [families:";
            for (const auto& n : names) msg += " " + n;
            msg += "]";
        }
        throw EvidenceError(msg);
    }
    for (const auto& issue : out.validation.issues)
        if (issue.severity == ValidationIssue::Severity::warning) out.warnings.push_back(issue.message);
    if (schema.mediator() && select_method(evidence) != Method::mediator_bb)
        out.warnings.push_back("a mediator is declared but no family observes it; it is ignored");

    out.method = select_method(evidence);
    ConstraintProgram program;
    switch (out.method) {
    case Method::mediator_bb: {
        BuildOptions build;
        build.mediator_consistency = doc.options.mediator_consistency;
        build.orientation = doc.options.orientation;
        program = build_thm3_program(evidence, doc.query, build);
        break;
    }
    case Method::nondescendant_lp: program = build_thm1_program(evidence, doc.query); break;
    case Method::covariate_specific_lp: program = build_cor2_program(evidence, doc.query); break;
    case Method::balke_lp: program = build_thm1_program(evidence.restricted_to({}), doc.query); break;
    }
    out.report = solve_bounds(program, bb_options(doc.options));

    if (binary_default(schema, doc.query)) {
        try {
            out.tian_pearl = tp_bounds(BinaryEvidence::from_evidence(evidence), doc.query, doc.options.tol);
        } catch (const PocError& e) {
            out.warnings.push_back(std::string("closed-form bounds unavailable: ") + e.what());
        }
    }
    return out;
}

std::string write_result(const ProblemDocument& doc, const BoundsResult& result) {
    const auto& r = result.report;
    json j;
    j["method"] = to_string(result.method);
    j["query"] = query_json(doc.query);
    j["status"] = to_string(r.status);
    if (r.status != SolveStatus::infeasible) j["bounds"] = interval_json(r.bounds);
    j["inner_bounds"] = r.inner_bounds ? interval_json(*r.inner_bounds) : json(nullptr);
    j["tian_pearl"] = result.tian_pearl ? interval_json(*result.tian_pearl) : json(nullptr);
    j["residuals"] = {{"evidence", result.validation.max_residual()},
                      {"solution", r.max_residual},
                      {"inner", r.inner_residual}};
    j["stats"] = {{"nodes", r.nodes_explored}, {"lp_solves", r.lp_solves}, {"runtime_ms", r.runtime_ms}};
    j["infeasible_families"] = r.infeasible_families;
    j["warnings"] = result.warnings;
    if (doc.truth) j["truth"] = *doc.truth;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// CSV

std::string format_number(double value) {
    if (std::isnan(value)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records, bool timing) {
    out << "trial,tp_lb,tp_ub,mlp_lb,mlp_ub,prop_lb,prop_ub,truth,nodes,runtime_ms\n";
    for (const auto& r : records) {
        out << r.trial;
        if (!r.defined) {
            out << ",NA,NA,NA,NA,NA,NA,NA,0," << format_number(0.0) << "\n";
            continue;
        }
        for (double v : {r.tp.lb, r.tp.ub, r.mlp.lb, r.mlp.ub, r.proposed.lb, r.proposed.ub, r.truth})
            out << ',' << format_number(v);
        out << ',' << r.nodes << ',' << format_number(timing ? r.runtime_ms : 0.0) << "\n";
    }
}

void write_summary_csv(std::ostream& out, const SummaryStats& s) {
    out << "statistic,value\n";
    const std::pair<const char*, double> rows[] = {
        {"avg_tp_lb_gain", s.avg_tp_lb_gain},     {"avg_tp_ub_drop", s.avg_tp_ub_drop},
        {"avg_mlp_lb_gain", s.avg_mlp_lb_gain},   {"avg_mlp_ub_drop", s.avg_mlp_ub_drop},
        {"avg_gap_tp", s.avg_gap_tp},             {"avg_gap_mlp", s.avg_gap_mlp},
        {"avg_gap_proposed", s.avg_gap_proposed},
    };
    for (const auto& [name, v] : rows) out << name << ',' << format_number(v) << "\n";
    out << "count_improved_tp," << s.count_improved_tp << "\n";
    out << "count_improved_mlp," << s.count_improved_mlp << "\n";
    out << "trials," << s.trials << "\n";
    out << "skipped," << s.skipped << "\n";
}

void write_plot_csv(std::ostream& out, const std::vector<PlotRow>& rows) {
    out << "rank,tp,mlp,proposed\n";
    for (const auto& r : rows)
        out << r.rank << ',' << format_number(r.tp) << ',' << format_number(r.mlp) << ','
            << format_number(r.proposed) << "\n";
}

// ---------------------------------------------------------------------------
// Commands

int cmd_bounds(const BoundsFlags& flags, const GlobalFlags& global, std::ostream& out, std::ostream& err) {
    try {
        auto doc = load_problem_file(flags.problem);
        if (global.tol) doc.options.tol = *global.tol;
        if (flags.budget) doc.options.node_budget = *flags.budget;
        if (flags.gap) doc.options.gap_tol = *flags.gap;
        const auto result = compute_bounds(doc);
        const auto& r = result.report;
        const std::string path = flags.out ? *flags.out : flags.problem + ".result.json";
        write_text(path, write_result(doc, result));

        for (const auto& w : result.warnings) err << "warning: " << w << "\n";
        out << "method: " << to_string(result.method) << "\n";
        out << "status: " << to_string(r.status) << "\n";
        if (r.status == SolveStatus::infeasible) {
            err << "error: the program is infeasible";
            if (!r.infeasible_families.empty()) {
                err << " (rows from:";
                for (const auto& f : r.infeasible_families) err << " " << f;
                err << ")";
            }
            err << "\n";
            return kExitInfeasible;
        }
        out << to_string(doc.query.kind) << " bounds: [" << format_number(r.bounds.lb) << ", "
            << format_number(r.bounds.ub) << "] certified\n";
        if (r.inner_bounds)
            out << "inner bounds: [" << format_number(r.inner_bounds->lb) << ", "
                << format_number(r.inner_bounds->ub) << "] (feasible points, not a bound)\n";
        if (result.tian_pearl)
            out << "closed form: [" << format_number(result.tian_pearl->lb) << ", "
                << format_number(result.tian_pearl->ub) << "]\n";
        if (doc.truth) out << "truth: " << format_number(*doc.truth) << "\n";
        out << "nodes: " << r.nodes_explored << ", lp solves: " << r.lp_solves << "\n";
        out << "result: " << path << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        return report_error(err, e);
    }
}

int cmd_simulate(const SimulateFlags& flags, const GlobalFlags& global, std::ostream& out, std::ostream& err) {
    try {
        TrialConfig config;
        config.family = graph_family_from_string(flags.family);
        config.availability = availability_from_string(flags.availability);
        config.m = flags.m;
        config.trials = flags.trials;
        config.seed = global.seed;
        config.jobs = std::max(1u, global.jobs);
        config.query = parse_query(flags.query);
        config.bb.node_budget = flags.budget;
        if (config.trials == 0) throw ArgumentError("--trials must be at least 1");
        if (config.family == GraphFamily::mediator && config.m == 0)
            throw ArgumentError("the mediator family needs --m >= 1");

        const auto records = run_trials(config);
        const auto stats = summarize(records);
        const std::size_t sample = flags.plot_sample ? flags.plot_sample : std::min<std::size_t>(100, stats.trials);
        const auto plot = sorted_plot_series(records, sample, derive_seed(global.seed, ~std::uint64_t{0}));

        const std::filesystem::path dir(flags.out_dir);
        std::filesystem::create_directories(dir);
        auto emit = [&](const char* name, auto&& writer) {
            std::ostringstream ss;
            writer(ss);
            write_text((dir / name).string(), ss.str());
        };
        emit("trials.csv", [&](std::ostream& o) { write_trials_csv(o, records, flags.timing); });
        emit("summary.csv", [&](std::ostream& o) { write_summary_csv(o, stats); });
        emit("plot_lb.csv", [&](std::ostream& o) { write_plot_csv(o, plot.lower); });
        emit("plot_ub.csv", [&](std::ostream& o) { write_plot_csv(o, plot.upper); });

        out << "trials: " << stats.trials << " (skipped " << stats.skipped << " with an undefined query)\n";
        out << "avg gap tp " << format_number(stats.avg_gap_tp) << ", mlp " << format_number(stats.avg_gap_mlp)
            << ", proposed " << format_number(stats.avg_gap_proposed) << "\n";
        out << "improved over tp " << stats.count_improved_tp << ", over mlp " << stats.count_improved_mlp << "\n";
        out << "wrote " << (dir / "trials.csv").string() << ", summary.csv, plot_lb.csv, plot_ub.csv\n";
        return kExitOk;
    } catch (const std::exception& e) {
        return report_error(err, e);
    }
}

int cmd_oracle(const OracleFlags& flags, const GlobalFlags& global, std::ostream& out, std::ostream& err) {
    try {
        const auto family = graph_family_from_string(flags.family);
        if (family == GraphFamily::mediator && flags.m == 0) throw ArgumentError("the mediator family needs --m >= 1");
        const auto availability = flags.availability.empty()
                                      ? (family == GraphFamily::mediator ? Availability::joint
                                                                         : Availability::covariate_specific)
                                      : availability_from_string(flags.availability);
        const auto query = parse_query(flags.query);
        const auto scm = sample_scm(family, {}, flags.m, global.seed);
        const double truth = true_poc(scm, query);
        out << "true " << to_string(query.kind) << ": " << format_number(truth) << "\n";
        if (flags.emit_evidence) {
            auto doc = problem_from_scm(scm, availability, query);
            doc.truth = truth;
            save_problem_file(*flags.emit_evidence, doc);
            out << "problem: " << *flags.emit_evidence << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        return report_error(err, e);
    }
}

}  // namespace poc
