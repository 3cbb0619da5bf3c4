#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "poc/cli_io.hpp"
#include "support.hpp"

using namespace poc;
using namespace poc::test;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "pocbound_unit" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

ProblemDocument binary_problem(const BinaryEvidence& ev, const QuerySpec& query = QuerySpec::pns()) {
    ProblemDocument doc;
    doc.evidence = binary_evidence(ev);
    doc.query = query;
    return doc;
}

int run_bounds(const ProblemDocument& doc, const fs::path& dir, std::string* err_text = nullptr) {
    const auto path = (dir / "problem.json").string();
    save_problem_file(path, doc);
    BoundsFlags flags;
    flags.problem = path;
    std::ostringstream out, err;
    const int code = cmd_bounds(flags, {}, out, err);
    if (err_text) *err_text = err.str();
    return code;
}

}  // namespace

TEST_CASE("problem documents round-trip bit for bit") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto family = seed % 2 ? GraphFamily::mediator : GraphFamily::nondesc;
        const auto scm = sample_scm(family, {}, 1 + seed % 2, seed);
        const auto av = family == GraphFamily::mediator ? Availability::joint : Availability::covariate_specific;
        auto doc = problem_from_scm(scm, av, seed % 3 ? QuerySpec::pns() : QuerySpec::pn());
        doc.options.node_budget = 17;
        doc.options.gap_tol = 0.125;
        const auto text = write_problem(doc);
        const auto back = read_problem(text);
        CHECK(write_problem(back) == text);
        REQUIRE(back.evidence.families().size() == doc.evidence.families().size());
        for (std::size_t f = 0; f < doc.evidence.families().size(); ++f) {
            const auto& a = doc.evidence.families()[f];
            const auto& b = back.evidence.families()[f];
            REQUIRE(a.cell_count() == b.cell_count());
            for (std::size_t c = 0; c < a.cell_count(); ++c) REQUIRE(a.at_flat(c) == b.at_flat(c));
        }
        CHECK(back.options.node_budget == 17);
        CHECK(back.options.gap_tol == 0.125);
        CHECK(back.query.kind == doc.query.kind);
        REQUIRE(back.truth.has_value());
        CHECK(*back.truth == *doc.truth);
    }
}

TEST_CASE("malformed documents are schema errors") {
    CHECK_THROWS_AS(read_problem("{"), SchemaError);
    CHECK_THROWS_AS(read_problem("[]"), SchemaError);
    CHECK_THROWS_AS(read_problem(R"({"variables": []})"), SchemaError);
    CHECK_THROWS_AS(parse_query("pnx"), ArgumentError);
    CHECK(parse_query("ps").kind == QueryKind::ps);
}

TEST_CASE("method selection follows the evidence shape") {
    CHECK(select_method(binary_evidence(dataset_third())) == Method::balke_lp);
    const auto nd = sample_scm(GraphFamily::nondesc, {}, 2, 1);
    CHECK(select_method(scm_to_evidence(nd, Availability::joint)) == Method::nondescendant_lp);
    CHECK(select_method(scm_to_evidence(nd, Availability::covariate_specific)) == Method::covariate_specific_lp);
    CHECK(select_method(scm_to_evidence(nd, Availability::marginal_only)) == Method::balke_lp);
    const auto med = sample_scm(GraphFamily::mediator, {}, 1, 1);
    CHECK(select_method(scm_to_evidence(med, Availability::joint)) == Method::mediator_bb);
    CHECK(to_string(Method::mediator_bb) == "mediator-bb");
}

TEST_CASE("compute_bounds on the example datasets") {
    const auto third = compute_bounds(binary_problem(dataset_third()));
    CHECK(third.method == Method::balke_lp);
    CHECK(third.report.bounds.lb == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(third.report.bounds.ub == doctest::Approx(0.7).epsilon(1e-12));
    REQUIRE(third.tian_pearl.has_value());
    CHECK(third.tian_pearl->lb == doctest::Approx(0.5));

    const auto det = compute_bounds(binary_problem(dataset_deterministic(), QuerySpec::pns()));
    CHECK(det.report.bounds.lb == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(det.report.bounds.ub == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bounds command: output file and exit codes") {
    const auto dir = scratch("bounds");
    std::string err;
    CHECK(run_bounds(binary_problem(dataset_third()), dir) == kExitOk);
    const auto result = slurp(dir / "problem.json.result.json");
    CHECK(result.find("\"balke-lp\"") != std::string::npos);
    CHECK(result.find("\"tian_pearl\"") != std::string::npos);

    // a table that does not sum to 1
    auto bad = binary_problem(dataset_third());
    bad.evidence = EvidenceSet(Schema::simple(2, 2, {}));
    auto& obs = bad.evidence.new_family(EvidenceKind::observational, {});
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) obs.set(x, y, std::nullopt, {}, 0.3);
    CHECK(run_bounds(bad, dir, &err) == kExitEvidence);
    CHECK(err.find("P(X,Y)") != std::string::npos);

    // normalized tables no joint reproduces: P(x,y) > P(y_x)
    CHECK(run_bounds(binary_problem(BinaryEvidence::from_cells(0.2, 0.5, 0.5, 0.1, 0.2, 0.2)), dir, &err) ==
          kExitInfeasible);

    CHECK(run_bounds(binary_problem(BinaryEvidence::from_cells(0.5, 0.5, 0.0, 0.5, 0.25, 0.25), QuerySpec::pn()),
                     dir, &err) == kExitUndefined);

    BoundsFlags missing;
    missing.problem = (dir / "absent.json").string();
    std::ostringstream out, e;
    CHECK(cmd_bounds(missing, {}, out, e) == kExitUsage);
}

TEST_CASE("simulate writes byte-identical files for any worker count") {
    SimulateFlags flags;
    flags.m = 2;
    flags.trials = 12;
    GlobalFlags global;
    global.seed = 5;
    std::ostringstream out, err;
    const auto first = scratch("sim1");
    flags.out_dir = first.string();
    REQUIRE(cmd_simulate(flags, global, out, err) == kExitOk);
    flags.out_dir = scratch("sim2").string();
    global.jobs = 3;
    REQUIRE(cmd_simulate(flags, global, out, err) == kExitOk);
    for (const char* name : {"trials.csv", "summary.csv", "plot_lb.csv", "plot_ub.csv"}) {
        const auto a = slurp(first / name);
        const auto b = slurp(fs::path(flags.out_dir) / name);
        CHECK_FALSE(a.empty());
        CHECK(a == b);
    }
    const auto summary = slurp(fs::path(flags.out_dir) / "summary.csv");
    CHECK(summary.rfind("statistic,value\navg_tp_lb_gain,", 0) == 0);
    CHECK(summary.find("\ntrials,12\nskipped,0\n") != std::string::npos);

    flags.trials = 0;
    CHECK(cmd_simulate(flags, global, out, err) == kExitUsage);
    flags.trials = 3;
    flags.family = "mediator";
    flags.m = 0;
    CHECK(cmd_simulate(flags, global, out, err) == kExitUsage);
}

TEST_CASE("csv number formatting") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(std::nan("")) == "NA");
    std::ostringstream ss;
    TrialRecord undefined;
    undefined.defined = false;
    write_trials_csv(ss, {undefined}, false);
    CHECK(ss.str() == "trial,tp_lb,tp_ub,mlp_lb,mlp_ub,prop_lb,prop_ub,truth,nodes,runtime_ms\n"
                      "0,NA,NA,NA,NA,NA,NA,NA,0,0\n");
}

TEST_CASE("oracle problems bound their own truth") {
    const auto dir = scratch("oracle");
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        OracleFlags flags;
        flags.family = seed % 4 == 0 ? "mediator" : "nondesc";
        flags.m = flags.family == "mediator" ? 1 : 1 + seed % 3;
        flags.query = seed % 5 == 0 ? "pn" : "pns";
        flags.emit_evidence = (dir / "p.json").string();
        GlobalFlags global;
        global.seed = seed;
        std::ostringstream out, err;
        const int code = cmd_oracle(flags, global, out, err);
        if (code == kExitUndefined) continue;
        REQUIRE(code == kExitOk);
        const auto doc = load_problem_file(*flags.emit_evidence);
        REQUIRE(doc.truth.has_value());
        const auto result = compute_bounds(doc);
        REQUIRE(result.report.status != SolveStatus::infeasible);
        CHECK(result.report.bounds.contains(*doc.truth, 1e-8));
        if (flags.family == "mediator") CHECK(result.method == Method::mediator_bb);
    }
}
