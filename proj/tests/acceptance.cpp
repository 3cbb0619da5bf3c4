#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "poc/cli_io.hpp"
#include "support.hpp"

using namespace poc;
using namespace poc::test;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    const char* name;
    double limit_s;  // 0: no runtime limit
    std::function<Outcome()> run;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c, d);
    return buf;
}

TrialConfig config(GraphFamily family, std::size_t m, std::size_t trials, std::uint64_t seed) {
    TrialConfig c;
    c.family = family;
    c.m = m;
    c.trials = trials;
    c.seed = seed;
    c.availability = family == GraphFamily::mediator ? Availability::joint : Availability::covariate_specific;
    return c;
}

bool ordered(const SummaryStats& s) {
    return s.avg_gap_proposed < s.avg_gap_mlp && s.avg_gap_mlp < s.avg_gap_tp;
}

std::string gaps(const SummaryStats& s) {
    return fmt("gaps tp %.4f mlp %.4f proposed %.4f", s.avg_gap_tp, s.avg_gap_mlp, s.avg_gap_proposed);
}

Outcome lp_matches_closed_form() {
    double worst = 0.0;
    std::size_t compared = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto ev = random_binary(derive_seed(kSeed, i));
        const auto set = binary_evidence(ev);
        const auto pns = solve_bounds(build_thm1_program(set, QuerySpec::pns())).bounds;
        const auto tp = tp_pns_bounds(ev);
        worst = std::max({worst, std::abs(pns.lb - tp.lb), std::abs(pns.ub - tp.ub)});
        const auto pn = solve_bounds(build_thm1_program(set, QuerySpec::pn())).bounds;
        const auto tpn = tp_pn_bounds(ev);
        worst = std::max({worst, std::abs(pn.lb - tpn.lb), std::abs(pn.ub - tpn.ub)});
        compared += 2;
    }
    return {worst <= 1e-8, fmt("%.0f intervals, max deviation %.3g", static_cast<double>(compared), worst)};
}

struct FamilyRun {
    const char* label;
    TrialConfig config;
    std::vector<TrialRecord> records;
};

std::vector<FamilyRun>& validity_runs() {
    static std::vector<FamilyRun> runs = [] {
        std::vector<FamilyRun> out{
            {"nondesc m=1", config(GraphFamily::nondesc, 1, 500, kSeed), {}},
            {"nondesc m=2", config(GraphFamily::nondesc, 2, 500, kSeed), {}},
            {"nondesc m=3", config(GraphFamily::nondesc, 3, 500, kSeed), {}},
            {"mediator m=1", config(GraphFamily::mediator, 1, 500, kSeed), {}},
        };
        for (auto& r : out) r.records = run_trials(r.config);
        return out;
    }();
    return runs;
}

Outcome validity() {
    std::size_t violations = 0, checked = 0;
    double worst = 1.0;
    for (const auto& run : validity_runs())
        for (const auto& r : run.records) {
            for (const auto* b : {&r.tp, &r.mlp, &r.proposed}) {
                ++checked;
                const double slack = std::min(r.truth - b->lb, b->ub - r.truth);
                worst = std::min(worst, slack);
                if (slack < -1e-7) ++violations;
            }
        }
    return {violations == 0, fmt("%.0f intervals, %.0f violations, min slack %.3g", static_cast<double>(checked),
                                 static_cast<double>(violations), worst)};
}

Outcome nesting() {
    std::size_t broken = 0, trials = 0;
    for (const auto& run : validity_runs())
        for (const auto& r : run.records) {
            ++trials;
            if (!r.proposed.within(r.mlp, 1e-7) || !r.mlp.within(r.tp, 1e-7)) ++broken;
        }
    // mediator program against the back-door-only program on the same evidence
    std::size_t med_broken = 0;
    const auto& med = validity_runs().back();
    for (std::size_t i = 0; i < med.records.size(); ++i) {
        const auto scm = sample_scm(GraphFamily::mediator, {}, 1, derive_seed(med.config.seed, i));
        const auto ev = without_mediator(scm_to_evidence(scm, Availability::joint));
        const auto backdoor = solve_bounds(build_thm1_program(ev, QuerySpec::pns())).bounds;
        if (!med.records[i].proposed.within(backdoor, 1e-7)) ++med_broken;
    }
    return {broken == 0 && med_broken == 0,
            fmt("%.0f trials, %.0f chain breaks, %.0f mediator-vs-back-door breaks", static_cast<double>(trials),
                static_cast<double>(broken), static_cast<double>(med_broken))};
}

Outcome single_covariate() {
    const auto records = run_trials(config(GraphFamily::nondesc, 1, 300, kSeed));
    double worst = 0.0;
    for (const auto& r : records)
        worst = std::max({worst, std::abs(r.proposed.lb - r.mlp.lb), std::abs(r.proposed.ub - r.mlp.ub)});
    const auto s = summarize(records);
    return {worst <= 1e-8 && s.count_improved_mlp == 0,
            fmt("max |proposed - mlp| %.3g, improved over mlp %.0f, ", worst, static_cast<double>(s.count_improved_mlp)) +
                gaps(s)};
}

Outcome nondesc_direction() {
    bool pass = true;
    std::string detail;
    for (auto [m, need] : {std::pair<std::size_t, double>{2, 0.70}, {3, 0.80}}) {
        const auto s = summarize(run_trials(config(GraphFamily::nondesc, m, 300, kSeed)));
        const double frac = static_cast<double>(s.count_improved_tp) / static_cast<double>(s.trials);
        pass = pass && ordered(s) && frac >= need;
        if (!detail.empty()) detail += "; ";
        detail += fmt("m=%.0f: ", static_cast<double>(m)) + gaps(s) +
                  fmt(", improved over tp %.3f (need %.2f)", frac, need);
    }
    return {pass, detail};
}

Outcome mediator_direction() {
    auto c = config(GraphFamily::mediator, 1, 200, kSeed);
    c.bb.node_budget = 2000;
    const auto s = summarize(run_trials(c));
    const double tp = static_cast<double>(s.count_improved_tp) / static_cast<double>(s.trials);
    const double mlp = static_cast<double>(s.count_improved_mlp) / static_cast<double>(s.trials);
    return {ordered(s) && tp >= 0.60 && mlp > 0.0,
            gaps(s) + fmt(", improved over tp %.3f (need 0.60), over mlp %.3f (need > 0)", tp, mlp)};
}

Outcome truth_audit() {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const auto scm = sample_scm(GraphFamily::mediator, {}, 1, derive_seed(kSeed + 7, i));
        const auto truth = ground_truth_joint(scm);
        const auto ev = scm_to_evidence(scm, Availability::joint);
        for (auto query : {QuerySpec::pns(), QuerySpec::pn()}) {
            try {
                worst = std::max(worst, build_thm3_program(ev, query).max_residual(truth));
            } catch (const UndefinedConditionalError&) {
            }
        }
    }
    return {worst < 1e-10, fmt("100 instances, max residual %.3g", worst)};
}

Outcome budget_monotonicity() {
    std::size_t broken = 0, inner_found = 0, inner_broken = 0;
    for (std::uint64_t i = 0; i < 50; ++i) {
        const auto scm = sample_scm(GraphFamily::mediator, {}, 1, derive_seed(kSeed + 11, i));
        const auto prog = build_thm3_program(scm_to_evidence(scm, Availability::joint), QuerySpec::pns());
        BbOptions one, full;
        one.node_budget = 1;
        full.node_budget = 2000;
        const auto a = solve_bounds(prog, one);
        const auto b = solve_bounds(prog, full);
        if (!b.bounds.within(a.bounds, 1e-12)) ++broken;
        for (const auto* r : {&a, &b})
            if (r->inner_bounds) {
                ++inner_found;
                if (!r->inner_bounds->within(r->bounds, 1e-7)) ++inner_broken;
            }
    }
    return {broken == 0 && inner_broken == 0,
            fmt("50 instances, %.0f budget breaks, %.0f inner intervals, %.0f outside", static_cast<double>(broken),
                static_cast<double>(inner_found), static_cast<double>(inner_broken))};
}

std::string slurp(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "pocbound_acceptance";
    fs::remove_all(root);
    struct Run {
        std::string args;
        std::string dir;
    };
    const std::vector<Run> runs{
        {"--seed 9 --jobs 1 simulate --family nondesc --m 2 --trials 200", "nd_a"},
        {"--seed 9 --jobs 1 simulate --family nondesc --m 2 --trials 200", "nd_b"},
        {"--seed 9 --jobs 4 simulate --family nondesc --m 2 --trials 200", "nd_c"},
        {"--seed 9 --jobs 1 simulate --family mediator --m 1 --trials 30 --availability joint", "md_a"},
        {"--seed 9 --jobs 1 simulate --family mediator --m 1 --trials 30 --availability joint", "md_b"},
        {"--seed 9 --jobs 3 simulate --family mediator --m 1 --trials 30 --availability joint", "md_c"},
    };
    for (const auto& r : runs) {
        const std::string cmd = std::string("\"") + POCBOUND_EXE + "\" " + r.args + " --out-dir \"" +
                                (root / r.dir).string() + "\" > /dev/null";
        if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
    }
    std::size_t compared = 0;
    for (const char* group : {"nd", "md"})
        for (const char* file : {"trials.csv", "summary.csv"}) {
            const auto a = slurp(root / (std::string(group) + "_a") / file);
            if (a.empty()) return {false, std::string("empty ") + file};
            for (const char* other : {"_b", "_c"}) {
                if (slurp(root / (std::string(group) + other) / file) != a)
                    return {false, std::string(group) + other + "/" + file + " differs"};
                ++compared;
            }
        }
    fs::remove_all(root);
    return {true, fmt("%.0f file pairs byte-identical across runs and --jobs 1/3/4", static_cast<double>(compared))};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"lp-closed-form-equivalence", 5.0, lp_matches_closed_form},
        {"validity", 0.0, validity},
        {"nesting", 0.0, nesting},
        {"single-covariate-degeneracy", 0.0, single_covariate},
        {"nondescendant-directional", 120.0, nondesc_direction},
        {"mediator-directional", 900.0, mediator_direction},
        {"truth-feasibility-audit", 0.0, truth_audit},
        {"budget-monotonicity", 0.0, budget_monotonicity},
        {"determinism", 0.0, determinism},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto& c = criteria[k];
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_s > 0 && secs >= c.limit_s) {
            o.pass = false;
            o.detail += fmt("; runtime %.1f s over the %.0f s limit", secs, c.limit_s);
        }
        if (!o.pass) ++failed;
        std::printf("%s %zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k + 1, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
