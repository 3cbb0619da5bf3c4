#include <algorithm>
#include <atomic>
#include <chrono>
#include <numeric>
#include <random>
#include <thread>

#include "poc/closed_form.hpp"
#include "poc/rng.hpp"
#include "poc/scm_lab.hpp"

namespace poc {

namespace {

BoundsInterval lp_bounds(const ConstraintProgram& program) {
    const auto report = solve_bounds(program);
    if (report.status == SolveStatus::infeasible)
        throw EvidenceError("generated evidence gave an infeasible program");
    return report.bounds;
}

BoundsInterval tp_interval(const EvidenceSet& evidence, const QuerySpec& query) {
    const auto& s = evidence.schema();
    const bool default_events =
        query.kind != QueryKind::pns ||
        (query.targets == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
    if (s.nx() == 2 && s.ny() == 2 && default_events)
        return tp_bounds(BinaryEvidence::from_evidence(evidence), query);
    return lp_bounds(build_thm1_program(evidence.restricted_to({}), query));
}

}  // namespace

BoundsInterval mlp_baseline_bounds(const EvidenceSet& evidence, const QuerySpec& query,
                                   std::string* warning) {
    const std::size_t m = evidence.schema().covariate_count();
    bool any = false;
    BoundsInterval out{0.0, 1.0, true};
    for (std::size_t i = 0; i < m; ++i) {
        const auto restricted = evidence.restricted_to({i});
        const bool has_cov = std::any_of(restricted.families().begin(), restricted.families().end(),
                                         [](const EvidenceFamily& f) { return !f.covariates().empty(); });
        if (!has_cov) continue;
        any = true;
        const auto b = lp_bounds(build_cor2_program(restricted, query));
        out.lb = std::max(out.lb, b.lb);
        out.ub = std::min(out.ub, b.ub);
    }
    if (!any) {
        if (warning) *warning = "no covariate families; using closed-form bounds";
        return tp_interval(evidence, query);
    }
    return out;
}

TrialRecord run_trial(const TrialConfig& config, std::size_t index) {
    TrialRecord rec;
    rec.trial = index;
    const auto scm = sample_scm(config.family, config.cards, config.m, derive_seed(config.seed, index));
    const auto evidence = scm_to_evidence(scm, config.availability);
    try {
        rec.truth = true_poc(scm, config.query);
    } catch (const UndefinedConditionalError&) {
        rec.defined = false;
        return rec;
    }
    rec.tp = tp_interval(evidence, config.query);
    rec.mlp = mlp_baseline_bounds(evidence, config.query);

    const auto start = std::chrono::steady_clock::now();
    ConstraintProgram program;
    if (config.family == GraphFamily::mediator)
        program = build_thm3_program(evidence, config.query, config.build);
    else if (config.availability == Availability::covariate_specific)
        program = build_cor2_program(evidence, config.query);
    else
        program = build_thm1_program(evidence, config.query);
    const auto report = solve_bounds(program, config.bb);
    rec.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (report.status == SolveStatus::infeasible)
        throw EvidenceError("trial " + std::to_string(index) + ": generated evidence is infeasible");
    rec.proposed = report.bounds;
    rec.status = report.status;
    rec.nodes = report.nodes_explored;
    return rec;
}

std::vector<TrialRecord> run_trials(const TrialConfig& config) {
    if (config.trials == 0) throw ArgumentError("trials must be at least 1");
    std::vector<TrialRecord> records(config.trials);
    const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(config.trials)));
    if (jobs == 1) {
        for (std::size_t i = 0; i < config.trials; ++i) records[i] = run_trial(config, i);
        return records;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j)
        pool.emplace_back([&, j] {
            try {
                for (std::size_t i = next++; i < config.trials; i = next++) records[i] = run_trial(config, i);
            } catch (...) {
                errors[j] = std::current_exception();
                next = config.trials;
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return records;
}

SummaryStats summarize(const std::vector<TrialRecord>& records) {
    SummaryStats s;
    for (const auto& r : records) {
        if (!r.defined) {
            ++s.skipped;
            continue;
        }
        ++s.trials;
        const auto& a = r.proposed;
        s.avg_tp_lb_gain += a.lb - r.tp.lb;
        s.avg_tp_ub_drop += r.tp.ub - a.ub;
        s.avg_mlp_lb_gain += a.lb - r.mlp.lb;
        s.avg_mlp_ub_drop += r.mlp.ub - a.ub;
        s.avg_gap_tp += r.tp.width();
        s.avg_gap_mlp += r.mlp.width();
        s.avg_gap_proposed += a.width();
        if (a.lb > r.tp.lb + kImprovementTol || a.ub < r.tp.ub - kImprovementTol) ++s.count_improved_tp;
        if (a.lb > r.mlp.lb + kImprovementTol || a.ub < r.mlp.ub - kImprovementTol) ++s.count_improved_mlp;
    }
    if (s.trials == 0) throw ArgumentError("summarize needs at least one defined record");
    const double n = static_cast<double>(s.trials);
    for (double* v : {&s.avg_tp_lb_gain, &s.avg_tp_ub_drop, &s.avg_mlp_lb_gain, &s.avg_mlp_ub_drop,
                      &s.avg_gap_tp, &s.avg_gap_mlp, &s.avg_gap_proposed})
        *v /= n;
    return s;
}

PlotSeries sorted_plot_series(const std::vector<TrialRecord>& records, std::size_t sample,
                              std::uint64_t seed) {
    std::vector<const TrialRecord*> pool;
    for (const auto& r : records)
        if (r.defined) pool.push_back(&r);
    if (sample > pool.size())
        throw ArgumentError("plot sample " + std::to_string(sample) + " exceeds the " +
                            std::to_string(pool.size()) + " usable records");
    if (sample < pool.size()) {
        // partial Fisher-Yates with a fixed generator, so output is portable
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < sample; ++i) {
            const auto span = pool.size() - i;
            const auto j = i + std::min(span - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(span)));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(sample);
        std::sort(pool.begin(), pool.end(), [](auto a, auto b) { return a->trial < b->trial; });
    }
    PlotSeries out;
    auto series = [&](bool lower) {
        auto rows = pool;
        std::stable_sort(rows.begin(), rows.end(), [&](auto a, auto b) {
            return lower ? a->tp.lb < b->tp.lb : a->tp.ub < b->tp.ub;
        });
        std::vector<PlotRow> table;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const auto* r = rows[k];
            table.push_back(lower ? PlotRow{k, r->tp.lb, r->mlp.lb, r->proposed.lb}
                                  : PlotRow{k, r->tp.ub, r->mlp.ub, r->proposed.ub});
        }
        return table;
    };
    out.lower = series(true);
    out.upper = series(false);
    return out;
}

}  // namespace poc
