#include <CLI11.hpp>

#include <iostream>

#include "poc/cli_io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Bounds on probabilities of causation from mixed observational and experimental data"};
    app.require_subcommand(1);
    app.fallthrough();

    poc::GlobalFlags global;
    double tol = 0.0;
    app.add_option("--seed", global.seed, "Seed for every random draw");
    app.add_option("--jobs", global.jobs, "Worker threads for simulate")->check(CLI::PositiveNumber);
    auto* tol_opt = app.add_option("--tol", tol, "Evidence consistency tolerance")->check(CLI::PositiveNumber);

    poc::BoundsFlags bounds;
    std::size_t budget = 0;
    double gap = 0.0;
    std::string out_path;
    auto* b = app.add_subcommand("bounds", "Certified bounds for a problem document");
    b->add_option("problem", bounds.problem, "Problem document (JSON)")->required();
    auto* out_opt = b->add_option("--out", out_path, "Result document path");
    auto* budget_opt = b->add_option("--budget", budget, "Branch-and-bound node budget");
    auto* gap_opt = b->add_option("--gap", gap, "Branch-and-bound gap tolerance")->check(CLI::NonNegativeNumber);

    poc::SimulateFlags sim;
    auto* s = app.add_subcommand("simulate", "Random-model experiment with CSV reports");
    s->add_option("--family", sim.family, "nondesc or mediator")->check(CLI::IsMember({"nondesc", "mediator"}));
    s->add_option("--m", sim.m, "Number of covariates");
    s->add_option("--trials", sim.trials, "Number of random models");
    s->add_option("--availability", sim.availability, "joint, covariate_specific or marginal_only")
        ->check(CLI::IsMember({"joint", "covariate_specific", "marginal_only"}));
    s->add_option("--query", sim.query, "pns, pn or ps")->check(CLI::IsMember({"pns", "pn", "ps"}));
    s->add_option("--out-dir", sim.out_dir, "Directory for the CSV files");
    s->add_option("--budget", sim.budget, "Branch-and-bound node budget");
    s->add_option("--plot-sample", sim.plot_sample, "Records per plot series (0: up to 100)");
    s->add_flag("--timing", sim.timing, "Write measured solve times to trials.csv");

    poc::OracleFlags oracle;
    std::string emit;
    auto* o = app.add_subcommand("oracle", "True value of a query on one random model");
    o->add_option("--family", oracle.family, "nondesc or mediator")->check(CLI::IsMember({"nondesc", "mediator"}));
    o->add_option("--m", oracle.m, "Number of covariates");
    o->add_option("--availability", oracle.availability, "Evidence families to emit")
        ->check(CLI::IsMember({"joint", "covariate_specific", "marginal_only"}));
    o->add_option("--query", oracle.query, "pns, pn or ps")->check(CLI::IsMember({"pns", "pn", "ps"}));
    auto* emit_opt = o->add_option("--emit-evidence", emit, "Write the model's evidence as a problem document");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : poc::kExitUsage;
    }
    if (*tol_opt) global.tol = tol;

    if (*b) {
        if (*out_opt) bounds.out = out_path;
        if (*budget_opt) bounds.budget = budget;
        if (*gap_opt) bounds.gap = gap;
        return poc::cmd_bounds(bounds, global, std::cout, std::cerr);
    }
    if (*s) return poc::cmd_simulate(sim, global, std::cout, std::cerr);
    if (*emit_opt) oracle.emit_evidence = emit;
    return poc::cmd_oracle(oracle, global, std::cout, std::cerr);
}
