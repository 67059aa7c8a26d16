#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

void add_common(CLI::App* sub, jsde::cli::Options& o) {
    sub->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
    sub->add_option("--seed", o.seed, "Master seed (overrides the scenario)");
    sub->add_option("--out", o.out, "Output directory (default $JSDE_OUT_DIR, then ./jsde_out)");
    sub->add_option("--dt", o.dt, "Simulation step (must divide the horizon)");
    sub->add_option("--jobs", o.jobs, "Worker threads; results do not depend on it");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace jsde::cli;
    CLI::App app{"Simulation and verification tools for jump SDE systems with mean-field drifts"};
    app.require_subcommand(1);
    Options o;

    auto* sim = app.add_subcommand("simulate", "Monte Carlo simulation of the system");
    add_common(sim, o);
    sim->add_option("--paths", o.paths, "Number of trajectories");
    sim->add_option("--csv-paths", o.csv_paths, "Trajectories written to paths.csv");

    auto* approx = app.add_subcommand("approx", "Frozen-drift approximation hierarchy");
    add_common(approx, o);
    approx->add_option("--paths", o.paths, "Number of noise realisations");
    approx->add_option("--levels", o.levels, "Highest level nMax (>= 2)");
    approx->add_option("--mode", o.mode, "realized | nested-mc | deterministic");
    approx->add_option("--inner", o.inner, "Inner continuations per step for nested-mc");

    auto* val = app.add_subcommand("validate", "Check the structural conditions on the coefficients");
    add_common(val, o);

    auto* uniq = app.add_subcommand("uniqueness", "Refinement self-consistency diagnostic");
    add_common(uniq, o);
    uniq->add_option("--paths", o.paths, "Number of noise realisations");
    uniq->add_option("--ladder", o.ladder, "Step sizes, coarse to fine")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsageError;
    }

    try {
        if (*sim) {
            return cmd_simulate(o);
        }
        if (*approx) {
            return cmd_approx(o);
        }
        if (*val) {
            return cmd_validate(o);
        }
        return cmd_uniqueness(o);
    } catch (const UsageError& e) {
        std::cerr << "jsde: usage: " << e.what() << '\n';
        return kUsageError;
    } catch (const jsde::NumericError& e) {
        std::cerr << "jsde: numeric failure: " << e.what() << '\n';
        return kNumericFailure;
    } catch (const std::exception& e) {
        std::cerr << "jsde: " << e.what() << '\n';
        return kValidationFailure;
    }
}
