// Command-line front end: parameter sweeps, critical power-sharing solves,
// swarm optimization and the self-validation suite, all writing deterministic
// CSV files with a sidecar echoing the resolved configuration.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 convergence
// failure (a series or feasibility solve that did not settle), 3 validation
// failure (the validate subcommand found a failing check).
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "swiptnet/acceptance.hpp"
#include "swiptnet/analytic.hpp"
#include "swiptnet/experiment.hpp"
#include "swiptnet/special_functions.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<int> s_max;
};

void attach_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path,
                    "INI configuration file; built-in reference defaults when omitted");
    sub->add_option("--out", args.out_path, "output CSV path (a .meta sidecar is added)")
        ->required();
    sub->add_option("--trials", args.trials, "Monte Carlo trials per point")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", args.seed, "seed for the simulator and the swarm");
    sub->add_option("--workers", args.workers, "worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_option("--series-smax", args.s_max, "series truncation cap")
        ->check(CLI::PositiveNumber);
}

swiptnet::cli::ExperimentConfig resolve(const CommonArgs& args) {
    swiptnet::cli::ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = swiptnet::cli::load_config(args.config_path);
    if (args.trials) cfg.sim.trials = *args.trials;
    if (args.seed) {
        cfg.sim.seed = *args.seed;
        cfg.pso.swarm.seed = *args.seed;
    }
    if (args.workers) cfg.sim.workers = *args.workers;
    if (args.s_max) cfg.series.s_max = *args.s_max;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Outage, throughput and energy efficiency of a bidirectional relaying "
        "network with wireless power transfer: closed forms, simulation, and "
        "swarm optimization"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* outage = app.add_subcommand(
        "outage-sweep", "outage probability of all four nodes over a swept parameter");
    CLI::App* metric = app.add_subcommand(
        "metric-sweep", "throughput or energy efficiency over a swept parameter");
    CLI::App* mu = app.add_subcommand(
        "mu-critical", "smallest power-sharing factor matching the direct benchmark");
    CLI::App* optimize = app.add_subcommand(
        "optimize", "swarm search over the harvesting splits and the sharing factor");
    CLI::App* validate = app.add_subcommand(
        "validate", "run the full self-validation suite and write the check table");
    for (CLI::App* sub : {outage, metric, mu, optimize, validate}) attach_common(sub, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const swiptnet::cli::ExperimentConfig cfg = resolve(args);
        if (outage->parsed()) {
            swiptnet::cli::run_outage_sweep(cfg, args.out_path);
        } else if (metric->parsed()) {
            swiptnet::cli::run_metric_sweep(cfg, args.out_path);
        } else if (mu->parsed()) {
            swiptnet::cli::run_mu_critical(cfg, args.out_path);
        } else if (optimize->parsed()) {
            swiptnet::cli::run_optimize(cfg, args.out_path);
        } else {
            if (!swiptnet::accept::run_validate(cfg, args.out_path)) {
                std::cerr << "validate: at least one check failed; see " << args.out_path
                          << "\n";
                return 3;
            }
        }
        return 0;
    } catch (const swiptnet::cli::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const swiptnet::math::convergence_error& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return 2;
    } catch (const swiptnet::analytic::no_feasible_mu& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
