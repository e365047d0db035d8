// Self-validation suite: re-derives the headline numerical claims of the
// library (closed form versus simulation, series truncation behavior,
// saturation plateaus, feasibility edges, critical power sharing, swarm
// optimization patterns, special-function accuracy, byte determinism) and
// reports each as a pass/fail check with its measured value and tolerance.
// The same table backs the validate subcommand and the acceptance binary.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swiptnet/experiment.hpp"

namespace swiptnet::accept {

struct CheckResult {
    int criterion = 0;     // stable grouping id, 1..8
    std::string name;      // short kebab-case check identifier
    bool pass = false;
    double measured = 0.0;   // worst observed value, framed so that
    double tolerance = 0.0;  // measured <= tolerance means pass
    std::string detail;      // deterministic free-form context
};

struct Options {
    std::uint64_t trials = 1000000;  // Monte Carlo depth of the agreement check
    std::uint64_t seed = 2024;
    int workers = 1;
    std::string scratch_dir = ".";  // where determinism reruns write and erase

    // Depth of the expensive checks; the defaults match the published
    // tolerances, smaller values make quick harness-sanity runs possible.
    int swarm_population = 20;
    int swarm_iterations = 50;
    int oracle_points = 100;

    // Multiplies every positive tolerance. 1 is the real suite; values near
    // zero deliberately corrupt the thresholds to prove the harness can fail.
    double tolerance_scale = 1.0;
};

std::vector<CheckResult> run_all(const Options& opt = {});

bool all_passed(const std::vector<CheckResult>& checks);

// Writes the full check table as CSV (criterion, check, status, measured,
// tolerance, detail) plus the metadata sidecar. Trials, seed and worker
// count come from the [sim] section and the scratch directory from the
// output path; the remaining depth knobs are taken from `depth`. Returns
// true when every check passed.
bool run_validate(const cli::ExperimentConfig& cfg, const std::string& out_path,
                  Options depth = {});

}  // namespace swiptnet::accept
