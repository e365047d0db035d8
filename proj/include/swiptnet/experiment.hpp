// Experiment plumbing behind the command-line tool: INI-style configuration
// files resolved into model parameters (with dB and dBm fields converted to
// linear watts), parameter sweeps dispatched to the closed-form, Monte Carlo
// and swarm layers, and deterministic CSV output with a sidecar file echoing
// the fully resolved configuration.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swiptnet/analytic.hpp"
#include "swiptnet/model.hpp"
#include "swiptnet/monte_carlo.hpp"
#include "swiptnet/pso.hpp"

namespace swiptnet::cli {

// Raised for unreadable, malformed, or contradictory configuration input;
// parse failures carry the offending line number.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double db_to_linear(double db);
double linear_to_db(double linear);

struct SweepSpec {
    std::string variable = "snr_db";  // snr_db, alpha, beta, mu, rate or p_th_dbm
    double start = 10.0;
    double stop = 40.0;
    double step = 5.0;
    std::string metric = "throughput";  // metric-sweep selector, or energy_efficiency
};

struct PsoSpec {
    pso::PsoConfig swarm;
    std::string objective = "throughput";  // or energy_efficiency
    bool mu_floor = true;  // raise the mu lower bound to the critical factor
};

struct ExperimentConfig {
    model::NetworkConfig net;
    model::SwiptParams swipt;  // p_th already converted to watts
    model::TargetRates rates;

    // Power resolution: P_a = P_b = noise * 10^(snr_db/10) unless absolute
    // watt overrides are given; every node shares noise_dbm unless overridden.
    double snr_db = 20.0;
    std::optional<double> p_a_watts;
    std::optional<double> p_b_watts;
    double noise_dbm = -60.0;
    std::array<std::optional<double>, 4> node_noise_dbm{};  // pu_a, pu_b, su_1, su_2
    std::array<std::optional<double>, 2> conv_noise_dbm{};  // per helper

    bool has_sweep = false;  // a [sweep] section was given
    SweepSpec sweep;
    mc::SimSpec sim;
    analytic::SeriesControl series;
    PsoSpec pso;

    model::PowerParams power() const;
};

// Parses the sectioned key=value format. Unknown sections, unknown keys and
// duplicate keys are errors; all values are validated while resolving.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// The inclusive sweep grid start, start+step, ..., stop.
std::vector<double> sweep_points(const SweepSpec& sweep);

// Writes one sweep value into the configuration field named by the sweep.
void apply_sweep_value(ExperimentConfig& cfg, double value);

// Full-precision scientific formatting used for every numeric CSV field.
std::string format_field(double v);

// RFC-4180 style quoting: fields containing commas, quotes or newlines are
// wrapped in double quotes with embedded quotes doubled.
std::string csv_escape(const std::string& field);

// Writes <out_path>.meta with the fully resolved configuration in a fixed
// section and key order, so identical runs produce identical sidecars.
void write_metadata(const ExperimentConfig& cfg, const std::string& subcommand,
                    const std::string& out_path);

// Experiment runners. Each writes an RFC-4180 style CSV with a header row to
// out_path plus the metadata sidecar, and is byte-deterministic for a fixed
// configuration. Per-point series convergence failures are recorded in the
// row's status column instead of aborting the sweep.
void run_outage_sweep(const ExperimentConfig& cfg, const std::string& out_path);
void run_metric_sweep(const ExperimentConfig& cfg, const std::string& out_path);
void run_mu_critical(const ExperimentConfig& cfg, const std::string& out_path);
void run_optimize(const ExperimentConfig& cfg, const std::string& out_path);

}  // namespace swiptnet::cli
