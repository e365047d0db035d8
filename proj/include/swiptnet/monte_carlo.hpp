#pragma once

// Monte Carlo estimator for the outage and throughput metrics. Trials are
// grouped into fixed-size blocks, each driven by its own counter-based RNG
// substream, so results are bit-identical for any worker count and any
// scheduling order.

#include <cstdint>

#include "swiptnet/model.hpp"

namespace swiptnet::mc {

constexpr std::uint64_t kTrialsPerBlock = 8192;

// Philox 4x32-10 counter-based generator. One instance per (seed, stream)
// pair; successive outputs walk the counter, streams never overlap.
class Philox {
public:
    Philox(std::uint64_t seed, std::uint64_t stream);

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    double next_unit();    // uniform on (0,1), never exactly 0 or 1
    double next_normal();  // standard normal (Box-Muller, cached pair)

private:
    void refill();

    std::uint32_t key_[2];
    std::uint32_t ctr_[4];
    std::uint32_t out_[4];
    int avail_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

// One draw of a squared channel gain: Gamma with shape m (any real >= 0.5)
// and mean omega.
double sample_channel_power(double m, double omega, Philox& rng);

struct SimSpec {
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    bool exact_af_gain = false;    // keep relay noise inside the AF gain
    bool include_bc_noise = false;  // keep receiver noise in the linear branch
    int workers = 1;
};

struct SimResult {
    std::uint64_t trials = 0;

    // Outage counts and rates per node, and their binomial standard errors.
    std::uint64_t n_out_pu_a = 0, n_out_pu_b = 0, n_out_su_1 = 0, n_out_su_2 = 0;
    double op_pu_a = 0.0, op_pu_b = 0.0, op_su_1 = 0.0, op_su_2 = 0.0;
    double se_pu_a = 0.0, se_pu_b = 0.0, se_su_1 = 0.0, se_su_2 = 0.0;

    // Fraction of trials in which each helper's harvester stayed below
    // saturation; the complement is the saturated fraction.
    std::uint64_t n_lin_su1 = 0, n_lin_su2 = 0;
    double lin_fraction_su1 = 0.0, lin_fraction_su2 = 0.0;

    double throughput = 0.0;
    double energy_efficiency = 0.0;

    double op(model::Node n) const;
    double stderr_of(model::Node n) const;
};

SimResult simulate(const model::NetworkConfig& net, const model::SwiptParams& swipt,
                   const model::PowerParams& power, const model::TargetRates& rates,
                   const SimSpec& spec);

// Runs the simulator twice on common random numbers: once with the default
// AF-gain and noise approximations, once with both exact-model flags set.
// The deltas isolate the modeling error of the closed-form branch.
struct GapReport {
    SimResult approximate;
    SimResult exact;
    double d_pu_a = 0.0, d_pu_b = 0.0, d_su_1 = 0.0, d_su_2 = 0.0;
};

GapReport approximation_gap(const model::NetworkConfig& net,
                            const model::SwiptParams& swipt,
                            const model::PowerParams& power,
                            const model::TargetRates& rates, const SimSpec& spec);

}  // namespace swiptnet::mc
