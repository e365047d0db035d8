// Closed-form performance layer for the two-way relaying network: per-link
// outage CDFs of the relayed licensed and helper signals, each split by the
// harvester operating regime (linear below the saturation input, saturated
// above it), plus node outage probabilities, direct-exchange outage, system
// throughput, energy efficiency, and the critical power-sharing factor for
// effective spectrum sharing.
//
// Every probability here is evaluated from finite or truncated series in
// signed-log arithmetic, so results stay meaningful when individual factors
// span hundreds of orders of magnitude. Functions are pure and thread-safe.
#pragma once

#include <array>
#include <optional>
#include <stdexcept>

#include "swiptnet/model.hpp"

namespace swiptnet::analytic {

// Truncation policy for the series expansions used by the CDF evaluators.
struct SeriesControl {
    int s_max = 64;          // cap on outer expansion layers, >= 1
    int u_max = 64;          // cap on inner kernel-series terms, >= 1
    double rel_stop = 1e-9;  // relative layer increment that stops a series, > 0
};

// Thrown by critical_mu when no power-sharing factor below 1 can meet the
// requested primary outage target.
class no_feasible_mu : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One harvester-regime branch of a link CDF.
struct BranchCdf {
    double value = 0.0;       // clamped to [0,1]
    double raw = 0.0;         // as evaluated, before clamping
    int terms = 0;            // outer series layers evaluated (0 = closed form)
    bool limit_case = false;  // degenerate denominator -> documented limit value
    bool converged = true;    // false when s_max was hit before rel_stop
    double condition = 1.0;   // worst cancellation ratio seen while summing
};

// Distribution of one Nakagami power gain: Gamma(shape m, mean omega).
struct GammaFading {
    double m = 1.0;
    double omega = 1.0;
};

// Both branches of one relayed-link CDF at the link's threshold SNR.
struct LinkCdf {
    BranchCdf lin;
    BranchCdf sat;
    double total = 0.0;  // clamp(lin.raw + sat.raw, 0, 1)
};

// Outage of one node. Licensed terminals combine two relayed copies, so they
// carry two link entries; helper terminals carry one.
struct NodeOutage {
    double probability = 1.0;
    double threshold_snr = 0.0;
    int links = 0;
    std::array<LinkCdf, 2> link{};
};

struct OutageReport {
    NodeOutage pu_a;
    NodeOutage pu_b;
    NodeOutage su_1;
    NodeOutage su_2;
};

// ln of int_lo^hi x^n e^{c x} dx for integer n >= 0 and 0 <= lo < hi. Exact
// up to rounding for any sign of c; the integrand is positive so the log is
// always real.
double log_integral_power_exp(int n, double c, double lo, double hi);

// CDF and log survival function of W = scale_x * X + scale_y * Y where X and
// Y are independent Gamma power gains. The survival function is exact in log
// scale even when Pr[W > w] underflows a double.
double gamma_sum_cdf(double w, const GammaFading& x, double scale_x, const GammaFading& y,
                     double scale_y);
double log_gamma_sum_sf(double w, const GammaFading& x, double scale_x, const GammaFading& y,
                        double scale_y);

// Linear-regime CDF of the relayed licensed signal at threshold gamma, for
// the relay/target pair described by coeffs. to_target is the fading of the
// relay<->target link (the X gain), to_other the relay<->opposite-terminal
// link (the Y gain). Joint probability of the outage event and W <= P_th.
// When the power-sharing factor cannot support gamma at all (cap_xi <= 0)
// the branch returns the certain-outage limit 1, flagged as limit_case.
BranchCdf cdf_primary_lin(double gamma, const model::DerivedCoefficients& coeffs,
                          const GammaFading& to_target, const GammaFading& to_other,
                          const SeriesControl& series = {});

// Saturated-regime companion: joint probability of outage and W > P_th.
// Shares the cap_xi feasibility guard; in the degenerate case every
// saturated draw is an outage, so the branch returns Pr[W > P_th].
BranchCdf cdf_primary_sat(double gamma, const model::DerivedCoefficients& coeffs,
                          const GammaFading& to_target, const GammaFading& to_other,
                          const SeriesControl& series = {});

// Helper-side CDFs. to_target / to_other describe the components of the
// aggregate harvested power W at the transmitting helper (paired with
// coeffs.p_j and coeffs.p_jhat respectively); helper_link is the fading of
// the helper<->helper channel. Degenerate denominators return the limiting
// values Pr[W <= P_th] (lin) and Pr[W > P_th] (sat), flagged as limit_case.
BranchCdf cdf_secondary_lin(double gamma, const model::DerivedCoefficients& coeffs,
                            const GammaFading& to_target, const GammaFading& to_other,
                            const GammaFading& helper_link, const SeriesControl& series = {});

BranchCdf cdf_secondary_sat(double gamma, const model::DerivedCoefficients& coeffs,
                            const GammaFading& to_target, const GammaFading& to_other,
                            const GammaFading& helper_link, const SeriesControl& series = {});

// Node-level outage probabilities. Licensed nodes multiply the clamped
// branch totals of both relayed copies (selection combining); helper nodes
// use the single copy relayed by the opposite helper. Throws
// swiptnet::math::convergence_error if any required series fails to settle
// within the configured caps.
NodeOutage outage_primary(model::Node node, const model::NetworkConfig& net,
                          const model::SwiptParams& swipt, const model::PowerParams& power,
                          const model::TargetRates& rates, const SeriesControl& series = {});

NodeOutage outage_secondary(model::Node node, const model::NetworkConfig& net,
                            const model::SwiptParams& swipt, const model::PowerParams& power,
                            const model::TargetRates& rates, const SeriesControl& series = {});

OutageReport outage_all(const model::NetworkConfig& net, const model::SwiptParams& swipt,
                        const model::PowerParams& power, const model::TargetRates& rates,
                        const SeriesControl& series = {});

// Outage of the licensed pair exchanging data directly in two phases without
// the helpers. With asymmetric powers or noise figures the two directions
// differ; the worse direction is returned.
double outage_direct(const model::NetworkConfig& net, const model::PowerParams& power,
                     double rate);

// Smallest power-sharing factor for which the relayed licensed links can
// reach threshold gamma at all; below it the linear-branch CDF pins at 1.
double feasibility_edge_mu(double gamma_target);

enum class PrimaryNodeChoice { worst, pu_a, pu_b };

struct CriticalMuResult {
    double mu = 0.0;       // smallest factor meeting the target
    double outage = 0.0;   // primary outage at that factor
    double target = 0.0;   // outage target actually used
};

// Critical power-sharing factor: the smallest mu in (feasibility edge, 1)
// at which the chosen primary outage drops to the target (direct-exchange
// outage by default, or an explicit quality-of-service probability). Both
// helpers share the same factor. Throws no_feasible_mu when even mu -> 1
// cannot meet the target.
CriticalMuResult critical_mu(const model::NetworkConfig& net, const model::SwiptParams& swipt,
                             const model::PowerParams& power, const model::TargetRates& rates,
                             const SeriesControl& series = {},
                             PrimaryNodeChoice node = PrimaryNodeChoice::worst,
                             std::optional<double> target_outage = {});

// Delay-limited system throughput: each node contributes its target rate
// weighted by its success probability over the (1-alpha)/3 data fraction.
double throughput(const OutageReport& report, const model::SwiptParams& swipt,
                  const model::TargetRates& rates);
double throughput(const model::NetworkConfig& net, const model::SwiptParams& swipt,
                  const model::PowerParams& power, const model::TargetRates& rates,
                  const SeriesControl& series = {});

// Throughput per unit of licensed energy spent across harvesting and
// broadcast phases. Requires alpha > 0 or beta > 0.
double energy_efficiency(double system_throughput, const model::SwiptParams& swipt,
                         const model::PowerParams& power);
double energy_efficiency(const model::NetworkConfig& net, const model::SwiptParams& swipt,
                         const model::PowerParams& power, const model::TargetRates& rates,
                         const SeriesControl& series = {});

}  // namespace swiptnet::analytic
