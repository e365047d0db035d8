#include "swiptnet/acceptance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "swiptnet/special_functions.hpp"

namespace swiptnet::accept {

namespace {

using cli::ExperimentConfig;

constexpr const char* kNodeNames[] = {"pu_a", "pu_b", "su_1", "su_2"};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double rel_err(double got, double want) {
    if (want == 0.0) return std::fabs(got);
    return std::fabs(got - want) / std::fabs(want);
}

// Collects checks; measured values are framed so that measured <= tolerance
// (or < with strict) means the check holds.
struct Suite {
    Options opt;
    std::vector<CheckResult> checks;

    void add(int criterion, std::string name, double measured, double tolerance,
             bool strict, std::string detail) {
        CheckResult c;
        c.criterion = criterion;
        c.name = std::move(name);
        c.measured = measured;
        c.tolerance = tolerance;
        const double limit = tolerance * opt.tolerance_scale;
        c.pass = strict ? measured < limit : measured <= limit;
        c.detail = std::move(detail);
        checks.push_back(std::move(c));
    }
};

// ---------------------------------------------------------------------------
// Built-in reference integrator. Deliberately independent of the series and
// continued-fraction strategies in the math layer: plain adaptive Simpson on
// explicitly transformed integrands, split at the integrands' decay scales.
// ---------------------------------------------------------------------------

template <typename F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

template <typename F>
double integrate_segments(const F& f, std::vector<double> knots, double rel_tol) {
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    // Crude composite pass sizes a shared absolute error budget, so dominant
    // segments dictate the accuracy demanded of negligible ones.
    double rough = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i], b = knots[i + 1];
        const double h = (b - a) / 8.0;
        double sum = f(a) + f(b);
        for (int j = 1; j < 8; ++j) sum += (j % 2 == 1 ? 4.0 : 2.0) * f(a + j * h);
        rough += std::fabs(sum * h / 3.0);
    }
    const double eps =
        std::max(rel_tol * rough / std::max<std::size_t>(knots.size() - 1, 1), 1e-305);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i], b = knots[i + 1];
        if (a == b) continue;
        const double m = 0.5 * (a + b);
        const double fa = f(a), fm = f(m), fb = f(b);
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_rec(f, a, b, fa, fm, fb, whole, eps, 44);
    }
    return total;
}

// int_0^x t^{a-1} e^{-t} dt for a >= 1.
double ref_lower_gamma(double a, double x) {
    const auto f = [a](double t) {
        if (t <= 0.0) return a == 1.0 ? 1.0 : 0.0;
        const double lg = (a - 1.0) * std::log(t) - t;
        return lg < -745.0 ? 0.0 : std::exp(lg);
    };
    std::vector<double> knots{0.0, x};
    for (double k : {0.5 * (a - 1.0), a - 1.0, a + 4.0})
        if (k > 0.0 && k < x) knots.push_back(k);
    return integrate_segments(f, std::move(knots), 1e-13);
}

// int_x^inf t^{a-1} e^{-t} dt for x > 0, cut where the tail is below 1e-26
// of the total.
double ref_upper_gamma(double a, double x) {
    const auto f = [a](double t) {
        const double lg = (a - 1.0) * std::log(t) - t;
        return lg < -745.0 ? 0.0 : std::exp(lg);
    };
    const double hi = x + 60.0 + 2.0 * a + 10.0 * std::sqrt(a);
    std::vector<double> knots{x, hi};
    for (double k : {a - 1.0, x + 2.0, x + 15.0})
        if (k > x && k < hi) knots.push_back(k);
    return integrate_segments(f, std::move(knots), 1e-13);
}

// K_v(x) = int_0^inf e^{-x cosh t} cosh(v t) dt.
double ref_bessel_k(double v, double x) {
    v = std::fabs(v);
    double t_hi = 1.0;
    while (x * std::cosh(t_hi) - v * t_hi < 760.0 && t_hi < 60.0) t_hi += 1.0;
    const auto f = [v, x](double t) {
        const double lg = -x * std::cosh(t);
        return lg < -745.0 ? 0.0 : std::exp(lg) * std::cosh(v * t);
    };
    return integrate_segments(f, {0.0, 1.0, 3.0, 0.5 * t_hi, t_hi}, 1e-12);
}

// W_{u,v}(x) through the Laplace integral of the Tricomi function: the head
// is flattened by the substitution s = t^a, the tail is cut where the
// integrand underflows.
double ref_whittaker_w(double u, double v, double x) {
    const double a = 0.5 + v - u;  // kept away from 0 by the sampling loop
    const double p = v + u - 0.5;
    const auto log_f = [&](double t) {
        return -x * t + (a - 1.0) * std::log(t) + p * std::log1p(t);
    };
    const auto head = [&](double s) {
        if (s <= 0.0) return 1.0 / a;
        const double t = std::pow(s, 1.0 / a);
        return std::exp(-x * t + p * std::log1p(t)) / a;
    };
    const auto tail = [&](double t) {
        const double lg = log_f(t);
        return lg < -745.0 ? 0.0 : std::exp(lg);
    };
    const double t_star = std::max(1.0, (a - 1.0 + std::max(p, 0.0)) / x);
    double t_hi = 2.0 * t_star + 2.0 / x;
    while (log_f(t_hi) > -760.0 && t_hi < 1e7) t_hi *= 1.6;
    const double integral =
        integrate_segments(head, {0.0, 1.0}, 1e-12) +
        integrate_segments(tail, {1.0, t_star, 2.0 * t_star, t_hi}, 1e-12);
    return std::exp(-0.5 * x + (v + 0.5) * std::log(x) - math::log_gamma(a)) * integral;
}

// ---------------------------------------------------------------------------
// Branch-level node assembly, needed where truncation caps must reach the
// partial sums that the node wrappers refuse to return.
// ---------------------------------------------------------------------------

analytic::GammaFading fading_of(const model::NetworkConfig& net, model::Node u,
                                model::Node v) {
    return {net.fading[static_cast<int>(model::link_between(u, v))].m,
            model::link_mean_power(net, u, v)};
}

double pu_a_outage_partial(const ExperimentConfig& cfg, int s_max) {
    const model::PowerParams power = cfg.power();
    const double gamma = model::target_snr(cfg.rates.pu_a, cfg.swipt.alpha,
                                           model::TransmissionMode::relayed);
    analytic::SeriesControl sc = cfg.series;
    sc.s_max = s_max;
    double prod = 1.0;
    for (int relay = 0; relay < 2; ++relay) {
        const model::DerivedCoefficients coeffs =
            model::derive_coefficients(cfg.swipt, power, relay, 0, gamma);
        const model::Node su = relay == 0 ? model::Node::su_1 : model::Node::su_2;
        const analytic::GammaFading fx = fading_of(cfg.net, su, model::Node::pu_a);
        const analytic::GammaFading fy = fading_of(cfg.net, su, model::Node::pu_b);
        const analytic::BranchCdf lin = analytic::cdf_primary_lin(gamma, coeffs, fx, fy, sc);
        const analytic::BranchCdf sat = analytic::cdf_primary_sat(gamma, coeffs, fx, fy, sc);
        prod *= std::clamp(lin.raw + sat.raw, 0.0, 1.0);
    }
    return std::clamp(prod, 0.0, 1.0);
}

double su_2_outage_partial(const ExperimentConfig& cfg, int s_max) {
    const model::PowerParams power = cfg.power();
    const double gamma = model::target_snr(cfg.rates.su_2, cfg.swipt.alpha,
                                           model::TransmissionMode::relayed);
    analytic::SeriesControl sc = cfg.series;
    sc.s_max = s_max;
    const model::DerivedCoefficients coeffs =
        model::derive_coefficients(cfg.swipt, power, 0, 0, gamma);
    const analytic::GammaFading fx = fading_of(cfg.net, model::Node::su_1, model::Node::pu_a);
    const analytic::GammaFading fy = fading_of(cfg.net, model::Node::su_1, model::Node::pu_b);
    const analytic::GammaFading fz =
        fading_of(cfg.net, model::Node::su_1, model::Node::su_2);
    const analytic::BranchCdf lin =
        analytic::cdf_secondary_lin(gamma, coeffs, fx, fy, fz, sc);
    const analytic::BranchCdf sat =
        analytic::cdf_secondary_sat(gamma, coeffs, fx, fy, fz, sc);
    return std::clamp(lin.raw + sat.raw, 0.0, 1.0);
}

std::array<double, 4> outage_vector(const ExperimentConfig& cfg,
                                    const model::SwiptParams& swipt) {
    const analytic::OutageReport report =
        analytic::outage_all(cfg.net, swipt, cfg.power(), cfg.rates, cfg.series);
    return {report.pu_a.probability, report.pu_b.probability, report.su_1.probability,
            report.su_2.probability};
}

// ---------------------------------------------------------------------------
// Criterion 1: closed form versus Monte Carlo across the SNR sweep.
// ---------------------------------------------------------------------------

void check_agreement(Suite& s) {
    ExperimentConfig cfg;
    mc::SimSpec spec;
    spec.trials = s.opt.trials;
    spec.seed = s.opt.seed;
    spec.workers = s.opt.workers;

    double worst = 0.0;
    std::string where = "none";
    for (double snr = 10.0; snr <= 40.0; snr += 5.0) {
        cfg.snr_db = snr;
        const model::PowerParams power = cfg.power();
        const std::array<double, 4> a = outage_vector(cfg, cfg.swipt);
        const mc::SimResult sim =
            mc::simulate(cfg.net, cfg.swipt, power, cfg.rates, spec);
        const std::array<double, 4> m = {sim.op_pu_a, sim.op_pu_b, sim.op_su_1,
                                         sim.op_su_2};
        const std::array<double, 4> se = {sim.se_pu_a, sim.se_pu_b, sim.se_su_1,
                                          sim.se_su_2};
        for (int n = 0; n < 4; ++n) {
            const double band = std::max(0.01, 4.0 * se[n]);
            const double ratio = std::fabs(a[n] - m[n]) / band;
            if (ratio > worst) {
                worst = ratio;
                where = std::string(kNodeNames[n]) + " at " + fmt(snr) + " dB: analytic " +
                        fmt(a[n]) + ", simulated " + fmt(m[n]) + " (stderr " + fmt(se[n]) +
                        ")";
            }
        }
    }
    s.add(1, "analytic-vs-monte-carlo", worst, 1.0, false,
          "largest |analytic - simulated| over SNR 10..40 dB and all nodes, as a fraction "
          "of the band max(0.01, 4 stderr) at " +
              std::to_string(s.opt.trials) + " trials; worst " + where);
}

// ---------------------------------------------------------------------------
// Criterion 2: series truncation behavior of the licensed and helper sums.
// The truncation cap k covers the tabulated partial-sum index range 1..16.
// ---------------------------------------------------------------------------

void check_truncation(Suite& s) {
    ExperimentConfig cfg;
    double worst_span = 0.0;
    std::array<double, 2> pu_value{};
    const double pu_snr[] = {15.0, 20.0};
    for (int i = 0; i < 2; ++i) {
        cfg.snr_db = pu_snr[i];
        double lo = 2.0, hi = -1.0;
        for (int k = 2; k <= 17; ++k) {
            const double v = pu_a_outage_partial(cfg, k);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        worst_span = std::max(worst_span, hi - lo);
        pu_value[i] = pu_a_outage_partial(cfg, 17);
    }
    s.add(2, "pu-series-invariance", worst_span, 1e-6, false,
          "licensed outage across truncation caps: " + fmt(pu_value[0]) +
              " at 15 dB (published table 0.111445), " + fmt(pu_value[1]) +
              " at 20 dB (published 0.0133768); the table's rate is unstated, the "
              "reference rate 1/3 is used here");

    ExperimentConfig helper;
    helper.rates.su_2 = 0.2;  // the rate that reproduces the published spans
    const double su_snr[] = {20.0, 25.0};
    const double span_targets[2][2] = {{0.330, 0.8756}, {0.205, 0.4830}};
    double worst_drop = 0.0;
    double worst_span_err = 0.0;
    std::string endpoints;
    for (int i = 0; i < 2; ++i) {
        helper.snr_db = su_snr[i];
        std::vector<double> sums;
        for (int k = 2; k <= 17; ++k) sums.push_back(su_2_outage_partial(helper, k));
        for (std::size_t k = 0; k + 1 < sums.size(); ++k)
            worst_drop = std::max(worst_drop, sums[k] - sums[k + 1]);
        worst_span_err = std::max(worst_span_err, rel_err(sums.front(), span_targets[i][0]));
        worst_span_err = std::max(worst_span_err, rel_err(sums.back(), span_targets[i][1]));
        endpoints += std::string(i ? "; " : "") + fmt(su_snr[i]) + " dB: " +
                     fmt(sums.front()) + " -> " + fmt(sums.back()) + " (published " +
                     fmt(span_targets[i][0]) + " -> " + fmt(span_targets[i][1]) + ")";
    }
    s.add(2, "su-partial-sums-monotone", std::max(worst_drop, 0.0), 0.0, false,
          "largest decrease between consecutive helper-outage partial sums at 20 and 25 "
          "dB; the series adds only nonnegative layers");
    s.add(2, "su-truncation-spans", worst_span_err, 0.05, false,
          "helper outage at truncation caps 1 and 16, helper rate 0.2: " + endpoints);
}

// ---------------------------------------------------------------------------
// Criterion 3: harvester saturation flattens the outage curves; raising the
// saturation input by 60 dB restores the monotone linear-regime decline.
// ---------------------------------------------------------------------------

void check_saturation(Suite& s) {
    ExperimentConfig cfg;
    cfg.series.s_max = 192;
    cfg.series.u_max = 192;

    cfg.snr_db = 45.0;
    const std::array<double, 4> at45 = outage_vector(cfg, cfg.swipt);
    cfg.snr_db = 60.0;
    const std::array<double, 4> at60 = outage_vector(cfg, cfg.swipt);
    double worst = 0.0;
    std::string spans;
    for (int n = 0; n < 4; ++n) {
        const double span = std::fabs(at45[n] - at60[n]);
        worst = std::max(worst, span);
        spans += std::string(n ? ", " : "") + kNodeNames[n] + " " + fmt(span);
    }
    std::string helper_note;
    try {
        cfg.snr_db = 75.0;
        const std::array<double, 4> at75 = outage_vector(cfg, cfg.swipt);
        helper_note = "; helper spans over 60->75 dB: su_1 " +
                      fmt(std::fabs(at60[2] - at75[2])) + ", su_2 " +
                      fmt(std::fabs(at60[3] - at75[3]));
    } catch (const std::exception& e) {
        helper_note = std::string("; 75 dB reference unavailable: ") + e.what();
    }
    s.add(3, "saturation-plateau-all-nodes", worst, 1e-3, false,
          "|outage(45 dB) - outage(60 dB)| per node: " + spans +
              ". The licensed curves are flat here, but the helper harvesters only "
              "saturate near 55 dB at these distances, so the helper curves are still "
              "falling across this span" +
              helper_note);

    model::SwiptParams raised = cfg.swipt;
    raised.p_th *= 1e6;  // +60 dB keeps the harvesters linear through 60 dB
    cfg.snr_db = 45.0;
    const std::array<double, 4> lin45 = outage_vector(cfg, raised);
    cfg.snr_db = 60.0;
    const std::array<double, 4> lin60 = outage_vector(cfg, raised);
    const double delta =
        std::max(lin60[0] - lin45[0], lin60[1] - lin45[1]);
    s.add(3, "raised-threshold-pu-decreasing", delta, 0.0, true,
          "largest licensed outage change from 45 to 60 dB with the saturation input "
          "raised by 60 dB (must be negative): pu_a " +
              fmt(lin60[0] - lin45[0]) + ", pu_b " + fmt(lin60[1] - lin45[1]));
}

// ---------------------------------------------------------------------------
// Criterion 4: power-sharing feasibility edge of the licensed links.
// ---------------------------------------------------------------------------

void check_feasibility_edge(Suite& s) {
    ExperimentConfig cfg;
    const double gamma = model::target_snr(cfg.rates.pu_a, cfg.swipt.alpha,
                                           model::TransmissionMode::relayed);
    const double edge = analytic::feasibility_edge_mu(gamma);
    const double closed_form = 1.0 - std::pow(2.0, -1.25);

    double worst = std::fabs(edge - closed_form);
    for (double mu : {0.2 * edge, 0.5 * edge, 0.9 * edge, edge - 1e-9, edge}) {
        model::SwiptParams sw = cfg.swipt;
        sw.mu = {mu, mu};
        const model::PowerParams power = cfg.power();
        for (model::Node pu : {model::Node::pu_a, model::Node::pu_b}) {
            const double op =
                analytic::outage_primary(pu, cfg.net, sw, power, cfg.rates, cfg.series)
                    .probability;
            worst = std::max(worst, std::fabs(op - 1.0));
        }
    }
    s.add(4, "outage-certain-below-edge", worst, 1e-12, false,
          "licensed outage pinned at 1 for power-sharing factors up to the edge " +
              fmt(edge) + " (closed form 1 - 2^(-5/4)) at rate 1/3, alpha 0.2");

    model::SwiptParams sw = cfg.swipt;
    sw.mu = {edge + 0.05, edge + 0.05};
    const model::PowerParams power = cfg.power();
    const double op_a =
        analytic::outage_primary(model::Node::pu_a, cfg.net, sw, power, cfg.rates, cfg.series)
            .probability;
    const double op_b =
        analytic::outage_primary(model::Node::pu_b, cfg.net, sw, power, cfg.rates, cfg.series)
            .probability;
    s.add(4, "outage-breaks-above-edge", std::max(op_a, op_b) - 1.0, 0.0, true,
          "outage at the edge plus 0.05 and 20 dB drops below certainty: pu_a " +
              fmt(op_a) + ", pu_b " + fmt(op_b));
}

// ---------------------------------------------------------------------------
// Criterion 5: critical power-sharing factor against the direct benchmark.
// ---------------------------------------------------------------------------

void check_critical_mu(Suite& s) {
    ExperimentConfig cfg;
    const model::PowerParams power = cfg.power();
    const analytic::CriticalMuResult got =
        analytic::critical_mu(cfg.net, cfg.swipt, power, cfg.rates, cfg.series);
    s.add(5, "critical-mu-gap", std::fabs(got.outage - got.target), 1e-3, false,
          "mu* " + fmt(got.mu) + ": relayed licensed outage " + fmt(got.outage) +
              " against the direct-exchange benchmark " + fmt(got.target) + " at 20 dB");

    double worst = -1.0;
    for (int i = 1; i <= 20; ++i) {
        const double mu = got.mu + (1.0 - got.mu) * i / 21.0;
        model::SwiptParams sw = cfg.swipt;
        sw.mu = {mu, mu};
        const double op = std::max(
            analytic::outage_primary(model::Node::pu_a, cfg.net, sw, power, cfg.rates,
                                     cfg.series)
                .probability,
            analytic::outage_primary(model::Node::pu_b, cfg.net, sw, power, cfg.rates,
                                     cfg.series)
                .probability);
        worst = std::max(worst, op - got.target);
    }
    s.add(5, "sharing-beats-direct-above-critical", worst, 0.0, true,
          "largest (relayed - direct) outage margin over 20 factors spaced through "
          "(mu*, 1); negative means relaying stays ahead of the direct exchange");

    std::string trace;
    double prev = 0.0, worst_drop = 0.0;
    for (double r : {0.25, 1.0 / 3.0, 0.5}) {
        ExperimentConfig swept;
        swept.rates.pu_a = swept.rates.pu_b = swept.rates.su_1 = swept.rates.su_2 = r;
        const analytic::CriticalMuResult at_rate =
            analytic::critical_mu(swept.net, swept.swipt, power, swept.rates, swept.series);
        worst_drop = std::max(worst_drop, prev - at_rate.mu);
        prev = at_rate.mu;
        trace += std::string(trace.empty() ? "" : ", ") + fmt(at_rate.mu);
    }
    s.add(5, "critical-mu-rises-with-rate", worst_drop, 0.0, false,
          "mu* over target rates 1/4, 1/3, 1/2: " + trace);
}

// ---------------------------------------------------------------------------
// Criterion 6: swarm optimization patterns at 20 dB.
// ---------------------------------------------------------------------------

void check_optimizer(Suite& s) {
    const pso::Position target = {0.37, 0.52, 0.81};
    const pso::Objective sphere = [&](const pso::Position& p) {
        double v = 0.0;
        for (int d = 0; d < 3; ++d) v -= (p[d] - target[d]) * (p[d] - target[d]);
        return v;
    };
    pso::PsoConfig sphere_cfg;
    sphere_cfg.population = 30;
    sphere_cfg.iterations = 200;
    sphere_cfg.seed = 2024;
    const pso::OptimizationResult sphere_got = pso::pso_maximize(sphere, sphere_cfg);
    double sphere_err = 0.0;
    for (int d = 0; d < 3; ++d)
        sphere_err = std::max(sphere_err, std::fabs(sphere_got.position[d] - target[d]));
    s.add(6, "swarm-sphere-self-test", sphere_err, 1e-3, false,
          "largest per-coordinate distance from the known interior optimum of a "
          "quadratic bowl after 200 iterations");

    ExperimentConfig cfg;
    const model::PowerParams power = cfg.power();
    double worst_gap = -1.0, worst_alpha = 0.0;
    std::string table;
    for (double r : {0.5, 1.0 / 3.0, 0.25, 0.2, 1.0 / 6.0}) {
        ExperimentConfig run = cfg;
        run.rates.pu_a = run.rates.pu_b = run.rates.su_1 = run.rates.su_2 = r;
        const double typical =
            analytic::throughput(run.net, run.swipt, power, run.rates, run.series);
        pso::PsoConfig swarm;
        swarm.population = s.opt.swarm_population;
        swarm.iterations = s.opt.swarm_iterations;
        swarm.seed = 11;
        swarm = pso::with_mu_floor(swarm, run.net, run.swipt, power, run.rates, run.series);
        const pso::OptimizationResult best = pso::pso_maximize(
            pso::network_objective(pso::Metric::throughput, run.net, run.swipt, power,
                                   run.rates, run.series),
            swarm);
        worst_gap = std::max(worst_gap, typical - best.value);
        worst_alpha = std::max(worst_alpha, best.position[0]);
        table += std::string(table.empty() ? "" : "; ") + "rate " + fmt(r) + ": best " +
                 fmt(best.value) + " vs typical " + fmt(typical) + ", alpha* " +
                 fmt(best.position[0]);
    }
    s.add(6, "swarm-beats-typical-throughput", worst_gap, 0.0, false,
          "largest (typical - optimized) throughput margin over the tabulated rates; " +
              table);
    s.add(6, "swarm-alpha-near-zero", worst_alpha, 0.05, false,
          "largest optimized harvesting-time split across the tabulated rates; power "
          "splitting dominates time splitting at 20 dB");
}

// ---------------------------------------------------------------------------
// Criterion 7: special-function identities and quadrature cross-checks.
// Violations are normalized by each identity's own tolerance, so the check
// threshold is 1.
// ---------------------------------------------------------------------------

void check_special_functions(Suite& s) {
    double worst = 0.0;
    std::string where = "none";
    const auto note = [&](double ratio, const std::string& which) {
        if (ratio > worst) {
            worst = ratio;
            where = which;
        }
    };

    for (double a : {0.5, 2.0, 7.0, 30.0})
        for (double x : {0.1, 1.0, 5.0, 20.0})
            note(std::fabs(math::regularized_gamma_p(a, x) +
                           math::regularized_gamma_q(a, x) - 1.0) /
                     1e-12,
                 "regularized gamma complement at a=" + fmt(a) + ", x=" + fmt(x));

    for (double a : {0.5, 1.0, 4.0, 12.0}) {
        double prev = 0.0;
        for (double x = 0.0; x <= 40.0; x += 0.5) {
            const double p = math::regularized_gamma_p(a, x);
            note((prev - p) / 1e-15, "lower gamma monotonicity at a=" + fmt(a));
            prev = p;
        }
    }

    for (double v : {0.5, 1.3, 2.2})
        for (double x : {0.3, 2.0, 9.0})
            note(rel_err(math::bessel_k(v, x), math::bessel_k(-v, x)) / 1e-12,
                 "bessel symmetry at v=" + fmt(v) + ", x=" + fmt(x));

    for (double v : {0.5, 1.0, 1.5, 2.0, 3.0})
        for (double x : {0.5, 2.0, 8.0}) {
            const double lhs = math::bessel_k(v + 1.0, x);
            const double rhs = math::bessel_k(std::fabs(v - 1.0), x) +
                               2.0 * v / x * math::bessel_k(v, x);
            note(rel_err(lhs, rhs) / 1e-6,
                 "bessel recurrence at v=" + fmt(v) + ", x=" + fmt(x));
        }

    for (double x : {0.1, 0.9, 4.0, 18.0})
        note(rel_err(math::whittaker_w(0.0, 0.5, x), std::exp(-0.5 * x)) / 1e-12,
             "whittaker closed form at x=" + fmt(x));

    s.add(7, "special-function-identities", worst, 1.0, false,
          "largest identity violation as a fraction of its tolerance; worst: " + where);

    double worst_q = 0.0;
    std::string where_q = "none";
    const auto note_q = [&](double ratio, const std::string& which) {
        if (ratio > worst_q) {
            worst_q = ratio;
            where_q = which;
        }
    };

    std::mt19937 rng(20250825);
    std::uniform_real_distribution<double> ua(1.0, 20.0);
    std::uniform_real_distribution<double> ux(0.2, 40.0);
    for (int i = 0; i < s.opt.oracle_points; ++i) {
        const double a = ua(rng);
        const double x = ux(rng);
        note_q(rel_err(math::lower_incomplete_gamma(a, x), ref_lower_gamma(a, x)) / 1e-10,
               "lower gamma at a=" + fmt(a) + ", x=" + fmt(x));
        const double up = ref_upper_gamma(a, x);
        if (up > 1e-280)
            note_q(rel_err(math::upper_incomplete_gamma(a, x), up) / 1e-10,
                   "upper gamma at a=" + fmt(a) + ", x=" + fmt(x));
    }

    std::uniform_real_distribution<double> uv(0.0, 5.0);
    std::uniform_real_distribution<double> ubx(0.1, 10.0);
    for (int i = 0; i < s.opt.oracle_points; ++i) {
        const double v = uv(rng);
        const double x = ubx(rng);
        note_q(rel_err(math::bessel_k(v, x), ref_bessel_k(v, x)) / 1e-6,
               "bessel at v=" + fmt(v) + ", x=" + fmt(x));
    }

    std::uniform_real_distribution<double> wu(-4.0, 1.0);
    std::uniform_real_distribution<double> wv(0.0, 2.5);
    std::uniform_real_distribution<double> wx(0.2, 15.0);
    int accepted = 0;
    while (accepted < s.opt.oracle_points) {
        const double u = wu(rng);
        const double v = wv(rng);
        const double x = wx(rng);
        if (0.5 + v - u < 0.6) continue;  // keep the reference integral well posed
        ++accepted;
        note_q(rel_err(math::whittaker_w(u, v, x), ref_whittaker_w(u, v, x)) / 1e-6,
               "whittaker at u=" + fmt(u) + ", v=" + fmt(v) + ", x=" + fmt(x));
    }

    s.add(7, "special-function-quadrature", worst_q, 1.0, false,
          "largest disagreement with the built-in reference integrator as a fraction of "
          "the per-family tolerance (gamma 1e-10 relative, bessel and whittaker 1e-6), " +
              std::to_string(s.opt.oracle_points) + " random points per function; worst: " +
              where_q);
}

// ---------------------------------------------------------------------------
// Criterion 8: byte determinism of every runner.
// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void check_determinism(Suite& s) {
    namespace fs = std::filesystem;
    const fs::path dir = s.opt.scratch_dir.empty() ? fs::path(".") : fs::path(s.opt.scratch_dir);

    ExperimentConfig outage_cfg;
    outage_cfg.has_sweep = true;
    outage_cfg.sweep.variable = "snr_db";
    outage_cfg.sweep.start = 15.0;
    outage_cfg.sweep.stop = 25.0;
    outage_cfg.sweep.step = 5.0;
    outage_cfg.sim.trials = 20000;
    outage_cfg.sim.seed = s.opt.seed;
    outage_cfg.sim.workers = s.opt.workers;

    ExperimentConfig metric_cfg = outage_cfg;
    metric_cfg.sweep.metric = "throughput";

    ExperimentConfig mu_cfg;
    mu_cfg.has_sweep = true;
    mu_cfg.sweep.variable = "rate";
    mu_cfg.sweep.start = 0.25;
    mu_cfg.sweep.stop = 0.5;
    mu_cfg.sweep.step = 0.125;

    ExperimentConfig opt_cfg;
    opt_cfg.pso.swarm.population = 8;
    opt_cfg.pso.swarm.iterations = 10;
    opt_cfg.pso.swarm.seed = 5;

    struct Job {
        const char* name;
        void (*run)(const ExperimentConfig&, const std::string&);
        const ExperimentConfig* cfg;
    };
    const Job jobs[] = {
        {"outage-sweep", &cli::run_outage_sweep, &outage_cfg},
        {"metric-sweep", &cli::run_metric_sweep, &metric_cfg},
        {"mu-critical", &cli::run_mu_critical, &mu_cfg},
        {"optimize", &cli::run_optimize, &opt_cfg},
    };

    int mismatches = 0;
    std::string detail;
    for (const Job& job : jobs) {
        const fs::path p1 = dir / (std::string("selfcheck-") + job.name + "-1.csv");
        const fs::path p2 = dir / (std::string("selfcheck-") + job.name + "-2.csv");
        job.run(*job.cfg, p1.string());
        job.run(*job.cfg, p2.string());
        const bool same = read_file(p1) == read_file(p2) &&
                          read_file(p1.string() + ".meta") == read_file(p2.string() + ".meta");
        if (!same) ++mismatches;
        detail += std::string(detail.empty() ? "" : ", ") + job.name +
                  (same ? " identical" : " DIFFERS");
        for (const fs::path& p : {p1, p2}) {
            fs::remove(p);
            fs::remove(p.string() + ".meta");
        }
    }
    s.add(8, "rerun-byte-identical", mismatches, 0.0, false,
          "each runner executed twice on one configuration, data and sidecar bytes "
          "compared: " +
              detail + "; the validate table itself is a pure function of these checks");

    const fs::path w1 = dir / "selfcheck-workers-1.csv";
    const fs::path w3 = dir / "selfcheck-workers-3.csv";
    cli::run_outage_sweep(outage_cfg, w1.string());
    ExperimentConfig threaded = outage_cfg;
    threaded.sim.workers = 3;
    cli::run_outage_sweep(threaded, w3.string());
    const bool same_rows = read_file(w1) == read_file(w3);
    for (const fs::path& p : {w1, w3}) {
        fs::remove(p);
        fs::remove(p.string() + ".meta");
    }
    s.add(8, "worker-count-invariance", same_rows ? 0.0 : 1.0, 0.0, false,
          "outage-sweep data rows are byte-identical for 1 and 3 workers (the sidecar "
          "echoes the worker count and is excluded); block-structured substreams make "
          "the simulation independent of scheduling");
}

}  // namespace

std::vector<CheckResult> run_all(const Options& opt) {
    Suite s{opt, {}};
    const auto guarded = [&s](int criterion, const char* label, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            s.add(criterion, std::string(label) + "-aborted", 1.0, 0.0, false,
                  std::string("unexpected error: ") + e.what());
        }
    };
    guarded(1, "analytic-vs-monte-carlo", [&] { check_agreement(s); });
    guarded(2, "series-truncation", [&] { check_truncation(s); });
    guarded(3, "saturation", [&] { check_saturation(s); });
    guarded(4, "feasibility-edge", [&] { check_feasibility_edge(s); });
    guarded(5, "critical-mu", [&] { check_critical_mu(s); });
    guarded(6, "optimizer", [&] { check_optimizer(s); });
    guarded(7, "special-functions", [&] { check_special_functions(s); });
    guarded(8, "determinism", [&] { check_determinism(s); });
    return s.checks;
}

bool all_passed(const std::vector<CheckResult>& checks) {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.pass; });
}

bool run_validate(const cli::ExperimentConfig& cfg, const std::string& out_path,
                  Options depth) {
    depth.trials = cfg.sim.trials;
    depth.seed = cfg.sim.seed;
    depth.workers = cfg.sim.workers;
    const std::filesystem::path parent = std::filesystem::path(out_path).parent_path();
    depth.scratch_dir = parent.empty() ? std::string(".") : parent.string();

    const std::vector<CheckResult> checks = run_all(depth);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw cli::config_error("cannot write output file '" + out_path + "'");
    out << "criterion,check,status,measured,tolerance,detail\n";
    for (const CheckResult& c : checks) {
        out << c.criterion << ',' << cli::csv_escape(c.name) << ','
            << (c.pass ? "pass" : "fail") << ',' << cli::format_field(c.measured) << ','
            << cli::format_field(c.tolerance) << ',' << cli::csv_escape(c.detail) << "\n";
    }
    if (!out) throw cli::config_error("failed while writing '" + out_path + "'");
    cli::write_metadata(cfg, "validate", out_path);
    return all_passed(checks);
}

}  // namespace swiptnet::accept
