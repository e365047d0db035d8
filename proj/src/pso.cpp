#include "swiptnet/pso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace swiptnet::pso {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void validate(const PsoConfig& config) {
    require(config.population >= 2, "swarm population must be >= 2");
    require(config.iterations >= 1, "iteration count must be >= 1");
    require(config.inertia >= 0.0 && std::isfinite(config.inertia),
            "inertia weight must be finite and >= 0");
    require(config.cognitive >= 0.0 && std::isfinite(config.cognitive),
            "cognitive factor must be finite and >= 0");
    require(config.social >= 0.0 && std::isfinite(config.social),
            "social factor must be finite and >= 0");
    for (const Bound& b : config.bounds) {
        require(std::isfinite(b.lo) && std::isfinite(b.hi), "bounds must be finite");
        require(b.lo <= b.hi, "each bound must satisfy lo <= hi");
    }
}

struct Particle {
    Position position{};
    Position velocity{};
    Position best_position{};
    double best_value = -std::numeric_limits<double>::infinity();
};

[[noreturn]] void rethrow_with_position(const Position& psi, const std::exception& e) {
    std::ostringstream os;
    os << "objective evaluation failed at (" << psi[0] << ", " << psi[1] << ", "
       << psi[2] << "): " << e.what();
    throw std::runtime_error(os.str());
}

}  // namespace

OptimizationResult pso_maximize(const Objective& objective, const PsoConfig& config) {
    validate(config);
    require(static_cast<bool>(objective), "objective must be callable");

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Position vmax{};
    for (std::size_t d = 0; d < 3; ++d)
        vmax[d] = 0.2 * (config.bounds[d].hi - config.bounds[d].lo);

    // Positions start uniform in the box, velocities uniform within the
    // velocity clamp; each particle draws its position triple first.
    std::vector<Particle> swarm(static_cast<std::size_t>(config.population));
    for (Particle& p : swarm) {
        for (std::size_t d = 0; d < 3; ++d) {
            const Bound& b = config.bounds[d];
            p.position[d] = b.lo + unit(rng) * (b.hi - b.lo);
        }
        for (std::size_t d = 0; d < 3; ++d)
            p.velocity[d] = vmax[d] * (2.0 * unit(rng) - 1.0);
        p.best_position = p.position;
    }

    OptimizationResult result;
    result.value = -std::numeric_limits<double>::infinity();
    result.trace.reserve(static_cast<std::size_t>(config.iterations));
    result.position_trace.reserve(static_cast<std::size_t>(config.iterations));

    for (int iter = 0; iter < config.iterations; ++iter) {
        // Synchronous sweep: all evaluations land before any move, so the
        // outcome does not depend on evaluation order.
        for (Particle& p : swarm) {
            double value;
            try {
                value = objective(p.position);
            } catch (const std::exception& e) {
                rethrow_with_position(p.position, e);
            }
            if (value > p.best_value) {
                p.best_value = value;
                p.best_position = p.position;
            }
            if (value > result.value) {
                result.value = value;
                result.position = p.position;
            }
        }
        result.trace.push_back(result.value);
        result.position_trace.push_back(result.position);

        for (Particle& p : swarm) {
            for (std::size_t d = 0; d < 3; ++d) {
                const Bound& b = config.bounds[d];
                const double r1 = unit(rng);
                const double r2 = unit(rng);
                double v = config.inertia * p.velocity[d] +
                           config.cognitive * r1 * (p.best_position[d] - p.position[d]) +
                           config.social * r2 * (result.position[d] - p.position[d]);
                v = std::clamp(v, -vmax[d], vmax[d]);
                double x = p.position[d] + v;
                if (x < b.lo) {
                    x = b.lo;
                    v = 0.0;
                } else if (x > b.hi) {
                    x = b.hi;
                    v = 0.0;
                }
                p.velocity[d] = v;
                p.position[d] = x;
            }
        }
    }
    return result;
}

Objective network_objective(Metric metric, const model::NetworkConfig& net,
                            const model::SwiptParams& base,
                            const model::PowerParams& power,
                            const model::TargetRates& rates,
                            const analytic::SeriesControl& series) {
    const double benchmark = std::max(analytic::outage_direct(net, power, rates.pu_a),
                                      analytic::outage_direct(net, power, rates.pu_b));
    return [=](const Position& psi) {
        model::SwiptParams swipt = base;
        swipt.alpha = psi[0];
        swipt.beta = psi[1];
        swipt.mu = {psi[2], psi[2]};
        const analytic::OutageReport report =
            analytic::outage_all(net, swipt, power, rates, series);
        if (std::max(report.pu_a.probability, report.pu_b.probability) > benchmark)
            return 0.0;
        const double st = analytic::throughput(report, swipt, rates);
        return metric == Metric::throughput ? st
                                            : analytic::energy_efficiency(st, swipt, power);
    };
}

double feasible_mu_bound(const model::NetworkConfig& net, const model::SwiptParams& swipt,
                         const model::PowerParams& power, const model::TargetRates& rates,
                         const analytic::SeriesControl& series) {
    return analytic::critical_mu(net, swipt, power, rates, series).mu;
}

PsoConfig with_mu_floor(PsoConfig config, const model::NetworkConfig& net,
                        const model::SwiptParams& base, const model::PowerParams& power,
                        const model::TargetRates& rates,
                        const analytic::SeriesControl& series) {
    model::SwiptParams corner = base;
    corner.alpha = config.bounds[0].lo;
    corner.beta = config.bounds[1].lo;
    const double floor = feasible_mu_bound(net, corner, power, rates, series);
    config.bounds[2].lo = std::max(config.bounds[2].lo, floor);
    config.bounds[2].hi = std::max(config.bounds[2].hi, config.bounds[2].lo);
    return config;
}

}  // namespace swiptnet::pso
