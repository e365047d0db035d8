// Particle swarm search over the SWIPT control triple (alpha, beta, mu). A
// small synchronous swarm maximizes system throughput or energy efficiency;
// candidates that leave a licensed terminal worse off than a plain direct
// exchange score zero, which folds the spectrum-sharing constraint into the
// objective instead of re-solving the critical power-sharing factor per
// particle.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "swiptnet/analytic.hpp"
#include "swiptnet/model.hpp"

namespace swiptnet::pso {

// Closed search interval for one decision dimension.
struct Bound {
    double lo = 0.0;
    double hi = 1.0;
};

// Swarm hyperparameters. Inertia and learning factors default to the usual
// constriction-equivalent values; the box covers (alpha, beta, mu) with the
// time and power splits kept away from their degenerate endpoints.
struct PsoConfig {
    int population = 40;
    int iterations = 200;
    double inertia = 0.72;
    double cognitive = 1.49;  // pull toward the particle's own best
    double social = 1.49;     // pull toward the swarm best
    std::array<Bound, 3> bounds{Bound{0.01, 0.8}, Bound{0.01, 0.8}, Bound{0.5, 0.99}};
    std::uint64_t seed = 1;
};

using Position = std::array<double, 3>;
using Objective = std::function<double(const Position&)>;

struct OptimizationResult {
    Position position{};        // best visited point
    double value = 0.0;         // objective at that point
    std::vector<double> trace;  // swarm best after each iteration, nondecreasing
    std::vector<Position> position_trace;  // swarm best position per iteration
};

// Runs the swarm for exactly config.iterations synchronous sweeps and returns
// the best visited position. Random factors are drawn per dimension per
// update; velocities are clamped to 20% of each dimension's range; a particle
// leaving the box is pinned to the violated bound with that velocity
// component reset to zero. The same seed always yields the same result. An
// exception thrown by the objective is rethrown annotated with the position
// that triggered it.
OptimizationResult pso_maximize(const Objective& objective, const PsoConfig& config);

// Metric maximized by a network objective.
enum class Metric { throughput, energy_efficiency };

// Adapts the closed-form metric evaluation to a swarm objective: the
// candidate triple replaces (alpha, beta, both mu entries) in the template
// parameters, and any candidate whose worst licensed-terminal outage exceeds
// the direct-exchange benchmark scores zero.
Objective network_objective(Metric metric, const model::NetworkConfig& net,
                            const model::SwiptParams& base,
                            const model::PowerParams& power,
                            const model::TargetRates& rates,
                            const analytic::SeriesControl& series = {});

// Smallest power-sharing factor that keeps the worst licensed terminal at its
// direct-exchange outage benchmark, forwarded from the closed-form layer as
// the natural lower bound for the mu dimension.
double feasible_mu_bound(const model::NetworkConfig& net, const model::SwiptParams& swipt,
                         const model::PowerParams& power, const model::TargetRates& rates,
                         const analytic::SeriesControl& series = {});

// Raises the mu lower bound of a swarm box to the critical power-sharing
// factor evaluated at the box's smallest alpha and beta, where that factor is
// smallest over the box (it grows with both splits). This prunes the slab
// that is infeasible for every alpha; the in-objective penalty still handles
// the alpha-dependent remainder of the constraint.
PsoConfig with_mu_floor(PsoConfig config, const model::NetworkConfig& net,
                        const model::SwiptParams& base, const model::PowerParams& power,
                        const model::TargetRates& rates,
                        const analytic::SeriesControl& series = {});

}  // namespace swiptnet::pso
