#include "swiptnet/monte_carlo.hpp"

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

namespace swiptnet::mc {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t* hi,
                    std::uint32_t* lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    *hi = static_cast<std::uint32_t>(p >> 32);
    *lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox::Philox(std::uint64_t seed, std::uint64_t stream) {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
    ctr_[0] = static_cast<std::uint32_t>(stream);
    ctr_[1] = static_cast<std::uint32_t>(stream >> 32);
    ctr_[2] = 0;
    ctr_[3] = 0;
}

void Philox::refill() {
    std::uint32_t x0 = ctr_[0], x1 = ctr_[1], x2 = ctr_[2], x3 = ctr_[3];
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, x0, &hi0, &lo0);
        mulhilo(kPhiloxM1, x2, &hi1, &lo1);
        const std::uint32_t y0 = hi1 ^ x1 ^ k0;
        const std::uint32_t y1 = lo1;
        const std::uint32_t y2 = hi0 ^ x3 ^ k1;
        const std::uint32_t y3 = lo0;
        x0 = y0;
        x1 = y1;
        x2 = y2;
        x3 = y3;
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    out_[0] = x0;
    out_[1] = x1;
    out_[2] = x2;
    out_[3] = x3;
    avail_ = 4;
    // The stream id lives in words 0..1; words 2..3 are the walking counter.
    if (++ctr_[2] == 0) ++ctr_[3];
}

std::uint32_t Philox::next_u32() {
    if (avail_ == 0) refill();
    return out_[4 - avail_--];
}

std::uint64_t Philox::next_u64() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
}

double Philox::next_unit() {
    // 52 random bits, centered inside the bin: strictly inside (0,1).
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

double Philox::next_normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(t);
    has_cached_normal_ = true;
    return r * std::cos(t);
}

double sample_channel_power(double m, double omega, Philox& rng) {
    if (!(m >= 0.5)) throw std::domain_error("sample_channel_power: m must be >= 0.5");
    if (!(omega > 0.0)) throw std::domain_error("sample_channel_power: omega must be > 0");
    double shape = m;
    double boost = 1.0;
    if (shape < 1.0) {
        // Gamma(a) = Gamma(a+1) * U^{1/a}
        boost = std::pow(rng.next_unit(), 1.0 / shape);
        shape += 1.0;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.next_normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.next_unit();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v * boost * (omega / m);
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
            return d * v * boost * (omega / m);
    }
}

namespace {

struct BlockCounts {
    std::uint64_t out_pu_a = 0, out_pu_b = 0, out_su_1 = 0, out_su_2 = 0;
    std::uint64_t lin_su1 = 0, lin_su2 = 0;
};

struct LinkParams {
    double m;
    double omega;
};

}  // namespace

double SimResult::op(model::Node n) const {
    switch (n) {
        case model::Node::pu_a: return op_pu_a;
        case model::Node::pu_b: return op_pu_b;
        case model::Node::su_1: return op_su_1;
        case model::Node::su_2: return op_su_2;
    }
    throw std::logic_error("SimResult::op: bad node");
}

double SimResult::stderr_of(model::Node n) const {
    switch (n) {
        case model::Node::pu_a: return se_pu_a;
        case model::Node::pu_b: return se_pu_b;
        case model::Node::su_1: return se_su_1;
        case model::Node::su_2: return se_su_2;
    }
    throw std::logic_error("SimResult::stderr_of: bad node");
}

SimResult simulate(const model::NetworkConfig& net, const model::SwiptParams& swipt,
                   const model::PowerParams& power, const model::TargetRates& rates,
                   const SimSpec& spec) {
    using model::Node;
    model::validate(net);
    model::validate(swipt);
    model::validate(power);
    model::validate(rates);
    if (spec.trials == 0) throw std::domain_error("simulate: trials must be > 0");
    if (spec.workers < 1) throw std::domain_error("simulate: workers must be >= 1");

    const LinkParams la1{net.fading[static_cast<int>(model::LinkId::a1)].m,
                         model::link_mean_power(net, Node::pu_a, Node::su_1)};
    const LinkParams la2{net.fading[static_cast<int>(model::LinkId::a2)].m,
                         model::link_mean_power(net, Node::pu_a, Node::su_2)};
    const LinkParams lb1{net.fading[static_cast<int>(model::LinkId::b1)].m,
                         model::link_mean_power(net, Node::pu_b, Node::su_1)};
    const LinkParams lb2{net.fading[static_cast<int>(model::LinkId::b2)].m,
                         model::link_mean_power(net, Node::pu_b, Node::su_2)};
    const LinkParams l12{net.fading[static_cast<int>(model::LinkId::s12)].m,
                         model::link_mean_power(net, Node::su_1, Node::su_2)};

    const double g_pu_a =
        model::target_snr(rates.pu_a, swipt.alpha, model::TransmissionMode::relayed);
    const double g_pu_b =
        model::target_snr(rates.pu_b, swipt.alpha, model::TransmissionMode::relayed);
    const double g_su_1 =
        model::target_snr(rates.su_1, swipt.alpha, model::TransmissionMode::relayed);
    const double g_su_2 =
        model::target_snr(rates.su_2, swipt.alpha, model::TransmissionMode::relayed);

    const model::SnrFlags flags{spec.exact_af_gain, spec.include_bc_noise};

    const std::uint64_t n_blocks = (spec.trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
    std::vector<BlockCounts> blocks(n_blocks);

    const auto run_block = [&](std::uint64_t b) {
        Philox rng(spec.seed, b);
        const std::uint64_t lo = b * kTrialsPerBlock;
        const std::uint64_t hi = std::min(spec.trials, lo + kTrialsPerBlock);
        BlockCounts counts;
        for (std::uint64_t t = lo; t < hi; ++t) {
            // Draw order is part of the reproducibility contract.
            const double ga1 = sample_channel_power(la1.m, la1.omega, rng);
            const double ga2 = sample_channel_power(la2.m, la2.omega, rng);
            const double gb1 = sample_channel_power(lb1.m, lb1.omega, rng);
            const double gb2 = sample_channel_power(lb2.m, lb2.omega, rng);
            const double g12 = sample_channel_power(l12.m, l12.omega, rng);

            const double w1 = power.p_a * ga1 + power.p_b * gb1;
            const double w2 = power.p_a * ga2 + power.p_b * gb2;
            if (w1 <= swipt.p_th) ++counts.lin_su1;
            if (w2 <= swipt.p_th) ++counts.lin_su2;

            // Selection combining over the two relayed copies per terminal.
            const double snr_a = std::max(
                model::snr_primary(swipt, power, 0, 0, ga1, gb1, flags),
                model::snr_primary(swipt, power, 1, 0, ga2, gb2, flags));
            const double snr_b = std::max(
                model::snr_primary(swipt, power, 0, 1, gb1, ga1, flags),
                model::snr_primary(swipt, power, 1, 1, gb2, ga2, flags));
            if (snr_a < g_pu_a) ++counts.out_pu_a;
            if (snr_b < g_pu_b) ++counts.out_pu_b;

            // Helper payloads: su_1 receives from su_2 and vice versa.
            if (model::snr_secondary(swipt, power, 1, w2, g12, flags) < g_su_1)
                ++counts.out_su_1;
            if (model::snr_secondary(swipt, power, 0, w1, g12, flags) < g_su_2)
                ++counts.out_su_2;
        }
        blocks[b] = counts;
    };

    const int n_workers =
        static_cast<int>(std::min<std::uint64_t>(spec.workers, n_blocks));
    if (n_workers <= 1) {
        for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::uint64_t b = next.fetch_add(1);
                    if (b >= n_blocks) return;
                    run_block(b);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    BlockCounts total;
    for (const BlockCounts& c : blocks) {
        total.out_pu_a += c.out_pu_a;
        total.out_pu_b += c.out_pu_b;
        total.out_su_1 += c.out_su_1;
        total.out_su_2 += c.out_su_2;
        total.lin_su1 += c.lin_su1;
        total.lin_su2 += c.lin_su2;
    }

    SimResult r;
    r.trials = spec.trials;
    r.n_out_pu_a = total.out_pu_a;
    r.n_out_pu_b = total.out_pu_b;
    r.n_out_su_1 = total.out_su_1;
    r.n_out_su_2 = total.out_su_2;
    r.n_lin_su1 = total.lin_su1;
    r.n_lin_su2 = total.lin_su2;
    const double n = static_cast<double>(spec.trials);
    const auto rate = [n](std::uint64_t k) { return static_cast<double>(k) / n; };
    const auto se = [n](double p) { return std::sqrt(p * (1.0 - p) / n); };
    r.op_pu_a = rate(total.out_pu_a);
    r.op_pu_b = rate(total.out_pu_b);
    r.op_su_1 = rate(total.out_su_1);
    r.op_su_2 = rate(total.out_su_2);
    r.se_pu_a = se(r.op_pu_a);
    r.se_pu_b = se(r.op_pu_b);
    r.se_su_1 = se(r.op_su_1);
    r.se_su_2 = se(r.op_su_2);
    r.lin_fraction_su1 = rate(total.lin_su1);
    r.lin_fraction_su2 = rate(total.lin_su2);

    r.throughput = (1.0 - swipt.alpha) / 3.0 *
                   ((1.0 - r.op_pu_a) * rates.pu_a + (1.0 - r.op_pu_b) * rates.pu_b +
                    (1.0 - r.op_su_1) * rates.su_1 + (1.0 - r.op_su_2) * rates.su_2);
    const double energy_share =
        (swipt.alpha + swipt.beta * (1.0 - swipt.alpha) / 3.0) * (power.p_a + power.p_b);
    r.energy_efficiency = energy_share > 0.0 ? r.throughput / energy_share : 0.0;
    return r;
}

GapReport approximation_gap(const model::NetworkConfig& net,
                            const model::SwiptParams& swipt,
                            const model::PowerParams& power,
                            const model::TargetRates& rates, const SimSpec& spec) {
    SimSpec approx = spec;
    approx.exact_af_gain = false;
    approx.include_bc_noise = false;
    SimSpec exact = spec;
    exact.exact_af_gain = true;
    exact.include_bc_noise = true;

    GapReport g;
    g.approximate = simulate(net, swipt, power, rates, approx);
    g.exact = simulate(net, swipt, power, rates, exact);
    g.d_pu_a = g.exact.op_pu_a - g.approximate.op_pu_a;
    g.d_pu_b = g.exact.op_pu_b - g.approximate.op_pu_b;
    g.d_su_1 = g.exact.op_su_1 - g.approximate.op_su_1;
    g.d_su_2 = g.exact.op_su_2 - g.approximate.op_su_2;
    return g;
}

}  // namespace swiptnet::mc
