#include "swiptnet/model.hpp"

#include <algorithm>
#include <cmath>

namespace swiptnet::model {

namespace {

int node_index(Node n) { return static_cast<int>(n); }

void require(bool ok, const char* msg) {
    if (!ok) throw std::domain_error(msg);
}

}  // namespace

Node other_pu(Node n) {
    require(n == Node::pu_a || n == Node::pu_b, "other_pu: not a licensed terminal");
    return n == Node::pu_a ? Node::pu_b : Node::pu_a;
}

Node other_su(Node n) {
    require(n == Node::su_1 || n == Node::su_2, "other_su: not a helper terminal");
    return n == Node::su_1 ? Node::su_2 : Node::su_1;
}

LinkId link_between(Node u, Node v) {
    const int a = std::min(node_index(u), node_index(v));
    const int b = std::max(node_index(u), node_index(v));
    if (a == 0 && b == 2) return LinkId::a1;
    if (a == 0 && b == 3) return LinkId::a2;
    if (a == 1 && b == 2) return LinkId::b1;
    if (a == 1 && b == 3) return LinkId::b2;
    if (a == 2 && b == 3) return LinkId::s12;
    if (a == 0 && b == 1) return LinkId::ab;
    throw std::logic_error("link_between: identical nodes");
}

double link_distance(const NetworkConfig& net, Node u, Node v) {
    const Vec2& p = net.position[node_index(u)];
    const Vec2& q = net.position[node_index(v)];
    return std::hypot(p.x - q.x, p.y - q.y);
}

double link_mean_power(const NetworkConfig& net, Node u, Node v) {
    const LinkFading& f = net.fading[static_cast<int>(link_between(u, v))];
    if (f.omega) return *f.omega;
    const double d = link_distance(net, u, v);
    require(d > 0.0, "link_mean_power: coincident nodes need an explicit mean power");
    return std::pow(d, -net.path_loss_exponent);
}

void validate(const NetworkConfig& net) {
    require(net.path_loss_exponent > 0.0, "path loss exponent must be > 0");
    for (const LinkFading& f : net.fading) {
        require(f.m >= 0.5, "fading order must be >= 0.5");
        if (f.omega) require(*f.omega > 0.0, "mean channel power must be > 0");
    }
}

void validate(const SwiptParams& swipt) {
    require(swipt.alpha >= 0.0 && swipt.alpha < 1.0, "alpha must lie in [0,1)");
    require(swipt.beta >= 0.0 && swipt.beta < 1.0, "beta must lie in [0,1)");
    for (double mu : swipt.mu) require(mu > 0.0 && mu < 1.0, "mu must lie in (0,1)");
    for (double eta : swipt.eta) require(eta > 0.0 && eta < 1.0, "eta must lie in (0,1)");
    require(swipt.p_th > 0.0, "p_th must be > 0");
    require(swipt.block_time > 0.0, "block time must be > 0");
}

void validate(const PowerParams& power) {
    require(power.p_a > 0.0 && power.p_b > 0.0, "transmit powers must be > 0");
    for (double s : power.sigma2) require(s > 0.0, "noise variances must be > 0");
    for (double s : power.sigma2_conv)
        require(s > 0.0, "conversion noise variances must be > 0");
}

void validate(const TargetRates& rates) {
    require(rates.pu_a > 0.0 && rates.pu_b > 0.0 && rates.su_1 > 0.0 && rates.su_2 > 0.0,
            "target rates must be > 0");
}

DerivedCoefficients derive_coefficients(const SwiptParams& swipt, const PowerParams& power,
                                        int relay, int target, double gamma) {
    require(relay == 0 || relay == 1, "relay index must be 0 or 1");
    require(target == 0 || target == 1, "target index must be 0 or 1");
    require(gamma > 0.0, "threshold SNR must be > 0");
    validate(swipt);
    validate(power);

    const double mu = swipt.mu[relay];
    const double eta = swipt.eta[relay];
    const double alpha = swipt.alpha;
    const double beta = swipt.beta;
    const double p_th = swipt.p_th;
    const double p_j = target == 0 ? power.p_a : power.p_b;
    const double p_jhat = target == 0 ? power.p_b : power.p_a;
    const double s2_relay = power.sigma2[2 + relay];
    const double s2_conv = power.sigma2_conv[relay];
    const double s2_target = power.sigma2[target];
    const double s2_rx = power.sigma2[2 + (1 - relay)];

    DerivedCoefficients c;
    c.relay = relay;
    c.target = target;
    c.gamma = gamma;
    c.p_j = p_j;
    c.p_jhat = p_jhat;
    c.p_th = p_th;
    c.sigma2_rx = s2_rx;

    c.delta = 3.0 * eta * alpha / (1.0 - alpha) + beta * eta;
    const double md = mu * c.delta;
    const double noise_mix = s2_relay + s2_conv / (1.0 - beta);

    c.eps = md * noise_mix;
    c.omega_j = (1.0 - mu) * c.delta * p_j;
    c.omega_jhat = (1.0 - mu) * c.delta * p_jhat;
    c.cap_xi = md * p_jhat - c.omega_jhat * gamma;
    c.iota1 = (p_th * c.cap_xi - c.eps * gamma * p_jhat) /
              (c.omega_j * gamma * p_jhat + p_j * c.cap_xi);

    c.phi_j = md * p_th * noise_mix + p_j * s2_target;
    c.phi_sat_j = (1.0 - mu) * c.delta * p_th * p_j;
    c.phi_sat_jhat = (1.0 - mu) * c.delta * p_th * p_jhat;
    c.phi_cross = p_jhat * s2_target;
    const double sat_denom = md * p_th * p_jhat - c.phi_sat_jhat * gamma;
    c.t1 = c.phi_j * gamma / sat_denom;
    c.t2 = c.phi_sat_j * gamma / sat_denom;
    c.iota2 = (c.t2 * p_th + c.t1 * p_j) / (p_j + c.t2 * p_jhat);

    c.zeta = (1.0 - mu) * c.delta;
    c.xi = md * noise_mix;
    c.iota3 = gamma * s2_rx / (c.zeta * p_th - c.xi * gamma);

    c.psi = (1.0 - mu) * (1.0 - beta) * c.delta * p_th;
    c.c_sat = md * p_th * ((1.0 - beta) * s2_relay + s2_conv);
    c.d_sat = (1.0 - beta) * s2_rx;
    c.iota4 = c.d_sat * gamma * p_th / (c.psi * p_th - c.c_sat * gamma);

    return c;
}

double harvested_tx_power(const SwiptParams& swipt, int relay, double received_power) {
    require(relay == 0 || relay == 1, "relay index must be 0 or 1");
    require(received_power >= 0.0, "received power must be >= 0");
    const double delta =
        3.0 * swipt.eta[relay] * swipt.alpha / (1.0 - swipt.alpha) + swipt.beta * swipt.eta[relay];
    return delta * std::min(received_power, swipt.p_th);
}

double snr_primary(const SwiptParams& swipt, const PowerParams& power, int relay,
                   int target, double x, double y, SnrFlags flags) {
    require(relay == 0 || relay == 1, "relay index must be 0 or 1");
    require(target == 0 || target == 1, "target index must be 0 or 1");
    require(x >= 0.0 && y >= 0.0, "channel gains must be >= 0");

    const double p_j = target == 0 ? power.p_a : power.p_b;
    const double p_jhat = target == 0 ? power.p_b : power.p_a;
    const double w = p_j * x + p_jhat * y;
    if (w <= 0.0 || x <= 0.0 || y <= 0.0) return 0.0;

    const double mu = swipt.mu[relay];
    const double beta = swipt.beta;
    const double s2_relay = power.sigma2[2 + relay];
    const double s2_conv = power.sigma2_conv[relay];
    const double s2_target = power.sigma2[target];

    const double p_i = harvested_tx_power(swipt, relay, w);
    const bool saturated = w > swipt.p_th;
    const double gain = (1.0 - beta) * (w + (flags.exact_af_gain ? s2_relay : 0.0));

    const double num = mu * p_i * (1.0 - beta) * p_jhat * y * x / gain;
    const double rx_noise = (saturated || flags.include_bc_noise) ? s2_target : 0.0;
    const double den = (mu * p_i / gain) * ((1.0 - beta) * s2_relay + s2_conv) * x +
                       (1.0 - mu) * p_i * x + rx_noise;
    return num / den;
}

double snr_secondary(const SwiptParams& swipt, const PowerParams& power, int relay,
                     double w, double z, SnrFlags flags) {
    require(relay == 0 || relay == 1, "relay index must be 0 or 1");
    require(w >= 0.0 && z >= 0.0, "received power and channel gain must be >= 0");
    if (w <= 0.0 || z <= 0.0) return 0.0;

    const double mu = swipt.mu[relay];
    const double beta = swipt.beta;
    const double s2_relay = power.sigma2[2 + relay];
    const double s2_conv = power.sigma2_conv[relay];
    const double s2_rx = power.sigma2[2 + (1 - relay)];

    const double p_i = harvested_tx_power(swipt, relay, w);
    const double gain = (1.0 - beta) * (w + (flags.exact_af_gain ? s2_relay : 0.0));

    const double num = (1.0 - mu) * p_i * z;
    const double den =
        (mu * p_i / gain) * ((1.0 - beta) * s2_relay + s2_conv) * z + s2_rx;
    return num / den;
}

double target_snr(double rate, double alpha, TransmissionMode mode) {
    require(rate > 0.0, "target rate must be > 0");
    if (mode == TransmissionMode::direct) return std::exp2(2.0 * rate) - 1.0;
    require(alpha < 1.0, "alpha must be < 1 for relayed transmission");
    return std::exp2(3.0 * rate / (1.0 - alpha)) - 1.0;
}

}  // namespace swiptnet::model
