#pragma once

// System model for a two-way overlay network in which a pair of licensed
// terminals exchanges data through two energy-harvesting helper terminals.
// Geometry, fading orders, splitting factors and transmit powers are plain
// aggregates; the functions here turn them into the derived coefficients and
// instantaneous SNRs that the closed-form layer and the simulator both
// consume, so the two evaluation paths cannot drift apart.

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>

namespace swiptnet::model {

enum class Node : int { pu_a = 0, pu_b = 1, su_1 = 2, su_2 = 3 };

// Unordered node pairs carrying a fading description. s12 is the helper-to-
// helper link, ab the direct link between the licensed terminals.
enum class LinkId : int { a1 = 0, a2 = 1, b1 = 2, b2 = 3, s12 = 4, ab = 5 };

constexpr std::size_t kNodeCount = 4;
constexpr std::size_t kLinkCount = 6;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct LinkFading {
    double m = 1.0;                   // fading order, >= 0.5
    std::optional<double> omega;      // mean channel power override
};

struct NetworkConfig {
    std::array<Vec2, kNodeCount> position{
        Vec2{0.0, 0.0}, Vec2{4.0, 0.0}, Vec2{2.0, 0.0}, Vec2{2.0, 2.0}};
    double path_loss_exponent = 3.0;
    // Indexed by LinkId: both links of a terminal share its fading order.
    std::array<LinkFading, kLinkCount> fading{
        LinkFading{3.0, {}}, LinkFading{3.0, {}},  // a-1, a-2
        LinkFading{2.0, {}}, LinkFading{2.0, {}},  // b-1, b-2
        LinkFading{1.0, {}},                       // helper link
        LinkFading{2.0, {}}};                      // direct a-b link
};

struct SwiptParams {
    double alpha = 0.2;                       // harvesting time fraction
    double beta = 0.2;                        // harvesting power fraction
    std::array<double, 2> mu{0.8, 0.8};       // relaying power split per helper
    std::array<double, 2> eta{0.7, 0.7};      // conversion efficiency per helper
    double p_th = 1e-4;                       // harvester saturation input, watts
    double block_time = 1.0;
};

struct PowerParams {
    double p_a = 1e-7;                        // licensed transmit powers, watts
    double p_b = 1e-7;
    std::array<double, kNodeCount> sigma2{1e-9, 1e-9, 1e-9, 1e-9};  // receiver noise
    std::array<double, 2> sigma2_conv{1e-9, 1e-9};  // RF-to-baseband noise per helper
};

struct TargetRates {
    double pu_a = 1.0 / 3.0;
    double pu_b = 1.0 / 3.0;
    double su_1 = 1.0 / 3.0;
    double su_2 = 1.0 / 3.0;

    double of(Node n) const {
        switch (n) {
            case Node::pu_a: return pu_a;
            case Node::pu_b: return pu_b;
            case Node::su_1: return su_1;
            case Node::su_2: return su_2;
        }
        throw std::logic_error("TargetRates::of: bad node");
    }
};

// Coefficients of the per-branch SNR rational forms for one relay direction
// (helper `relay` forwarding toward licensed terminal `target`), evaluated at
// one threshold SNR. The iota fields are the integration breakpoints of the
// corresponding outage integrals.
struct DerivedCoefficients {
    int relay = 0;       // 0 -> su_1, 1 -> su_2
    int target = 0;      // 0 -> pu_a, 1 -> pu_b
    double gamma = 0.0;  // threshold the breakpoints were derived at

    double p_j = 0.0;     // transmit power of the target terminal
    double p_jhat = 0.0;  // transmit power of the opposite terminal
    double p_th = 0.0;    // harvester saturation input
    double sigma2_rx = 0.0;  // receiver noise of the opposite helper

    double delta = 0.0;  // harvested-power conversion factor of the relay

    // linear branch, licensed side: gamma_lin = num_y Y / (omega_j X + omega_jhat Y + eps)
    double eps = 0.0;
    double omega_j = 0.0;
    double omega_jhat = 0.0;
    double cap_xi = 0.0;  // num_y - omega_jhat * gamma; <= 0 means outage-certain
    double iota1 = 0.0;

    // saturated branch, licensed side:
    // gamma_sat = num_xy XY / (phi_j X + phi_sat_j X^2 + phi_sat_jhat XY + phi_cross Y)
    double phi_j = 0.0;
    double phi_sat_j = 0.0;
    double phi_sat_jhat = 0.0;
    double phi_cross = 0.0;
    double t1 = 0.0;  // threshold line X = (Y - t1)/t2 of the saturated event
    double t2 = 0.0;
    double iota2 = 0.0;

    // unlicensed side: gamma_lin = zeta W Z / (xi Z + sigma2_rx),
    //                  gamma_sat = psi W Z / (c_sat Z + d_sat W)
    double zeta = 0.0;
    double xi = 0.0;
    double iota3 = 0.0;
    double psi = 0.0;
    double c_sat = 0.0;
    double d_sat = 0.0;
    double iota4 = 0.0;
};

struct SnrFlags {
    bool exact_af_gain = false;    // keep the relay-side noise inside the AF gain
    bool include_bc_noise = false;  // keep receiver noise in the linear branch
};

enum class TransmissionMode { relayed, direct };

Node other_pu(Node n);
Node other_su(Node n);
LinkId link_between(Node u, Node v);

double link_distance(const NetworkConfig& net, Node u, Node v);

// Mean channel power of a link: the distance-power-law value unless overridden.
double link_mean_power(const NetworkConfig& net, Node u, Node v);

void validate(const NetworkConfig& net);
void validate(const SwiptParams& swipt);
void validate(const PowerParams& power);
void validate(const TargetRates& rates);

// relay / target use the 0-based indices of DerivedCoefficients.
DerivedCoefficients derive_coefficients(const SwiptParams& swipt, const PowerParams& power,
                                        int relay, int target, double gamma);

// Transmit power of a helper given the aggregate received licensed power
// during the harvesting phase: conversion factor times the saturated input.
double harvested_tx_power(const SwiptParams& swipt, int relay, double received_power);

// End-to-end SNR of the licensed signal relayed by `relay` toward `target`.
// x is the squared channel gain relay<->target, y is relay<->other terminal.
double snr_primary(const SwiptParams& swipt, const PowerParams& power, int relay,
                   int target, double x, double y, SnrFlags flags = {});

// SNR of the helper-to-helper payload sent by `relay`; w is the aggregate
// licensed power received at the relay, z the squared helper link gain.
double snr_secondary(const SwiptParams& swipt, const PowerParams& power, int relay,
                     double w, double z, SnrFlags flags = {});

// Threshold SNR implied by a target rate: relayed traffic spends (1-alpha)/3
// of the block per hop, direct traffic half of it.
double target_snr(double rate, double alpha, TransmissionMode mode);

}  // namespace swiptnet::model
