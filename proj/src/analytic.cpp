#include "swiptnet/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "swiptnet/numeric.hpp"
#include "swiptnet/special_functions.hpp"

namespace swiptnet::analytic {

namespace {

using math::CompensatedSum;
using math::SignedLog;
using math::SignedLogSum;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require(bool ok, const char* msg) {
    if (!ok) throw std::domain_error(msg);
}

int parity_sign(int n) { return (n & 1) ? -1 : 1; }

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

// ln(e^a - e^b) clamped to -inf when the difference rounds to or below zero.
double log_sub(double a, double b) {
    if (b == kNegInf) return a;
    if (b >= a) return kNegInf;
    const double d = b - a;
    const double rest = -std::expm1(d);
    return rest > 0.0 ? a + std::log(rest) : kNegInf;
}

double log_binomial(int n, int k) {
    return math::log_gamma(n + 1.0) - math::log_gamma(k + 1.0) - math::log_gamma(n - k + 1.0);
}

// x^e in log scale with the 0^0 = 1 convention needed by binomial expansions
// whose base can be an interval endpoint at zero.
double log_pow(double x, int e) {
    if (e == 0) return 0.0;
    return x > 0.0 ? e * std::log(x) : kNegInf;
}

int checked_order(const GammaFading& f, const char* what) {
    require(f.omega > 0.0, "mean channel power must be positive");
    const double r = std::round(f.m);
    require(r >= 1.0 && std::fabs(f.m - r) <= 1e-9 * std::max(1.0, r),
            what);
    return static_cast<int>(r);
}

void check_threshold(double gamma, const model::DerivedCoefficients& coeffs) {
    require(gamma > 0.0, "threshold SNR must be positive");
    if (std::fabs(gamma - coeffs.gamma) > 1e-9 * std::max(1.0, std::fabs(gamma)))
        throw std::invalid_argument(
            "coefficient bundle was derived at a different threshold SNR");
}

BranchCdf finish_branch(double raw, int terms, bool limit, bool converged, double condition) {
    BranchCdf b;
    b.raw = raw;
    b.value = std::clamp(raw, 0.0, 1.0);
    b.terms = terms;
    b.limit_case = limit;
    b.converged = converged;
    b.condition = condition;
    return b;
}

// ---------------------------------------------------------------------------
// Kernel integrals int y^{L-1} e^{-a y - B / y} dy over (0,inf), (0,Y] and
// [lo,inf), in log scale. The full integral satisfies an upward three-term
// recurrence in L seeded by modified Bessel functions; truncated versions are
// evaluated by expanding whichever exponential is mild over the retained
// range, falling back to log-domain adaptive quadrature when neither
// expansion is well conditioned.
// ---------------------------------------------------------------------------

double log_bessel_k_local(double v, double x) {
    if (x < 50.0) return std::log(math::bessel_k(v, x));
    // Large-argument asymptotic series, truncated at its smallest term. For
    // the seed orders v = 0, 1 the terms shrink rapidly well before x = 50.
    const double mu = 4.0 * v * v;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= 20; ++k) {
        const double num = mu - (2.0 * k - 1.0) * (2.0 * k - 1.0);
        const double next = term * num / (8.0 * k * x);
        if (std::fabs(next) >= std::fabs(term)) break;
        term = next;
        sum += term;
        if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
    }
    return -x + 0.5 * std::log(M_PI / (2.0 * x)) + std::log(sum);
}

// phi(t) = L t - a e^t - B e^{-t}, the log integrand after y = e^t.
double kernel_phi(int L, double a, double B, double t) {
    return L * t - a * std::exp(t) - B * std::exp(-t);
}

double kernel_mode_t(int L, double a, double B) {
    // maximizer of phi: a e^{2t} - L e^t - B = 0
    const double root = (L + std::sqrt(static_cast<double>(L) * L + 4.0 * a * B)) / (2.0 * a);
    return std::log(root);
}

double simpson_recurse(const std::function<double(double)>& f, double a, double fa, double b,
                       double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_recurse(f, a, fa, b, fb, m, fm, whole, tol, 40);
}

// Log-domain quadrature of the kernel over y in (y_lo, y_hi); either bound
// may be infinite on the side where the integrand decays.
double log_kernel_quadrature(int L, double a, double B, double y_lo, double y_hi) {
    double t_lo = y_lo > 0.0 ? std::log(y_lo) : kNegInf;
    double t_hi = std::isfinite(y_hi) ? std::log(y_hi) : std::numeric_limits<double>::infinity();
    const double t_star = kernel_mode_t(L, a, B);
    const double t_anchor = std::clamp(t_star, t_lo == kNegInf ? t_star : t_lo,
                                       t_hi == std::numeric_limits<double>::infinity() ? t_star
                                                                                       : t_hi);
    double peak = kernel_phi(L, a, B, t_anchor);
    if (t_lo != kNegInf) peak = std::max(peak, kernel_phi(L, a, B, t_lo));
    if (std::isfinite(t_hi)) peak = std::max(peak, kernel_phi(L, a, B, t_hi));
    const double cut = peak - 46.0;
    if (t_lo == kNegInf) {
        double t = std::isfinite(t_hi) ? std::min(t_anchor, t_hi) : t_anchor;
        int guard = 0;
        while (kernel_phi(L, a, B, t) > cut && guard++ < 600) t -= 1.0;
        t_lo = t;
    }
    if (!std::isfinite(t_hi)) {
        double t = t_lo == kNegInf ? t_anchor : std::max(t_anchor, t_lo);
        int guard = 0;
        while (kernel_phi(L, a, B, t) > cut && guard++ < 600) t += 1.0;
        t_hi = t;
    }
    if (t_hi <= t_lo) return kNegInf;
    const auto f = [&](double t) { return std::exp(kernel_phi(L, a, B, t) - peak); };
    const double integral = adaptive_simpson(f, t_lo, t_hi, 1e-13);
    return integral > 0.0 ? peak + std::log(integral) : kNegInf;
}

// Caches log values of the truncated kernel integral (head: (0, bound];
// tail: [bound, inf)) for descending integer orders L, together with the
// full-range integral needed by complement evaluations.
class KernelIntegralCache {
public:
    KernelIntegralCache(double a, double B, double bound, bool head, int u_max)
        : a_(a), b_(B), bound_(bound), head_(head), u_max_(u_max) {}

    double log_full(int L) {
        const int n = std::abs(L);
        ensure_full(n);
        const double pos = full_pos_[n];
        if (L >= 0) return pos;
        return n * (std::log(a_) - std::log(b_)) + pos;
    }

    double log_truncated(int L, int top_hint) {
        if (top_ == std::numeric_limits<int>::min()) top_ = std::max(L, top_hint);
        if (L > top_) {
            // Requests above the initial top are rare; recompute from scratch.
            top_ = L;
            cache_.clear();
        }
        const int idx = top_ - L;
        while (static_cast<int>(cache_.size()) <= idx) {
            const int level = top_ - static_cast<int>(cache_.size());
            cache_.push_back(compute(level));
        }
        return cache_[idx];
    }

private:
    void ensure_full(int n) {
        if (full_pos_.empty()) {
            const double z = 2.0 * std::sqrt(a_ * b_);
            full_pos_.push_back(std::log(2.0) + log_bessel_k_local(0.0, z));
            full_pos_.push_back(std::log(2.0) + 0.5 * (std::log(b_) - std::log(a_)) +
                                log_bessel_k_local(1.0, z));
        }
        while (static_cast<int>(full_pos_.size()) <= n) {
            const int L = static_cast<int>(full_pos_.size()) - 1;
            const double up = log_add(std::log(static_cast<double>(L)) + full_pos_[L],
                                      std::log(b_) + full_pos_[L - 1]) -
                              std::log(a_);
            full_pos_.push_back(up);
        }
    }

    // Alternating expansion of e^{-a y} over the head range, valid when
    // a*bound is mild: sum_u (-a)^u/u! * B^{L+u} * Gamma[-(L+u), B/bound].
    bool head_series(int L, double* out) {
        SignedLogSum acc;
        double max_log = kNegInf;
        const double x = b_ / bound_;
        for (int u = 0; u <= u_max_; ++u) {
            const double lt = log_pow(a_, u) - math::log_gamma(u + 1.0) +
                              (L + u) * std::log(b_) +
                              math::log_upper_gamma_any_order(-(L + u), x);
            max_log = std::max(max_log, lt);
            acc.add_log(lt, parity_sign(u));
            if (u > a_ * bound_ + 4.0 && lt < max_log - 42.0) break;
        }
        const SignedLog total = acc.total();
        if (total.sign <= 0 || max_log - total.log_mag > 23.0) return false;
        *out = total.log_mag;
        return true;
    }

    // Alternating expansion of e^{-B/y} over the tail range, valid when
    // B/bound is mild: sum_u (-B)^u/u! * a^{u-L} * Gamma[L-u, a*bound].
    bool tail_series(int L, double* out) {
        SignedLogSum acc;
        double max_log = kNegInf;
        const double x = a_ * bound_;
        for (int u = 0; u <= u_max_; ++u) {
            const double lt = log_pow(b_, u) - math::log_gamma(u + 1.0) +
                              (u - L) * std::log(a_) +
                              math::log_upper_gamma_any_order(L - u, x);
            max_log = std::max(max_log, lt);
            acc.add_log(lt, parity_sign(u));
            if (u > b_ / bound_ + 4.0 && lt < max_log - 42.0) break;
        }
        const SignedLog total = acc.total();
        if (total.sign <= 0 || max_log - total.log_mag > 23.0) return false;
        *out = total.log_mag;
        return true;
    }

    double compute(int L) {
        double direct = 0.0;
        if (head_) {
            if (a_ * bound_ <= 15.0 && head_series(L, &direct)) return direct;
            if (b_ / bound_ <= 15.0 && tail_series(L, &direct)) {
                const double full = log_full(L);
                const double head = log_sub(full, direct);
                if (full - head < 34.0) return head;
            }
            return log_kernel_quadrature(L, a_, b_, 0.0, bound_);
        }
        if (b_ / bound_ <= 15.0 && tail_series(L, &direct)) return direct;
        if (a_ * bound_ <= 15.0 && head_series(L, &direct)) {
            const double full = log_full(L);
            const double tail = log_sub(full, direct);
            if (full - tail < 34.0) return tail;
        }
        return log_kernel_quadrature(L, a_, b_, bound_,
                                     std::numeric_limits<double>::infinity());
    }

    double a_;
    double b_;
    double bound_;
    bool head_;
    int u_max_;
    int top_ = std::numeric_limits<int>::min();
    std::vector<double> full_pos_;
    std::vector<double> cache_;
};

// ---------------------------------------------------------------------------
// Shared outer series of the helper-side CDFs. Both regimes reduce to
//   sum_{k,s} lambda_{k,s} sum_{t>=N} A2^t/t! * A^{-(k+t+1)} (k+t)! K(k+t)
// with N = m1+m2+s-k-1, A = A1+A2 and a regime-specific kernel sequence K
// passed as ln K(k~). Every addend is nonnegative, so the expansion is summed
// without the sign cancellation its textbook difference form would incur.
// ---------------------------------------------------------------------------

struct SeriesOutcome {
    double value = 0.0;
    int terms = 0;
    bool converged = true;
    double condition = 1.0;
};

template <typename LogKernel>
SeriesOutcome weighted_tail_series(int m1, int m2, double log_a1, double log_a2,
                                   LogKernel&& log_kernel, const SeriesControl& sc,
                                   double base_value, double scale_hint) {
    require(sc.s_max >= 1 && sc.u_max >= 1 && sc.rel_stop > 0.0,
            "series control fields out of range");
    const double log_a = log_add(log_a1, log_a2);
    const double lam_base = m1 * log_a1 + m2 * log_a2 - math::log_gamma(m1) -
                            math::log_gamma(m2);
    SeriesOutcome out;
    CompensatedSum acc;
    int quiet_layers = 0;
    for (int s = 0; s < sc.s_max; ++s) {
        SignedLogSum layer;
        for (int k = 0; k < m1; ++k) {
            const int n_start = m1 + m2 + s - k - 1;
            const double log_lambda = lam_base + log_binomial(m1 - 1, k) + s * log_a1 -
                                      math::log_gamma(s + 1.0) - n_start * log_a2 +
                                      math::log_gamma(n_start);
            double log_tail = kNegInf;
            int dead = 0;
            for (int t = n_start; t < n_start + 8192; ++t) {
                const double lk = log_kernel(k + t);
                const double lt = t * log_a2 - math::log_gamma(t + 1.0) -
                                  (k + t + 1) * log_a + math::log_gamma(k + t + 1.0) + lk;
                log_tail = log_add(log_tail, lt);
                if (lt < log_tail - 40.0 || lk == kNegInf) {
                    if (++dead >= 3) break;
                } else {
                    dead = 0;
                }
                if (t == n_start + 8191)
                    throw math::convergence_error(
                        "helper-side CDF: geometric tail failed to settle");
            }
            layer.add_log(log_lambda + log_tail, parity_sign(m1 - 1 - k));
        }
        const double inc = layer.total().value();
        if (!layer.empty() && layer.total().sign != 0)
            out.condition = std::max(out.condition, layer.condition());
        acc.add(inc);
        out.terms = s + 1;
        const double scale =
            std::max({std::fabs(base_value + acc.value()), scale_hint, 1e-300});
        if (std::fabs(inc) <= sc.rel_stop * scale) {
            if (++quiet_layers >= 2) {
                out.value = acc.value();
                return out;
            }
        } else {
            quiet_layers = 0;
        }
    }
    out.value = acc.value();
    out.converged = quiet_layers >= 1;
    return out;
}

// Survival function of the helper-link gain above a quantile.
struct HelperGain {
    int m = 1;
    double rate = 1.0;       // m / Omega
    double log_kappa = 0.0;  // ln(rate^m / Gamma(m))
};

// ---------------------------------------------------------------------------
// Weighted gamma-sum distribution (exact finite forms).
// ---------------------------------------------------------------------------

struct SumComponent {
    int m;
    double rate;  // of the power-scaled variate
};

double log_sum_sf_impl(double w, const SumComponent& u, const SumComponent& v) {
    if (w <= 0.0) return 0.0;
    if (std::fabs(u.rate - v.rate) <= 1e-12 * std::max(u.rate, v.rate)) {
        return math::log_upper_incomplete_gamma(u.m + v.m, u.rate * w) -
               math::log_gamma(u.m + v.m);
    }
    SignedLogSum acc;
    acc.add_log(math::log_upper_incomplete_gamma(u.m, u.rate * w) - math::log_gamma(u.m), 1);
    const double pref = u.m * std::log(u.rate) - math::log_gamma(u.m);
    for (int l = 0; l < v.m; ++l) {
        const double lhead = l * std::log(v.rate) - math::log_gamma(l + 1.0) - v.rate * w;
        for (int i = 0; i <= l; ++i) {
            const double lt = pref + lhead + log_binomial(l, i) + log_pow(w, l - i) +
                              log_integral_power_exp(u.m - 1 + i, -(u.rate - v.rate), 0.0, w);
            acc.add_log(lt, parity_sign(i));
        }
    }
    const SignedLog total = acc.total();
    if (total.sign <= 0) return kNegInf;
    return std::min(total.log_mag, 0.0);
}

SumComponent scaled_component(const GammaFading& f, double scale, const char* what) {
    require(scale > 0.0, "component power scale must be positive");
    SumComponent c;
    c.m = checked_order(f, what);
    c.rate = c.m / (f.omega * scale);
    return c;
}

// ---------------------------------------------------------------------------
// Licensed-side branch CDFs.
// ---------------------------------------------------------------------------

constexpr const char* kIntegerOrderMsg =
    "closed forms require integer fading order >= 1";

BranchCdf primary_lin_impl(double gamma, const model::DerivedCoefficients& c,
                           const GammaFading& fx, const GammaFading& fy) {
    const int mx = checked_order(fx, kIntegerOrderMsg);
    const int my = checked_order(fy, kIntegerOrderMsg);
    if (c.cap_xi <= 0.0) return finish_branch(1.0, 0, true, true, 1.0);

    const double ax = mx / fx.omega;
    const double ay = my / fy.omega;
    const double hi = c.p_th / c.p_j;
    const double lo = std::max(c.iota1, 0.0);

    SignedLogSum acc;
    acc.add_log(math::log_lower_incomplete_gamma(mx, ax * hi) - math::log_gamma(mx), 1);

    // Budget-boundary block: the outage region bounded by the harvest cap.
    const double cc = ay * c.p_j / c.p_jhat - ax;
    const double pref_budget =
        mx * std::log(ax) - math::log_gamma(mx) - ay * c.p_th / c.p_jhat;
    for (int k = 0; k < my; ++k) {
        const double base_k = k * (std::log(ay) - std::log(c.p_jhat)) -
                              math::log_gamma(k + 1.0);
        for (int q = 0; q <= k; ++q) {
            const double lt = pref_budget + base_k + log_binomial(k, q) +
                              log_pow(c.p_th, q) + log_pow(c.p_j, k - q) +
                              log_integral_power_exp(k + mx - q - 1, cc, lo, hi);
            acc.add_log(lt, -parity_sign(k - q));
        }
    }

    // Threshold-line block, present only when the outage line crosses the
    // budget line inside the positive quadrant.
    if (c.iota1 > 0.0) {
        const double pref_line = mx * std::log(ax) - math::log_gamma(mx) -
                                 ay * c.eps * gamma / c.cap_xi;
        const double rate_mix = ax + c.omega_j * gamma * ay / c.cap_xi;
        for (int p = 0; p < my; ++p) {
            const double base_p = p * (std::log(ay) - std::log(c.cap_xi)) -
                                  math::log_gamma(p + 1.0);
            for (int n = 0; n <= p; ++n) {
                const int order = mx - n + p;
                const double lt =
                    pref_line + base_p + log_binomial(p, n) + log_pow(c.eps, n) +
                    log_pow(gamma, p) + log_pow(c.omega_j, p - n) -
                    order * std::log(rate_mix) +
                    math::log_lower_incomplete_gamma(order, rate_mix * c.iota1);
                acc.add_log(lt, -1);
            }
        }
    }

    const double raw = acc.total().value();
    return finish_branch(raw, 0, false, true, acc.condition());
}

BranchCdf primary_sat_impl(const model::DerivedCoefficients& c, const GammaFading& fx,
                           const GammaFading& fy, const SeriesControl& sc) {
    const int mx = checked_order(fx, kIntegerOrderMsg);
    const int my = checked_order(fy, kIntegerOrderMsg);
    const SumComponent su = scaled_component(fx, c.p_j, kIntegerOrderMsg);
    const SumComponent sv = scaled_component(fy, c.p_jhat, kIntegerOrderMsg);
    const double log_qw = log_sum_sf_impl(c.p_th, su, sv);
    if (c.cap_xi <= 0.0)
        return finish_branch(std::exp(log_qw), 0, true, true, 1.0);
    // The branch value is bounded by Pr[W > P_th]; when that bound is
    // negligible the expansion is skipped and the bound itself reported.
    if (log_qw < -70.0) return finish_branch(std::exp(log_qw), 0, false, true, 1.0);

    const double ax = mx / fx.omega;
    const double ay = my / fy.omega;
    const double qw = std::exp(log_qw);
    const double y_budget = c.p_th / c.p_jhat;
    const double y_cap = std::min(c.iota2, y_budget);

    double condition = 1.0;

    // Region below the crossing point: outage bounded by the harvest budget.
    CompensatedSum below;
    const double pref_below =
        my * std::log(ay) - math::log_gamma(my) - ax * c.p_th / c.p_j;
    const double log_growth = std::log(ax) + std::log(c.p_jhat) - std::log(c.p_j);
    int terms = 0;
    bool converged = false;
    int quiet = 0;
    for (int s = 0; s < sc.s_max; ++s) {
        SignedLogSum layer;
        for (int p = 0; p < mx; ++p) {
            const double base_p = p * (std::log(ax) - std::log(c.p_j)) -
                                  math::log_gamma(p + 1.0);
            for (int n = 0; n <= p; ++n) {
                const int order = my - n + p + s;
                const double lt =
                    pref_below + base_p + log_binomial(p, n) + log_pow(c.p_th, n) +
                    log_pow(c.p_jhat, p - n) + s * log_growth - math::log_gamma(s + 1.0) +
                    math::log_lower_incomplete_gamma(order, ay * y_cap) -
                    order * std::log(ay);
                layer.add_log(lt, parity_sign(p - n));
            }
        }
        const double inc = layer.total().value();
        if (!layer.empty() && layer.total().sign != 0)
            condition = std::max(condition, layer.condition());
        below.add(inc);
        terms = s + 1;
        if (std::fabs(inc) <= sc.rel_stop * std::max(qw, 1e-300)) {
            if (++quiet >= 2) {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }

    // When the crossing point lies beyond the budget line, every draw of the
    // second gain between the two bounds is an outage regardless of the first.
    double middle = 0.0;
    if (c.iota2 > y_budget) {
        const double l1 = math::log_upper_incomplete_gamma(my, ay * y_budget);
        const double l2 = math::log_upper_incomplete_gamma(my, ay * c.iota2);
        middle = std::exp(log_sub(l1, l2) - math::log_gamma(my));
    }

    // Region beyond the crossing point: outage bounded by the threshold line.
    SignedLogSum beyond;
    const double rate_b = ax / c.t2 + ay;
    const double pref_beyond = c.t1 * ax / c.t2 + my * std::log(ay) - math::log_gamma(my);
    for (int k = 0; k < mx; ++k) {
        const double base_k = k * (std::log(ax) - std::log(c.t2)) -
                              math::log_gamma(k + 1.0);
        for (int q = 0; q <= k; ++q) {
            const double lt = pref_beyond + base_k + log_binomial(k, q) +
                              log_pow(c.t1, k - q) - (my + q) * std::log(rate_b) +
                              math::log_upper_incomplete_gamma(my + q, rate_b * c.iota2);
            beyond.add_log(lt, parity_sign(k - q));
        }
    }
    condition = std::max(condition, beyond.condition());

    const double raw = below.value() + middle + beyond.total().value();
    return finish_branch(raw, terms, false, converged, condition);
}

// ---------------------------------------------------------------------------
// Helper-side branch CDFs.
// ---------------------------------------------------------------------------

struct HelperSideContext {
    SumComponent su;  // component paired with p_j
    SumComponent sv;  // component paired with p_jhat
    double log_a1 = 0.0;
    double log_a2 = 0.0;
    double a_total = 0.0;
    HelperGain z;
};

HelperSideContext make_helper_context(const model::DerivedCoefficients& c,
                                      const GammaFading& fx, const GammaFading& fy,
                                      const GammaFading& fz) {
    HelperSideContext ctx;
    ctx.su = scaled_component(fx, c.p_j, kIntegerOrderMsg);
    ctx.sv = scaled_component(fy, c.p_jhat, kIntegerOrderMsg);
    ctx.log_a1 = std::log(ctx.su.rate);
    ctx.log_a2 = std::log(ctx.sv.rate);
    ctx.a_total = ctx.su.rate + ctx.sv.rate;
    ctx.z.m = checked_order(fz, kIntegerOrderMsg);
    ctx.z.rate = ctx.z.m / fz.omega;
    ctx.z.log_kappa = ctx.z.m * std::log(ctx.z.rate) - math::log_gamma(ctx.z.m);
    return ctx;
}

BranchCdf secondary_lin_impl(double gamma, const model::DerivedCoefficients& c,
                             const GammaFading& fx, const GammaFading& fy,
                             const GammaFading& fz, const SeriesControl& sc) {
    const HelperSideContext ctx = make_helper_context(c, fx, fy, fz);
    const double fw_pth = gamma_sum_cdf(c.p_th, fx, c.p_j, fy, c.p_jhat);
    if (!(c.zeta * c.p_th - c.xi * gamma > 0.0))
        return finish_branch(fw_pth, 0, true, true, 1.0);

    const double c1 = c.xi * gamma / c.zeta;
    const double c2 = gamma * c.sigma2_rx / c.zeta;
    const double big_b = ctx.a_total * c2;
    const double pz = math::regularized_gamma_p(ctx.z.m, ctx.z.rate * c.iota3);
    const double qz = math::regularized_gamma_q(ctx.z.m, ctx.z.rate * c.iota3);
    const double head = pz * fw_pth;

    KernelIntegralCache tail_kernel(ctx.z.rate, big_b, c.iota3, false, sc.u_max);
    const int top_hint = ctx.z.m;

    // ln of the layer moments E[(A g(Z))^k e^{-A g(Z)}; Z > iota3] with
    // g(z) = c1 + c2 / z, assembled from truncated kernel integrals.
    const auto log_shape_moment = [&](int k) {
        double lse = kNegInf;
        for (int p = 0; p <= k; ++p) {
            const double lt = log_binomial(k, p) + log_pow(c1, p) + log_pow(c2, k - p) +
                              ctx.z.log_kappa +
                              tail_kernel.log_truncated(ctx.z.m + p - k, top_hint);
            lse = log_add(lse, lt);
        }
        return k * std::log(ctx.a_total) - ctx.a_total * c1 + lse;
    };

    // K(k) = E[P(k+1, A g(Z)); Z > iota3], built by a downward-subtracting
    // recurrence from the exact k = 0 anchor; each step removes one Poisson
    // probability layer, so every stored value stays nonnegative.
    std::vector<double> shape_prob;
    const auto ensure_prob = [&](int k) {
        while (static_cast<int>(shape_prob.size()) <= k) {
            const int next = static_cast<int>(shape_prob.size());
            if (next == 0) {
                shape_prob.push_back(std::max(qz - std::exp(log_shape_moment(0)), 0.0));
            } else {
                const double drop =
                    std::exp(log_shape_moment(next) - math::log_gamma(next + 1.0));
                shape_prob.push_back(std::max(shape_prob[next - 1] - drop, 0.0));
            }
        }
    };
    const auto log_kernel = [&](int k) {
        ensure_prob(k);
        return shape_prob[k] > 0.0 ? std::log(shape_prob[k]) : kNegInf;
    };

    const SeriesOutcome series =
        weighted_tail_series(ctx.su.m, ctx.sv.m, ctx.log_a1, ctx.log_a2, log_kernel, sc,
                             head, 0.0);
    return finish_branch(head + series.value, series.terms, false, series.converged,
                         series.condition);
}

BranchCdf secondary_sat_impl(double gamma, const model::DerivedCoefficients& c,
                             const GammaFading& fx, const GammaFading& fy,
                             const GammaFading& fz, const SeriesControl& sc) {
    const HelperSideContext ctx = make_helper_context(c, fx, fy, fz);
    const double log_qw = log_sum_sf_impl(c.p_th, ctx.su, ctx.sv);
    if (!(c.psi * c.p_th - c.c_sat * gamma > 0.0))
        return finish_branch(std::exp(log_qw), 0, true, true, 1.0);

    const double z0 = c.d_sat * gamma / c.psi;
    const double pz0 = math::regularized_gamma_p(ctx.z.m, ctx.z.rate * z0);
    const double certain = pz0 * std::exp(log_qw);
    // Everything beyond the exact piece is bounded by Pr[W > P_th].
    if (log_qw < -70.0) return finish_branch(certain, 0, false, true, 1.0);

    const double ch = c.c_sat * gamma / c.psi;
    const double y_span = c.iota4 - z0;
    require(y_span > 0.0, "saturated helper branch: empty outage interval");
    const double big_b = ctx.a_total * ch * z0;
    const double ap = ctx.a_total * c.p_th;
    const double log_ap = std::log(ap);

    // Mass of the helper-link gain between the two breakpoints.
    double dpz;
    if (ctx.z.rate * y_span <= 1e-3 * (1.0 + ctx.z.rate * z0)) {
        const auto f_z = [&](double z) {
            return std::exp(ctx.z.log_kappa + (ctx.z.m - 1) * std::log(z) -
                            ctx.z.rate * z);
        };
        const double mid = z0 + 0.5 * y_span;
        dpz = y_span / 6.0 * (f_z(z0) + 4.0 * f_z(mid) + f_z(c.iota4));
    } else {
        dpz = math::regularized_gamma_p(ctx.z.m, ctx.z.rate * c.iota4) - pz0;
    }
    const double log_dpz = dpz > 0.0 ? std::log(dpz) : kNegInf;

    KernelIntegralCache head_kernel(ctx.z.rate, big_b, y_span, true, sc.u_max);
    const int top_hint = ctx.z.m;

    // ln of E[(A h(Z))^k e^{-A h(Z)}; z0 < Z < iota4] with h(z) =
    // ch * z / (z - z0), via the shifted variable y = z - z0.
    const auto log_line_moment = [&](int k) {
        double outer = kNegInf;
        for (int j = 0; j <= k; ++j) {
            double inner = kNegInf;
            for (int l = 0; l < ctx.z.m; ++l) {
                const double lt = log_binomial(ctx.z.m - 1, l) + log_pow(z0, ctx.z.m - 1 - l) +
                                  head_kernel.log_truncated(l - j + 1, top_hint);
                inner = log_add(inner, lt);
            }
            outer = log_add(outer, log_binomial(k, j) + log_pow(z0, j) + inner);
        }
        return k * (std::log(ctx.a_total) + std::log(ch)) + ctx.z.log_kappa -
               ctx.z.rate * z0 - ctx.a_total * ch + outer;
    };

    // ln K(k) with K(k) = E[P(k+1, A h(Z)) - P(k+1, A P_th); z0 < Z < iota4],
    // grown upward from the k = 0 anchor in log scale: each step adds the
    // Poisson layer at A P_th and removes the corresponding line moment.
    std::vector<double> log_gap;
    const auto ensure_gap = [&](int k) {
        while (static_cast<int>(log_gap.size()) <= k) {
            const int next = static_cast<int>(log_gap.size());
            if (next == 0) {
                const double base = log_sub(-ap + log_dpz, log_line_moment(0));
                log_gap.push_back(base);
            } else {
                const double pois =
                    next * log_ap - ap - math::log_gamma(next + 1.0) + log_dpz;
                const double grown = log_add(log_gap[next - 1], pois);
                log_gap.push_back(
                    log_sub(grown, log_line_moment(next) - math::log_gamma(next + 1.0)));
            }
        }
    };
    const auto log_kernel = [&](int k) {
        ensure_gap(k);
        return log_gap[k];
    };

    const SeriesOutcome series =
        weighted_tail_series(ctx.su.m, ctx.sv.m, ctx.log_a1, ctx.log_a2, log_kernel, sc,
                             certain, std::exp(log_qw));
    return finish_branch(certain + series.value, series.terms, false, series.converged,
                         series.condition);
}

// ---------------------------------------------------------------------------
// Node-level assembly.
// ---------------------------------------------------------------------------

GammaFading link_fading(const model::NetworkConfig& net, model::Node u, model::Node v) {
    const model::LinkFading& f =
        net.fading[static_cast<int>(model::link_between(u, v))];
    return GammaFading{f.m, model::link_mean_power(net, u, v)};
}

void require_converged(const BranchCdf& b, const char* what) {
    if (!b.converged)
        throw math::convergence_error(what);
}

LinkCdf link_cdf_primary(double gamma, const model::NetworkConfig& net,
                         const model::SwiptParams& swipt, const model::PowerParams& power,
                         int relay, int target, const SeriesControl& sc) {
    const model::DerivedCoefficients coeffs =
        model::derive_coefficients(swipt, power, relay, target, gamma);
    const model::Node su = relay == 0 ? model::Node::su_1 : model::Node::su_2;
    const model::Node pu_t = target == 0 ? model::Node::pu_a : model::Node::pu_b;
    const model::Node pu_o = model::other_pu(pu_t);
    const GammaFading fx = link_fading(net, su, pu_t);
    const GammaFading fy = link_fading(net, su, pu_o);
    LinkCdf link;
    link.lin = cdf_primary_lin(gamma, coeffs, fx, fy, sc);
    link.sat = cdf_primary_sat(gamma, coeffs, fx, fy, sc);
    link.total = std::clamp(link.lin.raw + link.sat.raw, 0.0, 1.0);
    return link;
}

}  // namespace

double log_integral_power_exp(int n, double c, double lo, double hi) {
    require(n >= 0, "power must be a nonnegative integer");
    require(lo >= 0.0 && hi > lo && std::isfinite(hi), "bad integration bounds");
    if (c == 0.0)
        return log_sub((n + 1) * std::log(hi), log_pow(lo, n + 1)) -
               std::log(n + 1.0);
    const double delta = hi - lo;
    if (c < 0.0) {
        const double a = -c;
        double lse = kNegInf;
        for (int j = (lo == 0.0 ? n : 0); j <= n; ++j) {
            const double lt = log_binomial(n, j) + log_pow(lo, n - j) +
                              math::log_lower_incomplete_gamma(j + 1, a * delta) -
                              (j + 1) * std::log(a);
            lse = log_add(lse, lt);
        }
        return -a * lo + lse;
    }
    if (c * delta <= 60.0) {
        double lse = kNegInf;
        for (int j = (lo == 0.0 ? n : 0); j <= n; ++j) {
            CompensatedSum inner;
            inner.add(1.0 / (j + 1.0));
            double pw = 1.0;  // (c*delta)^t / t!
            for (int t = 1; t <= 500; ++t) {
                pw *= c * delta / t;
                const double add = pw / (j + t + 1.0);
                inner.add(add);
                if (add < 1e-17 * inner.value()) break;
            }
            const double lt = log_binomial(n, j) + log_pow(lo, n - j) +
                              (j + 1) * std::log(delta) + std::log(inner.value());
            lse = log_add(lse, lt);
        }
        return c * lo + lse;
    }
    // Large positive exponent: exact antiderivative evaluated at both ends.
    SignedLogSum acc;
    for (int t = 0; t <= n; ++t) {
        const double fall = math::log_gamma(n + 1.0) - math::log_gamma(n - t + 1.0);
        const double scale = fall - (t + 1) * std::log(c);
        acc.add_log(c * hi + scale + log_pow(hi, n - t), parity_sign(t));
        acc.add_log(c * lo + scale + log_pow(lo, n - t), -parity_sign(t));
    }
    const SignedLog total = acc.total();
    require(total.sign > 0, "power-exponential integral lost all precision");
    return total.log_mag;
}

double gamma_sum_cdf(double w, const GammaFading& x, double scale_x, const GammaFading& y,
                     double scale_y) {
    if (w <= 0.0) return 0.0;
    const double ls = log_gamma_sum_sf(w, x, scale_x, y, scale_y);
    return std::clamp(-std::expm1(ls), 0.0, 1.0);
}

double log_gamma_sum_sf(double w, const GammaFading& x, double scale_x, const GammaFading& y,
                        double scale_y) {
    const SumComponent u = scaled_component(x, scale_x, kIntegerOrderMsg);
    const SumComponent v = scaled_component(y, scale_y, kIntegerOrderMsg);
    return log_sum_sf_impl(w, u, v);
}

BranchCdf cdf_primary_lin(double gamma, const model::DerivedCoefficients& coeffs,
                          const GammaFading& to_target, const GammaFading& to_other,
                          const SeriesControl& series) {
    (void)series;
    check_threshold(gamma, coeffs);
    return primary_lin_impl(gamma, coeffs, to_target, to_other);
}

BranchCdf cdf_primary_sat(double gamma, const model::DerivedCoefficients& coeffs,
                          const GammaFading& to_target, const GammaFading& to_other,
                          const SeriesControl& series) {
    check_threshold(gamma, coeffs);
    return primary_sat_impl(coeffs, to_target, to_other, series);
}

BranchCdf cdf_secondary_lin(double gamma, const model::DerivedCoefficients& coeffs,
                            const GammaFading& to_target, const GammaFading& to_other,
                            const GammaFading& helper_link, const SeriesControl& series) {
    check_threshold(gamma, coeffs);
    return secondary_lin_impl(gamma, coeffs, to_target, to_other, helper_link, series);
}

BranchCdf cdf_secondary_sat(double gamma, const model::DerivedCoefficients& coeffs,
                            const GammaFading& to_target, const GammaFading& to_other,
                            const GammaFading& helper_link, const SeriesControl& series) {
    check_threshold(gamma, coeffs);
    return secondary_sat_impl(gamma, coeffs, to_target, to_other, helper_link, series);
}

NodeOutage outage_primary(model::Node node, const model::NetworkConfig& net,
                          const model::SwiptParams& swipt, const model::PowerParams& power,
                          const model::TargetRates& rates, const SeriesControl& series) {
    require(node == model::Node::pu_a || node == model::Node::pu_b,
            "outage_primary expects a licensed terminal");
    model::validate(net);
    model::validate(rates);
    const int target = node == model::Node::pu_a ? 0 : 1;
    const double gamma =
        model::target_snr(rates.of(node), swipt.alpha, model::TransmissionMode::relayed);
    NodeOutage out;
    out.threshold_snr = gamma;
    out.links = 2;
    double prod = 1.0;
    for (int relay = 0; relay < 2; ++relay) {
        out.link[relay] = link_cdf_primary(gamma, net, swipt, power, relay, target, series);
        require_converged(out.link[relay].sat,
                          "licensed saturated-branch series did not converge");
        prod *= out.link[relay].total;
    }
    out.probability = std::clamp(prod, 0.0, 1.0);
    return out;
}

NodeOutage outage_secondary(model::Node node, const model::NetworkConfig& net,
                            const model::SwiptParams& swipt, const model::PowerParams& power,
                            const model::TargetRates& rates, const SeriesControl& series) {
    require(node == model::Node::su_1 || node == model::Node::su_2,
            "outage_secondary expects a helper terminal");
    model::validate(net);
    model::validate(rates);
    const int receiver = node == model::Node::su_1 ? 0 : 1;
    const int relay = 1 - receiver;
    const double gamma =
        model::target_snr(rates.of(node), swipt.alpha, model::TransmissionMode::relayed);
    const model::DerivedCoefficients coeffs =
        model::derive_coefficients(swipt, power, relay, 0, gamma);
    const model::Node su = relay == 0 ? model::Node::su_1 : model::Node::su_2;
    const GammaFading fx = link_fading(net, su, model::Node::pu_a);
    const GammaFading fy = link_fading(net, su, model::Node::pu_b);
    const GammaFading fz = link_fading(net, model::Node::su_1, model::Node::su_2);

    NodeOutage out;
    out.threshold_snr = gamma;
    out.links = 1;
    LinkCdf& link = out.link[0];
    link.lin = cdf_secondary_lin(gamma, coeffs, fx, fy, fz, series);
    link.sat = cdf_secondary_sat(gamma, coeffs, fx, fy, fz, series);
    link.total = std::clamp(link.lin.raw + link.sat.raw, 0.0, 1.0);
    require_converged(link.lin, "helper linear-branch series did not converge");
    require_converged(link.sat, "helper saturated-branch series did not converge");
    out.probability = link.total;
    return out;
}

OutageReport outage_all(const model::NetworkConfig& net, const model::SwiptParams& swipt,
                        const model::PowerParams& power, const model::TargetRates& rates,
                        const SeriesControl& series) {
    OutageReport r;
    r.pu_a = outage_primary(model::Node::pu_a, net, swipt, power, rates, series);
    r.pu_b = outage_primary(model::Node::pu_b, net, swipt, power, rates, series);
    r.su_1 = outage_secondary(model::Node::su_1, net, swipt, power, rates, series);
    r.su_2 = outage_secondary(model::Node::su_2, net, swipt, power, rates, series);
    return r;
}

double outage_direct(const model::NetworkConfig& net, const model::PowerParams& power,
                     double rate) {
    model::validate(net);
    model::validate(power);
    const double gamma = model::target_snr(rate, 0.0, model::TransmissionMode::direct);
    const GammaFading f = link_fading(net, model::Node::pu_a, model::Node::pu_b);
    const int m = checked_order(f, kIntegerOrderMsg);
    const double to_b = math::regularized_gamma_p(
        m, m * gamma * power.sigma2[1] / (f.omega * power.p_a));
    const double to_a = math::regularized_gamma_p(
        m, m * gamma * power.sigma2[0] / (f.omega * power.p_b));
    return std::max(to_a, to_b);
}

double feasibility_edge_mu(double gamma_target) {
    require(gamma_target > 0.0, "threshold SNR must be positive");
    return gamma_target / (1.0 + gamma_target);
}

CriticalMuResult critical_mu(const model::NetworkConfig& net, const model::SwiptParams& swipt,
                             const model::PowerParams& power, const model::TargetRates& rates,
                             const SeriesControl& series, PrimaryNodeChoice node,
                             std::optional<double> target_outage) {
    const auto outage_at = [&](double mu) {
        model::SwiptParams s = swipt;
        s.mu = {mu, mu};
        switch (node) {
            case PrimaryNodeChoice::pu_a:
                return outage_primary(model::Node::pu_a, net, s, power, rates, series)
                    .probability;
            case PrimaryNodeChoice::pu_b:
                return outage_primary(model::Node::pu_b, net, s, power, rates, series)
                    .probability;
            case PrimaryNodeChoice::worst:
                break;
        }
        return std::max(
            outage_primary(model::Node::pu_a, net, s, power, rates, series).probability,
            outage_primary(model::Node::pu_b, net, s, power, rates, series).probability);
    };

    double target;
    if (target_outage) {
        target = *target_outage;
        require(target > 0.0 && target <= 1.0, "outage target must lie in (0,1]");
    } else {
        switch (node) {
            case PrimaryNodeChoice::pu_a:
                target = outage_direct(net, power, rates.pu_a);
                break;
            case PrimaryNodeChoice::pu_b:
                target = outage_direct(net, power, rates.pu_b);
                break;
            default:
                target = std::max(outage_direct(net, power, rates.pu_a),
                                  outage_direct(net, power, rates.pu_b));
                break;
        }
    }

    const double gamma_a =
        model::target_snr(rates.pu_a, swipt.alpha, model::TransmissionMode::relayed);
    const double gamma_b =
        model::target_snr(rates.pu_b, swipt.alpha, model::TransmissionMode::relayed);
    double lo = feasibility_edge_mu(std::max(gamma_a, gamma_b)) + 1e-6;
    double hi = 1.0 - 1e-6;
    if (lo >= hi)
        throw no_feasible_mu("feasibility edge leaves no room below 1");

    const double at_hi = outage_at(hi);
    if (at_hi > target)
        throw no_feasible_mu("even full power sharing cannot reach the outage target");
    double out_hi = at_hi;
    if (outage_at(lo) <= target) {
        // Already feasible at the edge; the critical factor is the edge itself.
        return CriticalMuResult{lo, outage_at(lo), target};
    }
    double best = hi;
    for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = outage_at(mid);
        if (f <= target) {
            hi = mid;
            best = mid;
            out_hi = f;
            if (target - f <= 1e-6 && hi - lo <= 1e-6) break;
        } else {
            lo = mid;
        }
        if (hi - lo <= 1e-6 && std::fabs(out_hi - target) <= 1e-6) break;
    }
    return CriticalMuResult{best, out_hi, target};
}

double throughput(const OutageReport& report, const model::SwiptParams& swipt,
                  const model::TargetRates& rates) {
    model::validate(swipt);
    model::validate(rates);
    const double pre = (1.0 - swipt.alpha) / 3.0;
    return pre * ((1.0 - report.pu_a.probability) * rates.pu_a +
                  (1.0 - report.pu_b.probability) * rates.pu_b +
                  (1.0 - report.su_1.probability) * rates.su_1 +
                  (1.0 - report.su_2.probability) * rates.su_2);
}

double throughput(const model::NetworkConfig& net, const model::SwiptParams& swipt,
                  const model::PowerParams& power, const model::TargetRates& rates,
                  const SeriesControl& series) {
    return throughput(outage_all(net, swipt, power, rates, series), swipt, rates);
}

double energy_efficiency(double system_throughput, const model::SwiptParams& swipt,
                         const model::PowerParams& power) {
    model::validate(swipt);
    model::validate(power);
    const double duty = swipt.alpha + swipt.beta * (1.0 - swipt.alpha) / 3.0;
    require(duty > 0.0, "energy efficiency needs alpha > 0 or beta > 0");
    return system_throughput / (duty * (power.p_a + power.p_b));
}

double energy_efficiency(const model::NetworkConfig& net, const model::SwiptParams& swipt,
                         const model::PowerParams& power, const model::TargetRates& rates,
                         const SeriesControl& series) {
    return energy_efficiency(throughput(net, swipt, power, rates, series), swipt, power);
}

}  // namespace swiptnet::analytic
