// Compensated and signed-log accumulation primitives shared by the closed-form
// evaluators, which sum series whose terms span hundreds of orders of magnitude
// with heavy sign cancellation.
#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

namespace swiptnet::math {

// Kahan-Babuska (Neumaier) compensated summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// A real number stored as sign * exp(log_mag). Zero is {-inf, 0}.
struct SignedLog {
    double log_mag = -std::numeric_limits<double>::infinity();
    int sign = 0;

    static SignedLog zero() noexcept { return {}; }

    static SignedLog from_value(double v) noexcept {
        if (v == 0.0 || !std::isfinite(v)) {
            SignedLog s;
            if (std::isinf(v)) {
                s.log_mag = std::numeric_limits<double>::infinity();
                s.sign = v > 0 ? 1 : -1;
            }
            return s;
        }
        return {std::log(std::fabs(v)), v > 0 ? 1 : -1};
    }

    static SignedLog from_log(double log_mag, int sign) noexcept {
        if (sign == 0 || log_mag == -std::numeric_limits<double>::infinity())
            return {};
        return {log_mag, sign > 0 ? 1 : -1};
    }

    bool is_zero() const noexcept { return sign == 0; }

    double value() const noexcept {
        return sign == 0 ? 0.0 : sign * std::exp(log_mag);
    }

    SignedLog operator*(const SignedLog& o) const noexcept {
        if (sign == 0 || o.sign == 0) return {};
        return {log_mag + o.log_mag, sign * o.sign};
    }

    SignedLog operator/(const SignedLog& o) const noexcept {
        if (sign == 0) return {};
        return {log_mag - o.log_mag, sign * o.sign};
    }
};

// Collects signed-log terms and reduces them by rescaling with the largest
// exponent, so the result is exact up to compensated-sum rounding even when
// individual terms would overflow or underflow a double.
class SignedLogSum {
public:
    void add(SignedLog t) {
        if (t.sign != 0) terms_.push_back(t);
    }
    void add_log(double log_mag, int sign) { add(SignedLog::from_log(log_mag, sign)); }
    void add_value(double v) { add(SignedLog::from_value(v)); }

    bool empty() const noexcept { return terms_.empty(); }

    SignedLog total() const {
        if (terms_.empty()) return SignedLog::zero();
        double lg_max = terms_.front().log_mag;
        for (const SignedLog& t : terms_)
            if (t.log_mag > lg_max) lg_max = t.log_mag;
        if (lg_max == -std::numeric_limits<double>::infinity())
            return SignedLog::zero();
        CompensatedSum acc;
        for (const SignedLog& t : terms_)
            acc.add(t.sign * std::exp(t.log_mag - lg_max));
        const double s = acc.value();
        if (s == 0.0) return SignedLog::zero();
        return SignedLog::from_log(lg_max + std::log(std::fabs(s)), s > 0 ? 1 : -1);
    }

    double value() const { return total().value(); }

    // Magnitude of the largest term relative to the magnitude of the total, a
    // cancellation severity measure (1 = no cancellation).
    double condition() const {
        if (terms_.empty()) return 1.0;
        const SignedLog t = total();
        if (t.sign == 0) return std::numeric_limits<double>::infinity();
        double lg_max = terms_.front().log_mag;
        for (const SignedLog& e : terms_)
            if (e.log_mag > lg_max) lg_max = e.log_mag;
        return std::exp(lg_max - t.log_mag);
    }

private:
    std::vector<SignedLog> terms_;
};

}  // namespace swiptnet::math
