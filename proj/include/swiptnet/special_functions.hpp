// Real-valued special functions backing the closed-form outage expressions:
// incomplete gamma functions (including negative order, in log scale), the
// modified Bessel function of the second kind, Tricomi's confluent
// hypergeometric U and the Whittaker W function.
//
// All functions are pure and deterministic; they are safe to call from any
// number of threads concurrently.
#pragma once

#include <stdexcept>

namespace swiptnet::math {

// Tuning knobs for the internal series / continued-fraction evaluations.
struct FnEvalOptions {
    double rel_tol = 1e-14;  // relative early-stop threshold, > 0
    int max_terms = 4000;    // cap on series/CF iterations, >= 1
};

// Thrown when a series or continued fraction hits max_terms before meeting
// rel_tol.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ln Gamma(x) for x > 0.
double log_gamma(double x);

// Lower incomplete gamma Upsilon[a,x] = int_0^x t^{a-1} e^{-t} dt, a > 0, x >= 0.
double lower_incomplete_gamma(double a, double x, const FnEvalOptions& opts = {});

// Upper incomplete gamma Gamma[a,x] = Gamma[a] - Upsilon[a,x], a > 0, x >= 0.
double upper_incomplete_gamma(double a, double x, const FnEvalOptions& opts = {});

// Regularized forms P(a,x) = Upsilon[a,x]/Gamma[a], Q(a,x) = Gamma[a,x]/Gamma[a].
double regularized_gamma_p(double a, double x, const FnEvalOptions& opts = {});
double regularized_gamma_q(double a, double x, const FnEvalOptions& opts = {});

// ln Upsilon[a,x] and ln Gamma[a,x]; usable where the unscaled values
// overflow (a beyond ~170) or underflow. ln Upsilon[a,0] = -inf.
double log_lower_incomplete_gamma(double a, double x, const FnEvalOptions& opts = {});
double log_upper_incomplete_gamma(double a, double x, const FnEvalOptions& opts = {});

// ln Gamma[s,x] for any real order s (positive, zero, or negative) and x > 0.
// Gamma[s,x] is positive for all real s when x > 0, so the logarithm is real.
double log_upper_gamma_any_order(double s, double x, const FnEvalOptions& opts = {});

// Modified Bessel function of the second kind K_v(x), any real order v, x > 0.
// Symmetric in v. Throws std::overflow_error when the value exceeds the
// double range (x near 0 with |v| large).
double bessel_k(double v, double x, const FnEvalOptions& opts = {});

// Tricomi confluent hypergeometric U(a,b,x), x > 0.
double tricomi_u(double a, double b, double x, const FnEvalOptions& opts = {});

// Whittaker W_{u,v}(x) = e^{-x/2} x^{v+1/2} U(1/2+v-u, 1+2v, x), x > 0.
double whittaker_w(double u, double v, double x, const FnEvalOptions& opts = {});

}  // namespace swiptnet::math
