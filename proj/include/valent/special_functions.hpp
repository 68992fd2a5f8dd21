#pragma once

// Gamma/Beta machinery and the closed-form constants around the type of the
// Jacobi matrix with weights j^p.

#include <utility>

namespace valent {

// ln Gamma(x) for x > 0 (Lanczos, g = 7).
double log_gamma(double x);
double log_beta(double a, double b);
// ln Gamma(x + h) - ln Gamma(x) without the cancellation of two huge values
// when x >> h. Requires x > 0 and x + h > 0.
double log_gamma_ratio(double x, double h);
double beta(double a, double b);

// (e/p) B(1/(2p), 1 - 1/p), the limit of n s(n)^{1/(np)}.
double limit_value(double p);

// B(1/(2p), 1 - 1/p) / 2
double nevanlinna_type(double p);

// p * int_0^1 (1 - x^p)^{-2/p} dx = B(1/p, 1 - 2/p), p > 2.
double valent_type(double p);

// (1/p) B(1/(2p), 1 - 1/p) = 2^{1-1/p} int_0^inf du / sqrt(1 + u^{2p}), p > 1.
double J_value(double p);

// (pi / sin(pi/p), pi / (sin(pi/p) cos(pi/p))), p > 2.
std::pair<double, double> type_bounds(double p);

// Closed form against an independent quadrature of the defining integral.
struct QuadratureCheck {
  double closed_form = 0.0;
  double quadrature = 0.0;
  double rel_diff = 0.0;
  bool agrees = false;
};

QuadratureCheck valent_type_check(double p, double rel_tol = 1e-8);
QuadratureCheck J_value_check(double p, double rel_tol = 1e-9);

struct ConstantsReport {
  double p = 0.0;
  double limit_L = 0.0;
  double nevanlinna_type = 0.0;
  double valent_type = 0.0;  // NaN for p <= 2
  double J = 0.0;
  double bound_lo = 0.0;  // NaN for p <= 2
  double bound_hi = 0.0;  // NaN for p <= 2
};

// Throws DomainError for p <= 1; fields undefined for 1 < p <= 2 are NaN.
ConstantsReport constants_report(double p);

}  // namespace valent
