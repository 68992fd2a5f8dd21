#include "valent/special_functions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include "valent/errors.hpp"
#include "valent/quadrature.hpp"

namespace valent {
namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos_log_gamma(double x) {
  // x >= 0.5
  const double z = x - 1.0;
  double series = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) series += kLanczos[i] / (z + static_cast<double>(i));
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(series);
}

void require_p_above(double p, double lo, const char* what) {
  if (!(p > lo)) throw DomainError(what);
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: requires x > 0");
  if (std::isinf(x)) return x;
  if (x < 0.5) return lanczos_log_gamma(x + 1.0) - std::log(x);
  // Exact zeros at 1 and 2 keep binomials at integers clean.
  if (x == 1.0 || x == 2.0) return 0.0;
  return lanczos_log_gamma(x);
}

namespace {
// ln Gamma(z) - ((z - 1/2) ln z - z + ln(2 pi)/2)
double stirling_tail(double z) {
  const double r = 1.0 / z;
  const double r2 = r * r;
  return r * (1.0 / 12 - r2 * (1.0 / 360 - r2 * (1.0 / 1260 - r2 * (1.0 / 1680 - r2 / 1188))));
}
}  // namespace

double log_gamma_ratio(double x, double h) {
  const double y = x + h;
  if (!(x > 0.0 && y > 0.0)) throw DomainError("log_gamma_ratio: requires x > 0 and x + h > 0");
  if (h == 0.0) return 0.0;
  if (std::min(x, y) < 15.0) return log_gamma(y) - log_gamma(x);
  return (x - 0.5) * std::log1p(h / x) + h * std::log(y) - h + (stirling_tail(y) - stirling_tail(x));
}

double log_beta(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("beta: requires a, b > 0");
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double beta(double a, double b) { return std::exp(log_beta(a, b)); }

double limit_value(double p) {
  require_p_above(p, 1.0, "limit_value: requires p > 1");
  return std::numbers::e / p * beta(1.0 / (2.0 * p), 1.0 - 1.0 / p);
}

double nevanlinna_type(double p) {
  require_p_above(p, 1.0, "nevanlinna_type: requires p > 1");
  return 0.5 * beta(1.0 / (2.0 * p), 1.0 - 1.0 / p);
}

double valent_type(double p) {
  require_p_above(p, 2.0, "valent_type: integral diverges for p <= 2");
  return beta(1.0 / p, 1.0 - 2.0 / p);
}

double J_value(double p) {
  require_p_above(p, 1.0, "J_value: integral diverges for p <= 1");
  return beta(1.0 / (2.0 * p), 1.0 - 1.0 / p) / p;
}

std::pair<double, double> type_bounds(double p) {
  require_p_above(p, 2.0, "type_bounds: requires p > 2");
  const double angle = std::numbers::pi / p;
  const double lo = std::numbers::pi / std::sin(angle);
  return {lo, lo / std::cos(angle)};
}

QuadratureCheck valent_type_check(double p, double rel_tol) {
  QuadratureCheck c;
  c.closed_form = valent_type(p);
  // After u = x^p the integrand u^{1/p-1} (1-u)^{-2/p} is singular at both
  // ends. Split at 1/2; u = t^p on the left and 1-u = s^q, q = p/(p-2), on the
  // right turn both pieces into bounded integrands.
  const double left_end = std::pow(0.5, 1.0 / p);
  auto left = [p](double t) { return p * std::pow(1.0 - std::pow(t, p), -2.0 / p); };
  const double q = p / (p - 2.0);
  const double right_end = std::pow(0.5, 1.0 / q);
  auto right = [p, q](double s) { return q * std::pow(1.0 - std::pow(s, q), 1.0 / p - 1.0); };
  const auto a = integrate_adaptive(left, 0.0, left_end, 0.0, 1e-14);
  const auto b = integrate_adaptive(right, 0.0, right_end, 0.0, 1e-14);
  c.quadrature = a.value + b.value;
  c.rel_diff = std::abs(c.quadrature - c.closed_form) / c.closed_form;
  c.agrees = c.rel_diff <= rel_tol;
  return c;
}

QuadratureCheck J_value_check(double p, double rel_tol) {
  QuadratureCheck c;
  c.closed_form = J_value(p);
  // [0, 1] directly; [1, inf) via u = 1/t, t = s^r with r = 1/(p-1), which
  // leaves r / sqrt(1 + s^{2pr}) on (0, 1].
  const double r = 1.0 / (p - 1.0);
  auto head = [p](double u) { return 1.0 / std::sqrt(1.0 + std::pow(u, 2.0 * p)); };
  auto tail = [p, r](double s) { return r / std::sqrt(1.0 + std::pow(s, 2.0 * p * r)); };
  const auto a = integrate_adaptive(head, 0.0, 1.0, 0.0, 1e-14);
  const auto b = integrate_adaptive(tail, 0.0, 1.0, 0.0, 1e-14);
  c.quadrature = std::pow(2.0, 1.0 - 1.0 / p) * (a.value + b.value);
  c.rel_diff = std::abs(c.quadrature - c.closed_form) / c.closed_form;
  c.agrees = c.rel_diff <= rel_tol;
  return c;
}

ConstantsReport constants_report(double p) {
  require_p_above(p, 1.0, "constants: requires p > 1");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ConstantsReport r;
  r.p = p;
  r.limit_L = limit_value(p);
  r.nevanlinna_type = nevanlinna_type(p);
  r.J = J_value(p);
  r.valent_type = nan;
  r.bound_lo = nan;
  r.bound_hi = nan;
  if (p > 2.0) {
    r.valent_type = valent_type(p);
    std::tie(r.bound_lo, r.bound_hi) = type_bounds(p);
  }
  return r;
}

}  // namespace valent
