#pragma once

#include <functional>

namespace valent {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Globally adaptive 7/15-point Gauss-Kronrod on [a, b]. The interval with the
// largest error estimate is bisected until the total error is within
// max(abs_tol, rel_tol * |value|) or max_intervals is reached.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, double rel_tol, int max_intervals = 4000);

}  // namespace valent
