#pragma once

#include <functional>

namespace inslab {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  int evaluations = 0;
};

/// Recursive adaptive Simpson on [lo, hi] to absolute tolerance `abs_tol`.
/// Throws NumericFailure (carrying the achieved error) when the recursion
/// budget is exhausted before the tolerance is met.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f,
                                  double lo, double hi, double abs_tol,
                                  int max_depth = 48);

/// Gauss-Legendre rule with 30 nodes on [lo, hi]; exact for polynomials of
/// degree <= 59.
double gauss_legendre(const std::function<double(double)>& f, double lo, double hi);

}  // namespace inslab
