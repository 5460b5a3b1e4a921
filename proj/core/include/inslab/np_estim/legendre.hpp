#pragma once

#include <vector>

namespace inslab {

/// Orthonormal shifted Legendre polynomial sqrt(2m+1) P_m(2x-1) on [0,1].
/// Throws InvalidArgument for m < 0 or x outside [0,1].
double shifted_legendre(int m, double x);

/// (L_1(x), ..., L_M(x)); x is clamped into [0,1].
std::vector<double> legendre_row(int M, double x);

/// Density on [lo, hi] of the form (1 + sum_m lambda_m L_m(x)) / (hi - lo)
/// with x = (t - lo) / (hi - lo). Integrates to one by construction.
class LegendreDensity {
 public:
  LegendreDensity() = default;
  LegendreDensity(double lo, double hi, std::vector<double> coeffs, int grid_size = 201);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  int order() const { return static_cast<int>(coeffs_.size()); }
  int grid_size() const { return grid_size_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  /// Zero outside [lo, hi].
  double operator()(double t) const;
  double cdf(double t) const;
  /// int t^k f(t) dt, exact for k + M <= 59.
  double moment(int k) const;
  /// grid_size equally spaced points from lo to hi.
  std::vector<double> grid() const;
  double min_on_grid() const;

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::vector<double> coeffs_;
  int grid_size_ = 201;
};

}  // namespace inslab
