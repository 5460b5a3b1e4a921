#pragma once

#include <functional>
#include <span>
#include <vector>

namespace inslab {

/// Ingredients of the plug-in conditional density of a given theta. All
/// callables take (a, z) or (theta, z).
struct Step3Inputs {
  std::function<double(double, double)> frontier;     // theta(a, z)
  std::function<double(double, double)> frontier_da;  // d theta / d a
  std::function<double(double, double)> choice_prob;  // Pr[chi = 1 | theta, z]
  double z_lo = 0.0;
  double z_hi = 0.0;
  double h_z = 1.0;
  double a_bar = 1e-3;
};

struct Step3Result {
  double theta_star = 0.0;
  std::vector<double> a_grid;
  /// NaN where no z in [z_lo, z_hi] solves theta(a, z) = theta_star.
  std::vector<double> density;
  std::vector<double> z_of_a;
  double range_lo = 0.0;
  double range_hi = 0.0;
  bool full_range = false;
  bool normalized = false;
  double raw_integral = 0.0;
};

/// a(theta, z) clipped into [0, a_bar]: 0 when theta lies above the whole
/// frontier at z, a_bar when it lies below.
double identified_a(const Step3Inputs& in, double theta, double z);

/// Solves theta(a, z) = theta_star for z at each grid point, combines the
/// frontier derivatives with the finite-difference slope of the choice
/// probability, and takes the absolute value. Normalizes by the trapezoid
/// integral when the identified range covers the whole grid. Throws
/// DegenerateInstrument when |d theta / d z| < 1e-14 at a solved point.
Step3Result step3_density(const Step3Inputs& in, double theta_star,
                          std::span<const double> a_grid);

}  // namespace inslab
