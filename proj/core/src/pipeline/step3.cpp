#include "inslab/pipeline/step3.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "inslab/common/error.hpp"

namespace inslab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Root of theta(a, z) = theta_star in z, or NaN when the ends do not bracket.
double solve_z(const Step3Inputs& in, double a, double theta_star) {
  double lo = in.z_lo, hi = in.z_hi;
  double flo = in.frontier(a, lo) - theta_star;
  const double fhi = in.frontier(a, hi) - theta_star;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) return kNaN;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = in.frontier(a, mid) - theta_star;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double identified_a(const Step3Inputs& in, double theta, double z) {
  if (theta >= in.frontier(0.0, z)) return 0.0;
  if (theta <= in.frontier(in.a_bar, z)) return in.a_bar;
  double lo = 0.0, hi = in.a_bar;
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    if (in.frontier(mid, z) > theta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Step3Result step3_density(const Step3Inputs& in, double theta_star,
                          std::span<const double> a_grid) {
  if (!(theta_star > 0.0 && theta_star < 1.0)) {
    throw InvalidArgument("step3_density: theta_star must lie in (0,1)");
  }
  if (!(in.h_z > 0.0)) throw InvalidArgument("step3_density: h_z must be positive");
  if (!(in.z_lo < in.z_hi)) throw InvalidArgument("step3_density: empty z range");
  if (a_grid.size() < 2) throw InvalidArgument("step3_density: a grid needs two points");

  Step3Result res;
  res.theta_star = theta_star;
  res.a_grid.assign(a_grid.begin(), a_grid.end());
  res.density.assign(a_grid.size(), kNaN);
  res.z_of_a.assign(a_grid.size(), kNaN);

  const double a_lo_end = identified_a(in, theta_star, in.z_lo);
  const double a_hi_end = identified_a(in, theta_star, in.z_hi);
  res.range_lo = std::min(a_lo_end, a_hi_end);
  res.range_hi = std::max(a_lo_end, a_hi_end);
  const double span_tol = 1e-9 * (a_grid.back() - a_grid.front());
  res.full_range =
      res.range_lo <= a_grid.front() + span_tol && res.range_hi >= a_grid.back() - span_tol;

  for (std::size_t i = 0; i < a_grid.size(); ++i) {
    const double a = a_grid[i];
    const double z = solve_z(in, a, theta_star);
    if (std::isnan(z)) continue;
    res.z_of_a[i] = z;
    const double dtheta_da = in.frontier_da(a, z);
    const double dtheta_dz =
        (in.frontier(a, z + in.h_z) - in.frontier(a, z - in.h_z)) / (2.0 * in.h_z);
    if (std::abs(dtheta_dz) < 1e-14) {
      throw DegenerateInstrument("step3_density: d theta / d z vanishes at a=" +
                                 std::to_string(a));
    }
    const double zl = std::max(z - in.h_z, in.z_lo);
    const double zr = std::min(z + in.h_z, in.z_hi);
    const double dpr_dz =
        (in.choice_prob(theta_star, zr) - in.choice_prob(theta_star, zl)) / (zr - zl);
    res.density[i] = std::abs(-dtheta_da / dtheta_dz * dpr_dz);
  }

  if (res.full_range) {
    double integral = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i + 1 < a_grid.size(); ++i) {
      finite = finite && std::isfinite(res.density[i]) && std::isfinite(res.density[i + 1]);
      integral += 0.5 * (res.density[i] + res.density[i + 1]) * (a_grid[i + 1] - a_grid[i]);
    }
    res.raw_integral = integral;
    if (finite && integral > 0.0) {
      for (double& v : res.density) v /= integral;
      res.normalized = true;
    }
  }
  return res;
}

}  // namespace inslab
