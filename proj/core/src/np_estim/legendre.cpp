#include "inslab/np_estim/legendre.hpp"

#include <algorithm>
#include <cmath>

#include "inslab/common/error.hpp"
#include "inslab/common/format.hpp"
#include "inslab/model_core/quadrature.hpp"

namespace inslab {
namespace {

// P_0..P_{n} at y in [-1,1].
void legendre_values(int n, double y, std::vector<double>& p) {
  p.assign(static_cast<std::size_t>(n) + 1, 0.0);
  p[0] = 1.0;
  if (n >= 1) p[1] = y;
  for (int k = 1; k < n; ++k) {
    p[k + 1] = ((2.0 * k + 1.0) * y * p[k] - k * p[k - 1]) / (k + 1.0);
  }
}

}  // namespace

double shifted_legendre(int m, double x) {
  if (m < 0) throw InvalidArgument("shifted_legendre: negative degree");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("shifted_legendre: x outside [0,1]");
  std::vector<double> p;
  legendre_values(m, 2.0 * x - 1.0, p);
  return std::sqrt(2.0 * m + 1.0) * p[static_cast<std::size_t>(m)];
}

std::vector<double> legendre_row(int M, double x) {
  std::vector<double> p;
  legendre_values(M, 2.0 * std::clamp(x, 0.0, 1.0) - 1.0, p);
  std::vector<double> row(static_cast<std::size_t>(M));
  for (int m = 1; m <= M; ++m) row[m - 1] = std::sqrt(2.0 * m + 1.0) * p[m];
  return row;
}

LegendreDensity::LegendreDensity(double lo, double hi, std::vector<double> coeffs,
                                 int grid_size)
    : lo_(lo), hi_(hi), coeffs_(std::move(coeffs)), grid_size_(grid_size) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidArgument("LegendreDensity: need finite lo < hi");
  }
  if (grid_size < 2) throw InvalidArgument("LegendreDensity: grid_size < 2");
}

double LegendreDensity::operator()(double t) const {
  if (t < lo_ || t > hi_) return 0.0;
  const auto row = legendre_row(order(), (t - lo_) / (hi_ - lo_));
  double v = 1.0;
  for (int m = 0; m < order(); ++m) v += coeffs_[m] * row[m];
  return v / (hi_ - lo_);
}

double LegendreDensity::cdf(double t) const {
  if (t <= lo_) return 0.0;
  if (t >= hi_) return 1.0;
  const double x = (t - lo_) / (hi_ - lo_);
  const double y = 2.0 * x - 1.0;
  std::vector<double> p;
  legendre_values(order() + 1, y, p);
  // int_0^x L_m = sqrt(2m+1)/2 * (P_{m+1}(y) - P_{m-1}(y)) / (2m+1)
  double v = x;
  for (int m = 1; m <= order(); ++m) {
    v += coeffs_[m - 1] * (p[m + 1] - p[m - 1]) / (2.0 * std::sqrt(2.0 * m + 1.0));
  }
  return std::clamp(v, 0.0, 1.0);
}

double LegendreDensity::moment(int k) const {
  const double w = hi_ - lo_;
  return gauss_legendre(
      [&](double x) {
        const auto row = legendre_row(order(), x);
        double v = 1.0;
        for (int m = 0; m < order(); ++m) v += coeffs_[m] * row[m];
        return std::pow(lo_ + w * x, k) * v;
      },
      0.0, 1.0);
}

std::vector<double> LegendreDensity::grid() const { return uniform_grid(lo_, hi_, grid_size_); }

double LegendreDensity::min_on_grid() const {
  double m = HUGE_VAL;
  for (double t : grid()) m = std::min(m, (*this)(t));
  return m;
}

}  // namespace inslab
