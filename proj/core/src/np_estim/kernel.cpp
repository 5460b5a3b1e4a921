#include "inslab/np_estim/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "inslab/common/error.hpp"

namespace inslab {

double silverman_bandwidth(std::span<const double> xs) {
  if (xs.size() < 2) throw InvalidArgument("silverman_bandwidth: need at least two points");
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw InvalidArgument("silverman_bandwidth: zero spread");
  return 1.06 * sd * std::pow(n, -0.2);
}

namespace {

KernelMoments regress(std::span<const double> xs, const std::vector<std::vector<double>>& columns,
                      double x0, const KernelSpec& spec, bool with_covariance) {
  if (xs.empty()) throw InvalidArgument("kernel_regress: empty sample");
  for (const auto& c : columns) {
    if (c.size() != xs.size()) throw InvalidArgument("kernel_regress: length mismatch");
  }
  const double h = spec.bandwidth ? *spec.bandwidth : silverman_bandwidth(xs);
  if (!(h > 0.0)) throw InvalidArgument("kernel_regress: bandwidth must be positive");
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  const double at = std::clamp(x0, *mn, *mx);

  const std::size_t R = columns.size();
  std::vector<double> wsum_y(R, 0.0);
  std::vector<double> w(xs.size());
  double sw = 0.0, sw2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double u = (xs[i] - at) / h;
    w[i] = std::exp(-0.5 * u * u);
    sw += w[i];
    sw2 += w[i] * w[i];
    for (std::size_t r = 0; r < R; ++r) wsum_y[r] += w[i] * columns[r][i];
  }
  if (!(sw > 0.0)) {
    throw InsufficientData("kernel_regress: no kernel mass at x0 (bandwidth too small)");
  }
  KernelMoments km;
  km.estimates.resize(R);
  for (std::size_t r = 0; r < R; ++r) {
    KernelEstimate& e = km.estimates[r];
    e.value = wsum_y[r] / sw;
    double v = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double d = columns[r][i] - e.value;
      v += w[i] * w[i] * d * d;
    }
    e.variance = v / (sw * sw);
    e.bandwidth = h;
    e.effective_n = sw * sw / sw2;
    e.evaluated_at = at;
    e.extrapolated = at != x0;
  }
  if (with_covariance) {
    km.covariance.assign(R * R, 0.0);
    for (std::size_t a = 0; a < R; ++a) {
      km.covariance[a * R + a] = km.estimates[a].variance;
      for (std::size_t b = a + 1; b < R; ++b) {
        const double ya = km.estimates[a].value, yb = km.estimates[b].value;
        double c = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          c += w[i] * w[i] * (columns[a][i] - ya) * (columns[b][i] - yb);
        }
        km.covariance[a * R + b] = km.covariance[b * R + a] = c / (sw * sw);
      }
    }
  }
  return km;
}

}  // namespace

std::vector<KernelEstimate> kernel_regress_many(std::span<const double> xs,
                                                const std::vector<std::vector<double>>& columns,
                                                double x0, const KernelSpec& spec) {
  return regress(xs, columns, x0, spec, false).estimates;
}

KernelMoments kernel_regress_moments(std::span<const double> xs,
                                     const std::vector<std::vector<double>>& columns, double x0,
                                     const KernelSpec& spec) {
  return regress(xs, columns, x0, spec, true);
}

KernelEstimate kernel_regress(std::span<const double> xs, std::span<const double> ys, double x0,
                              const KernelSpec& spec) {
  return kernel_regress_many(xs, {std::vector<double>(ys.begin(), ys.end())}, x0, spec).front();
}

}  // namespace inslab
