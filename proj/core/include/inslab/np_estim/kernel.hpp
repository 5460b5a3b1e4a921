#pragma once

#include <optional>
#include <span>
#include <vector>

namespace inslab {

/// Gaussian kernel; Silverman rule-of-thumb bandwidth unless overridden.
struct KernelSpec {
  std::optional<double> bandwidth;
};

/// 1.06 * sd(xs) * n^{-1/5}; InvalidArgument when xs has fewer than two
/// points or zero spread.
double silverman_bandwidth(std::span<const double> xs);

struct KernelEstimate {
  double value = 0.0;
  /// sum w^2 (y - value)^2 / (sum w)^2
  double variance = 0.0;
  double bandwidth = 0.0;
  /// (sum w)^2 / sum w^2
  double effective_n = 0.0;
  /// Point actually used; differs from the request when it was clamped.
  double evaluated_at = 0.0;
  bool extrapolated = false;
};

/// Nadaraya-Watson estimate of E[y | x = x0]. A request outside
/// [min xs, max xs] is evaluated at the nearest data boundary and flagged.
KernelEstimate kernel_regress(std::span<const double> xs, std::span<const double> ys, double x0,
                              const KernelSpec& spec = {});

/// Several responses sharing the same kernel weights; columns[r][i] is
/// response r at xs[i].
std::vector<KernelEstimate> kernel_regress_many(std::span<const double> xs,
                                                const std::vector<std::vector<double>>& columns,
                                                double x0, const KernelSpec& spec = {});

struct KernelMoments {
  std::vector<KernelEstimate> estimates;
  /// Row-major R x R, sum w^2 (y_r - yhat_r)(y_s - yhat_s) / (sum w)^2.
  std::vector<double> covariance;
};

/// kernel_regress_many plus the cross covariance of the estimates.
KernelMoments kernel_regress_moments(std::span<const double> xs,
                                     const std::vector<std::vector<double>>& columns, double x0,
                                     const KernelSpec& spec = {});

}  // namespace inslab
