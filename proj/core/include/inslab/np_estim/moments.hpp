#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "inslab/np_estim/legendre.hpp"

namespace inslab {

/// Estimated factorial moments mu_1..mu_M with their sampling variances.
struct MomentSet {
  std::vector<double> values;
  std::vector<double> variances;
  /// Row-major M x M sampling covariance of `values`; empty when unknown.
  std::vector<double> covariance;
  double n = 0.0;  // sample size (effective size for kernel-weighted sets)

  int order() const { return static_cast<int>(values.size()); }
};

/// Lower bound applied to every variance entry.
inline constexpr double kVarianceFloor = 1e-12;

/// J (J-1) ... (J-m+1).
double falling_factorial(long j, int m);

enum class MomentWeighting { kDiagonal, kFull };

MomentWeighting parse_weighting(const std::string& text);
const char* to_string(MomentWeighting w);

/// mu_m = mean of falling factorials; Var = (1/N^2) sum ff^2 - mu^2 / N.
/// The covariance uses the same normalization for the cross terms.
MomentSet factorial_moments(std::span<const long> js, int M);

/// floor(ln n / ln ln n); InvalidArgument for n < 16.
int moment_order_rule(long n);

struct DemixResult {
  LegendreDensity density;
  // GMM criterion under the scaled weight matrix.
  double objective = 0.0;
  double objective_at_zero = 0.0;  // same, at lambda = 0
  double kkt_residual = 0.0;
  int active_constraints = 0;
};

/// Weight matrix V^{-1} for a moment set, scaled so its largest entry is 1.
/// kFull needs ms.covariance.
Eigen::MatrixXd moment_weight_matrix(const MomentSet& ms, MomentWeighting weighting);

/// Weighted moment-matching fit of a LegendreDensity on [lo, hi] subject to
/// nonnegativity at `grid_size` equally spaced points.
DemixResult demix_poisson(const MomentSet& ms, double lo = 0.0, double hi = 1.0,
                          int grid_size = 201,
                          MomentWeighting weighting = MomentWeighting::kDiagonal);

/// B(m, k) = int_0^1 (lo + (hi-lo) x)^m L_k(x) dx for m = 1..M, k = 0..K.
std::vector<std::vector<double>> basis_moments(int M, int K, double lo, double hi);

}  // namespace inslab
