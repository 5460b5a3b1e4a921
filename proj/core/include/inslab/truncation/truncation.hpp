#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inslab/dgp_sim/dgp.hpp"
#include "inslab/np_estim/moments.hpp"

namespace inslab {

/// Observables of a deductible-truncated dataset.
struct TruncatedSummary {
  double lambda_hat = 0.0;  // (1 - H_1) / (1 - H_2)
  double nu1 = 0.0;
  double nu2 = 0.0;
  std::vector<double> mu_star1;  // factorial moments of J* given chi = 1
  std::vector<double> mu_star2;
  std::optional<double> h2;
  long n = 0;
};

/// Empirical survival at dd1 of contract-2 claims (already truncated at
/// dd2). InsufficientData when no claim exceeds dd1.
double estimate_lambda(std::span<const double> contract2_claims, double dd1);

/// Contract-2 claims pooled from truncated records.
std::vector<double> claims_of_contract(const std::vector<InsureeRecord>& records, int chi);

TruncatedSummary summarize_truncated(const std::vector<InsureeRecord>& records,
                                     const MenuRule& rule, int M);

/// Moments of theta~ = (1 - H_2) theta: chi = 2 factorial moments as is,
/// chi = 1 ones rescaled by lambda^{-m}, averaged over all records.
MomentSet truncated_theta_moments(const std::vector<InsureeRecord>& records, double lambda_hat,
                                  int M);
DemixResult demix_truncated(const std::vector<InsureeRecord>& records, double lambda_hat, int M,
                            int grid_size = 201);

/// x / (1 + x) with x = dd2 * h2*(dd2), h2* from a reflection kernel density
/// estimate at the truncation point. 0 when dd2 = 0. InsufficientData when
/// fewer than 50 claims are available.
double h2_upper_bound(std::span<const double> contract2_claims, double dd2,
                      std::optional<double> bandwidth = std::nullopt);

struct H2Estimate {
  double value = 0.0;  // clipped into [0, 1)
  double raw = 0.0;
  bool inconsistent = false;  // raw outside [0,1) by more than 0.02
};

/// H2 = 1 - [nu1 mu*_1 / lambda + nu2 mu*_2] / mu_known.
H2Estimate h2_from_known_mean(double mu_known, const TruncatedSummary& summary);

/// Observationally equivalent structure: theta scaled by kappa, damage
/// survival above dd2 scaled by 1/kappa with a uniform filler below.
/// InvalidArgument when kappa < 1 - H(dd2).
DgpConfig equivalent_structure(double kappa, const DgpConfig& base);

/// `key = value` report.
std::string format_summary(const TruncatedSummary& s);

}  // namespace inslab
