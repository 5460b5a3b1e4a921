#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "inslab/common/config.hpp"
#include "inslab/model_core/contracts.hpp"
#include "inslab/model_core/damage.hpp"

namespace inslab {

/// Two-contract menu as affine functions of the instrument z. Contract 1 is
/// the lower coverage (higher deductible).
struct MenuRule {
  double t1_intercept = 0.0;
  double t1_slope = 3.25;
  double dd1 = 1000.0;
  double t2_intercept = 700.0;
  double t2_slope = 0.0;
  double dd2 = 500.0;

  Coverage lower(double z) const { return {t1_intercept + t1_slope * z, dd1}; }
  Coverage upper(double z) const { return {t2_intercept + t2_slope * z, dd2}; }
  ContractMenu menu(double z, double damage_upper_bound) const {
    return {{lower(z), upper(z)}, damage_upper_bound};
  }
  double deductible(int chi) const { return chi == 1 ? dd1 : dd2; }
};

struct DgpConfig {
  long n = 100000;
  double theta_alpha = 2.0;
  double theta_beta = 3.0;
  double a_alpha = 1.0;
  double a_beta = 3.0;
  double a_scale = 1e-3;
  double copula_rho = -0.5;
  DamageDist damage = DamageDist::exponential(5000.0);
  double z_lo = 100.0;
  double z_hi = 200.0;
  MenuRule menu;
  std::uint64_t seed = 0;
  /// Test hook: every insuree gets this theta (the copula still uses U1).
  std::optional<double> theta_fixed;
  /// Multiplies theta after the marginal draw (observational-equivalence
  /// construction); 1 for the base structure.
  double theta_scale = 1.0;

  /// Throws InvalidArgument on violated invariants, including a menu that is
  /// not revealed-preference ordered at z_lo or z_hi.
  void validate() const;
};

struct InsureeRecord {
  long id = 0;
  double z = 0.0;
  int chi = 1;
  /// Reported accident count; equals damages.size().
  long j = 0;
  std::vector<double> damages;
  std::optional<TypePair> truth;

  friend bool operator==(const InsureeRecord&, const InsureeRecord&) = default;
};

/// Beta(alpha, beta) quantile.
double beta_quantile(double alpha, double beta, double u);
/// Beta(alpha, beta) cdf.
double beta_cdf(double alpha, double beta, double x);

/// Types of the records simulate_dataset would produce (same substreams).
std::vector<TypePair> sample_types(const DgpConfig& cfg);

std::vector<InsureeRecord> simulate_dataset(const DgpConfig& cfg);

/// Keeps only damages strictly above the deductible of the chosen contract.
std::vector<InsureeRecord> apply_truncation(const std::vector<InsureeRecord>& records,
                                            const MenuRule& rule);

/// Reads the DGP keys (n, theta_alpha, ..., menu.t1_slope, seed, ...) from a
/// config. `seed` is required.
DgpConfig dgp_config_from(const KeyValueConfig& cfg);

/// One `key = value` line per field, parseable by dgp_config_from.
std::string describe(const DgpConfig& cfg);

}  // namespace inslab
