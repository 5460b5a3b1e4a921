#pragma once

#include <optional>
#include <span>
#include <vector>

#include "inslab/dgp_sim/dgp.hpp"
#include "inslab/model_core/damage.hpp"
#include "inslab/np_estim/kernel.hpp"
#include "inslab/np_estim/legendre.hpp"
#include "inslab/np_estim/moments.hpp"

namespace inslab {

/// Empirical damage law pooled across the instrument.
DamageDist estimate_damage_cdf(std::span<const double> damages);
std::vector<double> pooled_damages(const std::vector<InsureeRecord>& records);

/// Plug-in frontier between the two coverages offered at z.
double estimate_frontier(double a, double z, const MenuRule& rule, const DamageDist& H_hat);
/// d/da of estimate_frontier.
double estimate_frontier_da(double a, double z, const MenuRule& rule, const DamageDist& H_hat);

/// Column view of a dataset for the kernel estimators: all instruments with
/// the coverage-1 indicator, and the coverage-1 subsample's instruments with
/// falling factorials of J for m = 1..M.
class ChoiceData {
 public:
  ChoiceData(const std::vector<InsureeRecord>& records, int M);

  std::span<const double> z() const { return z_; }
  const std::vector<double>& chi1() const { return chi1_; }
  std::span<const double> z1() const { return z1_; }
  const std::vector<std::vector<double>>& ff1() const { return ff1_; }
  int order() const { return static_cast<int>(ff1_.size()); }
  double z_min() const { return z_min_; }
  double z_max() const { return z_max_; }

 private:
  std::vector<double> z_;
  std::vector<double> chi1_;
  std::vector<double> z1_;
  std::vector<std::vector<double>> ff1_;
  double z_min_ = 0.0;
  double z_max_ = 0.0;
};

/// Kernel estimate of Pr[chi = 1 | z0].
KernelEstimate estimate_nu1(const ChoiceData& data, double z0, const KernelSpec& spec);

/// Kernel-regressed factorial moments of J at z0 within the coverage-1
/// subsample. InsufficientData when the subsample is empty or its effective
/// local size is below 50.
MomentSet conditional_factorial_moments(const ChoiceData& data, double z0,
                                        const KernelSpec& spec);
MomentSet conditional_factorial_moments(const std::vector<InsureeRecord>& records, double z0,
                                        int M, const KernelSpec& spec);

namespace step2_flags {
inline constexpr unsigned kEndpointZeroDropped = 1u;  // g(theta_hi) = 0 not imposed
inline constexpr unsigned kContinuityDropped = 2u;    // continuity at theta_lo not imposed
inline constexpr unsigned kEnvelopeDropped = 4u;      // upper envelope not imposed
inline constexpr unsigned kNoUpperMass = 8u;          // no coverage-1 mass above theta_lo
inline constexpr unsigned kExtrapolated = 16u;        // z0 clamped to the data range
}  // namespace step2_flags

struct Step2Options {
  double a_bar = 1e-3;
  int grid_size = 201;
  MomentWeighting weighting = MomentWeighting::kDiagonal;
};

/// Conditional density of theta among coverage-1 choosers at z0 and the
/// implied choice probability.
struct Step2Fit {
  double z0 = 0.0;
  double nu1 = 0.0;
  double theta_lo = 0.0;  // frontier at a_bar
  double theta_hi = 0.0;  // min(frontier at 0, 1)
  double upper_mass = 0.0;
  LegendreDensity f_theta;
  std::optional<LegendreDensity> g;
  unsigned flags = 0;
  double objective = 0.0;
  double kkt_residual = 0.0;

  double conditional_density(double theta) const;
  /// Pr[chi = 1 | theta, z0]: 1 below theta_lo, 0 above theta_hi, the
  /// density ratio clipped into [0,1] in between.
  double choice_prob(double theta) const;
  /// True when the unclipped ratio leaves [0,1] on the segment grid.
  bool clipped() const;
};

/// Fits the segment [theta_lo, theta_hi] given the Step-1 density, nu1 and
/// the coverage-1 conditional moments at z0.
Step2Fit fit_step2(double z0, double theta_lo, double theta_hi, double nu1,
                   const LegendreDensity& f_theta, const MomentSet& cond,
                   const Step2Options& opts = {});

/// Full Step 2 at z0: frontier endpoints from H_hat, local moments by kernel
/// regression. DegenerateRegion when theta_lo >= theta_hi.
Step2Fit estimate_step2_density(const ChoiceData& data, double z0, const MenuRule& rule,
                                const DamageDist& H_hat, const LegendreDensity& f_theta,
                                double nu1, const KernelSpec& spec,
                                const Step2Options& opts = {});

}  // namespace inslab
