#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "inslab/model_core/damage.hpp"

namespace inslab {

/// Premium-deductible contract [t, dd]; dd is paid per accident.
struct Coverage {
  double premium = 0.0;
  double deductible = 0.0;

  friend bool operator==(const Coverage&, const Coverage&) = default;
};

/// Ordered choice set. Coverage index c is 1-based in the public API.
struct ContractMenu {
  std::vector<Coverage> coverages;
  double damage_upper_bound = 0.0;  // d_bar

  std::size_t size() const { return coverages.size(); }
  const Coverage& at(std::size_t c) const { return coverages.at(c - 1); }
  /// 0 < t_1 < ... < t_C and d_bar > dd_1 > ... > dd_C >= 0.
  bool satisfies_revealed_preference() const;
};

/// Private type: expected accident count theta and CARA coefficient a.
struct TypePair {
  double theta = 0.0;
  double a = 0.0;
  friend bool operator==(const TypePair&, const TypePair&) = default;
};

/// phi_a(dd) = E[e^{a min(dd, D)}] = 1 + a int_0^dd e^{aD}[1-H(D)] dD.
double phi(double a, double dd, const DamageDist& H);

/// CE(t, dd; theta, a, w) = w - t - theta int_0^dd e^{aD}[1-H(D)] dD.
/// Uses the integral form so a -> 0 stays regular.
double certainty_equivalent(const Coverage& cov, const TypePair& tp, double w,
                            const DamageDist& H);

/// Indifference frontier between a lower coverage `lo` (higher deductible)
/// and a higher coverage `hi`:
///   theta(a) = (t_hi - t_lo) / int_{dd_hi}^{dd_lo} e^{aD}[1-H(D)] dD.
/// Strictly decreasing in a. Throws InvalidMenu unless t_lo < t_hi and
/// dd_lo > dd_hi.
double frontier_theta(double a, const Coverage& lo, const Coverage& hi,
                      const DamageDist& H);

/// d theta(a) / da = -theta(a) * int D e^{aD}S / int e^{aD}S over [dd_hi, dd_lo].
double frontier_theta_da(double a, const Coverage& lo, const Coverage& hi,
                         const DamageDist& H);

/// Inverse of frontier_theta on [0, a_max] by bisection (|error| <= 1e-12).
/// Empty when theta lies above the whole frontier (theta > theta(0)) or below
/// it (theta < theta(a_max)).
std::optional<double> frontier_a(double theta, const Coverage& lo, const Coverage& hi,
                                 const DamageDist& H, double a_max);

/// Index (1-based) of the certainty-equivalent maximizing coverage. CE gaps
/// within 1e-12 relative of the premium difference count as ties and go to
/// the lower index.
std::size_t choose_contract(const TypePair& tp, const ContractMenu& menu,
                            const DamageDist& H);

/// Both sides of the frontier-ordering and convexity conditions for one
/// adjacent triple (c, c+1, c+2); c is 1-based.
struct TripleCheck {
  std::size_t c = 0;
  double premium_ratio = 0.0;      // (t_{c+2}-t_{c+1}) / (t_{c+1}-t_c)
  double integral_ratio = 0.0;     // survival-exp integral ratio at a_lower
  bool ordering_ok = false;        // premium_ratio > integral_ratio
  double slope_upper = 0.0;        // (t_{c+2}-t_{c+1}) / |dd_{c+2}-dd_{c+1}|
  double slope_lower = 0.0;        // (t_{c+1}-t_c) / |dd_{c+1}-dd_c|
  double kappa = 0.0;              // mean survival ratio of the two intervals
  bool convexity_ok = false;       // slope_upper > kappa * slope_lower, kappa > 1
};

struct MenuReport {
  bool rp_ok = false;
  bool ordering_ok = false;
  bool convexity_ok = false;
  std::vector<TripleCheck> triples;
};

/// Revealed-preference ordering, frontier non-crossing at a_lower, and the
/// a -> 0 convexity condition. Throws InvalidArgument when C < 2.
MenuReport validate_menu(const ContractMenu& menu, const DamageDist& H, double a_lower);

}  // namespace inslab
