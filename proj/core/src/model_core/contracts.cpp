#include "inslab/model_core/contracts.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "inslab/common/error.hpp"

namespace inslab {
namespace {

void check_pair(const Coverage& lo, const Coverage& hi) {
  if (!(lo.premium < hi.premium) || !(lo.deductible > hi.deductible)) {
    throw InvalidMenu("frontier requires t_lo < t_hi and dd_lo > dd_hi");
  }
}

double pair_integral(double a, const Coverage& lo, const Coverage& hi, const DamageDist& H,
                     int power) {
  const double v = H.survival_exp_integral(a, hi.deductible, lo.deductible, power);
  if (power == 0 && !(v > 0.0)) {
    throw DegenerateRegion("no damage mass between deductibles " +
                           std::to_string(hi.deductible) + " and " +
                           std::to_string(lo.deductible));
  }
  return v;
}

}  // namespace

bool ContractMenu::satisfies_revealed_preference() const {
  if (coverages.empty()) return false;
  if (!(coverages.front().premium > 0.0)) return false;
  if (!(coverages.front().deductible < damage_upper_bound)) return false;
  if (!(coverages.back().deductible >= 0.0)) return false;
  for (std::size_t i = 1; i < coverages.size(); ++i) {
    if (!(coverages[i].premium > coverages[i - 1].premium)) return false;
    if (!(coverages[i].deductible < coverages[i - 1].deductible)) return false;
  }
  return true;
}

double phi(double a, double dd, const DamageDist& H) {
  return 1.0 + a * H.survival_exp_integral(a, 0.0, dd);
}

double certainty_equivalent(const Coverage& cov, const TypePair& tp, double w,
                            const DamageDist& H) {
  return w - cov.premium - tp.theta * H.survival_exp_integral(tp.a, 0.0, cov.deductible);
}

double frontier_theta(double a, const Coverage& lo, const Coverage& hi,
                      const DamageDist& H) {
  check_pair(lo, hi);
  return (hi.premium - lo.premium) / pair_integral(a, lo, hi, H, 0);
}

double frontier_theta_da(double a, const Coverage& lo, const Coverage& hi,
                         const DamageDist& H) {
  check_pair(lo, hi);
  const double i0 = pair_integral(a, lo, hi, H, 0);
  const double i1 = pair_integral(a, lo, hi, H, 1);
  return -(hi.premium - lo.premium) / i0 * (i1 / i0);
}

std::optional<double> frontier_a(double theta, const Coverage& lo, const Coverage& hi,
                                 const DamageDist& H, double a_max) {
  if (!(a_max > 0.0)) throw InvalidArgument("frontier_a requires a_max > 0");
  const double top = frontier_theta(0.0, lo, hi, H);
  const double bottom = frontier_theta(a_max, lo, hi, H);
  if (theta > top || theta < bottom) return std::nullopt;
  double l = 0.0, r = a_max;
  while (r - l > 1e-12) {
    const double m = 0.5 * (l + r);
    if (frontier_theta(m, lo, hi, H) > theta) {
      l = m;
    } else {
      r = m;
    }
  }
  return 0.5 * (l + r);
}

std::size_t choose_contract(const TypePair& tp, const ContractMenu& menu,
                            const DamageDist& H) {
  if (menu.size() == 0) throw InvalidMenu("empty menu");
  std::size_t best = 1;
  double best_ce = certainty_equivalent(menu.at(1), tp, 0.0, H);
  for (std::size_t c = 2; c <= menu.size(); ++c) {
    const double ce = certainty_equivalent(menu.at(c), tp, 0.0, H);
    const double tol = 1e-12 * std::abs(menu.at(c).premium - menu.at(best).premium);
    if (ce - best_ce > tol) {
      best = c;
      best_ce = ce;
    }
  }
  return best;
}

MenuReport validate_menu(const ContractMenu& menu, const DamageDist& H, double a_lower) {
  if (menu.size() < 2) throw InvalidArgument("menu needs at least two coverages");
  MenuReport report;
  report.rp_ok = menu.satisfies_revealed_preference();
  if (!report.rp_ok) return report;
  report.ordering_ok = true;
  report.convexity_ok = true;
  for (std::size_t c = 1; c + 2 <= menu.size(); ++c) {
    const Coverage& k0 = menu.at(c);
    const Coverage& k1 = menu.at(c + 1);
    const Coverage& k2 = menu.at(c + 2);
    TripleCheck t;
    t.c = c;
    t.premium_ratio = (k2.premium - k1.premium) / (k1.premium - k0.premium);
    const double upper_int = H.survival_exp_integral(a_lower, k2.deductible, k1.deductible);
    const double lower_int = H.survival_exp_integral(a_lower, k1.deductible, k0.deductible);
    t.integral_ratio = upper_int / lower_int;
    t.ordering_ok = t.premium_ratio > t.integral_ratio;

    const double len_upper = k1.deductible - k2.deductible;
    const double len_lower = k0.deductible - k1.deductible;
    t.slope_upper = (k2.premium - k1.premium) / len_upper;
    t.slope_lower = (k1.premium - k0.premium) / len_lower;
    const double s_upper = H.survival_exp_integral(0.0, k2.deductible, k1.deductible) / len_upper;
    const double s_lower = H.survival_exp_integral(0.0, k1.deductible, k0.deductible) / len_lower;
    t.kappa = s_upper / s_lower;
    t.convexity_ok = t.kappa > 1.0 && t.slope_upper > t.kappa * t.slope_lower;

    report.ordering_ok = report.ordering_ok && t.ordering_ok;
    report.convexity_ok = report.convexity_ok && t.convexity_ok;
    report.triples.push_back(t);
  }
  return report;
}

}  // namespace inslab
