#include <cmath>
#include <functional>
#include <set>

#include <gtest/gtest.h>

#include "frozen.hpp"
#include "inslab/common/error.hpp"
#include "inslab/dgp_sim/dgp.hpp"
#include "inslab/model_core/contracts.hpp"
#include "inslab/oracle/oracle.hpp"

using namespace inslab;
namespace o = inslab::oracle;

namespace {

DgpConfig base() { return DgpConfig{}; }

// The conditional density of a rises steeply off a = 0, so the range is
// split geometrically toward zero before Simpson.
double integrate_a(const std::function<double(double)>& f, double tol) {
  double s = 0.0, lo = 0.0;
  for (double hi : {1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 5e-4, 9e-4, 1e-3}) {
    s += o::quad_simpson(f, lo, hi, tol).value;
    lo = hi;
  }
  return s;
}

}  // namespace

TEST(QuadSimpson, Examples) {
  const auto lin = o::quad_simpson([](double x) { return x; }, 0, 1, 1e-13);
  EXPECT_NEAR(lin.value, 0.5, 1e-12);
  EXPECT_GT(lin.error, 0.0);
  const auto i1 =
      o::quad_simpson([](double d) { return std::exp(5e-4 * d) * (1 - d / 1e4); }, 500, 1000, 1e-9);
  EXPECT_NEAR(i1.value, 673.9, 0.1);
  EXPECT_NEAR(i1.value, frozen::kIntFrontier, 1e-7);
  const auto i2 =
      o::quad_simpson([](double d) { return std::exp(1e-4 * d) * (1 - d / 1e4); }, 0, 1000, 1e-9);
  EXPECT_NEAR(i2.value, 998.25, 0.1);
  EXPECT_NEAR(i2.value, frozen::kIntPhi, 1e-7);
  EXPECT_THROW(o::quad_simpson([](double) { return std::nan(""); }, 0, 1, 1e-8), NumericFailure);
}

TEST(QuadSimpson, MatchesExponentialClosedForm) {
  for (double a : {0.0, 1e-4, 2e-4, 5e-4, 1e-3}) {
    for (int p : {0, 1}) {
      const double closed = o::exponential_survival_integral(5000, a, 500, 1000, p);
      const double quad =
          o::quad_simpson([&](double d) { return std::pow(d, p) * std::exp(a * d - d / 5000); },
                          500, 1000, 1e-10 * closed)
              .value;
      EXPECT_NEAR(quad, closed, 1e-8 * closed) << a << " " << p;
    }
  }
}

TEST(Frontier, OracleAgreesWithModelCore) {
  const auto un = DamageDist::uniform(0, 1e4);
  const auto ex = DamageDist::exponential(5000);
  EXPECT_NEAR(o::frontier(un, {600, 1000}, {850, 500}, 5e-4), frozen::kFrontier, 1e-10);
  EXPECT_NEAR(o::frontier(un, {0, 1e4}, {618.5, 1000}, 1e-4), frozen::kExclusionTheta, 1e-10);
  EXPECT_NEAR(o::frontier(un, {0, 1e4}, {frozen::kExclusionPremium, 1000}, 1e-4), 0.1, 1e-12);
  for (double a : {0.0, 3e-4, 8e-4}) {
    EXPECT_NEAR(o::frontier(ex, {325, 1000}, {700, 500}, a),
                frontier_theta(a, {325, 1000}, {700, 500}, ex), 1e-10);
  }
  const auto a06 = o::frontier_inverse(ex, {325, 1000}, {700, 500}, 0.6, 1e-3);
  ASSERT_TRUE(a06.has_value());
  EXPECT_NEAR(*a06, frozen::kFrontierA06, 1e-11);
  EXPECT_FALSE(o::frontier_inverse(un, {600, 1000}, {850, 500}, 2.0, 1e-3).has_value());
}

TEST(Marginals, ThetaAndZeroProbability) {
  const auto d = base();
  EXPECT_NEAR(o::theta_cdf(d, 1.0), 1.0, 1e-14);
  const double mass = o::quad_simpson([&](double t) { return o::theta_density(d, t); }, 0, 1, 1e-12).value;
  EXPECT_NEAR(mass, 1.0, 1e-10);
  EXPECT_NEAR(o::zero_accident_probability(d), frozen::kZeroAccidentProb, 1e-12);
  EXPECT_NEAR(o::copula_spearman(-0.5), frozen::kSpearman, 1e-15);
}

TEST(ConditionalDensity, IndependenceIsMarginal) {
  auto d = base();
  d.copula_rho = 0.0;
  EXPECT_NEAR(o::true_conditional_density(0.4, 0.0, d), 3000.0, 1e-9);
  EXPECT_NEAR(o::true_conditional_density(0.7, 5e-4, d), 3000.0 * 0.25, 1e-9);
}

TEST(ConditionalDensity, IntegratesToOne) {
  const auto d = base();
  for (double t : {0.2, 0.4, 0.6}) {
    const double m =
        integrate_a([&](double a) { return o::true_conditional_density(t, a, d); }, 1e-11);
    EXPECT_NEAR(m, 1.0, 1e-8) << t;
    EXPECT_NEAR(o::true_conditional_cdf(t, 1e-3, d), 1.0, 1e-12);
    EXPECT_EQ(o::true_conditional_cdf(t, 0.0, d), 0.0);
  }
}

TEST(ConditionalDensity, NegativeDependenceLowersMeanA) {
  const auto d = base();
  const double mean = o::quad_simpson(
                          [&](double a) { return a * o::true_conditional_density(0.4, a, d); }, 0,
                          1e-3, 1e-15)
                          .value;
  EXPECT_NEAR(mean, frozen::kMeanAGiven04, 1e-10);
  EXPECT_LT(mean, 0.25e-3);
}

TEST(ChoiceProb, ExactOutsideBandAndRoutesAgree) {
  const auto d = base();
  const double lo = o::frontier(d.damage, d.menu.lower(150), d.menu.upper(150), 1e-3);
  const double hi = o::frontier(d.damage, d.menu.lower(150), d.menu.upper(150), 0.0);
  EXPECT_EQ(o::true_choice_prob(0.9 * lo, 150, d), 1.0);
  EXPECT_EQ(o::true_choice_prob(std::min(1.0, 1.05 * hi), 150, d), 0.0);
  EXPECT_NEAR(o::true_choice_prob(0.4, 150, d), frozen::kChoiceProb04z150, 1e-9);
  const auto sim = o::brute_choice_prob(0.4, 150, d, 1000000, 17);
  EXPECT_EQ(sim.method, "simulation");
  EXPECT_EQ(sim.n, 1000000);
  EXPECT_NEAR(sim.value, o::true_choice_prob(0.4, 150, d), 4.0 / std::sqrt(1e6));
}

TEST(ChoiceShare, QuadratureAndSimulationAgree) {
  const auto d = base();
  EXPECT_NEAR(o::true_nu1(150, d), frozen::kNu1z150, 1e-9);
  EXPECT_NEAR(o::true_conditional_theta_moment(1, 150, d), frozen::kCondMeanz150, 1e-9);
  const auto sim = o::brute_nu1(d, 1000000, 23);
  EXPECT_GT(sim.error, 0.0);
  EXPECT_NEAR(sim.value, frozen::kNu1, 4.0 * sim.error);
}

TEST(IdentifiedRange, Readings) {
  auto d = base();
  const auto r04 = o::identified_range(0.4, d);
  EXPECT_EQ(r04.lo, 0.0);
  EXPECT_EQ(r04.hi, 1e-3);
  EXPECT_NEAR(o::identified_range(0.6, d).hi, frozen::kRangeHi06, 1e-9);
  d.z_lo = 110;
  d.z_hi = 190;
  EXPECT_NEAR(o::identified_range(0.6, d).hi, frozen::kRangeHi06Inner, 1e-9);
}

TEST(Reports, EveryValueCarriesAnError) {
  const auto reps = o::standard_reports(base(), 1000000, 5);
  ASSERT_FALSE(reps.empty());
  std::set<std::string> names;
  for (const auto& r : reps) {
    EXPECT_GT(r.error, 0.0) << r.quantity;
    EXPECT_TRUE(std::isfinite(r.value)) << r.quantity;
    EXPECT_TRUE(names.insert(r.quantity).second) << r.quantity;
    EXPECT_TRUE(r.method == "quadrature" || r.method == "closed-form" || r.method == "simulation");
  }
}
