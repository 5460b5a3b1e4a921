#include <algorithm>
#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "frozen.hpp"
#include "inslab/common/error.hpp"
#include "inslab/common/format.hpp"
#include "inslab/common/rng.hpp"
#include "inslab/common/sampling.hpp"
#include "inslab/dgp_sim/dgp.hpp"
#include "inslab/model_core/quadrature.hpp"
#include "inslab/np_estim/density_io.hpp"
#include "inslab/np_estim/kernel.hpp"
#include "inslab/np_estim/legendre.hpp"
#include "inslab/np_estim/moments.hpp"
#include "inslab/np_estim/qp.hpp"
#include "inslab/np_estim/step2.hpp"
#include "inslab/oracle/oracle.hpp"
#include "test_stats.hpp"

using namespace inslab;

namespace {

double beta23(double t) { return 12.0 * t * (1 - t) * (1 - t); }

DgpConfig design(long n, std::uint64_t seed) {
  DgpConfig c;
  c.n = n;
  c.seed = seed;
  return c;
}

const std::vector<InsureeRecord>& base_sample() {
  static const auto records = simulate_dataset(design(100000, 31));
  return records;
}

std::vector<long> counts(const std::vector<InsureeRecord>& recs) {
  std::vector<long> js;
  for (const auto& r : recs) js.push_back(r.j);
  return js;
}

std::vector<long> poisson_sample(double theta, long n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<long> js(static_cast<std::size_t>(n));
  for (auto& j : js) j = poisson_inverse(theta, rng.uniform());
  return js;
}

MomentSet exact_beta_moments() {
  MomentSet ms;
  ms.values.assign(std::begin(frozen::kBetaMoments), std::end(frozen::kBetaMoments));
  ms.variances.assign(4, 1e-4);
  ms.n = 1e5;
  return ms;
}

}  // namespace

TEST(FactorialMoments, FallingFactorial) {
  EXPECT_EQ(falling_factorial(5, 3), 60.0);
  EXPECT_EQ(falling_factorial(2, 3), 0.0);
  EXPECT_EQ(falling_factorial(7, 0), 1.0);
}

TEST(FactorialMoments, AllZeroCounts) {
  const std::vector<long> js(1000, 0);
  const auto ms = factorial_moments(js, 4);
  for (double v : ms.values) EXPECT_EQ(v, 0.0);
  for (double v : ms.variances) EXPECT_GT(v, 0.0);
}

TEST(FactorialMoments, VarianceFormulaByHand) {
  const std::vector<long> js{0, 1, 2, 3};
  const auto ms = factorial_moments(js, 2);
  EXPECT_DOUBLE_EQ(ms.values[0], 1.5);
  EXPECT_DOUBLE_EQ(ms.values[1], 2.0);  // (0 + 0 + 2 + 6) / 4
  EXPECT_DOUBLE_EQ(ms.variances[0], 14.0 / 16.0 - 2.25 / 4.0);
  EXPECT_DOUBLE_EQ(ms.variances[1], 40.0 / 16.0 - 4.0 / 4.0);
  ASSERT_EQ(ms.covariance.size(), 4u);
  EXPECT_DOUBLE_EQ(ms.covariance[1], ms.covariance[2]);
  EXPECT_DOUBLE_EQ(ms.covariance[1], (0 + 0 + 4 + 18) / 16.0 - 3.0 / 4.0);
}

TEST(FactorialMoments, PoissonFactorialMomentsArePowers) {
  const auto ms = factorial_moments(poisson_sample(0.5, 1000000, 17), 3);
  EXPECT_NEAR(ms.values[0], 0.5, 0.002);
  EXPECT_NEAR(ms.values[1], 0.25, 0.002);
  EXPECT_NEAR(ms.values[2], 0.125, 0.002);
}

TEST(FactorialMoments, BetaMixtureMoments) {
  const auto ms = factorial_moments(counts(base_sample()), 4);
  for (int m = 0; m < 4; ++m) {
    EXPECT_NEAR(ms.values[m], frozen::kBetaMoments[m], 4.0 * std::sqrt(ms.variances[m]));
  }
}

TEST(FactorialMoments, MomentOrderRule) {
  EXPECT_EQ(moment_order_rule(100000), 4);
  EXPECT_EQ(moment_order_rule(1000), 3);
  EXPECT_EQ(moment_order_rule(20), 2);
  EXPECT_EQ(moment_order_rule(20000), 4);
  EXPECT_THROW(moment_order_rule(15), InvalidArgument);
}

TEST(MgfIdentity, MixtureCase) {
  const auto js = counts(base_sample());
  for (double u : {-0.5, 0.2, 1.0}) {
    std::vector<double> v;
    v.reserve(js.size());
    for (long j : js) v.push_back(std::pow(1.0 + u, static_cast<double>(j)));
    const double mgf =
        gauss_legendre([&](double t) { return std::exp(t * u) * beta23(t); }, 0.0, 1.0);
    EXPECT_NEAR(test::mean_of(v), mgf, 4.0 * test::se_of(v)) << "u=" << u;
  }
}

TEST(MgfIdentity, DegenerateCase) {
  const auto js = poisson_sample(0.7, 200000, 23);
  for (double u : {-0.5, 0.2, 1.0}) {
    std::vector<double> v;
    for (long j : js) v.push_back(std::pow(1.0 + u, static_cast<double>(j)));
    EXPECT_NEAR(test::mean_of(v), std::exp(0.7 * u), 4.0 * test::se_of(v)) << "u=" << u;
  }
}

TEST(Legendre, Values) {
  for (double x : {0.0, 0.3, 1.0}) EXPECT_EQ(shifted_legendre(0, x), 1.0);
  EXPECT_NEAR(shifted_legendre(1, 0.5), 0.0, 1e-15);
  EXPECT_NEAR(shifted_legendre(1, 1.0), std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(shifted_legendre(2, 0.0), std::sqrt(5.0), 1e-14);
  EXPECT_THROW(shifted_legendre(1, 1.1), InvalidArgument);
  EXPECT_THROW(shifted_legendre(-1, 0.5), InvalidArgument);
}

TEST(Legendre, Orthonormal) {
  const int n = 10000;
  for (int m = 0; m <= 5; ++m) {
    for (int k = 0; k <= 5; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) / n;
        s += shifted_legendre(m, x) * shifted_legendre(k, x);
      }
      EXPECT_NEAR(s / n, m == k ? 1.0 : 0.0, 1e-6) << m << "," << k;
    }
  }
  const double l22 =
      adaptive_simpson([](double x) { return std::pow(shifted_legendre(2, x), 2); }, 0, 1, 1e-12)
          .value;
  EXPECT_NEAR(l22, 1.0, 1e-8);
}

TEST(Legendre, DensityIntegratesToOne) {
  const LegendreDensity f(0.2, 0.7, {0.3, -0.2, 0.1});
  EXPECT_NEAR(gauss_legendre([&](double t) { return f(t); }, 0.2, 0.7), 1.0, 1e-13);
  EXPECT_NEAR(f.cdf(0.7), 1.0, 1e-13);
  EXPECT_EQ(f(0.1), 0.0);
  EXPECT_NEAR(f.moment(2), gauss_legendre([&](double t) { return t * t * f(t); }, 0.2, 0.7),
              1e-13);
  EXPECT_EQ(f.grid().size(), 201u);
}

TEST(Qp, UnconstrainedAndActive) {
  QpProblem p;
  p.G = Eigen::Matrix2d::Identity();
  p.g = Eigen::Vector2d(-1.0, -2.0);
  p.A_eq.resize(0, 2);
  p.b_eq.resize(0);
  p.A_in.resize(0, 2);
  p.b_in.resize(0);
  auto r = solve_qp(p);
  ASSERT_EQ(r.status, QpStatus::kOptimal);
  EXPECT_NEAR(r.x(0), 1.0, 1e-12);
  EXPECT_NEAR(r.x(1), 2.0, 1e-12);

  // x0 + x1 <= 1.5 binds: solution (0.25, 1.25).
  p.A_in = Eigen::RowVector2d(-1.0, -1.0);
  p.b_in = Eigen::VectorXd::Constant(1, -1.5);
  r = solve_qp(p);
  ASSERT_EQ(r.status, QpStatus::kOptimal);
  EXPECT_NEAR(r.x(0), 0.25, 1e-12);
  EXPECT_NEAR(r.x(1), 1.25, 1e-12);
  EXPECT_EQ(r.active, std::vector<int>{0});
  EXPECT_LE(r.kkt_residual, 1e-10);

  p.A_eq = Eigen::RowVector2d(1.0, 0.0);
  p.b_eq = Eigen::VectorXd::Constant(1, 1.0);
  r = solve_qp(p);
  EXPECT_NEAR(r.x(0), 1.0, 1e-12);
  EXPECT_NEAR(r.x(1), 0.5, 1e-12);
}

TEST(Qp, InfeasibleAndIndefinite) {
  QpProblem p;
  p.G = Eigen::Matrix2d::Identity();
  p.g = Eigen::Vector2d::Zero();
  p.A_eq.resize(0, 2);
  p.b_eq.resize(0);
  p.A_in.resize(2, 2);
  p.A_in << 1, 0, -1, 0;
  p.b_in = Eigen::Vector2d(1.0, 0.0);  // x0 >= 1 and x0 <= 0
  EXPECT_EQ(solve_qp(p).status, QpStatus::kInfeasible);
  p.G(1, 1) = -1.0;
  p.A_in.resize(0, 2);
  p.b_in.resize(0);
  EXPECT_THROW(solve_qp(p), NumericFailure);
}

TEST(Demix, ExactBetaMomentsRecoverProjection) {
  const auto r = demix_poisson(exact_beta_moments());
  for (int m = 0; m < 4; ++m) {
    EXPECT_NEAR(r.density.coeffs()[m], frozen::kBetaLegendre[m], 1e-8) << m;
  }
  EXPECT_NEAR(r.density.coeffs()[0], std::sqrt(3.0) * (2 * 0.4 - 1), 1e-8);
  EXPECT_EQ(r.active_constraints, 0);
}

TEST(Demix, ZeroCountsStayNonnegative) {
  const std::vector<long> js(5000, 0);
  const auto r = demix_poisson(factorial_moments(js, 4));
  EXPECT_GE(r.density.min_on_grid(), -1e-12);
  EXPECT_LE(r.objective, r.objective_at_zero);
  EXPECT_LT(r.density.moment(1), 0.2);
  EXPECT_GT(r.active_constraints, 0);
}

TEST(Demix, FullWeightingAlsoRecoversProjection) {
  auto ms = exact_beta_moments();
  ms.covariance.assign(16, 0.0);
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) ms.covariance[i * 4 + k] = i == k ? 1e-4 : 5e-5;
  }
  const auto r = demix_poisson(ms, 0, 1, 201, MomentWeighting::kFull);
  for (int m = 0; m < 4; ++m) EXPECT_NEAR(r.density.coeffs()[m], frozen::kBetaLegendre[m], 1e-8);
  EXPECT_EQ(parse_weighting("full"), MomentWeighting::kFull);
  EXPECT_THROW(parse_weighting("bogus"), InvalidArgument);
}

// Single-sample IAE at n=1e5 averages about 0.10 over seeds; the bound here
// is a sanity check, the band criteria live in the acceptance binary.
TEST(Demix, SimulatedDesignIae) {
  const auto r = demix_poisson(factorial_moments(counts(base_sample()), 4));
  EXPECT_GE(r.density.min_on_grid(), -1e-12);
  EXPECT_LE(r.objective, r.objective_at_zero);
  EXPECT_LE(r.kkt_residual, 1e-10);
  const auto grid = uniform_grid(0.0, 1.0, 201);
  std::vector<double> est, truth;
  for (double t : grid) {
    est.push_back(r.density(t));
    truth.push_back(beta23(t));
  }
  EXPECT_LE(test::iae(grid, est, truth), 0.2);
}

TEST(Kernel, ConstantAndLinear) {
  Rng rng(41);
  std::vector<double> xs, ys, c;
  for (int i = 0; i < 100000; ++i) {
    xs.push_back(100 + 100 * rng.uniform());
    ys.push_back(xs.back());
    c.push_back(3.5);
  }
  EXPECT_NEAR(kernel_regress(xs, c, 150.0).value, 3.5, 1e-12);
  EXPECT_NEAR(kernel_regress(xs, c, 101.0).value, 3.5, 1e-12);
  EXPECT_NEAR(kernel_regress(xs, ys, 150.0).value, 150.0, 0.5);
  const auto out = kernel_regress(xs, ys, 250.0);
  EXPECT_TRUE(out.extrapolated);
  EXPECT_LE(out.evaluated_at, 200.0);
  EXPECT_GT(out.bandwidth, 0.0);
}

TEST(Kernel, BandwidthScaling) {
  auto standardized = [](int n) {
    Rng rng(n);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform();
    const double m = test::mean_of(v);
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    const double sd = std::sqrt(ss / (n - 1.0));
    for (auto& x : v) x = (x - m) / sd;
    return v;
  };
  const double h1 = silverman_bandwidth(standardized(5000));
  const double h2 = silverman_bandwidth(standardized(10000));
  EXPECT_NEAR(h2 / h1, std::pow(2.0, -0.2), 1e-12);
  EXPECT_THROW(silverman_bandwidth(std::vector<double>{1.0}), InvalidArgument);
}

TEST(Kernel, CrossCovarianceMatchesDiagonal) {
  Rng rng(3);
  std::vector<double> xs;
  std::vector<std::vector<double>> cols(2);
  for (int i = 0; i < 2000; ++i) {
    xs.push_back(rng.uniform());
    cols[0].push_back(rng.uniform());
    cols[1].push_back(cols[0].back() + rng.uniform());
  }
  const auto km = kernel_regress_moments(xs, cols, 0.5);
  EXPECT_DOUBLE_EQ(km.covariance[0], km.estimates[0].variance);
  EXPECT_DOUBLE_EQ(km.covariance[3], km.estimates[1].variance);
  EXPECT_GT(km.covariance[1], 0.0);
  EXPECT_EQ(km.covariance[1], km.covariance[2]);
}

TEST(Nu1, KernelMatchesOracleAt150) {
  const ChoiceData data(base_sample(), 4);
  EXPECT_NEAR(estimate_nu1(data, 150.0, {}).value, frozen::kNu1z150, 0.02);
}

TEST(DamageCdf, Examples) {
  const std::vector<double> one{250.0};
  const auto h = estimate_damage_cdf(one);
  EXPECT_EQ(h.cdf(249.999), 0.0);
  EXPECT_EQ(h.cdf(250.0), 1.0);

  const auto ex = DamageDist::exponential(5000.0);
  const auto un = DamageDist::uniform(0.0, 1e4);
  Rng rng(8);
  std::vector<double> de, du;
  for (int i = 0; i < 100000; ++i) {
    de.push_back(ex.quantile(rng.uniform()));
    du.push_back(un.quantile(rng.uniform()));
  }
  const auto he = estimate_damage_cdf(de);
  double sup = 0.0;
  for (double d : he.sample()) sup = std::max(sup, std::abs(he.cdf(d) - ex.cdf(d)));
  EXPECT_LT(sup, 1.63 / std::sqrt(1e5));
  EXPECT_NEAR(estimate_damage_cdf(du).cdf(5000.0), 0.5, 0.005);
}

TEST(EstimatedFrontier, PlugInAndLimits) {
  const auto un = DamageDist::uniform(0.0, 1e4);
  Rng rng(9);
  std::vector<double> d;
  for (int i = 0; i < 100000; ++i) d.push_back(un.quantile(rng.uniform()));
  const auto h = estimate_damage_cdf(d);
  MenuRule fig1;
  fig1.t1_intercept = 600.0;
  fig1.t1_slope = 0.0;
  fig1.t2_intercept = 850.0;
  EXPECT_NEAR(estimate_frontier(5e-4, 150.0, fig1, h), frozen::kFrontier, 0.01);
  EXPECT_NEAR(estimate_frontier(0.0, 150.0, fig1, h),
              250.0 / h.survival_exp_integral(0.0, 500.0, 1000.0), 1e-12);

  const std::vector<double> high{2000.0};
  const auto h1 = estimate_damage_cdf(high);
  const double a = 4e-4;
  EXPECT_NEAR(estimate_frontier(a, 150.0, fig1, h1),
              250.0 / ((std::exp(a * 1000) - std::exp(a * 500)) / a), 1e-10);
  const double fd = (estimate_frontier(a + 1e-8, 150, fig1, h) -
                     estimate_frontier(a - 1e-8, 150, fig1, h)) / 2e-8;
  EXPECT_NEAR(estimate_frontier_da(a, 150, fig1, h), fd, 1e-5 * std::abs(fd));
}

TEST(ConditionalMoments, MeanMatchesOracle) {
  const auto ms = conditional_factorial_moments(base_sample(), 150.0, 4, {});
  EXPECT_NEAR(ms.values[0], frozen::kCondMeanz150, 3.0 * std::sqrt(ms.variances[0]));
  ASSERT_EQ(ms.covariance.size(), 16u);
}

TEST(ConditionalMoments, DegenerateTheta) {
  auto c = design(100000, 32);
  c.theta_fixed = 0.3;
  const auto ms = conditional_factorial_moments(simulate_dataset(c), 150.0, 3, {});
  for (int m = 0; m < 3; ++m) {
    EXPECT_NEAR(ms.values[m], std::pow(0.3, m + 1), 4.0 * std::sqrt(ms.variances[m])) << m;
  }
}

TEST(ConditionalMoments, TooFewChoosersIsInsufficient) {
  auto recs = simulate_dataset(design(200, 33));
  for (auto& r : recs) r.chi = 2;
  recs[0].chi = 1;
  EXPECT_THROW(conditional_factorial_moments(recs, 150.0, 2, {}), InsufficientData);
}

class Step2Design : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto& recs = base_sample();
    data_ = new ChoiceData(recs, 4);
    h_ = new DamageDist(estimate_damage_cdf(pooled_damages(recs)));
    f_theta_ = new LegendreDensity(demix_poisson(factorial_moments(counts(recs), 4)).density);
    const double nu1 = estimate_nu1(*data_, 150.0, {}).value;
    fit_ = new Step2Fit(
        estimate_step2_density(*data_, 150.0, MenuRule{}, *h_, *f_theta_, nu1, {}));
  }
  static void TearDownTestSuite() {
    delete fit_;
    delete f_theta_;
    delete h_;
    delete data_;
  }
  static ChoiceData* data_;
  static DamageDist* h_;
  static LegendreDensity* f_theta_;
  static Step2Fit* fit_;
};
ChoiceData* Step2Design::data_ = nullptr;
DamageDist* Step2Design::h_ = nullptr;
LegendreDensity* Step2Design::f_theta_ = nullptr;
Step2Fit* Step2Design::fit_ = nullptr;

TEST_F(Step2Design, ExactOutsideSegment) {
  EXPECT_EQ(fit_->choice_prob(0.5 * fit_->theta_lo), 1.0);
  EXPECT_EQ(fit_->choice_prob(fit_->theta_lo), 1.0);
  EXPECT_EQ(fit_->choice_prob(std::min(1.0, fit_->theta_hi + 0.01)), 0.0);
}

TEST_F(Step2Design, Envelope) {
  ASSERT_TRUE(fit_->g.has_value());
  EXPECT_FALSE(fit_->flags & step2_flags::kEnvelopeDropped);
  for (double t : fit_->g->grid()) {
    EXPECT_LE(fit_->conditional_density(t) * fit_->nu1, (*f_theta_)(t) + 1e-9) << t;
  }
  for (double t : uniform_grid(0.0, fit_->theta_lo, 50)) {
    EXPECT_NEAR(fit_->conditional_density(t) * fit_->nu1, (*f_theta_)(t), 1e-12);
  }
}

TEST_F(Step2Design, Continuity) {
  if (fit_->flags & step2_flags::kContinuityDropped) GTEST_SKIP();
  const double left = fit_->conditional_density(fit_->theta_lo);
  const double right = fit_->conditional_density(std::nextafter(fit_->theta_lo, 1.0));
  EXPECT_NEAR(left, right, 1e-6 * std::abs(left));
}

TEST_F(Step2Design, ChoiceProbabilityNearOracle) {
  const DgpConfig dgp = design(1, 0);
  std::vector<double> err;
  for (double t : uniform_grid(fit_->theta_lo, fit_->theta_hi, 41)) {
    err.push_back(std::abs(fit_->choice_prob(t) - oracle::true_choice_prob(t, 150.0, dgp)));
  }
  std::nth_element(err.begin(), err.begin() + err.size() / 2, err.end());
  EXPECT_LE(err[err.size() / 2], 0.1);
  EXPECT_NEAR(oracle::true_choice_prob(0.4, 150.0, dgp), frozen::kChoiceProb04z150, 1e-9);
}

TEST_F(Step2Design, DegenerateRegion) {
  Step2Options opts;
  opts.a_bar = 1e-3;
  EXPECT_THROW(fit_step2(150.0, 0.5, 0.5, 0.5, *f_theta_,
                         conditional_factorial_moments(*data_, 150.0, {}), opts),
               DegenerateRegion);
}

TEST(DensityIo, RoundTrip) {
  const LegendreDensity f(0.1, 0.9, {0.25, -0.5, 1.0 / 3.0}, 151);
  const auto path = std::filesystem::temp_directory_path() / "inslab_density.csv";
  write_density_csv(f, path.string());
  const auto g = read_density_csv(path.string());
  EXPECT_EQ(g.lo(), f.lo());
  EXPECT_EQ(g.hi(), f.hi());
  EXPECT_EQ(g.coeffs(), f.coeffs());
  EXPECT_EQ(g.grid_size(), f.grid_size());
}
