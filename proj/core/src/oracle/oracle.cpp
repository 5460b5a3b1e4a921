#include "inslab/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>

#include "inslab/common/error.hpp"
#include "inslab/common/format.hpp"
#include "inslab/common/rng.hpp"

namespace inslab::oracle {
namespace {

const boost::math::normal_distribution<double> kStdNormal;

double norm_cdf(double x) { return boost::math::cdf(kStdNormal, x); }
double norm_pdf(double x) { return boost::math::pdf(kStdNormal, x); }
double norm_quantile(double u) { return boost::math::quantile(kStdNormal, u); }

double beta_pdf(double al, double be, double x) {
  if (x < 0.0 || x > 1.0) return 0.0;
  return boost::math::pdf(boost::math::beta_distribution<double>(al, be), x);
}

double beta_cdf(double al, double be, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::cdf(boost::math::beta_distribution<double>(al, be), x);
}

double beta_inv(double al, double be, double u) {
  return boost::math::quantile(boost::math::beta_distribution<double>(al, be), u);
}

// Normal score of the theta margin at theta_star.
double theta_score(double theta_star, const DgpConfig& dgp) {
  const double u1 = theta_cdf(dgp, theta_star);
  return norm_quantile(std::clamp(u1, 1e-300, 1.0 - 1e-16));
}

// Antiderivative of D^p e^{kD}.
double exp_antiderivative(double k, double d, int p) {
  if (k == 0.0) return p == 0 ? d : 0.5 * d * d;
  const double e = std::exp(k * d);
  return p == 0 ? e / k : e * (d / k - 1.0 / (k * k));
}

// Own uniform-to-normal map, Box-Muller on the oracle's generator.
struct NormalSource {
  Rng rng;
  bool has_spare = false;
  double spare = 0.0;
  double next() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    const double u = rng.uniform(), v = rng.uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    spare = r * std::sin(2.0 * std::numbers::pi * v);
    has_spare = true;
    return r * std::cos(2.0 * std::numbers::pi * v);
  }
};

}  // namespace

SimpsonResult quad_simpson(const std::function<double(double)>& f, double a, double b,
                           double tol) {
  if (!(a < b) || !(tol > 0.0)) throw InvalidArgument("quad_simpson: need a < b and tol > 0");
  const double fa = f(a), fb = f(b);
  double trap_sum = 0.5 * (fa + fb);  // endpoints weight
  double mid_sum = f(0.5 * (a + b));
  long n = 2;
  double h = 0.5 * (b - a);
  double prev = (b - a) / 6.0 * (fa + 4.0 * mid_sum + fb);
  for (int level = 0;; ++level) {
    // Refine from n to 2n subdivisions.
    trap_sum += mid_sum;
    const double hh = 0.5 * h;
    double new_mid = 0.0;
    for (long i = 0; i < n; ++i) new_mid += f(a + hh * (2 * i + 1));
    mid_sum = new_mid;
    n *= 2;
    h = hh;
    const double s = h / 3.0 * (2.0 * trap_sum + 4.0 * mid_sum);
    const double err = std::abs(s - prev) / 15.0;
    if (!std::isfinite(s)) throw NumericFailure("quad_simpson: nonfinite integrand", HUGE_VAL);
    if (level >= 3 && err <= tol) return {s + (s - prev) / 15.0, std::max(err, 1e-300), n};
    if (n > 1000000) throw NumericFailure("quad_simpson: no convergence at 1e6 subdivisions", err);
    prev = s;
  }
}

double exponential_survival_integral(double mean, double a, double lo, double hi, int power) {
  const double k = a - 1.0 / mean;
  return exp_antiderivative(k, hi, power) - exp_antiderivative(k, lo, power);
}

double survival_integral(const DamageDist& H, double a, double lo, double hi, int power) {
  if (hi <= lo) return 0.0;
  if (H.kind() == DamageDist::Kind::kExponential) {
    return exponential_survival_integral(H.mean(), a, lo, hi, power);
  }
  const double top = std::min(hi, H.upper_bound());
  if (top <= lo) return 0.0;
  const auto f = [&](double d) { return std::pow(d, power) * std::exp(a * d) * H.survival(d); };
  const double scale = (top - lo) * std::max({f(lo), f(0.5 * (lo + top)), 1e-300});
  return quad_simpson(f, lo, top, 1e-12 * scale).value;
}

double frontier(const DamageDist& H, const Coverage& lo, const Coverage& hi, double a) {
  return (hi.premium - lo.premium) / survival_integral(H, a, hi.deductible, lo.deductible);
}

std::optional<double> frontier_inverse(const DamageDist& H, const Coverage& lo,
                                       const Coverage& hi, double theta, double a_max) {
  if (theta > frontier(H, lo, hi, 0.0) || theta < frontier(H, lo, hi, a_max)) return std::nullopt;
  double l = 0.0, r = a_max;
  for (int it = 0; it < 200 && r - l > 1e-15; ++it) {
    const double m = 0.5 * (l + r);
    (frontier(H, lo, hi, m) > theta ? l : r) = m;
  }
  return 0.5 * (l + r);
}

double theta_density(const DgpConfig& dgp, double theta) {
  return beta_pdf(dgp.theta_alpha, dgp.theta_beta, theta / dgp.theta_scale) / dgp.theta_scale;
}

double theta_cdf(const DgpConfig& dgp, double theta) {
  return beta_cdf(dgp.theta_alpha, dgp.theta_beta, theta / dgp.theta_scale);
}

double true_conditional_density(double theta_star, double a, const DgpConfig& dgp) {
  const double s = a / dgp.a_scale;
  if (s < 0.0 || s > 1.0) return 0.0;
  const double marginal = beta_pdf(dgp.a_alpha, dgp.a_beta, s) / dgp.a_scale;
  const double rho = dgp.copula_rho;
  if (rho == 0.0) return marginal;
  const double u2 = beta_cdf(dgp.a_alpha, dgp.a_beta, s);
  if (u2 <= 0.0 || u2 >= 1.0) return 0.0;
  const double x1 = theta_score(theta_star, dgp);
  const double x2 = norm_quantile(u2);
  const double sd = std::sqrt(1.0 - rho * rho);
  return norm_pdf((x2 - rho * x1) / sd) / (sd * norm_pdf(x2)) * marginal;
}

double true_conditional_cdf(double theta_star, double a, const DgpConfig& dgp) {
  const double s = a / dgp.a_scale;
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double u2 = beta_cdf(dgp.a_alpha, dgp.a_beta, s);
  if (dgp.copula_rho == 0.0) return u2;
  const double rho = dgp.copula_rho;
  const double x1 = theta_score(theta_star, dgp);
  return norm_cdf((norm_quantile(u2) - rho * x1) / std::sqrt(1.0 - rho * rho));
}

double true_choice_prob(double theta, double z, const DgpConfig& dgp) {
  const Coverage lo = dgp.menu.lower(z), hi = dgp.menu.upper(z);
  if (theta >= frontier(dgp.damage, lo, hi, 0.0)) return 0.0;
  if (theta <= frontier(dgp.damage, lo, hi, dgp.a_scale)) return 1.0;
  const auto a_star = frontier_inverse(dgp.damage, lo, hi, theta, dgp.a_scale);
  return true_conditional_cdf(theta, *a_star, dgp);
}

OracleReport brute_choice_prob(double theta, double z, const DgpConfig& dgp, long n_sims,
                               std::uint64_t seed) {
  const Coverage lo = dgp.menu.lower(z), hi = dgp.menu.upper(z);
  const bool closed = dgp.damage.kind() == DamageDist::Kind::kExponential;
  // Non-exponential laws: compare against the inverted frontier instead of
  // integrating per draw.
  const auto a_star = closed ? std::nullopt
                             : frontier_inverse(dgp.damage, lo, hi, theta, dgp.a_scale);
  const double top = frontier(dgp.damage, lo, hi, 0.0);
  const double x1 = theta_score(theta, dgp);
  const double rho = dgp.copula_rho;
  const double sd = std::sqrt(1.0 - rho * rho);
  NormalSource normals{Rng(seed)};
  long hits = 0;
  for (long i = 0; i < n_sims; ++i) {
    const double x2 = rho * x1 + sd * normals.next();
    const double a = dgp.a_scale * beta_inv(dgp.a_alpha, dgp.a_beta, norm_cdf(x2));
    bool chooses_1;
    if (closed) {
      chooses_1 = theta <= frontier(dgp.damage, lo, hi, a);
    } else if (a_star) {
      chooses_1 = a <= *a_star;
    } else {
      chooses_1 = theta < top;
    }
    hits += chooses_1 ? 1 : 0;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n_sims);
  const double se = std::sqrt(std::max(p * (1.0 - p), 0.25 / n_sims) / n_sims);
  return {"Pr[chi=1|theta,z]", p, "simulation", n_sims, seed, se};
}

namespace {

// Splits [0, theta_max] at the frontier band so each Simpson piece is smooth.
double integrate_over_theta(double z, const DgpConfig& dgp,
                            const std::function<double(double)>& weight) {
  const Coverage lo = dgp.menu.lower(z), hi = dgp.menu.upper(z);
  const double t_max = dgp.theta_scale;
  const double t_lo = std::min(frontier(dgp.damage, lo, hi, dgp.a_scale), t_max);
  const double t_hi = std::min(frontier(dgp.damage, lo, hi, 0.0), t_max);
  const auto g = [&](double t) { return weight(t) * theta_density(dgp, t) * true_choice_prob(t, z, dgp); };
  double total = 0.0;
  if (t_lo > 0.0) total += quad_simpson(g, 0.0, t_lo, 1e-11).value;
  if (t_hi > t_lo) total += quad_simpson(g, t_lo, t_hi, 1e-11).value;
  return total;
}

}  // namespace

double true_nu1(double z, const DgpConfig& dgp) {
  return integrate_over_theta(z, dgp, [](double) { return 1.0; });
}

double true_conditional_theta_moment(int m, double z, const DgpConfig& dgp) {
  return integrate_over_theta(z, dgp, [m](double t) { return std::pow(t, m); }) /
         true_nu1(z, dgp);
}

OracleReport brute_nu1(const DgpConfig& dgp, long n_sims, std::uint64_t seed) {
  Rng rng(seed);
  std::gamma_distribution<double> ga(dgp.theta_alpha, 1.0), gb(dgp.theta_beta, 1.0);
  NormalSource normals{Rng(splitmix64(seed))};
  const double rho = dgp.copula_rho;
  const double sd = std::sqrt(1.0 - rho * rho);
  long hits = 0;
  for (long i = 0; i < n_sims; ++i) {
    const double x = ga(rng), y = gb(rng);
    const double theta0 = x / (x + y);
    const double u1 = beta_cdf(dgp.theta_alpha, dgp.theta_beta, theta0);
    const double x1 = norm_quantile(std::clamp(u1, 1e-300, 1.0 - 1e-16));
    const double x2 = rho * x1 + sd * normals.next();
    const double a = dgp.a_scale * beta_inv(dgp.a_alpha, dgp.a_beta, norm_cdf(x2));
    const double z = dgp.z_lo + (dgp.z_hi - dgp.z_lo) * rng.uniform();
    const double theta = dgp.theta_scale * theta0;
    const Coverage lo = dgp.menu.lower(z), hi = dgp.menu.upper(z);
    hits += theta <= frontier(dgp.damage, lo, hi, a) ? 1 : 0;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n_sims);
  return {"nu1", p, "simulation", n_sims, seed,
          std::sqrt(std::max(p * (1.0 - p), 0.25 / n_sims) / n_sims)};
}

double zero_accident_probability(const DgpConfig& dgp) {
  return quad_simpson([&](double t) { return std::exp(-t) * theta_density(dgp, t); }, 0.0,
                      dgp.theta_scale, 1e-12)
      .value;
}

Range identified_range(double theta_star, const DgpConfig& dgp) {
  auto clipped = [&](double z) {
    const Coverage lo = dgp.menu.lower(z), hi = dgp.menu.upper(z);
    if (theta_star >= frontier(dgp.damage, lo, hi, 0.0)) return 0.0;
    if (theta_star <= frontier(dgp.damage, lo, hi, dgp.a_scale)) return dgp.a_scale;
    return *frontier_inverse(dgp.damage, lo, hi, theta_star, dgp.a_scale);
  };
  const double a1 = clipped(dgp.z_lo), a2 = clipped(dgp.z_hi);
  return {std::min(a1, a2), std::max(a1, a2)};
}

double copula_spearman(double rho) { return 6.0 / std::numbers::pi * std::asin(rho / 2.0); }

std::vector<OracleReport> standard_reports(const DgpConfig& dgp, long n_sims,
                                           std::uint64_t seed) {
  std::vector<OracleReport> out;
  const DamageDist U = DamageDist::uniform(0.0, 1e4);
  auto quad = [&](const std::string& q, double v) { out.push_back({q, v, "quadrature", 0, 0, 1e-10}); };
  quad("int_500^1000 e^{5e-4 D}(1-D/1e4) dD", survival_integral(U, 5e-4, 500.0, 1000.0));
  quad("int_0^1000 e^{1e-4 D}(1-D/1e4) dD", survival_integral(U, 1e-4, 0.0, 1000.0));
  quad("frontier a=5e-4 (600,1000)|(850,500) uniform",
       frontier(U, {600.0, 1000.0}, {850.0, 500.0}, 5e-4));
  quad("frontier a=1e-4 (0,10000)|(618.5,1000) uniform",
       frontier(U, {0.0, 10000.0}, {618.5, 1000.0}, 1e-4));
  quad("Pr[J=0]", zero_accident_probability(dgp));
  out.push_back({"spearman(theta,a)", copula_spearman(dgp.copula_rho), "closed-form", 0, 0, 1e-15});
  const double zmid = 0.5 * (dgp.z_lo + dgp.z_hi);
  quad("nu1(z=" + format_value(zmid) + ")", true_nu1(zmid, dgp));
  quad("E[theta|chi=1,z=" + format_value(zmid) + "]", true_conditional_theta_moment(1, zmid, dgp));
  quad("Pr[chi=1|theta=0.4,z=" + format_value(zmid) + "] (cdf)", true_choice_prob(0.4, zmid, dgp));
  auto sim = brute_choice_prob(0.4, zmid, dgp, n_sims, seed);
  sim.quantity = "Pr[chi=1|theta=0.4,z=" + format_value(zmid) + "] (simulation)";
  out.push_back(sim);
  out.push_back(brute_nu1(dgp, n_sims, splitmix64(seed + 1)));
  for (double t : {0.4, 0.6}) {
    const Range r = identified_range(t, dgp);
    const std::string tag = t == 0.4 ? "0.4" : "0.6";
    quad("identified range lo, theta*=" + tag, r.lo);
    quad("identified range hi, theta*=" + tag, r.hi);
  }
  return out;
}

}  // namespace inslab::oracle
