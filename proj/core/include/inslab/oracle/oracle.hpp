#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "inslab/dgp_sim/dgp.hpp"
#include "inslab/model_core/contracts.hpp"

namespace inslab::oracle {

// Reference computations for tests. Everything here avoids the estimator
// code paths: its own Simpson rule, closed forms, and its own samplers.

struct OracleReport {
  std::string quantity;
  double value = 0.0;
  std::string method;  // "quadrature", "closed-form", "simulation"
  long n = 0;          // draws, for simulation
  std::uint64_t seed = 0;
  double error = 0.0;  // always > 0
};

struct SimpsonResult {
  double value = 0.0;
  double error = 0.0;
  long subdivisions = 0;
};

/// Composite Simpson with panel doubling until successive estimates differ
/// by less than 15 tol. NumericFailure past 1e6 subdivisions.
SimpsonResult quad_simpson(const std::function<double(double)>& f, double a, double b,
                           double tol);

/// int_lo^hi D^power e^{aD} e^{-D/mean} dD in closed form.
double exponential_survival_integral(double mean, double a, double lo, double hi, int power = 0);

/// int_lo^hi D^power e^{aD} S(D) dD: closed form for exponential damages,
/// quad_simpson (split at support ends) otherwise.
double survival_integral(const DamageDist& H, double a, double lo, double hi, int power = 0);

double frontier(const DamageDist& H, const Coverage& lo, const Coverage& hi, double a);
/// Bisection inverse of `frontier` on [0, a_max]; empty outside the range.
std::optional<double> frontier_inverse(const DamageDist& H, const Coverage& lo,
                                       const Coverage& hi, double theta, double a_max);

/// Marginal density / cdf of theta under the design (theta_scale applied).
double theta_density(const DgpConfig& dgp, double theta);
double theta_cdf(const DgpConfig& dgp, double theta);

/// Gaussian-copula conditional density and cdf of a given theta.
double true_conditional_density(double theta_star, double a, const DgpConfig& dgp);
double true_conditional_cdf(double theta_star, double a, const DgpConfig& dgp);

/// Pr[chi = 1 | theta, z] = F_{a|theta}(a(theta, z)); exact 1/0 outside the
/// frontier band.
double true_choice_prob(double theta, double z, const DgpConfig& dgp);
/// Same probability by drawing a from the conditional law.
OracleReport brute_choice_prob(double theta, double z, const DgpConfig& dgp, long n_sims,
                               std::uint64_t seed);

/// nu_1(z) and E[theta^m | chi = 1, z] by quadrature over theta.
double true_nu1(double z, const DgpConfig& dgp);
double true_conditional_theta_moment(int m, double z, const DgpConfig& dgp);
/// Share choosing coverage 1 with z drawn from the design, by simulation.
OracleReport brute_nu1(const DgpConfig& dgp, long n_sims, std::uint64_t seed);

/// Pr[J = 0] = int e^{-theta} f(theta) dtheta.
double zero_accident_probability(const DgpConfig& dgp);

/// Image of [z_lo, z_hi] under a(theta_star, .) clipped into [0, a_scale].
struct Range {
  double lo = 0.0;
  double hi = 0.0;
};
Range identified_range(double theta_star, const DgpConfig& dgp);

/// Spearman correlation of a Gaussian copula: (6/pi) asin(rho/2).
double copula_spearman(double rho);

/// Standard report set printed by the `oracle` subcommand.
std::vector<OracleReport> standard_reports(const DgpConfig& dgp, long n_sims,
                                           std::uint64_t seed);

}  // namespace inslab::oracle
