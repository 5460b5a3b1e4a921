#include "inslab/np_estim/step2.hpp"

#include <algorithm>
#include <cmath>

#include "inslab/common/error.hpp"
#include "inslab/model_core/contracts.hpp"
#include "inslab/model_core/quadrature.hpp"
#include "inslab/np_estim/qp.hpp"

namespace inslab {

DamageDist estimate_damage_cdf(std::span<const double> damages) {
  return DamageDist::empirical(std::vector<double>(damages.begin(), damages.end()));
}

std::vector<double> pooled_damages(const std::vector<InsureeRecord>& records) {
  std::vector<double> out;
  for (const auto& r : records) out.insert(out.end(), r.damages.begin(), r.damages.end());
  return out;
}

double estimate_frontier(double a, double z, const MenuRule& rule, const DamageDist& H_hat) {
  return frontier_theta(a, rule.lower(z), rule.upper(z), H_hat);
}

double estimate_frontier_da(double a, double z, const MenuRule& rule, const DamageDist& H_hat) {
  return frontier_theta_da(a, rule.lower(z), rule.upper(z), H_hat);
}

ChoiceData::ChoiceData(const std::vector<InsureeRecord>& records, int M) {
  if (records.empty()) throw InsufficientData("ChoiceData: empty dataset");
  if (M < 1) throw InvalidArgument("ChoiceData: M must be >= 1");
  z_.reserve(records.size());
  chi1_.reserve(records.size());
  ff1_.assign(M, {});
  for (const auto& r : records) {
    z_.push_back(r.z);
    chi1_.push_back(r.chi == 1 ? 1.0 : 0.0);
    if (r.chi == 1) {
      z1_.push_back(r.z);
      for (int m = 1; m <= M; ++m) ff1_[m - 1].push_back(falling_factorial(r.j, m));
    }
  }
  const auto [mn, mx] = std::minmax_element(z_.begin(), z_.end());
  z_min_ = *mn;
  z_max_ = *mx;
}

KernelEstimate estimate_nu1(const ChoiceData& data, double z0, const KernelSpec& spec) {
  return kernel_regress_many(data.z(), {data.chi1()}, z0, spec).front();
}

MomentSet conditional_factorial_moments(const ChoiceData& data, double z0,
                                        const KernelSpec& spec) {
  if (data.z1().size() < 2) throw InsufficientData("fewer than two coverage-1 choosers");
  // Clamp to the full-sample range, as for nu1.
  const double at = std::clamp(z0, data.z_min(), data.z_max());
  auto km = kernel_regress_moments(data.z1(), data.ff1(), at, spec);
  const auto& est = km.estimates;
  if (est.front().effective_n < 50.0) {
    throw InsufficientData("coverage-1 subsample near z0 has effective size " +
                           std::to_string(est.front().effective_n) + " < 50");
  }
  MomentSet ms;
  ms.n = est.front().effective_n;
  for (const auto& e : est) {
    ms.values.push_back(e.value);
    ms.variances.push_back(std::max(kVarianceFloor, e.variance));
  }
  ms.covariance = std::move(km.covariance);
  return ms;
}

MomentSet conditional_factorial_moments(const std::vector<InsureeRecord>& records, double z0,
                                        int M, const KernelSpec& spec) {
  return conditional_factorial_moments(ChoiceData(records, M), z0, spec);
}

double Step2Fit::conditional_density(double theta) const {
  if (theta < 0.0) return 0.0;
  if (theta <= theta_lo) return f_theta(theta) / nu1;
  if (theta <= theta_hi && g) return upper_mass * (*g)(theta);
  return 0.0;
}

double Step2Fit::choice_prob(double theta) const {
  if (theta <= theta_lo) return 1.0;
  if (theta >= theta_hi || !g) return 0.0;
  const double num = upper_mass * (*g)(theta) * nu1;
  const double den = f_theta(theta);
  if (!(den > 0.0)) return num > 0.0 ? 1.0 : 0.0;
  return std::clamp(num / den, 0.0, 1.0);
}

bool Step2Fit::clipped() const {
  if (!g) return false;
  for (double t : g->grid()) {
    const double den = f_theta(t);
    if (!(den > 0.0)) continue;
    const double ratio = upper_mass * (*g)(t) * nu1 / den;
    if (ratio < -1e-9 || ratio > 1.0 + 1e-9) return true;
  }
  return false;
}

Step2Fit fit_step2(double z0, double theta_lo, double theta_hi, double nu1,
                   const LegendreDensity& f_theta, const MomentSet& cond,
                   const Step2Options& opts) {
  if (!(theta_lo < theta_hi)) {
    throw DegenerateRegion("Step 2: theta_lo >= theta_hi, no segment to fit");
  }
  if (!(nu1 > 0.0)) throw InsufficientData("Step 2: nu1 is not positive");
  const int M = cond.order();
  Step2Fit fit;
  fit.z0 = z0;
  fit.nu1 = nu1;
  fit.theta_lo = theta_lo;
  fit.theta_hi = theta_hi;
  fit.f_theta = f_theta;

  const double w = 1.0 - f_theta.cdf(theta_lo) / nu1;
  if (!(w > 1e-9)) {
    fit.flags |= step2_flags::kNoUpperMass;
    fit.upper_mass = 0.0;
    return fit;
  }
  fit.upper_mass = w;
  const double width = theta_hi - theta_lo;

  // Moments of the known part below theta_lo.
  const double below_hi = std::min(theta_lo, f_theta.hi());
  const auto B = basis_moments(M, M, theta_lo, theta_hi);
  Eigen::VectorXd r(M);
  Eigen::MatrixXd Bm(M, M);
  for (int m = 1; m <= M; ++m) {
    double known = 0.0;
    if (below_hi > f_theta.lo()) {
      known = gauss_legendre([&](double t) { return std::pow(t, m) * f_theta(t); },
                             f_theta.lo(), below_hi);
    }
    r(m - 1) = cond.values[m - 1] - known / nu1 - w * B[m - 1][0];
    for (int k = 1; k <= M; ++k) Bm(m - 1, k - 1) = w * B[m - 1][k];
  }
  const Eigen::MatrixXd W = moment_weight_matrix(cond, opts.weighting);
  Eigen::MatrixXd G = 2.0 * Bm.transpose() * W * Bm;
  const Eigen::VectorXd gvec = -2.0 * Bm.transpose() * W * r;
  G.diagonal().array() += 1e-10 * std::max(G.trace() / M, 1e-300);

  const int K = opts.grid_size;
  std::vector<std::vector<double>> rows(K);
  std::vector<double> env(K);
  for (int k = 0; k < K; ++k) {
    const double x = static_cast<double>(k) / (K - 1);
    rows[k] = legendre_row(M, x);
    env[k] = f_theta(theta_lo + width * x) * width / (w * nu1);
  }

  // Ladder: full constraint set, then progressively relaxed.
  for (int level = 0; level < 4; ++level) {
    const bool eq_cont = level <= 1;
    const bool eq_zero = level == 0;
    const bool envelope = level <= 2;
    std::vector<int> idx;
    for (int k = 0; k < K; ++k) {
      if ((k == 0 && eq_cont) || (k == K - 1 && eq_zero)) continue;
      idx.push_back(k);
    }
    QpProblem qp;
    qp.G = G;
    qp.g = gvec;
    const int n_eq = static_cast<int>(eq_cont) + static_cast<int>(eq_zero);
    qp.A_eq.resize(n_eq, M);
    qp.b_eq.resize(n_eq);
    int e = 0;
    if (eq_cont) {
      for (int m = 0; m < M; ++m) qp.A_eq(e, m) = rows[0][m];
      qp.b_eq(e++) = env[0] - 1.0;
    }
    if (eq_zero) {
      for (int m = 0; m < M; ++m) qp.A_eq(e, m) = rows[K - 1][m];
      qp.b_eq(e++) = -1.0;
    }
    const int n_in = static_cast<int>(idx.size()) * (envelope ? 2 : 1);
    qp.A_in.resize(n_in, M);
    qp.b_in.resize(n_in);
    int c = 0;
    for (int k : idx) {
      for (int m = 0; m < M; ++m) qp.A_in(c, m) = rows[k][m];
      qp.b_in(c++) = -1.0;
      if (envelope) {
        for (int m = 0; m < M; ++m) qp.A_in(c, m) = -rows[k][m];
        qp.b_in(c++) = 1.0 - env[k];
      }
    }
    const QpResult sol = solve_qp(qp);
    if (sol.status != QpStatus::kOptimal) continue;
    if (!eq_zero) fit.flags |= step2_flags::kEndpointZeroDropped;
    if (!eq_cont) fit.flags |= step2_flags::kContinuityDropped;
    if (!envelope) fit.flags |= step2_flags::kEnvelopeDropped;
    fit.g = LegendreDensity(theta_lo, theta_hi,
                            std::vector<double>(sol.x.data(), sol.x.data() + M), K);
    const Eigen::VectorXd resid = r - Bm * sol.x;
    fit.objective = resid.dot(W * resid);
    fit.kkt_residual = sol.kkt_residual;
    return fit;
  }
  throw NumericFailure("Step 2: no feasible constraint set");
}

Step2Fit estimate_step2_density(const ChoiceData& data, double z0, const MenuRule& rule,
                                const DamageDist& H_hat, const LegendreDensity& f_theta,
                                double nu1, const KernelSpec& spec, const Step2Options& opts) {
  const double theta_lo = estimate_frontier(opts.a_bar, z0, rule, H_hat);
  const double theta_hi = std::min(estimate_frontier(0.0, z0, rule, H_hat), 1.0);
  if (!(theta_lo < theta_hi)) {
    throw DegenerateRegion("Step 2 at z0: frontier at a_bar is not below min(frontier at 0, 1)");
  }
  const MomentSet cond = conditional_factorial_moments(data, z0, spec);
  Step2Fit fit = fit_step2(z0, theta_lo, theta_hi, nu1, f_theta, cond, opts);
  if (z0 < data.z_min() || z0 > data.z_max()) fit.flags |= step2_flags::kExtrapolated;
  return fit;
}

}  // namespace inslab
