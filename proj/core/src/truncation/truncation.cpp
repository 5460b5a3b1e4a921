#include "inslab/truncation/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "inslab/common/error.hpp"
#include "inslab/common/format.hpp"
#include "inslab/np_estim/kernel.hpp"

namespace inslab {

double estimate_lambda(std::span<const double> claims, double dd1) {
  if (claims.empty()) throw InsufficientData("estimate_lambda: no contract-2 claims");
  const auto above = std::count_if(claims.begin(), claims.end(), [&](double d) { return d > dd1; });
  if (above == 0) throw InsufficientData("estimate_lambda: no contract-2 claim above dd1");
  return static_cast<double>(above) / static_cast<double>(claims.size());
}

std::vector<double> claims_of_contract(const std::vector<InsureeRecord>& records, int chi) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.chi == chi) out.insert(out.end(), r.damages.begin(), r.damages.end());
  }
  return out;
}

TruncatedSummary summarize_truncated(const std::vector<InsureeRecord>& records,
                                     const MenuRule& rule, int M) {
  if (records.empty()) throw InsufficientData("summarize_truncated: no records");
  TruncatedSummary s;
  s.n = static_cast<long>(records.size());
  s.lambda_hat = estimate_lambda(claims_of_contract(records, 2), rule.dd1);
  std::vector<long> j1, j2;
  for (const auto& r : records) (r.chi == 1 ? j1 : j2).push_back(r.j);
  s.nu1 = static_cast<double>(j1.size()) / static_cast<double>(s.n);
  s.nu2 = 1.0 - s.nu1;
  if (!j1.empty()) s.mu_star1 = factorial_moments(j1, M).values;
  else s.mu_star1.assign(M, 0.0);
  if (!j2.empty()) s.mu_star2 = factorial_moments(j2, M).values;
  else s.mu_star2.assign(M, 0.0);
  return s;
}

MomentSet truncated_theta_moments(const std::vector<InsureeRecord>& records, double lambda_hat,
                                  int M) {
  if (!(lambda_hat > 0.0 && lambda_hat <= 1.0)) {
    throw InvalidArgument("truncated moments: lambda_hat must lie in (0,1]");
  }
  if (records.empty()) throw InsufficientData("truncated moments: no records");
  const double n = static_cast<double>(records.size());
  MomentSet ms;
  ms.n = n;
  ms.values.assign(M, 0.0);
  std::vector<double> cross(M * M, 0.0);
  std::vector<double> v(M);
  for (const auto& r : records) {
    double ff = 1.0;
    double scale = 1.0;
    for (int m = 1; m <= M; ++m) {
      ff *= static_cast<double>(r.j - m + 1);
      if (r.chi == 1) scale /= lambda_hat;
      v[m - 1] = ff * scale;
      ms.values[m - 1] += v[m - 1];
    }
    for (int a = 0; a < M; ++a) {
      for (int b = a; b < M; ++b) cross[a * M + b] += v[a] * v[b];
    }
  }
  for (int m = 0; m < M; ++m) ms.values[m] /= n;
  ms.covariance.assign(M * M, 0.0);
  ms.variances.resize(M);
  for (int a = 0; a < M; ++a) {
    for (int b = a; b < M; ++b) {
      const double c = cross[a * M + b] / (n * n) - ms.values[a] * ms.values[b] / n;
      ms.covariance[a * M + b] = ms.covariance[b * M + a] = c;
    }
    ms.variances[a] = std::max(kVarianceFloor, ms.covariance[a * M + a]);
  }
  return ms;
}

DemixResult demix_truncated(const std::vector<InsureeRecord>& records, double lambda_hat, int M,
                            int grid_size) {
  return demix_poisson(truncated_theta_moments(records, lambda_hat, M), 0.0, 1.0, grid_size);
}

double h2_upper_bound(std::span<const double> claims, double dd2, std::optional<double> bandwidth) {
  if (dd2 == 0.0) return 0.0;
  if (claims.size() < 50) throw InsufficientData("h2_upper_bound: fewer than 50 claims");
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(claims);
  // Reflection about dd2: f(dd2) = 2 / (n h) sum K((X - dd2) / h).
  double sum = 0.0;
  for (double x : claims) {
    const double u = (x - dd2) / h;
    sum += std::exp(-0.5 * u * u);
  }
  const double density = 2.0 * sum / (static_cast<double>(claims.size()) * h *
                                      std::sqrt(2.0 * std::numbers::pi));
  const double x = dd2 * density;
  return x / (1.0 + x);
}

H2Estimate h2_from_known_mean(double mu_known, const TruncatedSummary& s) {
  if (!(mu_known > 0.0)) throw InvalidArgument("h2_from_known_mean: mu_known must be > 0");
  if (s.mu_star1.empty() || s.mu_star2.empty()) {
    throw InvalidArgument("h2_from_known_mean: summary lacks first moments");
  }
  H2Estimate e;
  e.raw = 1.0 - (s.nu1 * s.mu_star1[0] / s.lambda_hat + s.nu2 * s.mu_star2[0]) / mu_known;
  e.inconsistent = e.raw < -0.02 || e.raw > 1.02;
  e.value = std::clamp(e.raw, 0.0, std::nextafter(1.0, 0.0));
  return e;
}

DgpConfig equivalent_structure(double kappa, const DgpConfig& base) {
  const double s2 = base.damage.survival(base.menu.dd2);
  if (!(kappa >= s2)) {
    throw InvalidArgument("equivalent_structure: kappa below 1 - H(dd2) = " + format_value(s2));
  }
  DgpConfig c = base;
  c.theta_scale = base.theta_scale * kappa;
  if (base.menu.dd2 > 0.0) c.damage = DamageDist::tail_rescaled(base.damage, kappa, base.menu.dd2);
  return c;
}

std::string format_summary(const TruncatedSummary& s) {
  std::string out;
  auto line = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  auto list = [](const std::vector<double>& v) {
    std::string r;
    for (std::size_t i = 0; i < v.size(); ++i) r += (i ? "," : "") + format_exact(v[i]);
    return r;
  };
  line("n", std::to_string(s.n));
  line("lambda_hat", format_exact(s.lambda_hat));
  line("nu1", format_exact(s.nu1));
  line("nu2", format_exact(s.nu2));
  line("mu_star1", list(s.mu_star1));
  line("mu_star2", list(s.mu_star2));
  line("h2", s.h2 ? format_exact(*s.h2) : "unknown");
  return out;
}

}  // namespace inslab
