#include "inslab/model_core/health.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "inslab/common/error.hpp"
#include "inslab/common/rng.hpp"
#include "inslab/common/sampling.hpp"

namespace inslab {

HealthCe health_certainty_equivalent(double t, double dd, double gamma,
                                     const TypePair& tp, double w,
                                     const DamageDist& H, long n_sims,
                                     std::uint64_t seed) {
  if (n_sims < 2) throw InvalidArgument("health CE needs at least two simulations");
  if (!(dd >= 0.0) || !(gamma >= 0.0) || !(tp.theta >= 0.0) || !(tp.a >= 0.0)) {
    throw InvalidArgument("health CE: negative deductible, copay, theta or a");
  }
  Rng rng(seed);
  std::vector<double> y(static_cast<std::size_t>(n_sims));
  for (auto& out : y) {
    const long visits = poisson_inverse(tp.theta, rng.uniform());
    double spent = 0.0;
    double pay = 0.0;
    bool met = false;
    long after = 0;
    for (long j = 1; j <= visits; ++j) {
      spent += H.quantile(rng.uniform());
      if (!met && spent > dd) {
        met = true;
      } else if (met) {
        ++after;
      }
    }
    pay = met ? dd + static_cast<double>(after) * gamma : spent;
    out = pay;
  }

  const double n = static_cast<double>(n_sims);
  HealthCe res;
  res.n_sims = n_sims;
  if (tp.a == 0.0) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    res.value = w - t - mean;
    res.std_error = std::sqrt(ss / (n - 1.0) / n);
    return res;
  }
  // Shift by the max exponent so e^{aY} never overflows.
  const double shift = tp.a * *std::max_element(y.begin(), y.end());
  double m = 0.0;
  for (double v : y) m += std::exp(tp.a * v - shift);
  m /= n;
  double ss = 0.0;
  for (double v : y) {
    const double e = std::exp(tp.a * v - shift) - m;
    ss += e * e;
  }
  const double log_m = std::log(m) + shift;
  res.value = w - t - log_m / tp.a;
  res.std_error = std::sqrt(ss / (n - 1.0) / n) / (m * tp.a);
  return res;
}

}  // namespace inslab
