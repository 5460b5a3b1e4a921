#include "inslab/model_core/damage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "inslab/common/error.hpp"
#include "inslab/common/format.hpp"
#include "inslab/model_core/quadrature.hpp"

namespace inslab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// int_0^h e^{a s} ds
double exp_moment0(double a, double h) {
  if (a == 0.0) return h;
  return std::expm1(a * h) / a;
}

// int_0^h s e^{a s} ds, series for small |a h| to avoid cancellation.
double exp_moment1(double a, double h) {
  const double x = a * h;
  if (std::abs(x) < 0.2) {
    double term = 0.5 * h * h;  // k = 0: h^2 / 2
    double sum = term;
    double factor = 1.0;        // x^k / k!
    for (int k = 1; k < 40; ++k) {
      factor *= x / k;
      term = h * h * factor / (k + 2);
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  return (h * std::exp(x) - exp_moment0(a, h)) / a;
}

}  // namespace

DamageDist DamageDist::uniform(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0 || !(hi > lo)) {
    throw InvalidArgument("uniform damage requires 0 <= lo < hi < inf");
  }
  DamageDist d;
  d.kind_ = Kind::kUniform;
  d.p0_ = lo;
  d.p1_ = hi;
  return d;
}

DamageDist DamageDist::exponential(double mean) {
  if (!std::isfinite(mean) || !(mean > 0.0)) {
    throw InvalidArgument("exponential damage requires a positive finite mean");
  }
  DamageDist d;
  d.kind_ = Kind::kExponential;
  d.p0_ = mean;
  return d;
}

DamageDist DamageDist::empirical(std::vector<double> sample) {
  if (sample.empty()) throw InvalidArgument("empirical damage requires a nonempty sample");
  for (double x : sample) {
    if (!std::isfinite(x) || x < 0.0) {
      throw InvalidArgument("empirical damage sample must be finite and nonnegative");
    }
  }
  std::sort(sample.begin(), sample.end());
  DamageDist d;
  d.kind_ = Kind::kEmpirical;
  d.sample_ = std::move(sample);
  return d;
}

DamageDist DamageDist::tail_rescaled(const DamageDist& base, double kappa, double cut) {
  if (!std::isfinite(kappa) || !(cut > 0.0) || !std::isfinite(cut)) {
    throw InvalidArgument("tail_rescaled requires finite kappa and positive cut");
  }
  if (kappa < base.survival(cut)) {
    throw InvalidArgument("tail_rescaled requires kappa >= 1 - H(cut)");
  }
  DamageDist d;
  d.kind_ = Kind::kTailRescaled;
  d.p0_ = kappa;
  d.p1_ = cut;
  d.base_ = std::make_shared<const DamageDist>(base);
  return d;
}

DamageDist DamageDist::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidArgument("damage spec '" + std::string(spec) + "' lacks ':'");
  }
  const std::string name(spec.substr(0, colon));
  const std::string args(spec.substr(colon + 1));
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= args.size()) {
    const auto comma = args.find(',', pos);
    const std::string token = args.substr(pos, comma == std::string::npos ? std::string::npos
                                                                          : comma - pos);
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size()) {
      throw InvalidArgument("damage spec '" + std::string(spec) + "': bad number '" + token +
                            "'");
    }
    values.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (name == "uniform") {
    if (values.size() == 1) return uniform(0.0, values[0]);
    if (values.size() == 2) return uniform(values[0], values[1]);
  } else if (name == "exponential" || name == "exp") {
    if (values.size() == 1) return exponential(values[0]);
  }
  throw InvalidArgument("unrecognized damage spec '" + std::string(spec) + "'");
}

double DamageDist::cdf(double d) const {
  switch (kind_) {
    case Kind::kUniform:
      if (d <= p0_) return 0.0;
      if (d >= p1_) return 1.0;
      return (d - p0_) / (p1_ - p0_);
    case Kind::kExponential:
      return d <= 0.0 ? 0.0 : -std::expm1(-d / p0_);
    case Kind::kEmpirical: {
      const auto it = std::upper_bound(sample_.begin(), sample_.end(), d);
      return static_cast<double>(it - sample_.begin()) / static_cast<double>(sample_.size());
    }
    case Kind::kTailRescaled: {
      if (d <= 0.0) return 0.0;
      if (d < p1_) return (1.0 - base_->survival(p1_) / p0_) * d / p1_;
      return 1.0 - base_->survival(d) / p0_;
    }
  }
  return 0.0;
}

double DamageDist::density(double d) const {
  switch (kind_) {
    case Kind::kUniform:
      return (d >= p0_ && d <= p1_) ? 1.0 / (p1_ - p0_) : 0.0;
    case Kind::kExponential:
      return d < 0.0 ? 0.0 : std::exp(-d / p0_) / p0_;
    case Kind::kEmpirical:
      throw InvalidArgument("empirical damage law has no density");
    case Kind::kTailRescaled:
      if (d < 0.0) return 0.0;
      if (d < p1_) return (1.0 - base_->survival(p1_) / p0_) / p1_;
      return base_->density(d) / p0_;
  }
  return 0.0;
}

double DamageDist::upper_bound() const {
  switch (kind_) {
    case Kind::kUniform:
      return p1_;
    case Kind::kExponential:
      return kInf;
    case Kind::kEmpirical:
      return sample_.back();
    case Kind::kTailRescaled:
      return base_->upper_bound();
  }
  return kInf;
}

double DamageDist::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("quantile level outside [0,1]");
  switch (kind_) {
    case Kind::kUniform:
      return p0_ + u * (p1_ - p0_);
    case Kind::kExponential:
      return -p0_ * std::log1p(-u);
    case Kind::kEmpirical: {
      const auto n = sample_.size();
      const auto idx = std::min<std::size_t>(n - 1, static_cast<std::size_t>(u * n));
      return sample_[idx];
    }
    case Kind::kTailRescaled: {
      const double below = 1.0 - base_->survival(p1_) / p0_;
      if (u < below) return p1_ * u / below;
      // S_base(D) = kappa (1 - u)
      const double s = std::min(1.0, p0_ * (1.0 - u));
      return std::max(p1_, base_->quantile(1.0 - s));
    }
  }
  return 0.0;
}

double DamageDist::mean() const {
  switch (kind_) {
    case Kind::kUniform:
      return 0.5 * (p0_ + p1_);
    case Kind::kExponential:
      return p0_;
    case Kind::kEmpirical:
      return std::accumulate(sample_.begin(), sample_.end(), 0.0) /
             static_cast<double>(sample_.size());
    case Kind::kTailRescaled: {
      // E[D] = int_0^inf S(D) dD, split at the cut.
      const double below = 1.0 - base_->survival(p1_) / p0_;
      const double head = p1_ - below * p1_ / 2.0;
      double tail = 0.0;
      if (base_->kind() == Kind::kExponential) {
        tail = base_->p0_ * base_->survival(p1_);
      } else {
        tail = base_->survival_exp_integral(0.0, p1_, std::max(p1_, base_->upper_bound()));
      }
      return head + tail / p0_;
    }
  }
  return 0.0;
}

double DamageDist::survival_exp_integral(double a, double lo, double hi, int power) const {
  if (!std::isfinite(a) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidArgument("survival_exp_integral: nonfinite argument");
  }
  if (power != 0 && power != 1) throw InvalidArgument("survival_exp_integral: power must be 0 or 1");
  if (lo < 0.0 || hi < lo) throw InvalidArgument("survival_exp_integral: need 0 <= lo <= hi");
  if (lo == hi) return 0.0;
  if (kind_ == Kind::kEmpirical) return integrate_empirical(a, lo, hi, power);
  return integrate_smooth(a, lo, hi, power);
}

double DamageDist::integrate_smooth(double a, double lo, double hi, int power) const {
  // Break at the kinks of S so every Simpson panel sees a smooth integrand.
  std::vector<double> cuts{lo};
  auto add_cut = [&](double c) {
    if (c > lo && c < hi) cuts.push_back(c);
  };
  if (kind_ == Kind::kUniform) {
    add_cut(p0_);
    add_cut(p1_);
  } else if (kind_ == Kind::kTailRescaled) {
    add_cut(p1_);
    if (base_->kind() == Kind::kUniform) {
      add_cut(base_->p0_);
      add_cut(base_->p1_);
    }
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());

  if (kind_ == Kind::kTailRescaled && base_->kind() == Kind::kEmpirical) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double l = cuts[i], h = cuts[i + 1];
      if (l >= p1_) {
        total += base_->integrate_empirical(a, l, h, power) / p0_;
      } else {
        const auto f = [&](double d) { return std::pow(d, power) * std::exp(a * d) * survival(d); };
        const double scale = (h - l) * (std::abs(f(l)) + std::abs(f(h)) + 1e-300);
        total += adaptive_simpson(f, l, h, 1e-10 * scale).value;
      }
    }
    return total;
  }

  const auto f = [&](double d) {
    const double s = survival(d);
    const double e = std::exp(a * d);
    return power == 1 ? d * e * s : e * s;
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double l = cuts[i], h = cuts[i + 1];
    if (l == h) continue;
    const double scale =
        (h - l) * std::max({std::abs(f(l)), std::abs(f(0.5 * (l + h))), std::abs(f(h)), 1e-300});
    total += adaptive_simpson(f, l, h, 1e-10 * scale).value;
  }
  return total;
}

double DamageDist::integrate_empirical(double a, double lo, double hi, int power) const {
  const auto n = static_cast<double>(sample_.size());
  auto it = std::upper_bound(sample_.begin(), sample_.end(), lo);
  double at_or_below = static_cast<double>(it - sample_.begin());
  double left = lo;
  double total = 0.0;
  auto add_segment = [&](double p, double q, double surv) {
    if (q <= p || surv <= 0.0) return;
    const double h = q - p;
    const double ep = std::exp(a * p);
    total += power == 0 ? surv * ep * exp_moment0(a, h)
                        : surv * ep * (p * exp_moment0(a, h) + exp_moment1(a, h));
  };
  while (it != sample_.end() && *it < hi) {
    add_segment(left, *it, 1.0 - at_or_below / n);
    const double x = *it;
    while (it != sample_.end() && *it == x) {
      ++it;
      at_or_below += 1.0;
    }
    left = x;
  }
  add_segment(left, hi, 1.0 - at_or_below / n);
  return total;
}

std::string DamageDist::describe() const {
  switch (kind_) {
    case Kind::kUniform:
      return "uniform:" + format_exact(p0_) + "," + format_exact(p1_);
    case Kind::kExponential:
      return "exponential:" + format_exact(p0_);
    case Kind::kEmpirical:
      return "empirical:n=" + std::to_string(sample_.size());
    case Kind::kTailRescaled:
      return "tail_rescaled(" + base_->describe() + ",kappa=" + format_exact(p0_) +
             ",cut=" + format_exact(p1_) + ")";
  }
  return "";
}

}  // namespace inslab
