#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace inslab {

/// Per-accident damage law H. Supports the parametric laws used by the
/// simulator, an empirical law estimated from observed damages, and the
/// tail-rescaled law used to build observationally equivalent structures.
///
/// Every kind supplies cdf/survival, a quantile for sampling, and the
/// survival-weighted exponential integrals
///   int_lo^hi D^p e^{aD} [1 - H(D)] dD,  p in {0, 1},
/// that drive certainty equivalents and frontiers. Parametric kinds integrate
/// by adaptive Simpson; the empirical kind integrates its step function
/// exactly.
class DamageDist {
 public:
  enum class Kind { kUniform, kExponential, kEmpirical, kTailRescaled };

  static DamageDist uniform(double lo, double hi);
  static DamageDist exponential(double mean);
  /// Right-continuous step cdf of `sample` (need not be sorted).
  static DamageDist empirical(std::vector<double> sample);
  /// Survival S(D)/kappa above `cut`; uniform filler of mass 1 - S(cut)/kappa
  /// on [0, cut). Requires kappa >= S(cut).
  static DamageDist tail_rescaled(const DamageDist& base, double kappa, double cut);

  /// Parses "uniform:lo,hi", "exponential:mean" (alias "exp:mean").
  static DamageDist parse(std::string_view spec);

  Kind kind() const { return kind_; }
  double cdf(double d) const;
  double survival(double d) const { return 1.0 - cdf(d); }
  /// Density; throws InvalidArgument for the empirical kind.
  double density(double d) const;
  /// d_bar; +infinity for the exponential kind.
  double upper_bound() const;
  double quantile(double u) const;
  double mean() const;

  /// int_lo^hi D^power e^{a D} S(D) dD for 0 <= lo <= hi, power in {0,1}.
  double survival_exp_integral(double a, double lo, double hi, int power = 0) const;

  /// Sorted sample (empirical kind only; empty otherwise).
  std::span<const double> sample() const { return sample_; }

  /// Round-trippable description ("uniform:0,10000", "exponential:5000",
  /// "empirical:n=...", "tail_rescaled(...)").
  std::string describe() const;

 private:
  DamageDist() = default;

  double integrate_smooth(double a, double lo, double hi, int power) const;
  double integrate_empirical(double a, double lo, double hi, int power) const;

  Kind kind_ = Kind::kUniform;
  double p0_ = 0.0;  // uniform lo / exponential mean / tail kappa
  double p1_ = 0.0;  // uniform hi / tail cut
  std::vector<double> sample_;
  std::shared_ptr<const DamageDist> base_;
};

}  // namespace inslab
