#include "inslab/pipeline/three_step.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "inslab/common/error.hpp"
#include "inslab/common/format.hpp"

namespace inslab {
namespace {

template <typename F>
auto annotate(const std::string& step, F&& fn) -> decltype(fn()) {
  const std::string p = step + ": ";
  try {
    return fn();
  } catch (const InvalidMenu& e) {
    throw InvalidMenu(p + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(p + e.what());
  } catch (const NumericFailure& e) {
    throw NumericFailure(p + e.what(), e.achieved_tolerance());
  } catch (const InsufficientData& e) {
    throw InsufficientData(p + e.what());
  } catch (const DegenerateRegion& e) {
    throw DegenerateRegion(p + e.what());
  } catch (const DegenerateInstrument& e) {
    throw DegenerateInstrument(p + e.what());
  }
}

// The deductibles do not move with z, so the survival integrals depend on a
// only and can be shared across every z the bisections visit.
class FrontierMemo {
 public:
  FrontierMemo(const MenuRule& rule, const DamageDist& H) : rule_(rule), H_(H) {}

  double theta(double a, double z) {
    return (rule_.upper(z).premium - rule_.lower(z).premium) / integral(a, 0);
  }
  double theta_da(double a, double z) {
    const double i0 = integral(a, 0);
    return -(rule_.upper(z).premium - rule_.lower(z).premium) / i0 * (integral(a, 1) / i0);
  }

 private:
  double integral(double a, int power) {
    auto& memo = power == 0 ? i0_ : i1_;
    const auto it = memo.find(a);
    if (it != memo.end()) return it->second;
    const double v = H_.survival_exp_integral(a, rule_.dd2, rule_.dd1, power);
    if (power == 0 && !(v > 0.0)) {
      throw DegenerateRegion("no damage mass between the two deductibles");
    }
    memo.emplace(a, v);
    return v;
  }

  const MenuRule& rule_;
  const DamageDist& H_;
  std::map<double, double> i0_, i1_;
};

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_exact(v[i]);
  return s;
}

}  // namespace

void EstimatorConfig::validate() const {
  if (grid_size < 101) throw InvalidArgument("est.grid_size must be >= 101");
  if (theta_grid_points < 2 || a_grid_points < 2) {
    throw InvalidArgument("est grids need at least two points");
  }
  if (!(a_bar > 0.0)) throw InvalidArgument("est.a_bar must be positive");
  for (double t : theta_stars) {
    if (!(t > 0.0 && t < 1.0)) throw InvalidArgument("est.theta_stars must lie in (0,1)");
  }
  if (!(h_z_factor > 0.0)) throw InvalidArgument("est.h_z_factor must be positive");
  if (h_z && !(*h_z > 0.0)) throw InvalidArgument("est.h_z must be positive");
  if (bandwidth && !(*bandwidth > 0.0)) throw InvalidArgument("est.bandwidth must be positive");
  if (moment_order && *moment_order < 1) throw InvalidArgument("est.moment_order must be >= 1");
}

EstimatorConfig estimator_config_from(const KeyValueConfig& kv) {
  EstimatorConfig c;
  c.grid_size = static_cast<int>(kv.get_long("est.grid_size", c.grid_size));
  c.theta_grid_points = static_cast<int>(kv.get_long("est.theta_grid_points", c.theta_grid_points));
  c.a_grid_points = static_cast<int>(kv.get_long("est.a_grid_points", c.a_grid_points));
  c.a_bar = kv.get_double("est.a_bar", c.a_bar);
  c.theta_stars = kv.get_list("est.theta_stars", c.theta_stars);
  c.step2_z0 = kv.get_list("est.step2_z0", c.step2_z0);
  c.h_z_factor = kv.get_double("est.h_z_factor", c.h_z_factor);
  c.h_z = kv.find_double("est.h_z");
  c.bandwidth = kv.find_double("est.bandwidth");
  if (kv.has("est.moment_order")) {
    c.moment_order = static_cast<int>(kv.get_long("est.moment_order", 0));
  }
  if (kv.has("est.weighting")) {
    try {
      c.weighting = parse_weighting(kv.get_string("est.weighting", ""));
    } catch (const InvalidArgument& e) {
      throw ConfigError("est.weighting", e.what());
    }
  }
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("est", e.what());
  }
  return c;
}

std::string describe(const EstimatorConfig& c) {
  std::string out;
  auto line = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  line("est.grid_size", std::to_string(c.grid_size));
  line("est.theta_grid_points", std::to_string(c.theta_grid_points));
  line("est.a_grid_points", std::to_string(c.a_grid_points));
  line("est.a_bar", format_exact(c.a_bar));
  line("est.theta_stars", join(c.theta_stars));
  line("est.step2_z0", join(c.step2_z0));
  line("est.h_z_factor", format_exact(c.h_z_factor));
  if (c.h_z) line("est.h_z", format_exact(*c.h_z));
  if (c.bandwidth) line("est.bandwidth", format_exact(*c.bandwidth));
  if (c.moment_order) line("est.moment_order", std::to_string(*c.moment_order));
  line("est.weighting", to_string(c.weighting));
  return out;
}

EstimateBundle run_three_step(const std::vector<InsureeRecord>& records, const MenuRule& rule,
                              const EstimatorConfig& cfg) {
  cfg.validate();
  if (records.empty()) throw InsufficientData("run_three_step: no records");
  EstimateBundle b;

  annotate("step 1", [&] {
    b.moment_order =
        cfg.moment_order ? *cfg.moment_order : moment_order_rule(static_cast<long>(records.size()));
    std::vector<long> js;
    js.reserve(records.size());
    for (const auto& r : records) js.push_back(r.j);
    b.step1 = demix_poisson(factorial_moments(js, b.moment_order), 0.0, 1.0, cfg.grid_size,
                            cfg.weighting);
  });

  const ChoiceData data(records, b.moment_order);
  const auto damages = pooled_damages(records);
  if (damages.empty()) throw InsufficientData("step 2: no damages observed");
  const DamageDist H_hat = estimate_damage_cdf(damages);
  b.bandwidth = cfg.bandwidth ? *cfg.bandwidth : silverman_bandwidth(data.z());
  b.h_z = cfg.h_z ? *cfg.h_z : cfg.h_z_factor * b.bandwidth;
  const KernelSpec spec{b.bandwidth};
  const Step2Options opts{cfg.a_bar, cfg.grid_size, cfg.weighting};
  const LegendreDensity& f_theta = b.step1.density;

  if (!(rule.dd1 > rule.dd2)) throw InvalidMenu("run_three_step: need dd1 > dd2");
  FrontierMemo frontier(rule, H_hat);
  std::map<double, Step2Fit> cache;
  auto fit_at = [&](double z0) -> const Step2Fit& {
    auto it = cache.find(z0);
    if (it != cache.end()) return it->second;
    const double nu1 = estimate_nu1(data, z0, spec).value;
    const double theta_lo = frontier.theta(cfg.a_bar, z0);
    const double theta_hi = std::min(frontier.theta(0.0, z0), 1.0);
    Step2Fit fit = fit_step2(z0, theta_lo, theta_hi, nu1, f_theta,
                             conditional_factorial_moments(data, z0, spec), opts);
    if (z0 < data.z_min() || z0 > data.z_max()) fit.flags |= step2_flags::kExtrapolated;
    b.step2_flags |= fit.flags;
    ++b.step2_fits;
    return cache.emplace(z0, std::move(fit)).first->second;
  };

  annotate("step 2", [&] {
    for (double z0 : cfg.step2_z0) b.step2.push_back(fit_at(z0));
  });

  annotate("step 3", [&] {
    Step3Inputs in;
    in.frontier = [&](double a, double z) { return frontier.theta(a, z); };
    in.frontier_da = [&](double a, double z) { return frontier.theta_da(a, z); };
    in.choice_prob = [&](double theta, double z) { return fit_at(z).choice_prob(theta); };
    in.z_lo = data.z_min();
    in.z_hi = data.z_max();
    in.h_z = b.h_z;
    in.a_bar = cfg.a_bar;
    const auto a_grid = uniform_grid(0.0, cfg.a_bar, static_cast<std::size_t>(cfg.a_grid_points));
    for (double t : cfg.theta_stars) b.step3.push_back(step3_density(in, t, a_grid));
  });
  return b;
}

}  // namespace inslab
