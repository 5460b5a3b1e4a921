#include "inslab/dgp_sim/dgp.hpp"

#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "inslab/common/error.hpp"
#include "inslab/common/format.hpp"
#include "inslab/common/rng.hpp"
#include "inslab/common/sampling.hpp"

namespace inslab {
namespace {

// Substream layout per record: U1, U2 (types), U3 (z), U4 (accident count),
// then one uniform per damage.
struct Draw {
  TypePair tp;
  double z;
  Rng rng;
};

double normal_quantile(double u) {
  static const boost::math::normal_distribution<double> std_normal;
  return boost::math::quantile(std_normal, u);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Draw draw_record(const DgpConfig& cfg, long id) {
  Draw d{{}, 0.0, Rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(id)))};
  const double u1 = d.rng.uniform();
  const double u2 = d.rng.uniform();
  const double theta = cfg.theta_fixed ? *cfg.theta_fixed
                                       : beta_quantile(cfg.theta_alpha, cfg.theta_beta, u1);
  double ua = u2;
  if (cfg.copula_rho != 0.0) {
    const double x1 = normal_quantile(u1);
    const double x2 = cfg.copula_rho * x1 +
                      std::sqrt(1.0 - cfg.copula_rho * cfg.copula_rho) * normal_quantile(u2);
    ua = normal_cdf(x2);
  }
  d.tp.theta = cfg.theta_scale * theta;
  d.tp.a = cfg.a_scale * beta_quantile(cfg.a_alpha, cfg.a_beta, ua);
  d.z = cfg.z_lo + (cfg.z_hi - cfg.z_lo) * d.rng.uniform();
  return d;
}

double quantize_damage(double d, double upper) {
  double q = std::round(d * 1e6) / 1e6;
  if (q < 1e-6) q = 1e-6;
  if (std::isfinite(upper) && q >= upper) q = upper - 1e-6;
  return q;
}

}  // namespace

double beta_quantile(double alpha, double beta, double u) {
  if (alpha == 1.0 && beta == 1.0) return u;
  if (alpha == 1.0) return -std::expm1(std::log1p(-u) / beta);
  if (beta == 1.0) return std::pow(u, 1.0 / alpha);
  return boost::math::ibeta_inv(alpha, beta, u);
}

double beta_cdf(double alpha, double beta, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(alpha, beta, x);
}

void DgpConfig::validate() const {
  if (n < 1) throw InvalidArgument("dgp: n must be >= 1");
  if (!(theta_alpha > 0.0 && theta_beta > 0.0 && a_alpha > 0.0 && a_beta > 0.0)) {
    throw InvalidArgument("dgp: Beta shape parameters must be positive");
  }
  if (!(a_scale > 0.0)) throw InvalidArgument("dgp: a_scale must be positive");
  if (!(copula_rho > -1.0 && copula_rho < 1.0)) {
    throw InvalidArgument("dgp: copula_rho must lie in (-1, 1)");
  }
  if (!(z_lo < z_hi)) throw InvalidArgument("dgp: z_lo must be below z_hi");
  if (theta_fixed && !(*theta_fixed > 0.0)) throw InvalidArgument("dgp: theta_fixed must be > 0");
  if (!(theta_scale > 0.0)) throw InvalidArgument("dgp: theta_scale must be positive");
  for (double z : {z_lo, z_hi}) {
    if (!menu.menu(z, damage.upper_bound()).satisfies_revealed_preference()) {
      throw InvalidArgument("dgp: menu rule violates revealed-preference ordering at z=" +
                            format_value(z));
    }
  }
}

std::vector<TypePair> sample_types(const DgpConfig& cfg) {
  cfg.validate();
  std::vector<TypePair> out;
  out.reserve(static_cast<std::size_t>(cfg.n));
  for (long i = 0; i < cfg.n; ++i) out.push_back(draw_record(cfg, i).tp);
  return out;
}

std::vector<InsureeRecord> simulate_dataset(const DgpConfig& cfg) {
  cfg.validate();
  const double upper = cfg.damage.upper_bound();
  std::vector<InsureeRecord> out;
  out.reserve(static_cast<std::size_t>(cfg.n));
  for (long i = 0; i < cfg.n; ++i) {
    Draw d = draw_record(cfg, i);
    InsureeRecord r;
    r.id = i;
    r.z = d.z;
    r.truth = d.tp;
    const double frontier =
        frontier_theta(d.tp.a, cfg.menu.lower(d.z), cfg.menu.upper(d.z), cfg.damage);
    r.chi = d.tp.theta <= frontier ? 1 : 2;
    r.j = poisson_inverse(d.tp.theta, d.rng.uniform());
    r.damages.reserve(static_cast<std::size_t>(r.j));
    for (long k = 0; k < r.j; ++k) {
      r.damages.push_back(quantize_damage(cfg.damage.quantile(d.rng.uniform()), upper));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<InsureeRecord> apply_truncation(const std::vector<InsureeRecord>& records,
                                            const MenuRule& rule) {
  std::vector<InsureeRecord> out = records;
  for (auto& r : out) {
    const double dd = rule.deductible(r.chi);
    std::vector<double> kept;
    for (double d : r.damages) {
      if (d > dd) kept.push_back(d);
    }
    r.damages = std::move(kept);
    r.j = static_cast<long>(r.damages.size());
  }
  return out;
}

DgpConfig dgp_config_from(const KeyValueConfig& kv) {
  DgpConfig c;
  c.n = kv.get_long("n", c.n);
  c.theta_alpha = kv.get_double("theta_alpha", c.theta_alpha);
  c.theta_beta = kv.get_double("theta_beta", c.theta_beta);
  c.a_alpha = kv.get_double("a_alpha", c.a_alpha);
  c.a_beta = kv.get_double("a_beta", c.a_beta);
  c.a_scale = kv.get_double("a_scale", c.a_scale);
  c.copula_rho = kv.get_double("copula_rho", c.copula_rho);
  if (const auto d = kv.find("damage")) {
    try {
      c.damage = DamageDist::parse(*d);
    } catch (const InvalidArgument& e) {
      throw ConfigError("damage", e.what());
    }
  }
  c.z_lo = kv.get_double("z_lo", c.z_lo);
  c.z_hi = kv.get_double("z_hi", c.z_hi);
  c.menu.t1_intercept = kv.get_double("menu.t1_intercept", c.menu.t1_intercept);
  c.menu.t1_slope = kv.get_double("menu.t1_slope", c.menu.t1_slope);
  c.menu.dd1 = kv.get_double("menu.dd1", c.menu.dd1);
  c.menu.t2_intercept = kv.get_double("menu.t2_intercept", c.menu.t2_intercept);
  c.menu.t2_slope = kv.get_double("menu.t2_slope", c.menu.t2_slope);
  c.menu.dd2 = kv.get_double("menu.dd2", c.menu.dd2);
  c.theta_fixed = kv.find_double("theta_fixed");
  c.theta_scale = kv.get_double("theta_scale", c.theta_scale);
  c.seed = kv.require_u64("seed");
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("dgp", e.what());
  }
  return c;
}

std::string describe(const DgpConfig& c) {
  std::string out;
  auto line = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  line("n", std::to_string(c.n));
  line("theta_alpha", format_exact(c.theta_alpha));
  line("theta_beta", format_exact(c.theta_beta));
  line("a_alpha", format_exact(c.a_alpha));
  line("a_beta", format_exact(c.a_beta));
  line("a_scale", format_exact(c.a_scale));
  line("copula_rho", format_exact(c.copula_rho));
  line("damage", c.damage.describe());
  line("z_lo", format_exact(c.z_lo));
  line("z_hi", format_exact(c.z_hi));
  line("menu.t1_intercept", format_exact(c.menu.t1_intercept));
  line("menu.t1_slope", format_exact(c.menu.t1_slope));
  line("menu.dd1", format_exact(c.menu.dd1));
  line("menu.t2_intercept", format_exact(c.menu.t2_intercept));
  line("menu.t2_slope", format_exact(c.menu.t2_slope));
  line("menu.dd2", format_exact(c.menu.dd2));
  if (c.theta_fixed) line("theta_fixed", format_exact(*c.theta_fixed));
  line("theta_scale", format_exact(c.theta_scale));
  line("seed", std::to_string(c.seed));
  return out;
}

}  // namespace inslab
