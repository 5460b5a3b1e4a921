// One PASS/FAIL line per primary criterion; exit status 1 on any failure
// not listed with --known-fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "frozen.hpp"
#include "inslab/common/config.hpp"
#include "inslab/common/format.hpp"
#include "inslab/common/rng.hpp"
#include "inslab/common/sampling.hpp"
#include "inslab/dgp_sim/dgp.hpp"
#include "inslab/model_core/contracts.hpp"
#include "inslab/model_core/quadrature.hpp"
#include "inslab/np_estim/moments.hpp"
#include "inslab/oracle/oracle.hpp"
#include "inslab/pipeline/mc_study.hpp"
#include "inslab/pipeline/step3.hpp"
#include "inslab/truncation/truncation.hpp"
#include "test_stats.hpp"

namespace fs = std::filesystem;
using namespace inslab;

namespace {

// Tolerances.
constexpr double kFrontierTol = 1e-3;
constexpr double kPremiumTol = 1.0;
constexpr double kAnchorSeconds = 1.0;
constexpr double kBandCoverageStep1 = 0.90;
constexpr double kIaeStep1 = 0.10;
constexpr double kStep1Seconds = 300.0;
constexpr double kBandCoverageStep3 = 0.85;
constexpr double kStep3Seconds = 600.0;
constexpr double kEndpointLo = 0.35e-3;
constexpr double kEndpointHi = 0.55e-3;
constexpr double kEndpointRelTol = 0.05;
constexpr double kIaeOraclePlugIn = 0.02;
constexpr double kMgfSe = 4.0;
constexpr double kLambdaTol = 0.01;
constexpr double kH2Tol = 0.01;
constexpr double kChiLevel = 0.99;

const std::string kConfigDir = INSLAB_CONFIG_DIR;

int g_failed = 0;
int g_unexpected = 0;
std::set<int> g_known_fail;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  const bool known = g_known_fail.count(id) != 0;
  std::printf("%s  %2d  %-24s %s%s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(),
              !ok && known ? "  [known]" : "");
  std::fflush(stdout);
  if (!ok) ++g_failed;
  if (!ok && !known) ++g_unexpected;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double beta23(double t) { return 12.0 * t * (1 - t) * (1 - t); }

const DamageDist kUnif = DamageDist::uniform(0.0, 1e4);

void frontier_anchor() {
  const auto t0 = std::chrono::steady_clock::now();
  const double th = frontier_theta(5e-4, {600, 1000}, {850, 500}, kUnif);
  const double oracle_th = oracle::frontier(kUnif, {600, 1000}, {850, 500}, 5e-4);
  const double dt = seconds_since(t0);
  report(1, "frontier anchor",
         std::abs(th - 0.371) <= kFrontierTol && std::abs(th - oracle_th) <= 1e-9 &&
             dt < kAnchorSeconds,
         fmt("theta=%.6f oracle=%.6f %.3fs", th, oracle_th, dt));
}

void exclusion_anchor() {
  const auto t0 = std::chrono::steady_clock::now();
  // Premium of coverage 1 that puts the no-insurance frontier through (0.1, 1e-4).
  const double premium = 0.1 * kUnif.survival_exp_integral(1e-4, 1000.0, 1e4, 0);
  const double through = frontier_theta(1e-4, {0, 1e4}, {premium, 1000}, kUnif);
  const double dt = seconds_since(t0);
  report(2, "exclusion anchor",
         std::abs(premium - 618.5) <= kPremiumTol && std::abs(through - 0.1) <= 1e-9 &&
             dt < kAnchorSeconds,
         fmt("premium=%.3f theta=%.9f %.3fs", premium, through, dt));
}

void menu_validation() {
  const auto ok = validate_menu({{{600, 1000}, {850, 500}, {1000, 250}}, 1e4}, kUnif, 1e-4);
  const auto bad = validate_menu({{{100, 1000}, {850, 500}, {1000, 250}}, 1e4}, kUnif, 1e-4);
  report(3, "menu validation",
         ok.rp_ok && ok.ordering_ok && ok.convexity_ok && bad.rp_ok && !bad.ordering_ok,
         std::string("base=") + (ok.rp_ok ? "T" : "F") + (ok.ordering_ok ? "T" : "F") +
             (ok.convexity_ok ? "T" : "F") + " t1=100 ordering=" +
             (bad.ordering_ok ? "true" : "false"));
}

void moment_rule() {
  const int m = moment_order_rule(100000);
  report(4, "moment rule", m == 4, "M(1e5)=" + std::to_string(m));
}

McResult desk_study(double* elapsed) {
  const auto kv = KeyValueConfig::load(kConfigDir + "/desk.cfg");
  const auto dgp = dgp_config_from(kv);
  const auto est = estimator_config_from(kv);
  McOptions opts;
  opts.reps = static_cast<int>(kv.get_long("mc.reps", 25));
  opts.threads = 1;
  const auto t0 = std::chrono::steady_clock::now();
  auto res = mc_study(dgp, est, opts);
  *elapsed = seconds_since(t0);
  return res;
}

void step1_band(const McResult& res, double dt) {
  const auto& s = res.f_theta;
  int inside = 0, total = 0;
  std::vector<double> truth;
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const double t = s.grid[i];
    truth.push_back(beta23(t));
    if (t < 0.05 - 1e-12 || t > 0.95 + 1e-12) continue;
    ++total;
    inside += truth.back() >= s.q05[i] && truth.back() <= s.q95[i];
  }
  const double cov = static_cast<double>(inside) / total;
  const double err = test::iae(s.grid, s.mean, truth);
  report(5, "step 1 band (desk)",
         cov >= kBandCoverageStep1 && err <= kIaeStep1 && dt <= kStep1Seconds,
         fmt("coverage=%.3f iae=%.4f reps=%.0f %.0fs", cov, err, res.reps_used, dt));
}

void step3_full_support(const McResult& res, const DgpConfig& dgp, double dt) {
  const auto it = std::find(res.theta_stars.begin(), res.theta_stars.end(), 0.4);
  const auto t = static_cast<std::size_t>(it - res.theta_stars.begin());
  const auto& s = res.f_a[t];
  bool full = true;
  for (std::size_t r = 0; r < res.range_lo[t].size(); ++r) {
    full = full && res.range_lo[t][r] == 0.0 && res.range_hi[t][r] == dgp.a_scale;
  }
  int inside = 0, total = 0;
  for (std::size_t i = 1; i + 1 < s.grid.size(); ++i) {
    const double f = oracle::true_conditional_density(0.4, s.grid[i], dgp);
    ++total;
    inside += f >= s.q05[i] && f <= s.q95[i];
  }
  const double cov = static_cast<double>(inside) / total;
  report(6, "step 3 theta*=0.4 (desk)", full && cov >= kBandCoverageStep3 && dt <= kStep3Seconds,
         fmt("full_range=%.0f coverage=%.3f %.0fs", full, cov, dt));
}

void step3_partial_support(const McResult& res, const DgpConfig& dgp, double dt) {
  const auto it = std::find(res.theta_stars.begin(), res.theta_stars.end(), 0.6);
  const auto t = static_cast<std::size_t>(it - res.theta_stars.begin());
  const double est = sample_quantile(res.range_hi[t], 0.5);
  const double orc = oracle::identified_range(0.6, dgp).hi;
  const double rel = std::abs(est - orc) / orc;
  report(7, "step 3 theta*=0.6 (desk)",
         est >= kEndpointLo && est <= kEndpointHi && orc >= kEndpointLo && orc <= kEndpointHi &&
             rel <= kEndpointRelTol && dt <= kStep3Seconds,
         fmt("endpoint=%.4e oracle=%.4e rel=%.4f %.0fs", est, orc, rel, dt));
}

void oracle_plug_in(const DgpConfig& dgp) {
  Step3Inputs in;
  in.frontier = [&](double a, double z) {
    return oracle::frontier(dgp.damage, dgp.menu.lower(z), dgp.menu.upper(z), a);
  };
  in.frontier_da = [&](double a, double z) {
    return frontier_theta_da(a, dgp.menu.lower(z), dgp.menu.upper(z), dgp.damage);
  };
  in.choice_prob = [&](double theta, double z) { return oracle::true_choice_prob(theta, z, dgp); };
  in.z_lo = dgp.z_lo;
  in.z_hi = dgp.z_hi;
  in.h_z = 0.05;
  in.a_bar = dgp.a_scale;
  const auto grid = uniform_grid(0.0, dgp.a_scale, 101);
  const auto r = step3_density(in, 0.4, grid);
  std::vector<double> truth;
  for (double a : grid) truth.push_back(oracle::true_conditional_density(0.4, a, dgp));
  const double err = test::iae(grid, r.density, truth);
  report(8, "oracle plug-in", err <= kIaeOraclePlugIn, fmt("iae=%.5f", err));
}

// Worst |mean((1+u)^J) - MGF| in standard errors over u.
double mgf_gap(const std::vector<long>& js, const std::function<double(double)>& mgf) {
  double worst = 0.0;
  for (double u : {-0.5, 0.2, 1.0}) {
    std::vector<double> v;
    v.reserve(js.size());
    for (long j : js) v.push_back(std::pow(1.0 + u, static_cast<double>(j)));
    worst = std::max(worst, std::abs(test::mean_of(v) - mgf(u)) / test::se_of(v));
  }
  return worst;
}

void identity_suite() {
  DgpConfig dgp;
  dgp.n = 100000;
  dgp.seed = 31;
  std::vector<long> mix;
  for (const auto& r : simulate_dataset(dgp)) mix.push_back(r.j);
  const double gap_mix = mgf_gap(mix, [](double u) {
    return gauss_legendre([&](double t) { return std::exp(t * u) * beta23(t); }, 0.0, 1.0);
  });
  Rng rng(23);
  std::vector<long> degen(200000);
  for (auto& j : degen) j = poisson_inverse(0.7, rng.uniform());
  const double gap_deg = mgf_gap(degen, [](double u) { return std::exp(0.7 * u); });

  long violations = 0;
  for (double a : uniform_grid(5e-5, 1e-3, 20)) {
    for (double dd : uniform_grid(0.0, 9500.0, 20)) {
      const double p = phi(a, dd, kUnif);
      violations += dd == 0.0 ? p != 1.0 : !(p > 1.0);
    }
  }
  const auto thetas = uniform_grid(0.05, 1.0, 12);
  const auto as = uniform_grid(1e-4, 1e-3, 12);
  for (const Coverage cov : {Coverage{600, 1000}, Coverage{850, 500}, Coverage{900, 0}}) {
    for (std::size_t i = 0; i + 1 < thetas.size(); ++i) {
      for (std::size_t k = 0; k + 1 < as.size(); ++k) {
        const double base = certainty_equivalent(cov, {thetas[i], as[k]}, 0, kUnif);
        const double up_t = certainty_equivalent(cov, {thetas[i + 1], as[k]}, 0, kUnif);
        const double up_a = certainty_equivalent(cov, {thetas[i], as[k + 1]}, 0, kUnif);
        if (cov.deductible > 0.0) {
          violations += !(up_t < base) + !(up_a < base);
        } else {
          violations += (up_t != base) + (up_a != base);
        }
      }
    }
  }
  const auto dgrid = uniform_grid(1e-4, 1e-3, 40);
  for (const auto& H : {kUnif, DamageDist::exponential(5000.0)}) {
    for (std::size_t k = 0; k + 1 < dgrid.size(); ++k) {
      violations += !(frontier_theta(dgrid[k + 1], {600, 1000}, {850, 500}, H) <
                      frontier_theta(dgrid[k], {600, 1000}, {850, 500}, H));
    }
  }
  const ContractMenu menu{{{600, 1000}, {850, 500}, {1000, 250}}, 1e4};
  const auto st = uniform_grid(0.05, 1.0, 15);
  const auto sa = uniform_grid(1e-4, 1e-3, 15);
  for (std::size_t c = 1; c < menu.size(); ++c) {
    auto gain = [&](double th, double a) {
      return certainty_equivalent(menu.at(c + 1), {th, a}, 0, kUnif) -
             certainty_equivalent(menu.at(c), {th, a}, 0, kUnif);
    };
    for (std::size_t i = 0; i + 1 < st.size(); ++i) {
      for (std::size_t k = 0; k + 1 < sa.size(); ++k) {
        violations += !(gain(st[i + 1], sa[k]) > gain(st[i], sa[k]));
        violations += !(gain(st[i], sa[k + 1]) > gain(st[i], sa[k]));
      }
    }
  }
  report(9, "identity suite", gap_mix <= kMgfSe && gap_deg <= kMgfSe && violations == 0,
         fmt("mgf_mix=%.2fse mgf_degen=%.2fse grid_violations=%.0f", gap_mix, gap_deg,
             static_cast<double>(violations)));
}

std::vector<double> jstar_cells(const std::vector<InsureeRecord>& recs, int chi) {
  std::vector<double> c(6, 0.0);
  for (const auto& r : recs) {
    if (r.chi == chi) c[std::min<long>(r.j, 5)] += 1;
  }
  return c;
}

void truncation_suite() {
  const auto ex = DamageDist::exponential(5000.0);
  Rng rng(1);
  std::vector<double> claims;
  while (claims.size() < 100000) {
    const double d = ex.quantile(rng.uniform());
    if (d > 500.0) claims.push_back(d);
  }
  const double lambda = estimate_lambda(claims, 1000.0);

  DgpConfig base;
  base.n = 100000;
  base.seed = 51;
  const auto trunc = apply_truncation(simulate_dataset(base), base.menu);
  const auto h2 = h2_from_known_mean(0.4, summarize_truncated(trunc, base.menu, 4)).value;

  int equivalence_failures = 0;
  base.seed = 61;
  const auto a = apply_truncation(simulate_dataset(base), base.menu);
  for (double kappa : {1.05, 1.2, 1.5}) {
    auto alt = equivalent_structure(kappa, base);
    alt.seed = 62;
    const auto b = apply_truncation(simulate_dataset(alt), alt.menu);
    int df = 0;
    double n1a = 0, n1b = 0;
    for (const auto& r : a) n1a += r.chi == 1;
    for (const auto& r : b) n1b += r.chi == 1;
    equivalence_failures += test::chi_squared_homogeneity({n1a, a.size() - n1a},
                                                          {n1b, b.size() - n1b}, &df) >=
                            test::chi_squared_quantile(df, kChiLevel);
    for (int chi : {1, 2}) {
      const double stat =
          test::chi_squared_homogeneity(jstar_cells(a, chi), jstar_cells(b, chi), &df);
      equivalence_failures += stat >= test::chi_squared_quantile(df, kChiLevel);
      const auto da = claims_of_contract(a, chi), db = claims_of_contract(b, chi);
      equivalence_failures +=
          test::ks_two_sample(da, db) >= test::ks_two_sample_critical(da.size(), db.size());
    }
  }
  report(10, "truncation suite",
         std::abs(lambda - frozen::kLambdaExp) <= kLambdaTol &&
             std::abs(h2 - frozen::kH2Exp) <= kH2Tol && equivalence_failures == 0,
         fmt("lambda=%.4f h2=%.4f equivalence_failures=%.0f", lambda, h2,
             static_cast<double>(equivalence_failures)));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism() {
  const auto root = fs::temp_directory_path() / "inslab_acceptance_mc";
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"t1a", "1"}, {"t1b", "1"}, {"t3", "3"}};
  bool ran = true;
  for (const auto& [dir, threads] : runs) {
    std::ostringstream out, err;
    ran = ran && cli::run({"mc", "--config", kConfigDir + "/desk.cfg", "--reps", "6", "--threads",
                           threads, "--out", (root / dir).string()},
                          out, err) == cli::kExitOk;
  }
  int files = 0, differ = 0;
  if (ran) {
    for (const auto& e : fs::directory_iterator(root / "t1a")) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      const auto ref = slurp(e.path());
      for (const char* other : {"t1b", "t3"}) {
        differ += slurp(root / other / e.path().filename()) != ref;
      }
    }
  }
  report(11, "determinism", ran && files > 0 && differ == 0,
         fmt("csv_files=%.0f mismatches=%.0f (threads 1,1,3)", files, differ));
}

}  // namespace

// --known-fail N (repeatable): criterion N may fail without failing the run.
int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--known-fail" && i + 1 < argc) {
      g_known_fail.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--known-fail N]...\n");
      return 2;
    }
  }
  frontier_anchor();
  exclusion_anchor();
  menu_validation();
  moment_rule();

  const auto dgp = dgp_config_from(KeyValueConfig::load(kConfigDir + "/desk.cfg"));
  double dt = 0.0;
  const auto desk = desk_study(&dt);
  step1_band(desk, dt);
  step3_full_support(desk, dgp, dt);
  step3_partial_support(desk, dgp, dt);

  oracle_plug_in(dgp);
  identity_suite();
  truncation_suite();
  determinism();

  std::printf("%d of 11 criteria failed, %d unexpectedly\n", g_failed, g_unexpected);
  return g_unexpected ? 1 : 0;
}
