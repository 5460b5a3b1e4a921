#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "inslab/common/error.hpp"
#include "inslab/common/format.hpp"
#include "inslab/dgp_sim/dataset_io.hpp"
#include "inslab/dgp_sim/dgp.hpp"
#include "inslab/model_core/contracts.hpp"
#include "inslab/np_estim/density_io.hpp"
#include "inslab/oracle/oracle.hpp"
#include "inslab/pipeline/mc_study.hpp"
#include "inslab/pipeline/three_step.hpp"

namespace fs = std::filesystem;

namespace inslab::cli {
namespace {

struct Settings {
  KeyValueConfig kv;
  DgpConfig dgp;
  EstimatorConfig est;
  int reps = 100;
  int threads = 1;
  long oracle_sims = 1000000;
};

/// Loads the config file (empty path = defaults), applies the seed override
/// and rejects keys nobody read.
Settings load_settings(const std::string& path, const std::optional<std::uint64_t>& seed) {
  Settings s;
  if (!path.empty()) {
    try {
      s.kv = KeyValueConfig::load(path);
    } catch (const ParseError& e) {
      throw ConfigError("config", e.what());
    }
  }
  if (seed) s.kv.set("seed", std::to_string(*seed));
  s.dgp = dgp_config_from(s.kv);
  s.est = estimator_config_from(s.kv);
  s.reps = static_cast<int>(s.kv.get_long("mc.reps", s.reps));
  s.threads = static_cast<int>(s.kv.get_long("mc.threads", s.threads));
  s.oracle_sims = s.kv.get_long("oracle.n_sims", s.oracle_sims);
  const auto unused = s.kv.unused_keys();
  if (!unused.empty()) throw ConfigError(unused.front(), "unknown key");
  return s;
}

void check_counts(const Settings& s) {
  if (s.reps < 2) throw ConfigError("mc.reps", "must be >= 2");
  if (s.threads < 1) throw ConfigError("mc.threads", "must be >= 1");
  if (s.oracle_sims < 1000000) throw ConfigError("oracle.n_sims", "must be >= 1000000");
}

std::string prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("--out", "cannot create output directory '" + dir + "'");
  }
  return dir;
}

std::FILE* open_out(const fs::path& p) {
  std::FILE* f = std::fopen(p.string().c_str(), "w");
  if (!f) throw InvalidArgument("cannot write '" + p.string() + "'");
  return f;
}

void write_text(const fs::path& p, const std::string& text) {
  std::FILE* f = open_out(p);
  std::fputs(text.c_str(), f);
  std::fclose(f);
}

/// Config echo plus the outcome. Contains no timestamps or thread counts so
/// repeated runs produce the same file.
struct Manifest {
  std::string command;
  std::string config;
  std::vector<std::pair<std::string, std::string>> results;
  std::string status = "ok";

  void write(const std::string& dir) const {
    std::string text = "command = " + command + "\nstatus = " + status + "\n";
    text += config;
    for (const auto& [k, v] : results) text += k + " = " + v + "\n";
    write_text(fs::path(dir) / "manifest.txt", text);
  }
};

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

/// Runs `body`, recording failures in the manifest before rethrowing.
template <class F>
void with_manifest(Manifest& m, const std::string& dir, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    m.status = std::string("failed: ") + one_line(e.what());
    m.write(dir);
    throw;
  }
  m.write(dir);
}

// ---- curve files ---------------------------------------------------------

void write_xy(const fs::path& p, const std::string& header, const std::vector<double>& x,
              const std::vector<std::vector<double>>& cols) {
  std::FILE* f = open_out(p);
  std::fprintf(f, "%s\n", header.c_str());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::string line = format_value(x[i]);
    for (const auto& c : cols) line += "," + format_value(c[i]);
    std::fprintf(f, "%s\n", line.c_str());
  }
  std::fclose(f);
}

std::string true_curve_filename(double theta_star) {
  return "true_" + fa_curve_filename(theta_star);
}

void write_true_curves(const DgpConfig& dgp, const EstimatorConfig& est, const std::string& dir) {
  const auto tg = uniform_grid(0.0, 1.0, est.theta_grid_points);
  std::vector<double> ft;
  for (double t : tg) ft.push_back(oracle::theta_density(dgp, t));
  write_xy(fs::path(dir) / "true_ftheta.csv", "grid,value", tg, {ft});
  const auto ag = uniform_grid(0.0, est.a_bar, est.a_grid_points);
  for (double ts : est.theta_stars) {
    std::vector<double> fa;
    for (double a : ag) fa.push_back(oracle::true_conditional_density(ts, a, dgp));
    write_xy(fs::path(dir) / true_curve_filename(ts), "grid,value", ag, {fa});
  }
}

/// Frontier curves of the two-contract example on Uniform[0, 1e4]:
/// no insurance vs (600, 1000) and (600, 1000) vs (850, 500).
void write_fig1(const std::string& dir) {
  const DamageDist U = DamageDist::uniform(0.0, 1e4);
  const Coverage none{0.0, 1e4}, c1{600.0, 1000.0}, c2{850.0, 500.0};
  const auto ag = uniform_grid(0.0, 1e-3, 101);
  std::vector<double> t01, t12;
  for (double a : ag) {
    t01.push_back(frontier_theta(a, none, c1, U));
    t12.push_back(frontier_theta(a, c1, c2, U));
  }
  write_xy(fs::path(dir) / "fig1_frontiers.csv", "a,theta_none_1,theta_1_2", ag, {t01, t12});
}

void write_fig2_frontiers(const DgpConfig& dgp, const std::string& dir) {
  const auto ag = uniform_grid(0.0, dgp.a_scale, 101);
  std::string header = "a";
  std::vector<std::vector<double>> cols;
  for (double z = 110.0; z <= 190.0; z += 20.0) {
    header += ",z" + format_exact(z);
    std::vector<double> c;
    for (double a : ag) {
      c.push_back(frontier_theta(a, dgp.menu.lower(z), dgp.menu.upper(z), dgp.damage));
    }
    cols.push_back(std::move(c));
  }
  write_xy(fs::path(dir) / "fig2_frontiers.csv", header, ag, cols);
}

void write_fig2_types(const std::vector<InsureeRecord>& recs, const std::string& dir) {
  std::FILE* f = open_out(fs::path(dir) / "fig2_types.csv");
  std::fputs("id,z,theta,a,chi\n", f);
  const std::size_t n = std::min<std::size_t>(recs.size(), 5000);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = recs[i];
    std::fprintf(f, "%ld,%s,%s,%s,%d\n", r.id, format_value(r.z).c_str(),
                 format_value(r.truth->theta).c_str(), format_value(r.truth->a).c_str(), r.chi);
  }
  std::fclose(f);
}

void write_fig3(const std::vector<InsureeRecord>& recs, const std::string& dir) {
  std::map<long, long> hist;
  for (const auto& r : recs) ++hist[r.j];
  std::FILE* f = open_out(fs::path(dir) / "fig3_j_hist.csv");
  std::fputs("j,count\n", f);
  for (long j = 0; j <= hist.rbegin()->first; ++j) {
    std::fprintf(f, "%ld,%ld\n", j, hist.count(j) ? hist[j] : 0L);
  }
  std::fclose(f);
}

void write_bundle(const EstimateBundle& b, const std::string& dir) {
  write_density_csv(b.step1.density, (fs::path(dir) / "step1_ftheta.csv").string());
  for (const auto& fit : b.step2) {
    const auto tg = uniform_grid(0.0, 1.0, 201);
    std::vector<double> cd, pr;
    for (double t : tg) {
      cd.push_back(fit.conditional_density(t));
      pr.push_back(fit.choice_prob(t));
    }
    write_xy(fs::path(dir) / ("step2_z" + format_exact(fit.z0) + ".csv"),
             "theta,conditional_density,choice_prob", tg, {cd, pr});
  }
  for (const auto& r : b.step3) {
    write_xy(fs::path(dir) / ("step3_" + fa_curve_filename(r.theta_star)), "grid,value,z", r.a_grid,
             {r.density, r.z_of_a});
  }
}

// ---- subcommands ---------------------------------------------------------

struct Flags {
  std::string config;
  std::string out;
  std::string in;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<int> threads;
  std::string menu;
  std::string damage;
  double a_lower = 0.0;
};

std::string config_echo(const Settings& s) {
  return describe(s.dgp) + describe(s.est);
}

int cmd_simulate(const Flags& fl, std::ostream& out) {
  const Settings s = load_settings(fl.config, fl.seed);
  const std::string dir = prepare_dir(fl.out);
  Manifest m{"simulate", config_echo(s), {}};
  with_manifest(m, dir, [&] {
    const auto recs = simulate_dataset(s.dgp);
    write_dataset(recs, dir);
    long claims = 0, chi1 = 0;
    for (const auto& r : recs) {
      claims += r.j;
      chi1 += r.chi == 1;
    }
    m.results = {{"records", std::to_string(recs.size())},
                 {"claims", std::to_string(claims)},
                 {"coverage1_share", format_exact(static_cast<double>(chi1) / recs.size())}};
    out << "simulated " << recs.size() << " insurees, " << claims << " claims -> " << dir << "\n";
  });
  return kExitOk;
}

int cmd_estimate(const Flags& fl, std::ostream& out) {
  const Settings s = load_settings(fl.config, fl.seed);
  const std::string dir = prepare_dir(fl.out);
  Manifest m{"estimate", config_echo(s) + "input = " + fl.in + "\n", {}};
  with_manifest(m, dir, [&] {
    const auto recs = read_dataset(fl.in);
    const EstimateBundle b = run_three_step(recs, s.dgp.menu, s.est);
    write_bundle(b, dir);
    m.results = {{"records", std::to_string(recs.size())},
                 {"moment_order", std::to_string(b.moment_order)},
                 {"bandwidth", format_exact(b.bandwidth)},
                 {"h_z", format_exact(b.h_z)},
                 {"step2_fits", std::to_string(b.step2_fits)},
                 {"step2_flags", std::to_string(b.step2_flags)}};
    for (const auto& r : b.step3) {
      const std::string k = "theta_star_" + format_exact(r.theta_star);
      m.results.emplace_back(k + ".range", format_exact(r.range_lo) + "," + format_exact(r.range_hi));
      m.results.emplace_back(k + ".full_range", r.full_range ? "true" : "false");
    }
    out << "estimated: M=" << b.moment_order << " bandwidth=" << format_value(b.bandwidth)
        << " h_z=" << format_value(b.h_z) << "\n";
    for (const auto& r : b.step3) {
      out << "  theta*=" << format_value(r.theta_star) << " identified a in ["
          << format_value(r.range_lo) << ", " << format_value(r.range_hi) << "]"
          << (r.full_range ? " (full)" : "") << "\n";
    }
  });
  return kExitOk;
}

int cmd_mc(const Flags& fl, std::ostream& out) {
  Settings s = load_settings(fl.config, fl.seed);
  if (fl.reps) s.reps = *fl.reps;
  if (fl.threads) s.threads = *fl.threads;
  check_counts(s);
  const std::string dir = prepare_dir(fl.out);
  Manifest m{"mc", config_echo(s) + "mc.reps = " + std::to_string(s.reps) + "\n", {}};
  with_manifest(m, dir, [&] {
    write_fig1(dir);
    write_fig2_frontiers(s.dgp, dir);
    write_true_curves(s.dgp, s.est, dir);
    DgpConfig first = s.dgp;
    first.seed = replication_seed(s.dgp.seed, 0);
    const auto recs = simulate_dataset(first);
    write_fig2_types(recs, dir);
    write_fig3(recs, dir);

    const McResult res = mc_study(s.dgp, s.est, {s.reps, s.threads, false});
    write_mc_curves(res, dir);
    m.results = {{"reps_used", std::to_string(res.reps_used)},
                 {"failures", std::to_string(res.failures)}};
    for (std::size_t i = 0; i < res.failure_messages.size(); ++i) {
      m.results.emplace_back("failure." + std::to_string(i), one_line(res.failure_messages[i]));
    }
    for (std::size_t t = 0; t < res.theta_stars.size(); ++t) {
      const double lo = sample_quantile(res.range_lo[t], 0.5);
      const double hi = sample_quantile(res.range_hi[t], 0.5);
      m.results.emplace_back("theta_star_" + format_exact(res.theta_stars[t]) + ".median_range",
                             format_exact(lo) + "," + format_exact(hi));
    }
    out << "mc: " << res.reps_used << "/" << res.reps_requested << " replications ("
        << res.failures << " failed) -> " << dir << "\n";
  });
  return kExitOk;
}

std::vector<Coverage> parse_menu(const std::string& text) {
  std::vector<Coverage> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto comma = item.find(',');
    if (comma == std::string::npos) throw ConfigError("--menu", "expected t,dd pairs: " + item);
    try {
      std::size_t p1 = 0, p2 = 0;
      const std::string ts = item.substr(0, comma), ds = item.substr(comma + 1);
      const double t = std::stod(ts, &p1);
      const double d = std::stod(ds, &p2);
      if (p1 != ts.size() || p2 != ds.size()) throw std::invalid_argument(item);
      out.push_back({t, d});
    } catch (const std::logic_error&) {
      throw ConfigError("--menu", "cannot parse '" + item + "'");
    }
  }
  if (out.size() < 2) throw ConfigError("--menu", "need at least two contracts");
  return out;
}

int cmd_validate_menu(const Flags& fl, std::ostream& out) {
  const auto coverages = parse_menu(fl.menu);
  const DamageDist H = [&] {
    try {
      return DamageDist::parse(fl.damage);
    } catch (const InvalidArgument& e) {
      throw ConfigError("--damage", e.what());
    }
  }();
  if (!(fl.a_lower > 0.0)) throw ConfigError("--a-lower", "must be positive");
  const MenuReport r = validate_menu({coverages, H.upper_bound()}, H, fl.a_lower);
  out << "revealed_preference " << (r.rp_ok ? "true" : "false") << "\n";
  out << "frontier_ordering   " << (r.ordering_ok ? "true" : "false") << "\n";
  out << "convexity           " << (r.convexity_ok ? "true" : "false") << "\n";
  for (const auto& t : r.triples) {
    out << "  triple " << t.c << ": premium_ratio=" << format_value(t.premium_ratio)
        << " integral_ratio=" << format_value(t.integral_ratio)
        << " slope_upper=" << format_value(t.slope_upper)
        << " slope_lower=" << format_value(t.slope_lower) << " kappa=" << format_value(t.kappa)
        << "\n";
  }
  return kExitOk;
}

int cmd_oracle(const Flags& fl, std::ostream& out) {
  Settings s = load_settings(fl.config, fl.seed);
  check_counts(s);
  const auto reports = oracle::standard_reports(s.dgp, s.oracle_sims, s.dgp.seed);
  std::size_t w = 0;
  for (const auto& r : reports) w = std::max(w, r.quantity.size());
  for (const auto& r : reports) {
    out << r.quantity << std::string(w + 2 - r.quantity.size(), ' ') << format_value(r.value)
        << " +- " << format_value(r.error) << "  (" << r.method;
    if (r.method == "simulation") out << ", n=" << r.n << ", seed=" << r.seed;
    out << ")\n";
  }
  if (!fl.out.empty()) {
    const std::string dir = prepare_dir(fl.out);
    Manifest m{"oracle", config_echo(s) + "oracle.n_sims = " + std::to_string(s.oracle_sims) + "\n",
               {}};
    with_manifest(m, dir, [&] {
      std::FILE* f = open_out(fs::path(dir) / "oracle_reports.csv");
      std::fputs("quantity,value,method,n,seed,error\n", f);
      for (const auto& r : reports) {
        std::fprintf(f, "%s,%s,%s,%ld,%llu,%s\n", r.quantity.c_str(), format_value(r.value).c_str(),
                     r.method.c_str(), r.n, static_cast<unsigned long long>(r.seed),
                     format_value(r.error).c_str());
      }
      std::fclose(f);
      write_true_curves(s.dgp, s.est, dir);
    });
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and estimation of insurance choice under two-dimensional types",
               "inslab"};
  app.require_subcommand(1);
  Flags fl;
  std::uint64_t seed = 0;
  int reps = 0, threads = 0;

  auto add_config = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--config", fl.config, "key = value config file");
    if (required) o->required();
    sub->add_option("--seed", seed, "master seed (overrides the config)");
  };
  auto* sim = app.add_subcommand("simulate", "simulate a dataset");
  add_config(sim, true);
  sim->add_option("--out", fl.out, "output directory")->required();

  auto* est = app.add_subcommand("estimate", "run the three-step estimator on a dataset");
  add_config(est, true);
  est->add_option("--in", fl.in, "dataset directory")->required();
  est->add_option("--out", fl.out, "output directory")->required();

  auto* mc = app.add_subcommand("mc", "Monte Carlo replication study");
  add_config(mc, true);
  mc->add_option("--out", fl.out, "output directory")->required();
  mc->add_option("--reps", reps, "replications (overrides mc.reps)");
  mc->add_option("--threads", threads, "worker cap (overrides mc.threads)");

  auto* vm = app.add_subcommand("validate-menu", "check the menu conditions");
  vm->add_option("--menu", fl.menu, "contracts as t,dd;t,dd;...")->required();
  vm->add_option("--damage", fl.damage, "damage law, e.g. uniform:0,10000")->required();
  vm->add_option("--a-lower", fl.a_lower, "lower bound of risk aversion")->required();

  auto* orc = app.add_subcommand("oracle", "print reference values for a design");
  add_config(orc, false);
  orc->add_option("--out", fl.out, "also write CSVs to this directory");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  auto given = [](CLI::App* sub, const char* name) { return sub->count(name) > 0; };
  try {
    CLI::App* chosen = app.get_subcommands().front();
    if (chosen != vm && given(chosen, "--seed")) fl.seed = seed;
    if (chosen == mc) {
      if (given(mc, "--reps")) fl.reps = reps;
      if (given(mc, "--threads")) fl.threads = threads;
    }
    if (chosen == sim) return cmd_simulate(fl, out);
    if (chosen == est) return cmd_estimate(fl, out);
    if (chosen == mc) return cmd_mc(fl, out);
    if (chosen == vm) return cmd_validate_menu(fl, out);
    return cmd_oracle(fl, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace inslab::cli
