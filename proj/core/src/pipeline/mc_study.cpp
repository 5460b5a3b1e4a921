#include "inslab/pipeline/mc_study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <thread>

#include "inslab/common/error.hpp"
#include "inslab/common/format.hpp"
#include "inslab/common/rng.hpp"

namespace inslab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RepOutput {
  std::vector<double> f_theta;
  std::vector<std::vector<double>> f_a;
  std::vector<double> range_lo, range_hi;
};

}  // namespace

double sample_quantile(std::vector<double> values, double p) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return !std::isfinite(v); }),
               values.end());
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

McSummary summarize_curves(const std::string& name, const std::vector<double>& grid,
                           const std::vector<std::vector<double>>& rows) {
  McSummary s;
  s.name = name;
  s.grid = grid;
  s.reps = static_cast<int>(rows.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> col;
    col.reserve(rows.size());
    double sum = 0.0;
    int count = 0;
    for (const auto& r : rows) {
      col.push_back(r[i]);
      if (std::isfinite(r[i])) {
        sum += r[i];
        ++count;
      }
    }
    s.mean.push_back(count ? sum / count : kNaN);
    s.q05.push_back(sample_quantile(col, 0.05));
    s.q95.push_back(sample_quantile(std::move(col), 0.95));
  }
  return s;
}

std::uint64_t replication_seed(std::uint64_t master, int rep) {
  return derive_seed(master, static_cast<std::uint64_t>(rep));
}

McResult mc_study(const DgpConfig& dgp, const EstimatorConfig& est, const McOptions& opts) {
  if (opts.reps < 2) throw InvalidArgument("mc_study: reps must be >= 2");
  dgp.validate();
  est.validate();
  const auto theta_grid = uniform_grid(0.0, 1.0, static_cast<std::size_t>(est.theta_grid_points));
  const auto a_grid = uniform_grid(0.0, est.a_bar, static_cast<std::size_t>(est.a_grid_points));

  std::vector<std::optional<RepOutput>> outputs(opts.reps);
  std::vector<std::string> errors(opts.reps);
  std::atomic<int> next{0};
  auto worker = [&] {
    while (true) {
      const int r = next.fetch_add(1);
      if (r >= opts.reps) return;
      try {
        DgpConfig c = dgp;
        c.seed = opts.identical_seeds ? dgp.seed : replication_seed(dgp.seed, r);
        const auto records = simulate_dataset(c);
        const EstimateBundle b = run_three_step(records, c.menu, est);
        RepOutput out;
        for (double t : theta_grid) out.f_theta.push_back(b.step1.density(t));
        for (const auto& s3 : b.step3) {
          out.f_a.push_back(s3.density);
          out.range_lo.push_back(s3.range_lo);
          out.range_hi.push_back(s3.range_hi);
        }
        outputs[r] = std::move(out);
      } catch (const std::exception& e) {
        errors[r] = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min(opts.threads, opts.reps));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  McResult res;
  res.reps_requested = opts.reps;
  res.theta_stars = est.theta_stars;
  res.range_lo.resize(est.theta_stars.size());
  res.range_hi.resize(est.theta_stars.size());
  std::vector<std::vector<double>> f_theta_rows;
  std::vector<std::vector<std::vector<double>>> f_a_rows(est.theta_stars.size());
  for (int r = 0; r < opts.reps; ++r) {
    if (!outputs[r]) {
      ++res.failures;
      res.failure_messages.push_back("replication " + std::to_string(r) + ": " + errors[r]);
      continue;
    }
    f_theta_rows.push_back(outputs[r]->f_theta);
    for (std::size_t t = 0; t < est.theta_stars.size(); ++t) {
      f_a_rows[t].push_back(outputs[r]->f_a[t]);
      res.range_lo[t].push_back(outputs[r]->range_lo[t]);
      res.range_hi[t].push_back(outputs[r]->range_hi[t]);
    }
  }
  res.reps_used = opts.reps - res.failures;
  if (res.failures * 10 > opts.reps || res.reps_used < 2) {
    throw NumericFailure("mc_study: " + std::to_string(res.failures) + " of " +
                         std::to_string(opts.reps) + " replications failed; first: " +
                         (res.failure_messages.empty() ? "" : res.failure_messages.front()));
  }
  res.f_theta = summarize_curves("f_theta", theta_grid, f_theta_rows);
  for (std::size_t t = 0; t < est.theta_stars.size(); ++t) {
    res.f_a.push_back(summarize_curves("f_a_given_theta=" + format_exact(est.theta_stars[t]),
                                       a_grid, f_a_rows[t]));
  }
  return res;
}

std::string fa_curve_filename(double theta_star) {
  if (theta_star == 0.4) return "fig5_fa_theta04.csv";
  if (theta_star == 0.6) return "fig6_fa_theta06.csv";
  std::string digits = format_exact(theta_star);
  digits.erase(std::remove(digits.begin(), digits.end(), '.'), digits.end());
  return "fa_theta" + digits + ".csv";
}

void write_summary_csv(const McSummary& s, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  std::fputs("grid,mean,q05,q95\n", out);
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    std::fprintf(out, "%s,%s,%s,%s\n", format_value(s.grid[i]).c_str(),
                 format_value(s.mean[i]).c_str(), format_value(s.q05[i]).c_str(),
                 format_value(s.q95[i]).c_str());
  }
  std::fclose(out);
}

void write_mc_curves(const McResult& res, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_summary_csv(res.f_theta, (fs::path(dir) / "fig4_ftheta.csv").string());
  for (std::size_t t = 0; t < res.f_a.size(); ++t) {
    write_summary_csv(res.f_a[t],
                      (fs::path(dir) / fa_curve_filename(res.theta_stars[t])).string());
  }
}

}  // namespace inslab
