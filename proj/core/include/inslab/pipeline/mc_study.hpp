#pragma once

#include <string>
#include <vector>

#include "inslab/dgp_sim/dgp.hpp"
#include "inslab/pipeline/three_step.hpp"

namespace inslab {

/// Pointwise statistics of one estimated curve across replications. NaN
/// entries (points outside a replication's identified range) are skipped;
/// a point with no finite value stays NaN.
struct McSummary {
  std::string name;
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> q05;
  std::vector<double> q95;
  int reps = 0;
};

/// Type-7 (linear interpolation) sample quantile of finite values; NaN when
/// there are none.
double sample_quantile(std::vector<double> values, double p);

/// Pointwise mean and 5%/95% quantiles; rows[r] is replication r's curve.
McSummary summarize_curves(const std::string& name, const std::vector<double>& grid,
                           const std::vector<std::vector<double>>& rows);

struct McOptions {
  int reps = 100;
  int threads = 1;
  /// Test hook: every replication reuses the master seed.
  bool identical_seeds = false;
};

struct McResult {
  McSummary f_theta;
  std::vector<McSummary> f_a;  // one per theta_star
  std::vector<double> theta_stars;
  /// range_lo[t][r], range_hi[t][r] for successful replication r.
  std::vector<std::vector<double>> range_lo;
  std::vector<std::vector<double>> range_hi;
  int reps_requested = 0;
  int reps_used = 0;
  int failures = 0;
  std::vector<std::string> failure_messages;
};

/// Seed of replication r: derive_seed(master, r).
std::uint64_t replication_seed(std::uint64_t master, int rep);

/// Simulates and estimates `reps` independent datasets on up to `threads`
/// workers; the reduction runs in replication order, so results do not
/// depend on the worker count. Failed replications are excluded; more than
/// 10% failures throws NumericFailure.
McResult mc_study(const DgpConfig& dgp, const EstimatorConfig& est, const McOptions& opts);

/// File name for the Step-3 curve at theta_star (fig5/fig6 for 0.4/0.6).
std::string fa_curve_filename(double theta_star);

/// Writes fig4_ftheta.csv and one fa file per theta_star (`grid,mean,q05,q95`).
void write_mc_curves(const McResult& res, const std::string& dir);
void write_summary_csv(const McSummary& s, const std::string& path);

}  // namespace inslab
