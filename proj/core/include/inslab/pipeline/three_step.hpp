#pragma once

#include <optional>
#include <string>
#include <vector>

#include "inslab/common/config.hpp"
#include "inslab/dgp_sim/dgp.hpp"
#include "inslab/np_estim/moments.hpp"
#include "inslab/np_estim/step2.hpp"
#include "inslab/pipeline/step3.hpp"

namespace inslab {

struct EstimatorConfig {
  int grid_size = 201;  // nonnegativity grid
  int theta_grid_points = 201;
  int a_grid_points = 101;
  double a_bar = 1e-3;
  std::vector<double> theta_stars{0.4, 0.6};
  std::vector<double> step2_z0{150.0};
  /// h_z = h_z_factor * bandwidth unless h_z is given.
  double h_z_factor = 1.0;
  std::optional<double> h_z;
  std::optional<double> bandwidth;
  std::optional<int> moment_order;
  MomentWeighting weighting = MomentWeighting::kDiagonal;

  void validate() const;
};

/// Keys: est.grid_size, est.theta_grid_points, est.a_grid_points, est.a_bar,
/// est.theta_stars, est.step2_z0, est.h_z_factor, est.h_z, est.bandwidth,
/// est.moment_order, est.weighting (full | diagonal).
EstimatorConfig estimator_config_from(const KeyValueConfig& kv);
std::string describe(const EstimatorConfig& cfg);

struct EstimateBundle {
  int moment_order = 0;
  double bandwidth = 0.0;
  double h_z = 0.0;
  DemixResult step1;
  std::vector<Step2Fit> step2;
  std::vector<Step3Result> step3;
  /// Union of Step-2 flags over every fit used by Step 3.
  unsigned step2_flags = 0;
  int step2_fits = 0;
};

/// Step 1 on all records, Step 2 at each configured z0, Step 3 at each
/// theta_star. Errors keep their type and gain a "step N:" prefix.
EstimateBundle run_three_step(const std::vector<InsureeRecord>& records, const MenuRule& rule,
                              const EstimatorConfig& cfg);

}  // namespace inslab
