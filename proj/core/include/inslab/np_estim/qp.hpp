#pragma once

#include <vector>

#include <Eigen/Dense>

namespace inslab {

/// minimize 0.5 x'Gx + g'x  s.t.  A_eq x = b_eq,  A_in x >= b_in.
/// G must be symmetric positive definite.
struct QpProblem {
  Eigen::MatrixXd G;
  Eigen::VectorXd g;
  Eigen::MatrixXd A_eq;  // rows are constraints
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;
};

enum class QpStatus { kOptimal, kInfeasible };

struct QpResult {
  QpStatus status = QpStatus::kInfeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  /// max of scaled stationarity, primal violation and negative multipliers.
  double kkt_residual = 0.0;
  int iterations = 0;
  /// Active inequality indices at the solution.
  std::vector<int> active;
};

/// Goldfarb-Idnani dual active-set method. Throws NumericFailure when G is
/// not positive definite or the iteration budget runs out; reports
/// kInfeasible when the constraints admit no solution.
QpResult solve_qp(const QpProblem& problem);

}  // namespace inslab
