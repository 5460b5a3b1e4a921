#include "inslab/np_estim/moments.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "inslab/common/error.hpp"
#include "inslab/model_core/quadrature.hpp"
#include "inslab/np_estim/qp.hpp"

namespace inslab {

double falling_factorial(long j, int m) {
  double v = 1.0;
  for (int k = 0; k < m; ++k) v *= static_cast<double>(j - k);
  return v;
}

MomentWeighting parse_weighting(const std::string& text) {
  if (text == "diagonal") return MomentWeighting::kDiagonal;
  if (text == "full") return MomentWeighting::kFull;
  throw InvalidArgument("unknown moment weighting '" + text + "' (expected diagonal or full)");
}

const char* to_string(MomentWeighting w) {
  return w == MomentWeighting::kFull ? "full" : "diagonal";
}

MomentSet factorial_moments(std::span<const long> js, int M) {
  if (M < 1) throw InvalidArgument("factorial_moments: M must be >= 1");
  if (js.empty()) throw InvalidArgument("factorial_moments: empty sample");
  const double n = static_cast<double>(js.size());
  MomentSet ms;
  ms.n = n;
  ms.values.assign(M, 0.0);
  std::vector<double> cross(M * M, 0.0);
  std::vector<double> ff(M);
  for (long j : js) {
    double v = 1.0;
    for (int m = 1; m <= M; ++m) {
      v *= static_cast<double>(j - m + 1);
      ff[m - 1] = v;
      ms.values[m - 1] += v;
    }
    if (ff[0] == 0.0) continue;
    for (int a = 0; a < M; ++a) {
      for (int b = a; b < M; ++b) cross[a * M + b] += ff[a] * ff[b];
    }
  }
  for (int m = 0; m < M; ++m) ms.values[m] /= n;
  ms.covariance.assign(M * M, 0.0);
  for (int a = 0; a < M; ++a) {
    for (int b = a; b < M; ++b) {
      const double c = cross[a * M + b] / (n * n) - ms.values[a] * ms.values[b] / n;
      ms.covariance[a * M + b] = ms.covariance[b * M + a] = c;
    }
  }
  ms.variances.resize(M);
  for (int m = 0; m < M; ++m) ms.variances[m] = std::max(kVarianceFloor, ms.covariance[m * M + m]);
  return ms;
}

Eigen::MatrixXd moment_weight_matrix(const MomentSet& ms, MomentWeighting weighting) {
  const int M = ms.order();
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(M, M);
  if (weighting == MomentWeighting::kDiagonal) {
    for (int m = 0; m < M; ++m) W(m, m) = 1.0 / std::max(ms.variances[m], kVarianceFloor);
  } else {
    if (static_cast<int>(ms.covariance.size()) != M * M) {
      throw InvalidArgument("full moment weighting needs a covariance matrix");
    }
    Eigen::MatrixXd V(M, M);
    for (int a = 0; a < M; ++a) {
      for (int b = 0; b < M; ++b) V(a, b) = ms.covariance[a * M + b];
      V(a, a) = std::max(V(a, a), kVarianceFloor);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(V);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-12 * ldlt.vectorD().maxCoeff()) {
      // Singular sample covariance (e.g. no J >= 2): fall back to the diagonal.
      return moment_weight_matrix(ms, MomentWeighting::kDiagonal);
    }
    W = ldlt.solve(Eigen::MatrixXd::Identity(M, M));
    W = 0.5 * (W + W.transpose());
  }
  return W / W.cwiseAbs().maxCoeff();
}

int moment_order_rule(long n) {
  if (n < 16) throw InvalidArgument("moment_order_rule: n must be >= 16");
  const double ln = std::log(static_cast<double>(n));
  return static_cast<int>(std::floor(ln / std::log(ln)));
}

std::vector<std::vector<double>> basis_moments(int M, int K, double lo, double hi) {
  std::vector<std::vector<double>> B(M, std::vector<double>(K + 1, 0.0));
  const double w = hi - lo;
  for (int m = 1; m <= M; ++m) {
    for (int k = 0; k <= K; ++k) {
      B[m - 1][k] = gauss_legendre(
          [&](double x) {
            const double lk = k == 0 ? 1.0 : legendre_row(k, x)[k - 1];
            return std::pow(lo + w * x, m) * lk;
          },
          0.0, 1.0);
    }
  }
  return B;
}

DemixResult demix_poisson(const MomentSet& ms, double lo, double hi, int grid_size,
                          MomentWeighting weighting) {
  const int M = ms.order();
  if (M < 1 || static_cast<int>(ms.variances.size()) != M) {
    throw InvalidArgument("demix_poisson: moment set is empty or inconsistent");
  }
  if (!(lo >= 0.0 && hi <= 1.0 && lo < hi)) {
    throw InvalidArgument("demix_poisson: support must lie within [0,1]");
  }
  if (grid_size < 101) throw InvalidArgument("demix_poisson: grid_size must be >= 101");

  const auto B = basis_moments(M, M, lo, hi);
  Eigen::VectorXd r(M);
  Eigen::MatrixXd Bm(M, M);
  for (int m = 0; m < M; ++m) {
    r(m) = ms.values[m] - B[m][0];
    for (int k = 1; k <= M; ++k) Bm(m, k - 1) = B[m][k];
  }
  const Eigen::MatrixXd W = moment_weight_matrix(ms, weighting);

  QpProblem qp;
  qp.G = 2.0 * Bm.transpose() * W * Bm;
  qp.g = -2.0 * Bm.transpose() * W * r;
  qp.A_eq.resize(0, M);
  qp.b_eq.resize(0);
  qp.A_in.resize(grid_size, M);
  qp.b_in = Eigen::VectorXd::Constant(grid_size, -1.0);
  for (int i = 0; i < grid_size; ++i) {
    const auto row = legendre_row(M, static_cast<double>(i) / (grid_size - 1));
    for (int m = 0; m < M; ++m) qp.A_in(i, m) = row[m];
  }
  const QpResult sol = solve_qp(qp);
  if (sol.status != QpStatus::kOptimal) {
    throw NumericFailure("demix_poisson: QP reported infeasible", sol.kkt_residual);
  }
  if (sol.kkt_residual > 1e-10) {
    throw NumericFailure("demix_poisson: KKT residual above 1e-10", sol.kkt_residual);
  }

  DemixResult res;
  res.density = LegendreDensity(lo, hi, std::vector<double>(sol.x.data(), sol.x.data() + M),
                                grid_size);
  const Eigen::VectorXd resid = r - Bm * sol.x;
  res.objective = resid.dot(W * resid);
  res.objective_at_zero = r.dot(W * r);
  res.kkt_residual = sol.kkt_residual;
  res.active_constraints = static_cast<int>(sol.active.size());
  return res;
}

}  // namespace inslab
