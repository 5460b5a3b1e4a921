#include "inslab/np_estim/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "inslab/common/error.hpp"

namespace inslab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Constraint {
  Eigen::VectorXd n;
  double b = 0.0;
  bool equality = false;
  int source = -1;  // index into A_in, or -1 - index into A_eq
};

// Factorization of the current active set: J = L^{-T} Q, R upper triangular
// with L^{-1} N = Q [R; 0].
struct ActiveFactor {
  Eigen::MatrixXd J;
  Eigen::MatrixXd R;
};

ActiveFactor factor(const Eigen::MatrixXd& Linv, const std::vector<Constraint>& cons,
                    const std::vector<int>& active) {
  const auto d = Linv.rows();
  const auto q = static_cast<Eigen::Index>(active.size());
  ActiveFactor f;
  if (q == 0) {
    f.J = Linv.transpose();
    f.R.resize(0, 0);
    return f;
  }
  Eigen::MatrixXd B(d, q);
  for (Eigen::Index i = 0; i < q; ++i) B.col(i) = Linv * cons[active[i]].n;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  f.J = Linv.transpose() * Q;
  f.R = qr.matrixQR().topLeftCorner(q, q).triangularView<Eigen::Upper>();
  return f;
}

}  // namespace

QpResult solve_qp(const QpProblem& p) {
  const auto d = p.G.rows();
  if (p.G.cols() != d || p.g.size() != d || p.A_eq.rows() != p.b_eq.size() ||
      p.A_in.rows() != p.b_in.size() || (p.A_eq.rows() > 0 && p.A_eq.cols() != d) ||
      (p.A_in.rows() > 0 && p.A_in.cols() != d)) {
    throw InvalidArgument("solve_qp: inconsistent dimensions");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(p.G);
  if (llt.info() != Eigen::Success) throw NumericFailure("solve_qp: G is not positive definite", kInf);
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::MatrixXd Linv =
      L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d));

  std::vector<Constraint> cons;
  for (Eigen::Index i = 0; i < p.A_eq.rows(); ++i) {
    cons.push_back({p.A_eq.row(i).transpose(), p.b_eq(i), true, static_cast<int>(-1 - i)});
  }
  for (Eigen::Index i = 0; i < p.A_in.rows(); ++i) {
    cons.push_back({p.A_in.row(i).transpose(), p.b_in(i), false, static_cast<int>(i)});
  }

  const double scale = 1.0 + p.g.lpNorm<Eigen::Infinity>() + p.G.lpNorm<Eigen::Infinity>();
  Eigen::VectorXd x = -llt.solve(p.g);
  std::vector<int> active;
  std::vector<double> u;
  std::vector<bool> in_active(cons.size(), false);

  auto slack = [&](int i) { return cons[i].n.dot(x) - cons[i].b; };
  auto tol_for = [&](int i) {
    return 1e-12 * (1.0 + std::abs(cons[i].b) + cons[i].n.lpNorm<1>() * x.lpNorm<Eigen::Infinity>());
  };

  QpResult res;
  const int budget = 50 * static_cast<int>(cons.size() + d) + 100;
  int it = 0;
  std::size_t next_eq = 0;
  while (true) {
    // Equalities first, in order; then the most violated inequality (scaled).
    int pick = -1;
    while (next_eq < static_cast<std::size_t>(p.A_eq.rows())) {
      const int i = static_cast<int>(next_eq++);
      if (slack(i) > 0.0) {
        cons[i].n = -cons[i].n;
        cons[i].b = -cons[i].b;
      }
      pick = i;
      break;
    }
    if (pick < 0) {
      double worst = 0.0;
      for (int i = static_cast<int>(p.A_eq.rows()); i < static_cast<int>(cons.size()); ++i) {
        if (in_active[i]) continue;
        const double s = slack(i);
        if (s < -tol_for(i)) {
          const double scaled = s / std::max(cons[i].n.norm(), 1e-300);
          if (scaled < worst) {
            worst = scaled;
            pick = i;
          }
        }
      }
    }
    if (pick < 0) break;

    double u_plus = 0.0;
    while (true) {
      if (++it > budget) {
        throw NumericFailure("solve_qp: iteration budget exhausted", kInf);
      }
      const ActiveFactor f = factor(Linv, cons, active);
      const auto q = static_cast<Eigen::Index>(active.size());
      const Eigen::VectorXd dv = f.J.transpose() * cons[pick].n;
      const Eigen::VectorXd z = f.J.rightCols(d - q) * dv.tail(d - q);
      Eigen::VectorXd r(q);
      if (q > 0) r = f.R.triangularView<Eigen::Upper>().solve(dv.head(q));

      double t1 = kInf;
      int drop = -1;
      for (Eigen::Index j = 0; j < q; ++j) {
        if (cons[active[j]].equality || r(j) <= 0.0) continue;
        const double ratio = u[j] / r(j);
        if (ratio < t1) {
          t1 = ratio;
          drop = static_cast<int>(j);
        }
      }
      const double zn = z.dot(cons[pick].n);
      const double s = slack(pick);
      double t2 = kInf;
      const bool z_zero = z.norm() <= 1e-14 * (1.0 + cons[pick].n.norm());
      if (!z_zero && zn > 0.0) t2 = -s / zn;

      if (z_zero && cons[pick].equality && std::abs(s) <= tol_for(pick)) {
        break;  // dependent equality already satisfied
      }
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        res.status = QpStatus::kInfeasible;
        res.x = x;
        res.iterations = it;
        return res;
      }
      for (Eigen::Index j = 0; j < q; ++j) u[j] -= t * r(j);
      u_plus += t;
      if (t2 == kInf || t < t2) {
        if (std::isfinite(t2)) x += t * z;
        in_active[active[drop]] = false;
        active.erase(active.begin() + drop);
        u.erase(u.begin() + drop);
        continue;
      }
      x += t * z;
      active.push_back(pick);
      u.push_back(u_plus);
      in_active[pick] = true;
      break;
    }
  }

  // KKT residual.
  Eigen::VectorXd grad = p.G * x + p.g;
  for (std::size_t j = 0; j < active.size(); ++j) grad -= u[j] * cons[active[j]].n;
  double kkt = grad.lpNorm<Eigen::Infinity>() / scale;
  for (std::size_t i = 0; i < cons.size(); ++i) {
    const double s = slack(static_cast<int>(i));
    const double viol = cons[i].equality ? std::abs(s) : std::max(0.0, -s);
    kkt = std::max(kkt, viol / (1.0 + std::abs(cons[i].b)));
  }
  for (std::size_t j = 0; j < active.size(); ++j) {
    if (!cons[active[j]].equality) kkt = std::max(kkt, std::max(0.0, -u[j]) / scale);
  }
  res.status = QpStatus::kOptimal;
  res.x = x;
  res.objective = 0.5 * x.dot(p.G * x) + p.g.dot(x);
  res.kkt_residual = kkt;
  res.iterations = it;
  for (int i : active) {
    if (!cons[i].equality) res.active.push_back(cons[i].source);
  }
  return res;
}

}  // namespace inslab
