#include "inslab/model_core/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "inslab/common/error.hpp"

namespace inslab {
namespace {

struct SimpsonState {
  const std::function<double(double)>* f;
  int evaluations = 0;
  bool exhausted = false;
  double worst_error = 0.0;
};

double recurse(SimpsonState& st, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth, int min_depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = (*st.f)(lm);
  const double frm = (*st.f)(rm);
  st.evaluations += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (!std::isfinite(delta)) return delta;
  if (min_depth <= 0 && std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  if (depth <= 0) {
    st.exhausted = true;
    st.worst_error = std::max(st.worst_error, std::abs(delta) / 15.0);
    return left + right + delta / 15.0;
  }
  return recurse(st, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, min_depth - 1) +
         recurse(st, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, min_depth - 1);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double lo,
                                  double hi, double abs_tol, int max_depth) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(abs_tol > 0.0)) {
    throw InvalidArgument("adaptive_simpson: nonfinite bounds or nonpositive tolerance");
  }
  if (lo == hi) return {};
  SimpsonState st{&f};
  const double fa = f(lo);
  const double fb = f(hi);
  const double fm = f(0.5 * (lo + hi));
  st.evaluations = 3;
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  const double value = recurse(st, lo, hi, fa, fm, fb, whole, abs_tol, max_depth, 2);
  if (!std::isfinite(value)) {
    throw NumericFailure("adaptive_simpson: nonfinite integrand on [" + std::to_string(lo) +
                             ", " + std::to_string(hi) + "]",
                         HUGE_VAL);
  }
  if (st.exhausted && st.worst_error > abs_tol) {
    throw NumericFailure("adaptive_simpson: recursion budget exhausted (achieved " +
                             std::to_string(st.worst_error) + ")",
                         st.worst_error);
  }
  return {value, std::max(st.worst_error, abs_tol), st.evaluations};
}

double gauss_legendre(const std::function<double(double)>& f, double lo, double hi) {
  if (lo == hi) return 0.0;
  return boost::math::quadrature::gauss<double, 30>::integrate(f, lo, hi);
}

}  // namespace inslab
