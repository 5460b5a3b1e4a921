#pragma once

#include <cmath>

#include "inslab/common/error.hpp"

namespace inslab {

/// Poisson(lambda) draw by sequential cdf inversion of u in (0,1).
inline long poisson_inverse(double lambda, double u) {
  if (!(lambda >= 0.0) || lambda > 500.0) {
    throw InvalidArgument("poisson_inverse: lambda must lie in [0, 500]");
  }
  double p = std::exp(-lambda);
  double cdf = p;
  long k = 0;
  while (u > cdf && k < 100000) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
    if (p == 0.0 && static_cast<double>(k) > lambda) break;
  }
  return k;
}

}  // namespace inslab
