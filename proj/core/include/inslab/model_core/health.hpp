#pragma once

#include <cstdint>

#include "inslab/model_core/contracts.hpp"
#include "inslab/model_core/damage.hpp"

namespace inslab {

struct HealthCe {
  double value = 0.0;
  double std_error = 0.0;  // delta-method Monte Carlo standard error
  long n_sims = 0;
};

/// Certainty equivalent of a health plan with premium t, per-period
/// deductible dd (may be +infinity) and per-visit copayment gamma charged on
/// every visit after the one at which the deductible is met:
///   Y = S_J             if S_J <= dd,
///   Y = dd + (J - J')g  otherwise, J' = first j with S_j > dd,
///   CE = w - t - log E[e^{aY}] / a.
/// Monte Carlo with `n_sims` draws from `seed`; deterministic given seed.
HealthCe health_certainty_equivalent(double t, double dd, double gamma,
                                     const TypePair& tp, double w,
                                     const DamageDist& H, long n_sims,
                                     std::uint64_t seed);

}  // namespace inslab
