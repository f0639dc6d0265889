#pragma once

#include "canard/params.hpp"
#include "canard/report.hpp"

namespace canard {

// Threshold report for one parameter set: equilibria, folds, region tag and,
// when two folds exist, the per-fold Hopf data, theta_B, B, delta_C and the
// Bautin transversality determinant. Quantities that cannot be evaluated are
// recorded as "unavailable: <reason>" instead of aborting the report.
Report analyze(const Params& params, double transversality_step = 1e-4);

}  // namespace canard
