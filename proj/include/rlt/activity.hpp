#pragma once

#include <limits>

#include <Eigen/Dense>

#include "rlt/path_grid.hpp"
#include "rlt/rng_stream.hpp"

namespace rlt {

/// Two-stage activity index estimate from power variations at two sampling
/// scales.  beta_stage1 is the pilot at p0; p_star = k_frac * beta_stage1
/// (after clamping the pilot into [0.25, 2]) feeds the final estimate.
/// se stays NaN until the bootstrap fills it.
struct ActivityEstimate {
    double beta_hat = 0.0;
    double beta_stage1 = 0.0;
    double p0 = 0.0;
    double p_star = 0.0;
    double se = std::numeric_limits<double>::quiet_NaN();
    int n_boot = 0;
    double delta_n = 0.0;
    double t_span = 0.0;
};

/// Power variation sum_{k} |x(k s delta_n) - x((k-1) s delta_n)|^p over the
/// stride-s subsampled grid, k = 1..floor(n/s).  p > 0, stride >= 1.
double power_variation(const PathGrid& path, double p, int stride = 1);

/// Ratio-of-scales activity estimator at power p:
///   beta(p) = ln2 * p / (ln2 + ln PV(p, stride 2) - ln PV(p, stride 1)).
/// Throws std::runtime_error when the ratio degenerates (denominator <= 0).
double activity_from_ratio(const PathGrid& path, double p);

/// Two-stage estimator: pilot at p0, final at p_star = k_frac * pilot.
/// Scale- and location-invariant; exact in expectation on self-similar
/// paths.  Typical tuning: p0 = 0.5, k_frac = 0.4.
ActivityEstimate estimate_activity(const PathGrid& path, double p0 = 0.5,
                                   double k_frac = 0.4);

/// Day-block bootstrap standard error for the two-stage estimate: resamples
/// whole unit intervals of the power-variation sums with p_star held fixed,
/// so each resample costs O(days).  Stride-2 terms are assigned to the day
/// of their left endpoint (they never straddle days when the observations
/// per day are even).  Fills est.se and est.n_boot, returns the se.
/// Needs at least two whole unit intervals.
double bootstrap_activity_se(const PathGrid& path, ActivityEstimate& est,
                             int n_boot, RngStream& rng);

} // namespace rlt
