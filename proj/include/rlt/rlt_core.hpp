#pragma once

#include <Eigen/Dense>

#include "rlt/path_grid.hpp"

namespace rlt {

/// Realized Laplace transform of a path over a grid of u points.
/// value[j] is the normalized statistic at u[j]: the raw cosine sum times
/// delta_n, divided by (number of terms * delta_n) so that u = 0 maps to
/// exactly one.  se stays empty until a variance estimate is attached.
struct RLTCurve {
    Eigen::VectorXd u;
    Eigen::VectorXd value;
    Eigen::VectorXd se;
    double beta = 0.0;
    double delta_n = 0.0;
    double t_span = 0.0;
    bool differenced = false;
};

/// Per-unit-interval partial sums of the realized Laplace transform,
/// the building block of the long-span covariance estimator.  z is
/// n_blocks x u.size(); block t covers times [t, t+1).  A trailing partial
/// interval is dropped from the blocks but still enters l_hat.
struct BlockStats {
    Eigen::MatrixXd z;
    Eigen::VectorXd l_hat;
    Eigen::VectorXd u;
    double beta = 0.0;
    double delta_n = 0.0;
    double t_span = 0.0;
    bool differenced = false;

    Eigen::Index n_blocks() const { return z.rows(); }
};

enum class HACKernel { Bartlett, Parzen };

/// Long-run covariance of the unit-interval sums across the u grid,
/// scaled per block: divide by the number of blocks to get the sampling
/// covariance of the curve values.
struct HACResult {
    Eigen::MatrixXd sigma;
    Eigen::VectorXd u;
    HACKernel kernel = HACKernel::Bartlett;
    int lags = 0;
    int n_blocks = 0;
};

/// Raw realized Laplace transform V_T = sum_i delta_n cos((2u/delta_n)^{1/beta} dX_i).
/// Averaged over the span this estimates the Laplace transform of the
/// scale at u.  beta in (0,2]; u >= 0 (u = 0 returns the span exactly).
double rlt_sum(const PathGrid& path, double beta, double u);

/// Differenced variant using second differences of the path with the scale
/// factor (u/delta_n)^{1/beta}; robust to a drift in the observations.
/// One fewer term than rlt_sum.
double rlt_sum_differenced(const PathGrid& path, double beta, double u);

/// Normalized curve over a grid of u values; set differenced to use the
/// second-difference statistic.
RLTCurve empirical_laplace(const PathGrid& path, double beta,
                           const Eigen::VectorXd& u_grid,
                           bool differenced = false);

/// Asymptotic variance shape of the plain statistic under constant scale:
/// F_beta(x) = (e^{-2^{beta-1} x^beta} - 2 e^{-x^beta} + 1)/2, x >= 0.
/// Vanishes at x = 0 and saturates at 1/2.
double f_beta(double beta, double x);

/// Same object for the differenced statistic (larger, reflecting the MA(1)
/// structure of second differences); also 0 at x = 0 with limit 1/2.
double f_beta_tilde(double beta, double x);

/// Spot-variance functional used by the plug-in activity correction:
/// G_beta(x) = beta x^beta e^{-x^beta}.
double g_beta(double beta, double x);

/// Fixed-span variance estimate of the raw statistic at u built from the
/// curve at scales 2^{beta-1} u and u; total refers to V_T, per_time to
/// the normalized curve value.
struct FixedSpanVariance {
    double total = 0.0;
    double per_time = 0.0;
};
FixedSpanVariance fixed_span_variance(const PathGrid& path, double beta, double u);

/// Unit-interval partial sums plus the full-sample curve; requires at least
/// two whole unit intervals of data.
BlockStats block_stats(const PathGrid& path, double beta,
                       const Eigen::VectorXd& u_grid, bool differenced = false);

/// Default lag truncation ceil(1.3 * t^{1/3}) for a span of t unit intervals.
int default_hac_lags(double t_span);

/// Kernel-weighted long-run covariance of the block sums.  lags < 0 picks
/// the default rule; the count is clipped to n_blocks - 1.  Both kernels
/// yield positive semidefinite estimates for any centering.
HACResult hac_covariance(const BlockStats& blocks, HACKernel kernel,
                         int lags = -1);

/// Derivative statistic (1/T) sum_i delta_n y_i sin(y_i) with
/// y_i = (2u/delta_n)^{1/beta} dX_i; enters the plug-in correction for an
/// estimated activity index.  Under constant unit scale it approaches
/// beta u e^{-u}.
double g_hat(const PathGrid& path, double beta, double u);

/// Additional variance at each u caused by plugging an estimated beta into
/// the transform: [log(2u/delta_n) * g / beta^2]^2 * beta_se^2 per entry.
/// Entries with u = 0 are exactly zero.
Eigen::VectorXd activity_correction_variance(const Eigen::VectorXd& u_grid,
                                             const Eigen::VectorXd& g_values,
                                             double beta_hat, double beta_se,
                                             double delta_n);

} // namespace rlt
