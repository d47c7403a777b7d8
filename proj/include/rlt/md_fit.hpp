#pragma once

#include <limits>

#include <Eigen/Dense>

#include "rlt/rlt_core.hpp"

namespace rlt {

/// Tempered stable subordinator law for the scale: Laplace transform
///   L(u) = exp{ c Gamma(-alpha) [(lambda+u)^alpha - lambda^alpha] },
/// alpha in [0,1), c > 0, lambda > 0.  alpha = 0 is the Gamma limit
/// (1 + u/lambda)^{-c}; the two branches join continuously.
struct TemperedStableParams {
    double alpha = 0.3;
    double c = 1.0;
    double lambda = 0.1;

    void validate() const;
};

/// Exponential weight exp(-2 u^2 / u_max^2) concentrating the fit where the
/// curve is informative; u_max comes from the slope rule below.
struct KernelSpec {
    double u_max = 1.0;

    void validate() const;
};

double kappa_weight(double u, const KernelSpec& kernel);

double ts_laplace(double u, const TemperedStableParams& p);
Eigen::VectorXd ts_laplace(const Eigen::VectorXd& u, const TemperedStableParams& p);

/// dL/du in closed form (strictly negative for u >= 0).
double ts_laplace_derivative(double u, const TemperedStableParams& p);

/// Smallest u where the model curve flattens to slope -target
/// (dL/du = -target); bisection after bracket expansion.  target
/// defaults to the 0.05 rule.
double solve_u_max(const TemperedStableParams& p, double target = 0.05);

/// Same rule on an empirical curve: central-difference slopes at the grid
/// nodes, then bisection on the piecewise-linear slope between the first
/// bracketing pair.  Throws std::runtime_error when the curve never crosses
/// the target slope inside the grid.
double solve_u_max(const RLTCurve& curve, double target = 0.05);

struct FitOptions {
    int max_iter = 4000;
    double tol = 1e-13;
    int restarts = 2;
    /// quadrature covers [0, quad_span_factor * u_max]
    double quad_span_factor = 3.0;
};

/// Minimum-distance fit of the curve against the model family.  u_grid and
/// weights record the quadrature actually used: nodes are the curve's own
/// grid points up to quad_span_factor * u_max, weights are trapezoid
/// spacings times the kernel weight.
struct FitResult {
    TemperedStableParams params;
    Eigen::Vector3d se = Eigen::Vector3d::Constant(std::numeric_limits<double>::quiet_NaN());
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
    KernelSpec kernel;
    Eigen::VectorXd u_grid;
    Eigen::VectorXd weights;
    double t_span = 0.0;
    double delta_n = 0.0;
};

/// Weighted least squares between the empirical curve and ts_laplace over
/// the kernel-weighted quadrature; Nelder-Mead on (logit alpha, ln c,
/// ln lambda) with restarts.  Curve values outside [−0.5, 1.5] or a grid
/// with fewer than eight usable nodes raise std::runtime_error.
FitResult fit_theta(const RLTCurve& curve, const KernelSpec& kernel,
                    const TemperedStableParams& init,
                    const FitOptions& opts = FitOptions{});

/// Sandwich covariance B^{-1} Xi B^{-1} / blocks from the long-run
/// covariance of the curve; hac must be built on the same u grid as the
/// fit quadrature.  Fills fit.se and returns it.
Eigen::Vector3d fit_standard_errors(FitResult& fit, const HACResult& hac);

} // namespace rlt
