#include "rlt/md_fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

namespace rlt {
namespace {

// below this the closed form is evaluated through the Gamma limit
constexpr double kAlphaFloor = 1e-8;

double logit(double x) { return std::log(x / (1.0 - x)); }
double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// log L(u); split out so the derivative can reuse it
double ts_log_laplace(double u, const TemperedStableParams& p) {
    if (p.alpha <= kAlphaFloor)
        return -p.c * std::log1p(u / p.lambda);
    // (lambda+u)^a - lambda^a written via expm1 so tiny alpha stays accurate
    const double diff = std::pow(p.lambda, p.alpha) *
                        std::expm1(p.alpha * std::log1p(u / p.lambda));
    return -p.c * std::tgamma(1.0 - p.alpha) / p.alpha * diff;
}

} // namespace

void TemperedStableParams::validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("TemperedStableParams: alpha must lie in [0,1)");
    if (!(c > 0.0))
        throw std::invalid_argument("TemperedStableParams: c must be positive");
    if (!(lambda > 0.0))
        throw std::invalid_argument("TemperedStableParams: lambda must be positive");
}

void KernelSpec::validate() const {
    if (!(u_max > 0.0))
        throw std::invalid_argument("KernelSpec: u_max must be positive");
}

double kappa_weight(double u, const KernelSpec& kernel) {
    kernel.validate();
    const double r = u / kernel.u_max;
    return std::exp(-2.0 * r * r);
}

double ts_laplace(double u, const TemperedStableParams& p) {
    p.validate();
    if (!(u >= 0.0))
        throw std::invalid_argument("ts_laplace: u must be >= 0");
    return std::exp(ts_log_laplace(u, p));
}

Eigen::VectorXd ts_laplace(const Eigen::VectorXd& u, const TemperedStableParams& p) {
    Eigen::VectorXd out(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i)
        out[i] = ts_laplace(u[i], p);
    return out;
}

double ts_laplace_derivative(double u, const TemperedStableParams& p) {
    p.validate();
    if (!(u >= 0.0))
        throw std::invalid_argument("ts_laplace_derivative: u must be >= 0");
    const double l = std::exp(ts_log_laplace(u, p));
    if (p.alpha <= kAlphaFloor)
        return -l * p.c / (p.lambda + u);
    return -l * p.c * std::tgamma(1.0 - p.alpha) *
           std::pow(p.lambda + u, p.alpha - 1.0);
}

double solve_u_max(const TemperedStableParams& p, double target) {
    p.validate();
    if (!(target > 0.0))
        throw std::invalid_argument("solve_u_max: target must be positive");
    // f(u) = L'(u) + target rises from L'(0)+target to target; a root needs
    // the curve to start steeper than the target slope
    double lo = 0.0;
    if (ts_laplace_derivative(lo, p) + target >= 0.0)
        throw std::runtime_error("solve_u_max: curve is flatter than the target slope at u = 0");
    double hi = 1.0;
    int guard = 0;
    while (ts_laplace_derivative(hi, p) + target < 0.0) {
        hi *= 2.0;
        if (++guard > 60)
            throw std::runtime_error("solve_u_max: no flattening point found");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ts_laplace_derivative(mid, p) + target < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double solve_u_max(const RLTCurve& curve, double target) {
    if (!(target > 0.0))
        throw std::invalid_argument("solve_u_max: target must be positive");
    const Eigen::Index n = curve.u.size();
    if (n < 3 || curve.value.size() != n)
        throw std::invalid_argument("solve_u_max: need a curve on at least three nodes");
    for (Eigen::Index i = 1; i < n; ++i)
        if (!(curve.u[i] > curve.u[i - 1]))
            throw std::invalid_argument("solve_u_max: u grid must be strictly increasing");

    // slopes at the nodes: central differences inside, one-sided at the ends
    Eigen::VectorXd slope(n);
    slope[0] = (curve.value[1] - curve.value[0]) / (curve.u[1] - curve.u[0]);
    slope[n - 1] = (curve.value[n - 1] - curve.value[n - 2]) /
                   (curve.u[n - 1] - curve.u[n - 2]);
    for (Eigen::Index i = 1; i + 1 < n; ++i)
        slope[i] = (curve.value[i + 1] - curve.value[i - 1]) /
                   (curve.u[i + 1] - curve.u[i - 1]);

    const auto f = [&](Eigen::Index i) { return slope[i] + target; };
    // a Laplace transform is steepest at u = 0, so flat-at-the-left means
    // flat everywhere: no usable u_max
    if (f(0) >= 0.0)
        throw std::runtime_error("solve_u_max: curve is flatter than the target slope at the left edge");
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        if (f(i + 1) < 0.0)
            continue;
        // bisection on the linear slope interpolant across [u_i, u_{i+1}]
        double lo = curve.u[i], hi = curve.u[i + 1];
        const double flo = f(i), fhi = f(i + 1);
        const auto interp = [&](double u) {
            const double w = (u - curve.u[i]) / (curve.u[i + 1] - curve.u[i]);
            return flo + w * (fhi - flo);
        };
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (interp(mid) < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }
    throw std::runtime_error("solve_u_max: curve never flattens to the target slope inside the grid");
}

namespace {

struct Quadrature {
    Eigen::VectorXd u;
    Eigen::VectorXd w; // trapezoid spacing x kernel weight
    Eigen::VectorXd target;
};

Quadrature build_quadrature(const RLTCurve& curve, const KernelSpec& kernel,
                            double span_factor) {
    const double u_hi = span_factor * kernel.u_max;
    Eigen::Index m = 0;
    while (m < curve.u.size() && curve.u[m] <= u_hi + 1e-12)
        ++m;
    if (m < 8)
        throw std::runtime_error("fit_theta: fewer than eight grid nodes below the quadrature cutoff");
    Quadrature q;
    q.u = curve.u.head(m);
    q.target = curve.value.head(m);
    q.w.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double trap;
        if (i == 0)
            trap = 0.5 * (q.u[1] - q.u[0]);
        else if (i == m - 1)
            trap = 0.5 * (q.u[m - 1] - q.u[m - 2]);
        else
            trap = 0.5 * (q.u[i + 1] - q.u[i - 1]);
        q.w[i] = trap * kappa_weight(q.u[i], kernel);
    }
    return q;
}

using Vec3 = Eigen::Vector3d;

TemperedStableParams decode(const Vec3& t) {
    TemperedStableParams p;
    p.alpha = sigmoid(t[0]);
    p.c = std::exp(t[1]);
    p.lambda = std::exp(t[2]);
    return p;
}

Vec3 encode(const TemperedStableParams& p) {
    const double a = std::min(1.0 - 1e-10, std::max(1e-10, p.alpha));
    return Vec3(logit(a), std::log(p.c), std::log(p.lambda));
}

// Nelder-Mead on the transformed coordinates; returns best point and value
std::pair<Vec3, double> nelder_mead(const std::function<double(const Vec3&)>& f,
                                    Vec3 start, double step, int max_iter,
                                    double tol, int& iters_used) {
    constexpr int n = 3;
    std::array<Vec3, n + 1> x;
    std::array<double, n + 1> fx;
    x[0] = start;
    fx[0] = f(start);
    for (int i = 0; i < n; ++i) {
        x[i + 1] = start;
        x[i + 1][i] += step;
        fx[i + 1] = f(x[i + 1]);
    }
    const auto order = [&] {
        for (int i = 0; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j)
                if (fx[j] < fx[i]) {
                    std::swap(fx[i], fx[j]);
                    std::swap(x[i], x[j]);
                }
    };
    order();
    int it = 0;
    for (; it < max_iter; ++it) {
        if (fx[n] - fx[0] <= tol * (1.0 + std::fabs(fx[0])))
            break;
        const Vec3 centroid = (x[0] + x[1] + x[2]) / 3.0;
        const Vec3 refl = centroid + (centroid - x[n]);
        const double frefl = f(refl);
        if (frefl < fx[0]) {
            const Vec3 expand = centroid + 2.0 * (centroid - x[n]);
            const double fexp = f(expand);
            if (fexp < frefl) {
                x[n] = expand;
                fx[n] = fexp;
            } else {
                x[n] = refl;
                fx[n] = frefl;
            }
        } else if (frefl < fx[n - 1]) {
            x[n] = refl;
            fx[n] = frefl;
        } else if (frefl < fx[n]) {
            // outside contraction
            const Vec3 contract = centroid + 0.5 * (refl - centroid);
            const double fcon = f(contract);
            if (fcon <= frefl) {
                x[n] = contract;
                fx[n] = fcon;
            } else {
                for (int i = 1; i <= n; ++i) {
                    x[i] = x[0] + 0.5 * (x[i] - x[0]);
                    fx[i] = f(x[i]);
                }
            }
        } else {
            // inside contraction
            const Vec3 contract = centroid - 0.5 * (centroid - x[n]);
            const double fcon = f(contract);
            if (fcon < fx[n]) {
                x[n] = contract;
                fx[n] = fcon;
            } else {
                for (int i = 1; i <= n; ++i) {
                    x[i] = x[0] + 0.5 * (x[i] - x[0]);
                    fx[i] = f(x[i]);
                }
            }
        }
        order();
    }
    iters_used += it;
    return {x[0], fx[0]};
}

} // namespace

FitResult fit_theta(const RLTCurve& curve, const KernelSpec& kernel,
                    const TemperedStableParams& init, const FitOptions& opts) {
    kernel.validate();
    init.validate();
    if (curve.u.size() != curve.value.size() || curve.u.size() == 0)
        throw std::invalid_argument("fit_theta: malformed curve");
    if (curve.value.minCoeff() < -0.5 || curve.value.maxCoeff() > 1.5)
        throw std::runtime_error("fit_theta: curve values far outside [0,1]; not a Laplace transform");

    const Quadrature q = build_quadrature(curve, kernel, opts.quad_span_factor);

    const auto objective = [&](const Vec3& t) {
        const TemperedStableParams p = decode(t);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < q.u.size(); ++i) {
            const double r = q.target[i] - std::exp(ts_log_laplace(q.u[i], p));
            acc += q.w[i] * r * r;
        }
        return acc;
    };

    int iters = 0;
    auto best = nelder_mead(objective, encode(init), 0.4, opts.max_iter,
                            opts.tol, iters);
    for (int r = 0; r < opts.restarts; ++r) {
        auto next = nelder_mead(objective, best.first, 0.05, opts.max_iter,
                                opts.tol, iters);
        if (next.second < best.second)
            best = next;
    }

    FitResult out;
    out.params = decode(best.first);
    out.objective = best.second;
    out.converged = iters < opts.max_iter * (1 + opts.restarts);
    out.iterations = iters;
    out.kernel = kernel;
    out.u_grid = q.u;
    out.weights = q.w;
    out.t_span = curve.t_span;
    out.delta_n = curve.delta_n;
    return out;
}

Eigen::Vector3d fit_standard_errors(FitResult& fit, const HACResult& hac) {
    const Eigen::Index m = fit.u_grid.size();
    if (hac.u.size() != m || hac.sigma.rows() != m)
        throw std::invalid_argument("fit_standard_errors: covariance grid does not match the fit quadrature");
    for (Eigen::Index i = 0; i < m; ++i)
        if (std::fabs(hac.u[i] - fit.u_grid[i]) > 1e-9)
            throw std::invalid_argument("fit_standard_errors: covariance grid does not match the fit quadrature");
    if (hac.n_blocks < 2)
        throw std::invalid_argument("fit_standard_errors: covariance has no block count");

    // gradient of the model curve at the fitted parameters, by central
    // differences in the natural coordinates
    const TemperedStableParams& p = fit.params;
    Eigen::MatrixXd grad(m, 3);
    const double base[3] = {p.alpha, p.c, p.lambda};
    for (int j = 0; j < 3; ++j) {
        double h = 1e-6 * std::max(1.0, std::fabs(base[j]));
        TemperedStableParams up = p, dn = p;
        double* up_f = (j == 0) ? &up.alpha : (j == 1) ? &up.c : &up.lambda;
        double* dn_f = (j == 0) ? &dn.alpha : (j == 1) ? &dn.c : &dn.lambda;
        // keep the stencil inside the parameter domain
        if (j == 0)
            h = std::min(h, 0.49 * (1.0 - base[0]));
        if ((j == 0 && base[j] - h < 0.0) || (j != 0 && base[j] - h <= 0.0))
            h = 0.5 * base[j];
        *up_f = base[j] + h;
        *dn_f = base[j] - h;
        if (h <= 0.0)
            throw std::runtime_error("fit_standard_errors: cannot place a difference stencil");
        for (Eigen::Index i = 0; i < m; ++i)
            grad(i, j) = (ts_laplace(fit.u_grid[i], up) - ts_laplace(fit.u_grid[i], dn)) / (2.0 * h);
    }

    const Eigen::VectorXd& w = fit.weights;
    Eigen::Matrix3d bread = grad.transpose() * w.asDiagonal() * grad;
    Eigen::Matrix3d meat = grad.transpose() * w.asDiagonal() * hac.sigma *
                           w.asDiagonal() * grad;
    const Eigen::Matrix3d binv = bread.ldlt()
                                     .solve(Eigen::Matrix3d::Identity());
    Eigen::Matrix3d cov = binv * meat * binv / static_cast<double>(hac.n_blocks);
    for (int j = 0; j < 3; ++j)
        fit.se[j] = std::sqrt(std::max(0.0, cov(j, j)));
    return fit.se;
}

} // namespace rlt
