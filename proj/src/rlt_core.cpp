#include "rlt/rlt_core.hpp"

#include <cmath>
#include <stdexcept>

namespace rlt {
namespace {

void check_beta_u(double beta, double u, const char* who) {
    if (!(beta > 0.0 && beta <= 2.0))
        throw std::invalid_argument(std::string(who) + ": beta must lie in (0,2]");
    if (!(u >= 0.0))
        throw std::invalid_argument(std::string(who) + ": u must be >= 0");
}

// (a/delta_n)^{1/beta} computed in log space; a > 0
double transform_scale(double a, double delta_n, double beta) {
    return std::exp((std::log(a) - std::log(delta_n)) / beta);
}

// compensated accumulation of cos(scale * d_i) over a span of increments
double kahan_cos_sum(const double* d, Eigen::Index n, double scale) {
    double sum = 0.0, comp = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double term = std::cos(scale * d[i]) - comp;
        const double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    return sum;
}

} // namespace

double rlt_sum(const PathGrid& path, double beta, double u) {
    path.validate();
    check_beta_u(beta, u, "rlt_sum");
    const Eigen::Index n = path.n_increments();
    if (u == 0.0)
        return static_cast<double>(n) * path.delta_n;
    const double scale = transform_scale(2.0 * u, path.delta_n, beta);
    const Eigen::VectorXd d = path.increments();
    return path.delta_n * kahan_cos_sum(d.data(), n, scale);
}

double rlt_sum_differenced(const PathGrid& path, double beta, double u) {
    path.validate();
    check_beta_u(beta, u, "rlt_sum_differenced");
    const Eigen::Index n = path.n_increments();
    if (n < 2)
        throw std::invalid_argument("rlt_sum_differenced: need at least two increments");
    if (u == 0.0)
        return static_cast<double>(n - 1) * path.delta_n;
    const double scale = transform_scale(u, path.delta_n, beta);
    const Eigen::VectorXd d = path.increments();
    Eigen::VectorXd dd = d.tail(n - 1) - d.head(n - 1);
    return path.delta_n * kahan_cos_sum(dd.data(), n - 1, scale);
}

RLTCurve empirical_laplace(const PathGrid& path, double beta,
                           const Eigen::VectorXd& u_grid, bool differenced) {
    path.validate();
    if (u_grid.size() == 0)
        throw std::invalid_argument("empirical_laplace: empty u grid");
    RLTCurve curve;
    curve.u = u_grid;
    curve.value.resize(u_grid.size());
    curve.beta = beta;
    curve.delta_n = path.delta_n;
    curve.t_span = path.t_span();
    curve.differenced = differenced;
    const Eigen::Index terms = differenced ? path.n_increments() - 1
                                           : path.n_increments();
    const double norm = static_cast<double>(terms) * path.delta_n;
    for (Eigen::Index j = 0; j < u_grid.size(); ++j) {
        const double v = differenced ? rlt_sum_differenced(path, beta, u_grid[j])
                                     : rlt_sum(path, beta, u_grid[j]);
        curve.value[j] = v / norm;
    }
    return curve;
}

double f_beta(double beta, double x) {
    check_beta_u(beta, x, "f_beta");
    if (x == 0.0)
        return 0.0;
    const double xb = std::pow(x, beta);
    const double two_bm1 = std::pow(2.0, beta - 1.0);
    return 0.5 * (std::exp(-two_bm1 * xb) - 2.0 * std::exp(-xb) + 1.0);
}

double f_beta_tilde(double beta, double x) {
    check_beta_u(beta, x, "f_beta_tilde");
    if (x == 0.0)
        return 0.0;
    const double xb = std::pow(x, beta);
    const double e1 = std::exp(-std::pow(2.0, beta - 1.0) * xb);
    const double e2 = std::exp(-xb);
    const double p = 0.5 * (e1 + 1.0);
    const double m = 0.5 * (e1 - 1.0);
    return p * p + 2.0 * e2 * p - 3.0 * std::exp(-2.0 * xb) + m * m;
}

double g_beta(double beta, double x) {
    check_beta_u(beta, x, "g_beta");
    if (x == 0.0)
        return 0.0;
    const double xb = std::pow(x, beta);
    return beta * xb * std::exp(-xb);
}

FixedSpanVariance fixed_span_variance(const PathGrid& path, double beta, double u) {
    check_beta_u(beta, u, "fixed_span_variance");
    const double t = path.t_span();
    const double v_twist = rlt_sum(path, beta, std::pow(2.0, beta - 1.0) * u);
    const double v_plain = rlt_sum(path, beta, u);
    FixedSpanVariance out;
    out.total = 0.5 * (v_twist - 2.0 * v_plain + t);
    out.per_time = out.total / t;
    return out;
}

BlockStats block_stats(const PathGrid& path, double beta,
                       const Eigen::VectorXd& u_grid, bool differenced) {
    path.validate();
    if (u_grid.size() == 0)
        throw std::invalid_argument("block_stats: empty u grid");
    const double t = path.t_span();
    const Eigen::Index b = static_cast<Eigen::Index>(std::floor(t + 1e-9));
    if (b < 2)
        throw std::invalid_argument("block_stats: need at least two whole unit intervals");

    BlockStats out;
    out.u = u_grid;
    out.beta = beta;
    out.delta_n = path.delta_n;
    out.t_span = t;
    out.differenced = differenced;
    out.z.setZero(b, u_grid.size());

    const Eigen::Index n = path.n_increments();
    const Eigen::VectorXd d = path.increments();
    const Eigen::Index first = differenced ? 1 : 0; // term index into increments
    for (Eigen::Index j = 0; j < u_grid.size(); ++j) {
        const double uj = u_grid[j];
        double scale = 0.0;
        if (uj > 0.0)
            scale = transform_scale(differenced ? uj : 2.0 * uj, path.delta_n, beta);
        // per-block compensated sums
        double sum = 0.0, comp = 0.0;
        Eigen::Index cur = 0;
        for (Eigen::Index i = first; i < n; ++i) {
            // block of the left endpoint of increment i (1e-9 guards the
            // accumulated rounding in i * delta_n at block boundaries)
            const Eigen::Index blk =
                static_cast<Eigen::Index>(std::floor(static_cast<double>(i) * path.delta_n + 1e-9));
            if (blk >= b)
                break; // partial trailing interval
            if (blk != cur) {
                out.z(cur, j) = path.delta_n * sum;
                sum = 0.0;
                comp = 0.0;
                cur = blk;
            }
            const double val = (uj == 0.0)
                                   ? 1.0
                                   : std::cos(scale * (differenced ? d[i] - d[i - 1] : d[i]));
            const double term = val - comp;
            const double next = sum + term;
            comp = (next - sum) - term;
            sum = next;
        }
        out.z(cur, j) = path.delta_n * sum;
    }

    RLTCurve full = empirical_laplace(path, beta, u_grid, differenced);
    out.l_hat = full.value;
    return out;
}

int default_hac_lags(double t_span) {
    if (!(t_span > 0.0))
        throw std::invalid_argument("default_hac_lags: span must be positive");
    return static_cast<int>(std::ceil(1.3 * std::cbrt(t_span)));
}

HACResult hac_covariance(const BlockStats& blocks, HACKernel kernel, int lags) {
    const Eigen::Index b = blocks.n_blocks();
    const Eigen::Index m = blocks.u.size();
    if (b < 2)
        throw std::invalid_argument("hac_covariance: need at least two blocks");
    if (lags < 0)
        lags = default_hac_lags(static_cast<double>(b));
    if (lags > static_cast<int>(b) - 1)
        lags = static_cast<int>(b) - 1;

    // center each column at the full-sample curve value
    Eigen::MatrixXd zc = blocks.z.rowwise() - blocks.l_hat.transpose();

    const auto autocov = [&](int k) {
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index t = k; t < b; ++t)
            c += zc.row(t).transpose() * zc.row(t - k);
        return Eigen::MatrixXd(c / static_cast<double>(b));
    };

    HACResult out;
    out.u = blocks.u;
    out.kernel = kernel;
    out.lags = lags;
    out.n_blocks = static_cast<int>(b);
    out.sigma = autocov(0);
    for (int i = 1; i <= lags; ++i) {
        const double q = static_cast<double>(i) / (lags + 1.0);
        double w;
        if (kernel == HACKernel::Bartlett) {
            w = 1.0 - q;
        } else {
            w = (q <= 0.5) ? 1.0 - 6.0 * q * q + 6.0 * q * q * q
                           : 2.0 * std::pow(1.0 - q, 3);
        }
        const Eigen::MatrixXd c = autocov(i);
        out.sigma += w * (c + c.transpose());
    }
    return out;
}

double g_hat(const PathGrid& path, double beta, double u) {
    path.validate();
    check_beta_u(beta, u, "g_hat");
    if (u == 0.0)
        return 0.0;
    const double scale = transform_scale(2.0 * u, path.delta_n, beta);
    const Eigen::VectorXd d = path.increments();
    double sum = 0.0, comp = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        const double y = scale * d[i];
        const double term = y * std::sin(y) - comp;
        const double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    return path.delta_n * sum / path.t_span();
}

Eigen::VectorXd activity_correction_variance(const Eigen::VectorXd& u_grid,
                                             const Eigen::VectorXd& g_values,
                                             double beta_hat, double beta_se,
                                             double delta_n) {
    if (u_grid.size() != g_values.size())
        throw std::invalid_argument(
            "activity_correction_variance: u and g sizes differ");
    if (!(beta_hat > 0.0))
        throw std::invalid_argument("activity_correction_variance: beta_hat must be positive");
    if (!(beta_se >= 0.0))
        throw std::invalid_argument("activity_correction_variance: beta_se must be >= 0");
    if (!(delta_n > 0.0))
        throw std::invalid_argument("activity_correction_variance: delta_n must be positive");
    Eigen::VectorXd out(u_grid.size());
    const double b2 = beta_hat * beta_hat;
    for (Eigen::Index j = 0; j < u_grid.size(); ++j) {
        if (u_grid[j] == 0.0) {
            out[j] = 0.0;
            continue;
        }
        const double lever = std::log(2.0 * u_grid[j] / delta_n) * g_values[j] / b2;
        out[j] = lever * lever * beta_se * beta_se;
    }
    return out;
}

} // namespace rlt
