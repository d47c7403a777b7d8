#include "rlt/activity.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace rlt {
namespace {

constexpr double kPilotLo = 0.25, kPilotHi = 2.0;

double beta_from_sums(double p, double pv_fine, double pv_coarse) {
    if (!(pv_fine > 0.0) || !(pv_coarse > 0.0))
        throw std::runtime_error("activity estimate: zero power variation");
    const double ln2 = std::log(2.0);
    const double denom = ln2 + std::log(pv_coarse) - std::log(pv_fine);
    if (!(denom > 0.0))
        throw std::runtime_error("activity estimate: degenerate scale ratio");
    return ln2 * p / denom;
}

} // namespace

double power_variation(const PathGrid& path, double p, int stride) {
    path.validate();
    if (!(p > 0.0))
        throw std::invalid_argument("power_variation: p must be positive");
    if (stride < 1)
        throw std::invalid_argument("power_variation: stride must be >= 1");
    const Eigen::Index n = path.n_increments();
    const Eigen::Index terms = n / stride;
    double sum = 0.0, comp = 0.0;
    for (Eigen::Index k = 1; k <= terms; ++k) {
        const double d = path.values[k * stride] - path.values[(k - 1) * stride];
        const double term = std::pow(std::fabs(d), p) - comp;
        const double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    return sum;
}

double activity_from_ratio(const PathGrid& path, double p) {
    return beta_from_sums(p, power_variation(path, p, 1),
                          power_variation(path, p, 2));
}

ActivityEstimate estimate_activity(const PathGrid& path, double p0, double k_frac) {
    path.validate();
    if (!(p0 > 0.0))
        throw std::invalid_argument("estimate_activity: p0 must be positive");
    if (!(k_frac > 0.0 && k_frac < 1.0))
        throw std::invalid_argument("estimate_activity: k_frac must lie in (0,1)");
    if (path.n_increments() < 4)
        throw std::invalid_argument("estimate_activity: need at least four increments");

    ActivityEstimate est;
    est.p0 = p0;
    est.delta_n = path.delta_n;
    est.t_span = path.t_span();

    est.beta_stage1 = activity_from_ratio(path, p0);
    // the pilot only steers the choice of power, so clamp it to a sane range
    const double pilot = std::min(kPilotHi, std::max(kPilotLo, est.beta_stage1));
    est.p_star = k_frac * pilot;
    est.beta_hat = activity_from_ratio(path, est.p_star);
    return est;
}

double bootstrap_activity_se(const PathGrid& path, ActivityEstimate& est,
                             int n_boot, RngStream& rng) {
    path.validate();
    if (n_boot < 2)
        throw std::invalid_argument("bootstrap_activity_se: need n_boot >= 2");
    if (!(est.p_star > 0.0))
        throw std::invalid_argument("bootstrap_activity_se: estimate has no p_star");

    const double t = path.t_span();
    const Eigen::Index days = static_cast<Eigen::Index>(std::floor(t + 1e-9));
    if (days < 2)
        throw std::invalid_argument("bootstrap_activity_se: need at least two whole unit intervals");

    // per-day power-variation sums at both strides, p_star frozen
    const Eigen::Index n = path.n_increments();
    const double p = est.p_star;
    std::vector<double> fine(days, 0.0), coarse(days, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index day =
            static_cast<Eigen::Index>(std::floor(static_cast<double>(i) * path.delta_n + 1e-9));
        if (day >= days)
            break;
        fine[day] += std::pow(std::fabs(path.values[i + 1] - path.values[i]), p);
    }
    for (Eigen::Index k = 1; k <= n / 2; ++k) {
        const Eigen::Index left = 2 * (k - 1);
        const Eigen::Index day =
            static_cast<Eigen::Index>(std::floor(static_cast<double>(left) * path.delta_n + 1e-9));
        if (day >= days)
            break;
        coarse[day] += std::pow(std::fabs(path.values[2 * k] - path.values[left]), p);
    }

    std::vector<double> draws;
    draws.reserve(n_boot);
    int degenerate = 0;
    for (int b = 0; b < n_boot; ++b) {
        double sf = 0.0, sc = 0.0;
        for (Eigen::Index d = 0; d < days; ++d) {
            const Eigen::Index pick =
                std::min<Eigen::Index>(days - 1,
                                       static_cast<Eigen::Index>(rng.uniform() * days));
            sf += fine[pick];
            sc += coarse[pick];
        }
        try {
            draws.push_back(beta_from_sums(p, sf, sc));
        } catch (const std::runtime_error&) {
            ++degenerate;
        }
    }
    if (draws.size() < static_cast<std::size_t>(n_boot) * 9 / 10)
        throw std::runtime_error("bootstrap_activity_se: too many degenerate resamples");

    double mean = 0.0;
    for (double d : draws)
        mean += d;
    mean /= static_cast<double>(draws.size());
    double ss = 0.0;
    for (double d : draws)
        ss += (d - mean) * (d - mean);
    est.se = std::sqrt(ss / static_cast<double>(draws.size() - 1));
    est.n_boot = static_cast<int>(draws.size());
    return est.se;
}

} // namespace rlt
