#include "rlt/mc.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "rlt/activity.hpp"
#include "rlt/rlt_core.hpp"

namespace rlt {

Eigen::VectorXd MCConfig::make_default_u() {
    Eigen::VectorXd u(5);
    u << 0.10, 0.50, 1.25, 2.50, 3.75;
    return u;
}

void MCConfig::validate() const {
    if (reps < 1)
        throw std::invalid_argument("MCConfig: reps must be >= 1");
    if (!(t_days > 0.0))
        throw std::invalid_argument("MCConfig: t_days must be positive");
    if (per_day < 1)
        throw std::invalid_argument("MCConfig: per_day must be >= 1");
    if (!(beta > 1.0 && beta < 2.0))
        throw std::invalid_argument("MCConfig: beta must lie in (1,2)");
    if (variants.empty())
        throw std::invalid_argument("MCConfig: no estimator variants selected");
    if (u_list.size() == 0)
        throw std::invalid_argument("MCConfig: empty u list");
    if (workers < 0)
        throw std::invalid_argument("MCConfig: workers must be >= 0");
    if (substeps < 1)
        throw std::invalid_argument("MCConfig: substeps must be >= 1");
    cir.validate();
}

const char* beta_mode_label(BetaMode mode) {
    switch (mode) {
    case BetaMode::Known:
        return "beta_known";
    case BetaMode::Estimated:
        return "beta_estimated";
    case BetaMode::FixedTwo:
        return "beta_fixed2";
    }
    return "?";
}

MCSummary run_mc(const MCConfig& config) {
    config.validate();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    DriverSpec driver;
    if (config.driver == DriverKind::Stable) {
        driver = StableSpec{config.beta};
    } else {
        TemperedStableSpec ts;
        ts.beta = config.beta;
        ts.c = std::isnan(config.ts_c) ? stable_level(config.beta) : config.ts_c;
        ts.lambda = config.ts_lambda;
        ts.validate();
        driver = ts;
    }

    const Eigen::Index n =
        static_cast<Eigen::Index>(std::llround(config.t_days * config.per_day));
    const double dt = 1.0 / config.per_day;
    const Eigen::Index nu = config.u_list.size();
    const std::size_t nv = config.variants.size();

    // per-rep result slots, filled by whichever worker picks the rep
    std::vector<Eigen::MatrixXd> rep_values(nv);
    for (auto& m : rep_values)
        m = Eigen::MatrixXd::Constant(config.reps, nu, nan);
    Eigen::VectorXd rep_betas = Eigen::VectorXd::Constant(config.reps, nan);

    const auto run_rep = [&](int r) {
        RngStream rng(config.seed, static_cast<std::uint64_t>(r));
        const ModelPath mp =
            simulate_model(rng, driver, config.cir, dt, n, config.substeps);
        for (std::size_t v = 0; v < nv; ++v) {
            double beta_use = config.beta;
            try {
                if (config.variants[v] == BetaMode::FixedTwo) {
                    beta_use = 2.0;
                } else if (config.variants[v] == BetaMode::Estimated) {
                    const ActivityEstimate est = estimate_activity(
                        mp.x, config.activity_p0, config.activity_k_frac);
                    beta_use = std::min(2.0, est.beta_hat);
                    rep_betas[r] = est.beta_hat;
                }
                const RLTCurve curve =
                    empirical_laplace(mp.x, beta_use, config.u_list);
                rep_values[v].row(r) = curve.value.transpose();
            } catch (const std::exception&) {
                // leave the NaN row; counted after the join
            }
        }
    };

    unsigned hw = std::thread::hardware_concurrency();
    int workers = config.workers == 0 ? static_cast<int>(hw ? hw : 1)
                                      : config.workers;
    workers = std::min(workers, config.reps);
    if (workers <= 1) {
        for (int r = 0; r < config.reps; ++r)
            run_rep(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const int r = next.fetch_add(1);
                    if (r >= config.reps)
                        return;
                    run_rep(r);
                }
            });
        for (auto& th : pool)
            th.join();
    }

    MCSummary out;
    out.u_list = config.u_list;
    out.config = config;
    out.true_values.resize(nu);
    for (Eigen::Index j = 0; j < nu; ++j)
        out.true_values[j] = gamma_laplace(config.u_list[j], config.cir);

    for (std::size_t v = 0; v < nv; ++v) {
        MCColumn col;
        col.mode = config.variants[v];
        col.label = beta_mode_label(col.mode);
        col.per_rep = rep_values[v];
        if (col.mode == BetaMode::Estimated)
            col.beta_hats = rep_betas;
        col.mean.setZero(nu);
        col.sd.setZero(nu);
        // index-ordered reduction: identical result for any worker count
        int ok = 0;
        for (int r = 0; r < config.reps; ++r) {
            if (std::isnan(col.per_rep(r, 0))) {
                ++col.n_failed;
                continue;
            }
            ++ok;
            col.mean += col.per_rep.row(r).transpose();
        }
        if (ok > 0)
            col.mean /= static_cast<double>(ok);
        else
            col.mean.setConstant(nan);
        if (ok > 1) {
            for (int r = 0; r < config.reps; ++r) {
                if (std::isnan(col.per_rep(r, 0)))
                    continue;
                const Eigen::VectorXd d = col.per_rep.row(r).transpose() - col.mean;
                col.sd += d.cwiseProduct(d);
            }
            col.sd = (col.sd / static_cast<double>(ok - 1)).cwiseSqrt();
        } else {
            col.sd.setConstant(nan);
        }
        out.columns.push_back(std::move(col));
    }
    return out;
}

} // namespace rlt
