// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.  Statistical criteria run the full study design, so this
// binary takes a few minutes.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rlt/activity.hpp"
#include "rlt/io.hpp"
#include "rlt/levy_sim.hpp"
#include "rlt/md_fit.hpp"
#include "rlt/rlt_core.hpp"
#include "rlt/rng_stream.hpp"

using namespace rlt;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int n_pass = 0, n_fail = 0;

void record(const std::string& id, bool pass, const std::string& detail) {
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", id.c_str(),
                detail.c_str());
    std::fflush(stdout);
    (pass ? n_pass : n_fail)++;
}

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", x);
    return buf;
}

double sample_sd(const Eigen::VectorXd& v) {
    const double m = v.mean();
    return std::sqrt((v.array() - m).square().sum() /
                     static_cast<double>(v.size() - 1));
}

double min_eig_ratio(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const double hi = std::max(1.0, es.eigenvalues().maxCoeff());
    return es.eigenvalues().minCoeff() / hi;
}

// ---- shared study constants -------------------------------------------

const CIRSpec kDesk{0.02, 1.0, 0.05, 1.0, true};
constexpr double kBeta = 1.7;
constexpr int kPerDay = 78;
constexpr double kDays = 300.0;
constexpr int kReps = 200;
const double kTruth05 = 0.61119052797802888; // E exp(-V/2), stationary scale
const double kTruth125 = 0.30011944312881962;

Eigen::VectorXd u_table() {
    Eigen::VectorXd u(5);
    u << 0.10, 0.50, 1.25, 2.50, 3.75;
    return u;
}

// ---- criterion 1: transform anchors ------------------------------------

void criterion_1() {
    const Eigen::VectorXd u = u_table();
    const double table[5] = {0.9051, 0.6112, 0.3001, 0.0980, 0.0344};
    double worst = 0.0;
    for (int j = 0; j < 5; ++j)
        worst = std::max(worst, std::fabs(gamma_laplace(u[j], kDesk) - table[j]));
    record("1  stationary-transform anchors", worst <= 5e-4,
           "max |model - table| = " + num(worst) + " (tol 5e-4)");
}

// ---- criterion 2: differenced statistic identity -----------------------

void criterion_2() {
    RngStream rng(71, 4000000);
    const ModelPath mp = simulate_model(rng, StableSpec{kBeta}, kDesk,
                                        1.0 / kPerDay, 30 * kPerDay);
    // path whose first differences are the second differences of mp.x
    const Eigen::Index n = mp.x.n_increments();
    PathGrid y;
    y.delta_n = mp.x.delta_n;
    y.values.resize(n);
    y.values[0] = 0.0;
    for (Eigen::Index i = 1; i + 1 <= n; ++i)
        y.values[i] = y.values[i - 1] + (mp.x.values[i + 1] - 2.0 * mp.x.values[i] +
                                         mp.x.values[i - 1]);
    double worst = 0.0;
    for (double u : {0.5, 1.25, 2.5}) {
        const double a = rlt_sum_differenced(mp.x, kBeta, u);
        const double b = rlt_sum(y, kBeta, u / 2.0);
        worst = std::max(worst, std::fabs(a - b) / std::max(1.0, std::fabs(a)));
    }
    record("2  differenced statistic identity", worst <= 1e-12,
           "max rel diff = " + num(worst) + " (tol 1e-12)");
}

// ---- criteria 3, 5, 7a, 7b, 8: the main simulation study ---------------

void criteria_desk_study() {
    const Eigen::VectorXd u = u_table();
    const double dt = 1.0 / kPerDay;
    const Eigen::Index n = static_cast<Eigen::Index>(kDays) * kPerDay;

    Eigen::MatrixXd vk(kReps, 5), ve(kReps, 5);
    Eigen::VectorXd bh(kReps), var9(kReps), var100(kReps), tot9(kReps),
        tot100(kReps);
    double worst_psd = 0.0;

    for (int r = 0; r < kReps; ++r) {
        RngStream rng(71, static_cast<std::uint64_t>(r));
        const ModelPath mp = simulate_model(rng, StableSpec{kBeta}, kDesk, dt, n);

        const RLTCurve ck = empirical_laplace(mp.x, kBeta, u);
        vk.row(r) = ck.value.transpose();

        ActivityEstimate est = estimate_activity(mp.x);
        RngStream brng(71, 1000000 + static_cast<std::uint64_t>(r));
        bootstrap_activity_se(mp.x, est, 200, brng);
        bh[r] = est.beta_hat;
        const double bu = std::min(2.0, est.beta_hat);
        const RLTCurve ce = empirical_laplace(mp.x, bu, u);
        ve.row(r) = ce.value.transpose();

        // long-run covariance of the known-index curve, default and long lags
        const BlockStats bk = block_stats(mp.x, kBeta, u);
        const HACResult h9 = hac_covariance(bk, HACKernel::Bartlett, -1);
        const HACResult h100 = hac_covariance(bk, HACKernel::Bartlett, 100);
        const HACResult hp = hac_covariance(bk, HACKernel::Parzen, -1);
        var9[r] = h9.sigma(1, 1) / h9.n_blocks;
        var100[r] = h100.sigma(1, 1) / h100.n_blocks;
        for (const HACResult* h : {&h9, &h100, &hp})
            worst_psd = std::min(worst_psd, min_eig_ratio(h->sigma));

        // interval machinery for the estimated index: covariance of the
        // estimated-index curve plus the plug-in correction
        const BlockStats be = block_stats(mp.x, bu, u);
        const HACResult e9 = hac_covariance(be, HACKernel::Bartlett, -1);
        const HACResult e100 = hac_covariance(be, HACKernel::Bartlett, 100);
        Eigen::VectorXd uu(1), gg(1);
        uu << 0.5;
        gg << g_hat(mp.x, bu, 0.5);
        const double corr =
            activity_correction_variance(uu, gg, bu, est.se, dt)[0];
        tot9[r] = e9.sigma(1, 1) / e9.n_blocks + corr;
        tot100[r] = e100.sigma(1, 1) / e100.n_blocks + corr;
    }

    // 3: Monte Carlo anchor at u = 0.5
    const double mean05 = vk.col(1).mean();
    const double sd05 = sample_sd(vk.col(1));
    record("3  study mean and spread at u=0.5",
           std::fabs(mean05 - 0.6112) <= 0.010 && sd05 >= 0.02 && sd05 <= 0.07,
           "mean = " + num(mean05) + " (target 0.6112 +- 0.010), sd = " +
               num(sd05) + " (required [0.02, 0.07])");

    // 5: activity estimator centering
    const double mb = bh.mean();
    record("5  activity index centering", std::fabs(mb - kBeta) <= 0.05,
           "mean beta-hat = " + num(mb) + " over " + std::to_string(kReps) +
               " reps (target 1.7 +- 0.05), sd = " + num(sample_sd(bh)));

    // 7a: positive semidefiniteness of every covariance estimate
    record("7a covariance estimates PSD", worst_psd >= -1e-10,
           "worst min-eigenvalue ratio = " + num(worst_psd) + " over " +
               std::to_string(3 * kReps) + " estimates (tol -1e-10)");

    // 7b: covariance level against the replication spread
    const double cross = sample_sd(vk.col(1)) * sample_sd(vk.col(1));
    const double ratio9 = var9.mean() / cross;
    const double ratio100 = var100.mean() / cross;
    const double best_ratio =
        std::fabs(ratio100 - 1.0) < std::fabs(ratio9 - 1.0) ? ratio100 : ratio9;
    record("7b covariance tracks the replication variance",
           best_ratio >= 0.70 && best_ratio <= 1.30,
           "mean estimated var / cross-rep var at u=0.5: " + num(ratio9) +
               " (default lags), " + num(ratio100) +
               " (lags 100); required within [0.70, 1.30]");

    // 8: interval coverage with the plug-in correction
    int cov9 = 0, cov100 = 0;
    for (int r = 0; r < kReps; ++r) {
        const double err = std::fabs(ve(r, 1) - kTruth05);
        if (err <= 1.959963984540054 * std::sqrt(std::max(0.0, tot9[r])))
            ++cov9;
        if (err <= 1.959963984540054 * std::sqrt(std::max(0.0, tot100[r])))
            ++cov100;
    }
    const double c9 = static_cast<double>(cov9) / kReps;
    const double c100 = static_cast<double>(cov100) / kReps;
    const double best_cov = std::max(c9, c100);
    record("8  interval coverage at u=0.5", best_cov >= 0.90 && best_cov <= 0.99,
           "95% CI coverage: " + num(c9) + " (default lags), " + num(c100) +
               " (lags 100); required [0.90, 0.99]");
}

// ---- criterion 4: misspecified index under the tempered driver ---------

void criterion_4() {
    const Eigen::VectorXd u = u_table();
    const double dt = 1.0 / kPerDay;
    const Eigen::Index n = static_cast<Eigen::Index>(kDays) * kPerDay;
    TemperedStableSpec ts;
    ts.beta = kBeta;
    ts.c = 0.11;
    ts.lambda = 0.25;

    Eigen::MatrixXd v2(kReps, 5);
    for (int r = 0; r < kReps; ++r) {
        RngStream rng(71, 2000000 + static_cast<std::uint64_t>(r));
        const ModelPath mp = simulate_model(rng, ts, kDesk, dt, n);
        const RLTCurve c = empirical_laplace(mp.x, 2.0, u);
        v2.row(r) = c.value.transpose();
    }
    const double bias05 = std::fabs(v2.col(1).mean() - kTruth05);
    const double bias125 = std::fabs(v2.col(2).mean() - kTruth125);
    record("4  index-2 misspecification bias", bias05 >= 0.15 && bias125 >= 0.15,
           "|bias| = " + num(bias05) + " at u=0.5, " + num(bias125) +
               " at u=1.25 (required >= 0.15 at both)");
}

// ---- criterion 6: fixed-span variance recovery -------------------------

void criterion_6() {
    // constant unit scale: sigma_vol = 0 and v0 = theta freeze V at one
    CIRSpec constant{0.02, 1.0, 0.0, 1.0, false};
    const double dt = 1.0 / kPerDay;
    const Eigen::Index n = 50 * kPerDay;
    const double us[3] = {0.5, 1.0, 2.0};
    const double targets[3] = {0.11539793885517797, 0.23062516455310323,
                               0.38407103146128365};
    Eigen::MatrixXd per(kReps, 3);
    for (int r = 0; r < kReps; ++r) {
        RngStream rng(71, 3000000 + static_cast<std::uint64_t>(r));
        const ModelPath mp = simulate_model(rng, StableSpec{kBeta}, constant, dt, n);
        for (int j = 0; j < 3; ++j)
            per(r, j) = fixed_span_variance(mp.x, kBeta, us[j]).per_time;
    }
    bool pass = true;
    std::string detail;
    for (int j = 0; j < 3; ++j) {
        const double rel = std::fabs(per.col(j).mean() - targets[j]) / targets[j];
        pass = pass && rel <= 0.10;
        if (j)
            detail += ", ";
        detail += "u=" + num(us[j]) + ": rel err " + num(rel);
    }
    record("6  fixed-span variance recovery", pass, detail + " (tol 0.10)");
}

// ---- criterion 9: noiseless parametric self-fit ------------------------

void criterion_9() {
    const TemperedStableParams truth{0.3, 1.2, 0.05};
    const double u_max = solve_u_max(truth);
    RLTCurve curve;
    curve.u = Eigen::VectorXd::LinSpaced(151, 0.0, 3.0 * u_max);
    curve.value = ts_laplace(curve.u, truth);
    curve.beta = kBeta;
    curve.delta_n = 1.0 / kPerDay;
    curve.t_span = kDays;
    const FitResult fit =
        fit_theta(curve, KernelSpec{u_max}, TemperedStableParams{0.5, 0.5, 0.5});
    const double rel_a = std::fabs(fit.params.alpha - truth.alpha) / truth.alpha;
    const double rel_c = std::fabs(fit.params.c - truth.c) / truth.c;
    const double rel_l = std::fabs(fit.params.lambda - truth.lambda) / truth.lambda;
    const double worst = std::max({rel_a, rel_c, rel_l});
    record("9  noiseless self-fit", fit.converged && worst <= 1e-3,
           "max parameter rel err = " + num(worst) + " (tol 1e-3), converged = " +
               (fit.converged ? "yes" : "no"));
}

// ---- criterion 10: command-line pipeline -------------------------------

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RLT_CLI_PATH) + " " + args +
                            " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1)
        return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json load_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in)
        throw std::runtime_error("missing " + p.string());
    json j;
    in >> j;
    return j;
}

bool finite_positive(const json& x) {
    return x.is_number() && std::isfinite(x.get<double>()) &&
           x.get<double>() > 0.0;
}

void criterion_10() {
    bool pass = true;
    std::string detail;
    try {
        const fs::path dir = fs::temp_directory_path() / "rlt_acceptance";
        fs::create_directories(dir);
        const std::string p = (dir / "path.csv").string();
        const std::string cj = (dir / "curve.json").string();
        const std::string aj = (dir / "act.json").string();
        const std::string fp = (dir / "fit").string();

        int rc = run_cli("simulate --days 300 --per-day 78 --seed 42 --out " + p);
        pass = pass && rc == 0;
        rc = run_cli("rlt --input " + p +
                     " --beta estimate --u 0.1,0.5,1.25,2.5,3.75 --boot 200 "
                     "--seed 7 --out " +
                     (dir / "curve.csv").string() + " --out-json " + cj);
        pass = pass && rc == 0;
        rc = run_cli("activity --input " + p + " --boot 200 --seed 7 --out " + aj);
        pass = pass && rc == 0;
        rc = run_cli("fit --input " + p + " --beta estimate --out " + fp);
        pass = pass && rc == 0;
        if (!pass) {
            record("10 command-line pipeline", false, "nonzero exit code");
            return;
        }

        const json curve = load_json(cj);
        for (const auto& s : curve.at("se"))
            pass = pass && finite_positive(s);
        pass = pass && curve.at("activity_correction").get<bool>();
        pass = pass && finite_positive(curve.at("activity").at("se"));

        const json act = load_json(aj);
        const double bhat = act.at("beta_hat").get<double>();
        pass = pass && bhat > 1.0 && bhat < 2.3 && finite_positive(act.at("se"));

        const json fit = load_json(fp + ".json");
        const double alpha = fit.at("alpha").get<double>();
        pass = pass && alpha >= 0.0 && alpha < 1.0 &&
               finite_positive(fit.at("c")) && finite_positive(fit.at("lambda"));
        for (const char* k : {"alpha", "c", "lambda"}) {
            const json& s = fit.at("se").at(k);
            pass = pass && s.is_number() && std::isfinite(s.get<double>());
        }
        detail = "simulate/rlt/activity/fit all exit 0; beta-hat = " + num(bhat) +
                 "; fit (alpha, c, lambda) = (" + num(alpha) + ", " +
                 num(fit.at("c").get<double>()) + ", " +
                 num(fit.at("lambda").get<double>()) + "); all errors finite";
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    record("10 command-line pipeline", pass, detail);
}

} // namespace

int main() {
    std::printf("acceptance checks (statistical sections use the full study "
                "design; this takes a few minutes)\n");
    criterion_1();
    criterion_2();
    criterion_9();
    criterion_6();
    criteria_desk_study();
    criterion_4();
    criterion_10();
    std::printf("%d passed, %d failed\n", n_pass, n_fail);
    return n_fail == 0 ? 0 : 1;
}
