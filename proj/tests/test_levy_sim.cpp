#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rlt/levy_sim.hpp"
#include "rlt/rng_stream.hpp"

using namespace rlt;

namespace {

// two-sample Kolmogorov-Smirnov statistic
double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / a.size();
        const double fb = static_cast<double>(j) / b.size();
        d = std::max(d, std::fabs(fa - fb));
    }
    return d;
}

double mean_cos(const Eigen::VectorXd& x, double scale) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        s += std::cos(scale * x[i]);
    return s / static_cast<double>(x.size());
}

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace

// ---- stable driver -----------------------------------------------------

TEST_CASE("stable level constant") {
    // [4 Gamma(2-b) |cos(b pi/2)| / (b(b-1))]^{-1}
    CHECK(stable_level(1.7) == doctest::Approx(0.11161101651689226).epsilon(1e-12));
    CHECK(stable_level(1.3) == doctest::Approx(0.16544918995019049).epsilon(1e-12));
    CHECK(stable_level(1.9) == doctest::Approx(0.045496241237597248).epsilon(1e-12));
    CHECK_THROWS_AS(stable_level(1.0), std::invalid_argument);
    CHECK_THROWS_AS(stable_level(2.0), std::invalid_argument);
}

TEST_CASE("stable increments match the characteristic function") {
    const StableSpec spec{1.7};
    RngStream rng(101, 0);
    const Eigen::Index n = 400000;
    const Eigen::VectorXd x = sample_stable_increments(rng, spec, 1.0, n);
    // E cos(uX) = exp(-|u|^beta / 2) under the pinned normalization
    for (double u : {0.5, 1.0, 2.0}) {
        const double target = std::exp(-std::pow(u, spec.beta) / 2.0);
        CAPTURE(u);
        CHECK(std::fabs(mean_cos(x, u) - target) < 0.006);
    }
}

TEST_CASE("stable increments scale self-similarly across dt") {
    const StableSpec spec{1.7};
    RngStream rng(103, 0);
    const Eigen::Index n = 20000;
    const double dt = 0.013;
    const Eigen::VectorXd fine = sample_stable_increments(rng, spec, dt, n);
    Eigen::VectorXd coarse = sample_stable_increments(rng, spec, 2.0 * dt, n);
    // (2 dt)-increments rescaled by 2^{-1/beta} must match the dt law
    const double shrink = std::pow(2.0, -1.0 / spec.beta);
    std::vector<double> a(fine.data(), fine.data() + n);
    std::vector<double> b(n);
    for (Eigen::Index i = 0; i < n; ++i)
        b[i] = shrink * coarse[i];
    // 1% critical value of the two-sample statistic
    const double crit = 1.628 * std::sqrt(2.0 / static_cast<double>(n));
    CHECK(ks_two_sample(a, b) < crit);
}

TEST_CASE("stable driver approaches the Gaussian limit as beta -> 2") {
    const StableSpec spec{1.999};
    RngStream rng(107, 0);
    const Eigen::Index n = 20000;
    const Eigen::VectorXd x = sample_stable_increments(rng, spec, 1.0, n);
    std::vector<double> s(x.data(), x.data() + n);
    std::sort(s.begin(), s.end());
    double d = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double f = phi_cdf(s[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(f - static_cast<double>(i + 1) / n));
    }
    CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));
}

// ---- tempered stable driver --------------------------------------------

TEST_CASE("truncated moments of the tempered stable density") {
    // untempered closed forms
    TemperedStableSpec plain{1.7, 0.11, 0.0};
    const auto d0 = ts_decomposition(plain, 1.0, 0.05);
    CHECK(d0.small_jump_var ==
          doctest::Approx(2.0 * 0.11 * std::pow(0.05, 0.3) / 0.3).epsilon(1e-10));
    CHECK(d0.tail_mass ==
          doctest::Approx(2.0 * 0.11 * std::pow(0.05, -1.7) / 1.7).epsilon(1e-10));

    // tempered values, frozen from high-precision quadrature of
    // 2c x^{1-b} e^{-lam x} and 2c x^{-1-b} e^{-lam x}
    TemperedStableSpec desk{1.7, 0.11, 0.25};
    const auto d1 = ts_decomposition(desk, 1.0 / 78.0);
    CHECK(d1.eps == doctest::Approx(0.0077090910473604210).epsilon(1e-12));
    CHECK(d1.small_jump_var == doctest::Approx(0.17029789743811644).epsilon(1e-9));
    CHECK(d1.tail_mass == doctest::Approx(503.58346456854182).epsilon(1e-9));

    TemperedStableSpec other{1.4, 0.2, 3.0};
    const auto d2 = ts_decomposition(other, 1.0, 0.05);
    CHECK(d2.small_jump_var == doctest::Approx(0.10454396601841959).epsilon(1e-9));
    CHECK(d2.tail_mass == doctest::Approx(13.460453582690193).epsilon(1e-9));
}

TEST_CASE("tempered stable increments match the quadrature oracle") {
    // E cos(uX_1) = exp(psi(u)) with psi(u) = 2c Int (cos(ux)-1) e^{-lam x}
    // x^{-1-b} dx, evaluated by quadrature at 30 digits and frozen here
    const TemperedStableSpec spec{1.7, 0.11, 0.25};
    RngStream rng(109, 0);
    const Eigen::Index n = 300000;
    const Eigen::VectorXd x = sample_tempered_stable_increments(rng, spec, 1.0, n);
    const double oracle[3][2] = {
        {0.5, 0.89098042300076691},
        {1.0, 0.65708327426143814},
        {2.0, 0.23104924945389156},
    };
    for (const auto& row : oracle)
        CHECK(std::fabs(mean_cos(x, row[0]) - row[1]) < 0.006);
}

TEST_CASE("tempered stable with lambda 0 and the stable level reproduces the stable law") {
    TemperedStableSpec spec;
    spec.beta = 1.7;
    spec.c = stable_level(spec.beta);
    spec.lambda = 0.0;
    RngStream rng(113, 0);
    const Eigen::Index n = 300000;
    const Eigen::VectorXd x = sample_tempered_stable_increments(rng, spec, 1.0, n);
    for (double u : {0.5, 1.0}) {
        const double target = std::exp(-std::pow(u, spec.beta) / 2.0);
        CHECK(std::fabs(mean_cos(x, u) - target) < 0.006);
    }
}

TEST_CASE("tempered stable law is insensitive to the truncation threshold") {
    const TemperedStableSpec spec{1.7, 0.11, 0.25};
    RngStream rng(127, 0);
    const Eigen::Index n = 200000;
    const Eigen::VectorXd coarse =
        sample_tempered_stable_increments(rng, spec, 1.0, n, 0.1);
    const Eigen::VectorXd fine =
        sample_tempered_stable_increments(rng, spec, 1.0, n, 0.025);
    for (double u : {0.5, 1.5})
        CHECK(std::fabs(mean_cos(coarse, u) - mean_cos(fine, u)) < 0.008);
}

// ---- CIR ---------------------------------------------------------------

TEST_CASE("CIR transition matches its conditional mean and variance") {
    struct Config {
        CIRSpec spec;
        const char* name;
    };
    // d > 1 and d < 1 exercise the two decomposition branches
    const Config configs[] = {
        {CIRSpec{0.5, 1.2, 0.6, 0.8, false}, "d=6.67"},
        {CIRSpec{0.5, 0.05, 0.6, 0.8, false}, "d=0.28"},
    };
    const double dt = 0.7;
    for (const auto& cfg : configs) {
        CAPTURE(cfg.name);
        RngStream rng(131, 0);
        const int n = 200000;
        double sum = 0, sum2 = 0;
        for (int i = 0; i < n; ++i) {
            const Eigen::VectorXd v = simulate_cir(rng, cfg.spec, dt, 1);
            CHECK(v[1] > 0.0);
            sum += v[1];
            sum2 += v[1] * v[1];
        }
        const double kappa = cfg.spec.kappa, theta = cfg.spec.theta;
        const double s2 = cfg.spec.sigma_vol * cfg.spec.sigma_vol;
        const double emk = std::exp(-kappa * dt);
        const double mean_true = theta + (cfg.spec.v0 - theta) * emk;
        const double var_true = cfg.spec.v0 * (s2 / kappa) * (emk - emk * emk) +
                                theta * s2 / (2.0 * kappa) * (1.0 - emk) * (1.0 - emk);
        const double mean = sum / n;
        const double var = sum2 / n - mean * mean;
        CHECK(mean == doctest::Approx(mean_true).epsilon(0.01));
        CHECK(var == doctest::Approx(var_true).epsilon(0.05));
    }
}

TEST_CASE("CIR stationary start stays stationary") {
    CIRSpec spec{0.5, 1.0, 0.6, 1.0, true};
    RngStream rng(137, 0);
    const int reps = 40000;
    double sum = 0, sum2 = 0, laplace = 0;
    for (int r = 0; r < reps; ++r) {
        const Eigen::VectorXd v = simulate_cir(rng, spec, 0.9, 6);
        const double end = v[6];
        sum += end;
        sum2 += end * end;
        laplace += std::exp(-0.5 * end);
    }
    const double mean = sum / reps;
    const double var = sum2 / reps - mean * mean;
    CHECK(mean == doctest::Approx(spec.theta).epsilon(0.02));
    // stationary variance theta sigma^2 / (2 kappa)
    CHECK(var == doctest::Approx(1.0 * 0.36 / 1.0).epsilon(0.05));
    CHECK(laplace / reps == doctest::Approx(gamma_laplace(0.5, spec)).epsilon(0.01));
}

TEST_CASE("CIR with zero vol-of-vol follows the deterministic mean reversion") {
    CIRSpec spec{0.3, 2.0, 0.0, 0.5, false};
    RngStream rng(139, 0);
    const Eigen::VectorXd v = simulate_cir(rng, spec, 0.25, 40);
    for (int i = 0; i <= 40; ++i) {
        const double expect = 2.0 + (0.5 - 2.0) * std::exp(-0.3 * 0.25 * i);
        CHECK(v[i] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("CIR stays positive without the Feller condition") {
    // 2 kappa theta = 0.05 << sigma^2 = 1; boundary attainable but the
    // exact transition never goes negative
    CIRSpec spec{0.5, 0.05, 1.0, 0.2, false};
    RngStream rng(149, 0);
    const Eigen::VectorXd v = simulate_cir(rng, spec, 0.5, 20000);
    CHECK(v.minCoeff() > 0.0);
    CHECK(v.allFinite());
}

// ---- gamma_laplace -----------------------------------------------------

TEST_CASE("stationary scale Laplace transform, desk parameters") {
    // (1 + u/16)^{-16} for kappa=0.02, theta=1, sigma_vol=0.05
    const CIRSpec desk{0.02, 1.0, 0.05, 1.0, true};
    const double table[5][2] = {
        {0.10, 0.90511905087095133},
        {0.50, 0.61119052797802888},
        {1.25, 0.30011944312881962},
        {2.50, 0.097987813752100221},
        {3.75, 0.034422794414428379},
    };
    for (const auto& row : table)
        CHECK(gamma_laplace(row[0], desk) == doctest::Approx(row[1]).epsilon(1e-12));
    CHECK(gamma_laplace(0.0, desk) == 1.0);
    // monotone decreasing in u
    double prev = 1.0;
    for (double u = 0.25; u <= 6.0; u += 0.25) {
        const double cur = gamma_laplace(u, desk);
        CHECK(cur < prev);
        prev = cur;
    }
    // zero vol-of-vol degenerates to a point mass at theta
    const CIRSpec point{0.3, 1.4, 0.0, 1.4, false};
    CHECK(gamma_laplace(0.8, point) == doctest::Approx(std::exp(-0.8 * 1.4)).epsilon(1e-14));
}

// ---- joint model -------------------------------------------------------

TEST_CASE("constant-scale model reduces to the bare driver") {
    const CIRSpec const_scale{1.0, 1.0, 0.0, 1.0, false};
    RngStream rng(151, 0);
    const double dt = 1.0 / 78.0;
    const Eigen::Index n = 100000;
    const ModelPath mp = simulate_model(rng, StableSpec{1.7}, const_scale, dt, n);
    CHECK(mp.x.delta_n == dt);
    CHECK(mp.x.values.size() == n + 1);
    CHECK(mp.v.size() == n + 1);
    CHECK(mp.v.minCoeff() == 1.0);
    CHECK(mp.v.maxCoeff() == 1.0);
    // at the transform scale (2u/dt)^{1/beta} the cosine average equals
    // e^{-u} exactly in expectation for a stable driver with unit scale
    const Eigen::VectorXd d = mp.x.increments();
    for (double u : {0.5, 1.25}) {
        const double scale = std::pow(2.0 * u / dt, 1.0 / 1.7);
        CHECK(std::fabs(mean_cos(d, scale) - std::exp(-u)) < 0.008);
    }
}

TEST_CASE("substepping leaves the constant-scale law unchanged") {
    const CIRSpec const_scale{1.0, 1.0, 0.0, 1.0, false};
    const double dt = 1.0 / 39.0;
    const Eigen::Index n = 60000;
    RngStream r1(157, 0), r2(157, 1);
    const ModelPath one = simulate_model(r1, StableSpec{1.7}, const_scale, dt, n, 1);
    const ModelPath three = simulate_model(r2, StableSpec{1.7}, const_scale, dt, n, 3);
    const double scale = std::pow(2.0 * 0.5 / dt, 1.0 / 1.7);
    const double a = mean_cos(one.x.increments(), scale);
    const double b = mean_cos(three.x.increments(), scale);
    CHECK(std::fabs(a - std::exp(-0.5)) < 0.01);
    CHECK(std::fabs(a - b) < 0.015);
}

TEST_CASE("simulation is reproducible from the stream") {
    const CIRSpec cir{0.02, 1.0, 0.05, 1.0, true};
    RngStream a(42, 3), b(42, 3), c(42, 4);
    const ModelPath p1 = simulate_model(a, StableSpec{1.7}, cir, 1.0 / 78.0, 780);
    const ModelPath p2 = simulate_model(b, StableSpec{1.7}, cir, 1.0 / 78.0, 780);
    const ModelPath p3 = simulate_model(c, StableSpec{1.7}, cir, 1.0 / 78.0, 780);
    CHECK((p1.x.values - p2.x.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK((p1.v - p2.v).cwiseAbs().maxCoeff() == 0.0);
    CHECK((p1.x.values - p3.x.values).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("spec validation rejects out-of-domain parameters") {
    CHECK_THROWS_AS(StableSpec{0.9}.validate(), std::invalid_argument);
    CHECK_THROWS_AS(StableSpec{2.0}.validate(), std::invalid_argument);
    CHECK_THROWS_AS((TemperedStableSpec{1.7, -0.1, 0.25}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((TemperedStableSpec{1.7, 0.11, -0.5}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((CIRSpec{0.0, 1.0, 0.05, 1.0, false}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((CIRSpec{0.5, -1.0, 0.05, 1.0, false}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((CIRSpec{0.5, 1.0, -0.05, 1.0, false}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((CIRSpec{0.5, 1.0, 0.05, 0.0, false}).validate(), std::invalid_argument);
    CHECK_NOTHROW((CIRSpec{0.5, 1.0, 0.0, 1.0, false}).validate());
    RngStream rng(1, 0);
    CHECK_THROWS_AS(sample_stable_increments(rng, StableSpec{1.7}, 0.0, 10),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_cir(rng, CIRSpec{}, -1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(simulate_model(rng, StableSpec{1.7}, CIRSpec{}, 1.0, 0),
                    std::invalid_argument);
}
