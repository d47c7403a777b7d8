#include "rlt/levy_sim.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <type_traits>

namespace rlt {
namespace {

// ---- quadrature helper -------------------------------------------------

double simpson(const std::function<double(double)>& f, double a, double m,
               double b, double fa, double fm, double fb, double whole,
               double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson on [a,b].  Good enough for the smooth integrands below;
// the tolerance is absolute.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12) {
    if (!(b > a))
        return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, m, b, fa, fm, fb, whole, tol, 48);
}

double cms_standard_stable(RngStream& rng, double beta) {
    // Chambers-Mallows-Stuck draw with characteristic function exp(-|t|^beta)
    const double u = M_PI * (rng.uniform() - 0.5); // Unif(-pi/2, pi/2)
    const double w = rng.exponential();
    const double t1 = std::sin(beta * u) / std::pow(std::cos(u), 1.0 / beta);
    const double t2 = std::pow(std::cos((1.0 - beta) * u) / w, (1.0 - beta) / beta);
    return t1 * t2;
}

} // namespace

// ---- specs -------------------------------------------------------------

void StableSpec::validate() const {
    if (!(beta > 1.0 && beta < 2.0))
        throw std::invalid_argument("StableSpec: beta must lie in (1,2)");
}

void TemperedStableSpec::validate() const {
    if (!(beta > 1.0 && beta < 2.0))
        throw std::invalid_argument("TemperedStableSpec: beta must lie in (1,2)");
    if (!(c > 0.0))
        throw std::invalid_argument("TemperedStableSpec: c must be positive");
    if (!(lambda >= 0.0))
        throw std::invalid_argument("TemperedStableSpec: lambda must be >= 0");
}

void CIRSpec::validate() const {
    if (!(kappa > 0.0))
        throw std::invalid_argument("CIRSpec: kappa must be positive");
    if (!(theta > 0.0))
        throw std::invalid_argument("CIRSpec: theta must be positive");
    if (!(sigma_vol >= 0.0))
        throw std::invalid_argument("CIRSpec: sigma_vol must be >= 0");
    if (!stationary_init && !(v0 > 0.0))
        throw std::invalid_argument("CIRSpec: v0 must be positive");
    if (stationary_init && sigma_vol > 0.0 && !(2.0 * kappa * theta / (sigma_vol * sigma_vol) > 0.0))
        throw std::invalid_argument("CIRSpec: stationary law undefined");
}

double stable_level(double beta) {
    if (!(beta > 1.0 && beta < 2.0))
        throw std::invalid_argument("stable_level: beta must lie in (1,2)");
    const double num = 4.0 * std::tgamma(2.0 - beta) *
                       std::fabs(std::cos(beta * M_PI / 2.0));
    return beta * (beta - 1.0) / num;
}

// ---- stable driver -----------------------------------------------------

Eigen::VectorXd sample_stable_increments(RngStream& rng, const StableSpec& spec,
                                         double dt, Eigen::Index n) {
    spec.validate();
    if (!(dt > 0.0))
        throw std::invalid_argument("sample_stable_increments: dt must be positive");
    if (n < 0)
        throw std::invalid_argument("sample_stable_increments: n must be >= 0");
    const double scale = std::pow(0.5 * dt, 1.0 / spec.beta);
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i)
        out[i] = scale * cms_standard_stable(rng, spec.beta);
    return out;
}

// ---- tempered stable driver --------------------------------------------

TemperedStableDecomposition
ts_decomposition(const TemperedStableSpec& spec, double dt, double eps) {
    spec.validate();
    if (!(dt > 0.0))
        throw std::invalid_argument("ts_decomposition: dt must be positive");
    if (eps <= 0.0)
        eps = std::pow(dt, 1.0 / spec.beta) / 10.0;

    const double b = spec.beta, c = spec.c, lam = spec.lambda;
    TemperedStableDecomposition out;
    out.eps = eps;

    // 2c Int_0^eps x^{1-beta} e^{-lam x} dx.  Substituting x = t^{1/(2-beta)}
    // flattens the power so the integrand is smooth: (2-beta)^{-1} times
    // Int_0^{eps^{2-beta}} exp(-lam t^{1/(2-beta)}) dt.
    const double q = 1.0 / (2.0 - b);
    const double upper = std::pow(eps, 2.0 - b);
    if (lam == 0.0) {
        out.small_jump_var = 2.0 * c * upper / (2.0 - b);
    } else {
        const double integral =
            integrate([&](double t) { return std::exp(-lam * std::pow(t, q)); },
                      0.0, upper, 1e-14 * upper);
        out.small_jump_var = 2.0 * c * integral / (2.0 - b);
    }

    // 2c Int_eps^inf x^{-1-beta} e^{-lam x} dx.  With x = eps e^t the range
    // becomes [0, inf) and the integrand exp(-beta t - lam eps e^t) decays at
    // least like exp(-beta t); truncating at 40/beta leaves mass < 1e-17.
    if (lam == 0.0) {
        out.tail_mass = 2.0 * c * std::pow(eps, -b) / b;
    } else {
        const double tmax = 40.0 / b;
        const double integral = integrate(
            [&](double t) { return std::exp(-b * t - lam * eps * std::exp(t)); },
            0.0, tmax, 1e-14);
        out.tail_mass = 2.0 * c * std::pow(eps, -b) * integral;
    }
    return out;
}

Eigen::VectorXd sample_tempered_stable_increments(RngStream& rng,
                                                  const TemperedStableSpec& spec,
                                                  double dt, Eigen::Index n,
                                                  double eps) {
    const TemperedStableDecomposition dec = ts_decomposition(spec, dt, eps);
    if (n < 0)
        throw std::invalid_argument("sample_tempered_stable_increments: n must be >= 0");

    const double b = spec.beta, lam = spec.lambda;
    const double small_sd = std::sqrt(dt * dec.small_jump_var);
    const double jump_mean = dt * dec.tail_mass;

    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double x = small_sd * rng.normal();
        const std::uint64_t k = rng.poisson(jump_mean);
        for (std::uint64_t j = 0; j < k; ++j) {
            // magnitude: truncated-stable proposal eps * U^{-1/beta}, thinned
            // by the exponential taper
            double mag;
            for (;;) {
                mag = dec.eps * std::pow(rng.uniform(), -1.0 / b);
                if (lam == 0.0 || rng.uniform() <= std::exp(-lam * (mag - dec.eps)))
                    break;
            }
            x += (rng.uniform() < 0.5) ? mag : -mag;
        }
        out[i] = x;
    }
    return out;
}

// ---- CIR ---------------------------------------------------------------

namespace {

double cir_draw_v0(RngStream& rng, const CIRSpec& spec) {
    if (!spec.stationary_init)
        return spec.v0;
    if (spec.sigma_vol == 0.0)
        return spec.theta;
    const double s2 = spec.sigma_vol * spec.sigma_vol;
    const double shape = 2.0 * spec.kappa * spec.theta / s2;
    const double scale = s2 / (2.0 * spec.kappa);
    return scale * rng.gamma(shape);
}

} // namespace

Eigen::VectorXd simulate_cir(RngStream& rng, const CIRSpec& spec, double dt,
                             Eigen::Index n) {
    spec.validate();
    if (!(dt > 0.0))
        throw std::invalid_argument("simulate_cir: dt must be positive");
    if (n < 0)
        throw std::invalid_argument("simulate_cir: n must be >= 0");

    Eigen::VectorXd v(n + 1);
    v[0] = cir_draw_v0(rng, spec);

    const double emk = std::exp(-spec.kappa * dt);
    if (spec.sigma_vol == 0.0) {
        for (Eigen::Index i = 0; i < n; ++i)
            v[i + 1] = spec.theta + (v[i] - spec.theta) * emk;
        return v;
    }

    // exact transition: V' = cfac * chi^2_d(lambda_nc) with
    // d = 4 kappa theta / sigma^2 and lambda_nc = V e^{-kappa dt} / cfac
    const double s2 = spec.sigma_vol * spec.sigma_vol;
    const double cfac = s2 * (1.0 - emk) / (4.0 * spec.kappa);
    const double d = 4.0 * spec.kappa * spec.theta / s2;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lam_nc = v[i] * emk / cfac;
        double chi2;
        if (d > 1.0) {
            // split one noncentral degree of freedom off; the rest is a
            // central chi-square, i.e. Gamma((d-1)/2, scale 2)
            const double z = rng.normal() + std::sqrt(lam_nc);
            chi2 = z * z + 2.0 * rng.gamma(0.5 * (d - 1.0));
        } else {
            // Poisson-mixed central chi-square
            const std::uint64_t k = rng.poisson(0.5 * lam_nc);
            chi2 = 2.0 * rng.gamma(0.5 * d + static_cast<double>(k));
        }
        v[i + 1] = cfac * chi2;
    }
    return v;
}

// ---- joint model -------------------------------------------------------

ModelPath simulate_model(RngStream& rng, const DriverSpec& driver,
                         const CIRSpec& cir, double dt, Eigen::Index n,
                         int substeps) {
    cir.validate();
    if (!(dt > 0.0))
        throw std::invalid_argument("simulate_model: dt must be positive");
    if (n < 1)
        throw std::invalid_argument("simulate_model: n must be >= 1");
    if (substeps < 1)
        throw std::invalid_argument("simulate_model: substeps must be >= 1");

    const double fine_dt = dt / substeps;
    const Eigen::Index fine_n = n * substeps;

    // draw order is fixed (scale path first, then driver increments) so a
    // given stream always produces the same model path
    const Eigen::VectorXd v_fine = simulate_cir(rng, cir, fine_dt, fine_n);
    const double beta = std::visit([](const auto& s) { return s.beta; }, driver);
    const Eigen::VectorXd dl = std::visit(
        [&](const auto& s) -> Eigen::VectorXd {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, StableSpec>)
                return sample_stable_increments(rng, s, fine_dt, fine_n);
            else
                return sample_tempered_stable_increments(rng, s, fine_dt, fine_n);
        },
        driver);

    ModelPath out;
    out.x.delta_n = dt;
    out.x.values.resize(n + 1);
    out.v.resize(n + 1);
    out.x.values[0] = 0.0;
    out.v[0] = v_fine[0];

    double x = 0.0;
    for (Eigen::Index i = 0; i < fine_n; ++i) {
        x += std::pow(v_fine[i], 1.0 / beta) * dl[i];
        if ((i + 1) % substeps == 0) {
            const Eigen::Index coarse = (i + 1) / substeps;
            out.x.values[coarse] = x;
            out.v[coarse] = v_fine[i + 1];
        }
    }
    return out;
}

double gamma_laplace(double u, const CIRSpec& spec) {
    spec.validate();
    if (!(u >= 0.0))
        throw std::invalid_argument("gamma_laplace: u must be >= 0");
    if (spec.sigma_vol == 0.0)
        return std::exp(-u * spec.theta);
    const double s2 = spec.sigma_vol * spec.sigma_vol;
    const double shape = 2.0 * spec.kappa * spec.theta / s2;
    const double scale = s2 / (2.0 * spec.kappa);
    return std::exp(-shape * std::log1p(scale * u));
}

} // namespace rlt
