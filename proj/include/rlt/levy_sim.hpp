#pragma once

#include <variant>

#include <Eigen/Dense>

#include "rlt/path_grid.hpp"
#include "rlt/rng_stream.hpp"

namespace rlt {

/// Symmetric beta-stable driver, normalized so that an increment over dt has
/// characteristic function exp(-dt |u|^beta / 2).  At beta -> 2 this matches
/// a Brownian motion with unit variance per unit time.
struct StableSpec {
    double beta = 1.7;

    void validate() const;
};

/// Symmetric tempered stable driver with Levy density
///   nu(x) = c * exp(-lambda |x|) / |x|^{1+beta},
/// i.e. a beta-stable density damped exponentially in the tails.
/// lambda = 0 recovers the stable case with level c; c = stable_level(beta)
/// then reproduces the exp(-dt |u|^beta / 2) normalization.
struct TemperedStableSpec {
    double beta = 1.7;
    double c = 0.11;
    double lambda = 0.25;

    void validate() const;
};

/// Square-root (CIR) process for the stochastic scale,
///   dV = kappa (theta - V) dt + sigma_vol sqrt(V) dW.
/// sigma_vol = 0 degenerates to the deterministic mean reversion
/// V_t = theta + (V_0 - theta) e^{-kappa t}, which is how constant-scale
/// paths are produced (theta = v0 = const).  With stationary_init the
/// starting value is drawn from the stationary Gamma law instead of v0.
struct CIRSpec {
    double kappa = 0.02;
    double theta = 1.0;
    double sigma_vol = 0.05;
    double v0 = 1.0;
    bool stationary_init = false;

    void validate() const;
};

using DriverSpec = std::variant<StableSpec, TemperedStableSpec>;

/// Joint draw of the scale process and the price path: x is the observed
/// path, v the scale state at the same grid points (v.size() == x levels).
struct ModelPath {
    PathGrid x;
    Eigen::VectorXd v;
};

/// Stable level A(beta) = [4 Gamma(2-beta) |cos(beta pi/2)| / (beta(beta-1))]^{-1}:
/// the constant that makes nu(x) = A |x|^{-1-beta} generate the
/// exp(-|u|^beta / 2) characteristic exponent.  A(1.7) ~ 0.1116.
double stable_level(double beta);

/// n iid increments of the stable driver over steps of length dt
/// (Chambers-Mallows-Stuck draw scaled by (dt/2)^{1/beta}).
Eigen::VectorXd sample_stable_increments(RngStream& rng, const StableSpec& spec,
                                         double dt, Eigen::Index n);

/// Small-jump / large-jump split used by the tempered stable sampler:
/// jumps below eps are replaced by a Gaussian with matching second moment,
/// jumps above eps arrive as a compound Poisson stream.
struct TemperedStableDecomposition {
    double eps = 0.0;            // truncation threshold
    double small_jump_var = 0.0; // 2c Int_0^eps x^2 nu(dx)/x, per unit time
    double tail_mass = 0.0;      // nu({|x| > eps}), per unit time
};

/// Computes the split for a given threshold; eps <= 0 picks the default
/// dt^{1/beta} / 10.
TemperedStableDecomposition
ts_decomposition(const TemperedStableSpec& spec, double dt, double eps = 0.0);

/// n iid increments of the tempered stable driver over steps of length dt.
/// No compensator term is needed: the density is symmetric.
Eigen::VectorXd sample_tempered_stable_increments(RngStream& rng,
                                                  const TemperedStableSpec& spec,
                                                  double dt, Eigen::Index n,
                                                  double eps = 0.0);

/// Exact CIR transition over n steps of length dt via the noncentral
/// chi-square decomposition; returns the n+1 states including the start.
Eigen::VectorXd simulate_cir(RngStream& rng, const CIRSpec& spec, double dt,
                             Eigen::Index n);

/// Joint simulation of scale and price: dX = V^{1/beta} dL with V frozen at
/// the left endpoint of each step.  substeps > 1 refines the freeze (both V
/// and L are stepped on dt/substeps internally) for discretization-bias
/// checks; the returned grid is still the coarse one.
ModelPath simulate_model(RngStream& rng, const DriverSpec& driver,
                         const CIRSpec& cir, double dt, Eigen::Index n,
                         int substeps = 1);

/// Laplace transform E[e^{-uV}] of the stationary Gamma law of the CIR
/// scale process; the target curve the realized Laplace transform estimates
/// under the simulation design.  sigma_vol = 0 degenerates to e^{-u theta}.
double gamma_laplace(double u, const CIRSpec& spec = CIRSpec{});

} // namespace rlt
