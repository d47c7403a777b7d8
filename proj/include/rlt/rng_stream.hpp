#pragma once

#include <cstdint>
#include <random>

namespace rlt {

/// Deterministic random stream: a mt19937_64 engine plus hand-rolled
/// distribution transforms, so that a (seed, stream) pair reproduces the
/// same draws on every platform.  std::normal_distribution and friends are
/// deliberately avoided because their algorithms are implementation-defined.
///
/// Streams derived from the same seed but different stream ids are
/// statistically independent for practical purposes (seed material is mixed
/// through splitmix64 twice), which is what the Monte Carlo harness relies
/// on for reproducible parallelism.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    /// Raw 64-bit draw from the engine.
    std::uint64_t next_u64() { return eng_(); }

    /// Uniform on the open interval (0,1); never returns 0 or 1, so logs
    /// and inverse CDFs are always safe.
    double uniform();

    /// Standard normal via Box-Muller (the spare is cached).
    double normal();

    /// Exponential with unit mean.
    double exponential();

    /// Gamma(shape) with unit scale, Marsaglia-Tsang squeeze; shape > 0.
    /// Shapes below one go through the boost Gamma(a) = Gamma(a+1) * U^{1/a}.
    double gamma(double shape);

    /// Poisson with the given mean; Knuth product for small means, the
    /// transformed-rejection (PTRD) sampler above mean 10.  mean >= 0.
    std::uint64_t poisson(double mean);

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 eng_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

} // namespace rlt
