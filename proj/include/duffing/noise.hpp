#pragma once

#include <array>
#include <cstdint>

namespace duffing {

/// SplitMix64 finalizer; used to derive independent stream seeds from keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed for one sweep point. Distinct coordinates give unrelated streams.
std::uint64_t derive_seed(std::uint64_t base, int model, std::uint64_t gamma_index,
                          std::uint64_t beta_index, std::uint64_t replicate) noexcept;

/// xoshiro256** with a SplitMix64-expanded seed. Gaussian variates come from
/// Box-Muller in pairs so one complex increment costs exactly two uniforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1).
    double uniform() noexcept;
    /// Two independent standard normals.
    std::array<double, 2> normal_pair() noexcept;

private:
    std::array<std::uint64_t, 4> s_;
};

/// d(xi) = d(xi_R) + i d(xi_I) with M(d xi) = 0, M(d xi^2) = 0, M(|d xi|^2) = dt.
struct ComplexNoiseIncrement {
    double xi_r = 0.0;
    double xi_i = 0.0;
};

ComplexNoiseIncrement sample_complex_increment(Rng& rng, double dt);

/// Real Wiener increment with variance dt, built from the same two uniforms a
/// complex draw would consume (returned in xi_r, xi_i = 0).
ComplexNoiseIncrement sample_real_increment(Rng& rng, double dt);

/// Running moments of a consumed noise stream.
struct NoiseStats {
    std::uint64_t count = 0;
    double sum_r = 0.0;
    double sum_i = 0.0;
    double sum_sq_re = 0.0;   // Re(d xi^2) = r^2 - i^2
    double sum_sq_im = 0.0;   // Im(d xi^2) = 2 r i
    double sum_abs2 = 0.0;    // |d xi|^2
    std::uint64_t checksum = 0;

    void add(const ComplexNoiseIncrement& n) noexcept;
    double mean_r() const noexcept { return count ? sum_r / count : 0.0; }
    double mean_i() const noexcept { return count ? sum_i / count : 0.0; }
    double mean_sq_re() const noexcept { return count ? sum_sq_re / count : 0.0; }
    double mean_sq_im() const noexcept { return count ? sum_sq_im / count : 0.0; }
    double mean_abs2() const noexcept { return count ? sum_abs2 / count : 0.0; }
};

}  // namespace duffing
