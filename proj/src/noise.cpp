#include "duffing/noise.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace duffing {

std::uint64_t derive_seed(std::uint64_t base, int model, std::uint64_t gamma_index,
                          std::uint64_t beta_index, std::uint64_t replicate) noexcept {
    std::uint64_t h = mix64(base);
    h = mix64(h ^ static_cast<std::uint64_t>(model));
    h = mix64(h ^ gamma_index);
    h = mix64(h ^ beta_index);
    return mix64(h ^ replicate);
}

Rng::Rng(std::uint64_t seed) noexcept {
    std::uint64_t z = seed;
    for (auto& word : s_) {
        z += 0x9E3779B97F4A7C15ULL;
        word = mix64(z);
    }
}

std::uint64_t Rng::next_u64() noexcept {
    const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
}

double Rng::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::array<double, 2> Rng::normal_pair() noexcept {
    const double u1 = 1.0 - uniform();   // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

ComplexNoiseIncrement sample_complex_increment(Rng& rng, double dt) {
    const auto z = rng.normal_pair();
    const double sd = std::sqrt(0.5 * dt);
    return {sd * z[0], sd * z[1]};
}

ComplexNoiseIncrement sample_real_increment(Rng& rng, double dt) {
    const auto z = rng.normal_pair();
    return {std::sqrt(dt) * z[0], 0.0};
}

void NoiseStats::add(const ComplexNoiseIncrement& n) noexcept {
    ++count;
    sum_r += n.xi_r;
    sum_i += n.xi_i;
    sum_sq_re += n.xi_r * n.xi_r - n.xi_i * n.xi_i;
    sum_sq_im += 2.0 * n.xi_r * n.xi_i;
    sum_abs2 += n.xi_r * n.xi_r + n.xi_i * n.xi_i;
    checksum = mix64(checksum ^ std::bit_cast<std::uint64_t>(n.xi_r)) ^
               std::bit_cast<std::uint64_t>(n.xi_i);
}

}  // namespace duffing
