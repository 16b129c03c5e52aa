#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "duffing/integrator.hpp"
#include "duffing/model.hpp"
#include "duffing/noise.hpp"

namespace duffing {

struct LyapunovOptions {
    /// Separation kept between fiducial and companion, in scaled coordinates.
    double d0 = 1e-8;
    /// Renormalizations discarded while the separation vector aligns.
    int skip_renorms = 50;
    /// Independent noise realizations averaged for stochastic models.
    int realizations = 4;
    /// Keep the fiducial strobe points (scaled x, p) of the first realization.
    bool keep_section = false;
    /// Starting state; default_initial_state(spec) when unset.
    std::optional<OscState> init;
};

/// Minimum number of renormalizations an estimate must average over.
inline constexpr int kMinRenorms = 100;

struct LyapunovEstimate {
    double lambda = 0.0;
    double std_error = 0.0;
    int n_renorms = 0;
    double d0 = 0.0;
    std::vector<double> realization_lambdas;
    /// Scaled (x, p) strobe samples of the first fiducial trajectory, if requested.
    std::vector<std::array<double, 2>> section;
    /// Streams consumed by the fiducial and companion of the first realization.
    NoiseStats fiducial_noise;
    NoiseStats companion_noise;
};

/// Largest Lyapunov exponent by two-trajectory renormalization (Wolf et al.).
///
/// A companion trajectory is started d0 away from the fiducial one after the
/// transient and both are driven by the same noise increments. Once per drive
/// period the separation d_i is measured in the weighted norm
///   |(beta dx, beta dp, d rho, d Pi)|   (SC, CNC)
///   |(beta dx, beta dp, d mu, d kappa, dR)|   (SC5)
///   |(beta dx, beta dp)|   (C, CNR)
/// and the companion is pulled back to distance d0 along the separation.
/// lambda = sum ln(d_i/d0) / (n T) over the renormalizations after the first
/// skip_renorms. Stochastic models average `realizations` independent runs
/// and report the standard error of their mean; deterministic runs report a
/// block standard error over the renormalization series.
LyapunovEstimate lyapunov_wolf(const ModelSpec& spec, const IntegratorConfig& config,
                               const LyapunovOptions& options = {});

/// Seed of realization `index` derived from the configured base seed.
std::uint64_t realization_seed(std::uint64_t base, int index) noexcept;

enum class AttractorClass { Chaotic, Periodic };

std::string_view class_name(AttractorClass c) noexcept;
std::optional<AttractorClass> parse_class(std::string_view name) noexcept;

/// K = lambda + Gamma, zero for periodic orbits of the classical oscillator.
constexpr double dynamical_complexity(double lambda, double gamma) noexcept { return lambda + gamma; }

inline constexpr double kChaosThreshold = 0.2;

constexpr AttractorClass classify_attractor(double k) noexcept {
    return k > kChaosThreshold ? AttractorClass::Chaotic : AttractorClass::Periodic;
}

struct ComplexityRecord {
    double lambda = 0.0;
    double k = 0.0;
    AttractorClass cls = AttractorClass::Periodic;
};

ComplexityRecord complexity_record(double lambda, double gamma) noexcept;

struct LambdaPoint {
    double beta = 0.0;
    double lambda = 0.0;
    double std_error = 0.0;
};

/// Smallest grid beta where |lambda(beta) - lambda_classical| exceeds the
/// threshold. Without an explicit epsilon each point uses
/// 3 * max(std_error, 0.005). Throws on an empty or unsorted curve.
std::optional<double> beta_break(std::span<const LambdaPoint> curve, double lambda_classical,
                                 std::optional<double> epsilon = std::nullopt);

}  // namespace duffing
