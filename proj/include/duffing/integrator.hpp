#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "duffing/error.hpp"
#include "duffing/model.hpp"
#include "duffing/noise.hpp"

namespace duffing {

enum class Scheme { EulerMaruyama, StochasticHeun };

std::string_view scheme_name(Scheme scheme) noexcept;
std::optional<Scheme> parse_scheme(std::string_view name) noexcept;

inline constexpr int kDefaultStepsPerPeriod = 1000;

/// Domain guard: integration aborts when rho drops below this value ...
inline constexpr double kMinSpread = 1e-4;
/// ... or when any state component exceeds this magnitude.
inline constexpr double kMaxComponent = 1e10;

struct IntegratorConfig {
    double dt = 2.0 * 3.14159265358979323846 / kDefaultStepsPerPeriod;
    int transient_periods = 200;
    int measure_periods = 2000;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::EulerMaruyama;

    /// Config whose dt is exactly period / steps_per_period.
    static IntegratorConfig for_period(double period, int steps_per_period = kDefaultStepsPerPeriod);

    /// Number of steps per drive period; throws if dt does not divide it.
    int steps_per_period(double period) const;
    void validate(double period) const;
};

/// Which instants integrate() keeps.
struct SamplingPlan {
    bool strobes = true;
    /// Also record every n-th step of the measurement window (0 = off).
    int dense_stride = 0;
};

struct Trajectory {
    ModelSpec spec;
    std::vector<double> times;
    std::vector<OscState> states;
    /// Indices into times/states that fall on t = nT after the transient.
    std::vector<std::size_t> strobe_indices;
    /// Moments of every increment the run consumed.
    NoiseStats noise;
};

// ---------------------------------------------------------------------------
// Per-model dispatch used by the stepping templates.

inline StateXP model_drift(const StateXP& s, double t, const ModelSpec& spec) {
    return classical_rhs(s, t, spec);
}
inline StateSC model_drift(const StateSC& s, double t, const ModelSpec& spec) {
    return sc_drift(s, t, spec);
}
inline StateSC5 model_drift(const StateSC5& s, double t, const ModelSpec& spec) {
    return sc5_drift(s, t, spec);
}

inline DiffusionCoeffs<StateXP> model_diffusion(const StateXP&, const ModelSpec& spec) {
    if (spec.kind == ModelKind::CNR) return noisy_classical_diffusion(spec);
    return {};
}
inline DiffusionCoeffs<StateSC> model_diffusion(const StateSC& s, const ModelSpec& spec) {
    return sc_diffusion(s, spec);
}
inline DiffusionCoeffs<StateSC5> model_diffusion(const StateSC5& s, const ModelSpec& spec) {
    return sc5_diffusion(s, spec);
}

/// True when the model consumes noise (every kind except C).
inline bool is_stochastic(const ModelSpec& spec) noexcept { return spec.kind != ModelKind::C; }

/// Draws the increment the model expects: real for CNR, complex otherwise.
inline ComplexNoiseIncrement draw_increment(const ModelSpec& spec, Rng& rng, double dt) {
    return spec.kind == ModelKind::CNR ? sample_real_increment(rng, dt)
                                       : sample_complex_increment(rng, dt);
}

/// Throws IntegrationError if the state left the valid domain.
template <class State>
void check_domain(const State& s, double t) {
    for (double v : StateLayout<State>::pack(s)) {
        if (!std::isfinite(v) || std::abs(v) > kMaxComponent) {
            throw IntegrationError(ErrorCode::NumericOverflow, "numeric overflow", t);
        }
    }
    if constexpr (std::is_same_v<State, StateSC>) {
        if (!(s.rho >= kMinSpread)) throw IntegrationError(ErrorCode::SpreadCollapse, "spread collapse", t);
    } else if constexpr (std::is_same_v<State, StateSC5>) {
        if (!(s.mu >= kMinSpread * kMinSpread)) {
            throw IntegrationError(ErrorCode::SpreadCollapse, "spread collapse", t);
        }
    }
}

/// One fixed step. Euler-Maruyama: s + f dt + G dW. Stochastic Heun applies
/// the trapezoidal predictor-corrector to the drift and keeps the Euler
/// diffusion term.
template <class State>
State step(const ModelSpec& spec, const State& s, double t, double dt,
           const ComplexNoiseIncrement& noise, Scheme scheme = Scheme::EulerMaruyama) {
    using L = StateLayout<State>;
    const auto a = L::pack(s);
    const auto f = L::pack(model_drift(s, t, spec));

    std::array<double, L::size> kick{};
    if (is_stochastic(spec)) {
        const auto c = model_diffusion(s, spec);
        const auto cr = L::pack(c.real);
        const auto ci = L::pack(c.imag);
        for (std::size_t k = 0; k < L::size; ++k) kick[k] = cr[k] * noise.xi_r + ci[k] * noise.xi_i;
    }

    std::array<double, L::size> out;
    for (std::size_t k = 0; k < L::size; ++k) out[k] = a[k] + f[k] * dt + kick[k];
    if (scheme == Scheme::StochasticHeun) {
        const auto f2 = L::pack(model_drift(L::unpack(out), t + dt, spec));
        for (std::size_t k = 0; k < L::size; ++k) out[k] = a[k] + 0.5 * (f[k] + f2[k]) * dt + kick[k];
    }
    return L::unpack(out);
}

OscState step(const ModelSpec& spec, const OscState& s, double t, double dt,
              const ComplexNoiseIncrement& noise, Scheme scheme = Scheme::EulerMaruyama);

/// Checks that the state alternative matches the model kind.
void check_state_matches(const ModelSpec& spec, const OscState& s);

/// Runs the transient, then records measure_periods strobe samples (the state
/// at the end of each measured drive period) plus any dense samples. The
/// result is a pure function of (spec, init, config, plan).
Trajectory integrate(const ModelSpec& spec, const OscState& init, const IntegratorConfig& config,
                     const SamplingPlan& plan = {});

/// CSV with header t,x,p,rho,pi,mu,kappa,r,energy; absent fields are empty.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// Formats a double with 17 significant digits.
std::string format_double(double v);

}  // namespace duffing
