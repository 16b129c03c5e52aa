#pragma once

// Right-hand sides of the dissipative Duffing models.
//
// All models are written in raw (unscaled) coordinates. The natural frame for
// comparing different length scales is the scaled one, x~ = beta*x and
// p~ = beta*p, in which the classical equation is beta-independent.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace duffing {

enum class ModelKind { C, CNR, CNC, SC, SC5 };

std::string_view model_name(ModelKind kind) noexcept;   // "c", "cnr", ...
std::optional<ModelKind> parse_model(std::string_view name) noexcept;
int model_id(ModelKind kind) noexcept;

/// beta used by the complex-noise classical model; its noise is scaled by beta_n instead.
inline constexpr double kBetaFixed = 1e-5;

struct ModelSpec {
    ModelKind kind = ModelKind::C;
    double gamma = 0.1;
    double g = 0.3;
    double omega = 1.0;
    double beta = 0.01;
    double beta_n = 0.0;   // only meaningful for CNC

    /// Builds a spec for `kind` at nominal length scale `beta`. For CNC the
    /// physical beta is pinned to kBetaFixed and beta_n = beta / kBetaFixed so
    /// that the scaled noise amplitude matches SC at the same nominal beta.
    static ModelSpec at(ModelKind kind, double gamma, double beta, double g = 0.3,
                        double omega = 1.0);

    /// Length scale the dynamics is compared at (beta * beta_n for CNC).
    double nominal_beta() const noexcept;
    double period() const noexcept;

    /// Throws DuffingError(InvalidArgument) when the invariants do not hold.
    void validate() const;
};

struct StateXP {
    double x = 0.0;
    double p = 0.0;
};

struct StateSC {
    double x = 0.0;
    double p = 0.0;
    double rho = 0.70710678118654752;
    double pi = 0.0;
};

struct StateSC5 {
    double x = 0.0;
    double p = 0.0;
    double mu = 0.5;
    double kappa = 0.5;
    double r = 0.0;
};

using OscState = std::variant<StateXP, StateSC, StateSC5>;

// ---------------------------------------------------------------------------
// Flat-array view of the state structs, used by the integrator.

template <class State>
struct StateLayout;

template <>
struct StateLayout<StateXP> {
    static constexpr std::size_t size = 2;
    static std::array<double, 2> pack(const StateXP& s) { return {s.x, s.p}; }
    static StateXP unpack(const std::array<double, 2>& a) { return {a[0], a[1]}; }
};

template <>
struct StateLayout<StateSC> {
    static constexpr std::size_t size = 4;
    static std::array<double, 4> pack(const StateSC& s) { return {s.x, s.p, s.rho, s.pi}; }
    static StateSC unpack(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }
};

template <>
struct StateLayout<StateSC5> {
    static constexpr std::size_t size = 5;
    static std::array<double, 5> pack(const StateSC5& s) {
        return {s.x, s.p, s.mu, s.kappa, s.r};
    }
    static StateSC5 unpack(const std::array<double, 5>& a) {
        return {a[0], a[1], a[2], a[3], a[4]};
    }
};

/// Multipliers of d(xi_R) and d(xi_I) for every state component; all zero by default.
template <class State>
struct DiffusionCoeffs {
    State real = StateLayout<State>::unpack({});
    State imag = StateLayout<State>::unpack({});
};

// ---------------------------------------------------------------------------
// Drift and diffusion.

/// Newtonian Duffing equation: (p, -beta^2 x^3 + x - 2 Gamma p + (g/beta) cos(Omega t)).
StateXP classical_rhs(const StateXP& s, double t, const ModelSpec& spec);

/// Deterministic part of the four-variable semiclassical model (also CNC).
StateSC sc_drift(const StateSC& s, double t, const ModelSpec& spec);

/// Noise multipliers of the four-variable model. Only x and p are noisy.
/// For CNC every coefficient carries the extra factor beta_n.
DiffusionCoeffs<StateSC> sc_diffusion(const StateSC& s, const ModelSpec& spec);

/// Five-variable semiclassical model in (x, p, mu, kappa, R).
StateSC5 sc5_drift(const StateSC5& s, double t, const ModelSpec& spec);
DiffusionCoeffs<StateSC5> sc5_diffusion(const StateSC5& s, const ModelSpec& spec);

/// Real additive noise of the noise-added classical model: 2 sqrt(Gamma) on
/// both x and p, driven by a single shared real increment.
DiffusionCoeffs<StateXP> noisy_classical_diffusion(const ModelSpec& spec);

/// Tolerance on |mu kappa - R^2 - 1/4| accepted by reduce_5to4.
inline constexpr double kConstraintTolerance = 1e-6;

StateSC reduce_5to4(const StateSC5& s, double tol = kConstraintTolerance);
StateSC5 lift_4to5(const StateSC& s);

/// mu kappa - R^2 - 1/4; zero on the minimum-uncertainty manifold.
double uncertainty_defect(const StateSC5& s) noexcept;

/// Scaled mechanical energy beta^2 (p^2/2 + beta^2 x^4/4 - x^2/2).
double observable_energy(double x, double p, const ModelSpec& spec) noexcept;

template <class State>
double observable_energy(const State& s, const ModelSpec& spec) noexcept {
    return observable_energy(s.x, s.p, spec);
}

/// Effective two-dimensional potential U(x, rho) of the four-variable model.
double potential_surface(double x, double rho, double t, const ModelSpec& spec);

/// Default starting point: bottom of the +x well on the minimum-uncertainty
/// manifold, x = 1/beta, p = 0, rho = 2^-1/2, Pi = 0.
OscState default_initial_state(const ModelSpec& spec);

}  // namespace duffing
