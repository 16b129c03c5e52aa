#include "duffing/model.hpp"

#include <cmath>
#include <numbers>

#include "duffing/error.hpp"

namespace duffing {

namespace {

template <class... T>
bool all_finite(T... v) {
    return (std::isfinite(v) && ...);
}

void require_finite(bool ok) {
    if (!ok) throw DuffingError(ErrorCode::NumericOverflow, "numeric overflow");
}

void require_positive_spread(double rho) {
    if (!(rho > 0.0)) throw DuffingError(ErrorCode::SpreadCollapse, "spread collapse");
}

double drive(double t, const ModelSpec& spec) {
    return spec.g / spec.beta * std::cos(spec.omega * t);
}

}  // namespace

std::string_view model_name(ModelKind kind) noexcept {
    switch (kind) {
        case ModelKind::C: return "c";
        case ModelKind::CNR: return "cnr";
        case ModelKind::CNC: return "cnc";
        case ModelKind::SC: return "sc";
        case ModelKind::SC5: return "sc5";
    }
    return "?";
}

std::optional<ModelKind> parse_model(std::string_view name) noexcept {
    for (auto k : {ModelKind::C, ModelKind::CNR, ModelKind::CNC, ModelKind::SC, ModelKind::SC5}) {
        if (model_name(k) == name) return k;
    }
    return std::nullopt;
}

int model_id(ModelKind kind) noexcept { return static_cast<int>(kind); }

ModelSpec ModelSpec::at(ModelKind kind, double gamma, double beta, double g, double omega) {
    ModelSpec spec;
    spec.kind = kind;
    spec.gamma = gamma;
    spec.g = g;
    spec.omega = omega;
    if (kind == ModelKind::CNC) {
        spec.beta = kBetaFixed;
        spec.beta_n = beta / kBetaFixed;
    } else {
        spec.beta = beta;
    }
    return spec;
}

double ModelSpec::nominal_beta() const noexcept {
    return kind == ModelKind::CNC ? beta * beta_n : beta;
}

double ModelSpec::period() const noexcept { return 2.0 * std::numbers::pi / omega; }

void ModelSpec::validate() const {
    auto fail = [](const char* what) { throw DuffingError(ErrorCode::InvalidArgument, what); };
    if (!all_finite(gamma, g, omega, beta, beta_n)) fail("model parameters must be finite");
    if (!(beta > 0.0 && beta <= 1.0)) fail("beta must lie in (0, 1]");
    if (gamma < 0.0) fail("gamma must be non-negative");
    if (!(omega > 0.0)) fail("omega must be positive");
    if (kind == ModelKind::CNC) {
        if (beta != kBetaFixed) fail("cnc requires beta pinned to 1e-5");
        if (!(beta_n > 0.0)) fail("cnc requires beta_n > 0");
    }
}

StateXP classical_rhs(const StateXP& s, double t, const ModelSpec& spec) {
    require_finite(all_finite(s.x, s.p));
    const double b2 = spec.beta * spec.beta;
    return {s.p, -b2 * s.x * s.x * s.x + s.x - 2.0 * spec.gamma * s.p + drive(t, spec)};
}

StateSC sc_drift(const StateSC& s, double t, const ModelSpec& spec) {
    require_finite(all_finite(s.x, s.p, s.rho, s.pi));
    require_positive_spread(s.rho);
    const double b2 = spec.beta * spec.beta;
    const double G = spec.gamma;
    const double rho2 = s.rho * s.rho;
    const double pi2 = s.pi * s.pi;

    StateSC d;
    d.x = s.p;
    d.p = -b2 * s.x * s.x * s.x + (1.0 - 3.0 * b2 * rho2) * s.x - 2.0 * G * s.p + drive(t, spec);
    d.rho = s.pi + G * (s.rho - rho2 * s.rho - s.rho * pi2 + 0.25 / s.rho);
    d.pi = s.rho * (1.0 - 3.0 * b2 * s.x * s.x) + 0.25 / (rho2 * s.rho) -
           G * s.pi * (1.0 + pi2 + rho2 + 0.75 / rho2);
    return d;
}

DiffusionCoeffs<StateSC> sc_diffusion(const StateSC& s, const ModelSpec& spec) {
    require_finite(all_finite(s.x, s.p, s.rho, s.pi));
    require_positive_spread(s.rho);
    double amp = 2.0 * std::sqrt(spec.gamma);
    if (spec.kind == ModelKind::CNC) amp *= spec.beta_n;
    const double rho2 = s.rho * s.rho;
    const double cov = s.rho * s.pi;
    // kappa - 1/2 on the minimum-uncertainty manifold
    const double kappa_excess = s.pi * s.pi + 0.25 / rho2 - 0.5;

    DiffusionCoeffs<StateSC> c;
    c.real.x = amp * (rho2 - 0.5);
    c.imag.x = -amp * cov;
    c.real.p = amp * cov;
    c.imag.p = -amp * kappa_excess;
    return c;
}

StateSC5 sc5_drift(const StateSC5& s, double t, const ModelSpec& spec) {
    require_finite(all_finite(s.x, s.p, s.mu, s.kappa, s.r));
    require_positive_spread(s.mu);
    const double b2 = spec.beta * spec.beta;
    const double G = spec.gamma;
    const double r2 = s.r * s.r;
    const double stiffness = 1.0 - 3.0 * b2 * s.x * s.x;

    StateSC5 d;
    d.x = s.p;
    d.p = -b2 * (s.x * s.x * s.x + 3.0 * s.mu * s.x) + s.x - 2.0 * G * s.p + drive(t, spec);
    d.mu = 2.0 * s.r + 2.0 * G * (s.mu - s.mu * s.mu - r2 + 0.25);
    d.kappa = 2.0 * s.r * stiffness + 2.0 * G * (-s.kappa - s.kappa * s.kappa - r2 + 0.25);
    d.r = s.mu * stiffness + s.kappa - 2.0 * G * s.r * (s.mu + s.kappa);
    return d;
}

DiffusionCoeffs<StateSC5> sc5_diffusion(const StateSC5& s, const ModelSpec& spec) {
    require_finite(all_finite(s.x, s.p, s.mu, s.kappa, s.r));
    require_positive_spread(s.mu);
    const double amp = 2.0 * std::sqrt(spec.gamma);
    DiffusionCoeffs<StateSC5> c;
    c.real.x = amp * (s.mu - 0.5);
    c.imag.x = -amp * s.r;
    c.real.p = amp * s.r;
    c.imag.p = -amp * (s.kappa - 0.5);
    return c;
}

DiffusionCoeffs<StateXP> noisy_classical_diffusion(const ModelSpec& spec) {
    const double amp = 2.0 * std::sqrt(spec.gamma);
    DiffusionCoeffs<StateXP> c;
    c.real = {amp, amp};
    c.imag = {0.0, 0.0};
    return c;
}

StateSC reduce_5to4(const StateSC5& s, double tol) {
    require_positive_spread(s.mu);
    if (!(std::abs(uncertainty_defect(s)) <= tol)) {
        throw DuffingError(ErrorCode::OffManifold, "off manifold");
    }
    const double rho = std::sqrt(s.mu);
    return {s.x, s.p, rho, s.r / rho};
}

StateSC5 lift_4to5(const StateSC& s) {
    require_positive_spread(s.rho);
    const double mu = s.rho * s.rho;
    const double r = s.rho * s.pi;
    return {s.x, s.p, mu, (r * r + 0.25) / mu, r};
}

double uncertainty_defect(const StateSC5& s) noexcept {
    return s.mu * s.kappa - s.r * s.r - 0.25;
}

double observable_energy(double x, double p, const ModelSpec& spec) noexcept {
    const double xs = spec.beta * x;
    const double ps = spec.beta * p;
    return 0.5 * ps * ps + 0.25 * xs * xs * xs * xs - 0.5 * xs * xs;
}

double potential_surface(double x, double rho, double t, const ModelSpec& spec) {
    require_positive_spread(rho);
    const double b2 = spec.beta * spec.beta;
    const double rho2 = rho * rho;
    const double half_x2 = 0.5 * x * x;
    return -(1.0 - 3.0 * b2 * rho2) * half_x2 + b2 * half_x2 * half_x2 - drive(t, spec) * x -
           0.5 * rho2 + 0.125 / rho2;
}

OscState default_initial_state(const ModelSpec& spec) {
    const double x0 = 1.0 / spec.beta;
    const StateSC sc{x0, 0.0, std::numbers::sqrt2 / 2.0, 0.0};
    switch (spec.kind) {
        case ModelKind::C:
        case ModelKind::CNR: return StateXP{x0, 0.0};
        case ModelKind::SC:
        case ModelKind::CNC: return sc;
        case ModelKind::SC5: return lift_4to5(sc);
    }
    return sc;
}

}  // namespace duffing
