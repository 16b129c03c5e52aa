#include "duffing/integrator.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace duffing {

std::string_view scheme_name(Scheme scheme) noexcept {
    return scheme == Scheme::StochasticHeun ? "heun" : "em";
}

std::optional<Scheme> parse_scheme(std::string_view name) noexcept {
    if (name == "em") return Scheme::EulerMaruyama;
    if (name == "heun") return Scheme::StochasticHeun;
    return std::nullopt;
}

IntegratorConfig IntegratorConfig::for_period(double period, int steps_per_period) {
    if (steps_per_period < 1) {
        throw DuffingError(ErrorCode::InvalidArgument, "steps per period must be >= 1");
    }
    IntegratorConfig c;
    c.dt = period / steps_per_period;
    return c;
}

int IntegratorConfig::steps_per_period(double period) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DuffingError(ErrorCode::InvalidArgument, "dt must be positive");
    }
    const double n = std::round(period / dt);
    if (n < 1.0 || std::abs(n * dt - period) > 1e-12 * period) {
        throw DuffingError(ErrorCode::InvalidArgument, "dt must divide the drive period");
    }
    return static_cast<int>(n);
}

void IntegratorConfig::validate(double period) const {
    steps_per_period(period);
    if (transient_periods < 0) {
        throw DuffingError(ErrorCode::InvalidArgument, "transient periods must be >= 0");
    }
    if (measure_periods < 1) {
        throw DuffingError(ErrorCode::InvalidArgument, "measure periods must be >= 1");
    }
}

OscState step(const ModelSpec& spec, const OscState& s, double t, double dt,
              const ComplexNoiseIncrement& noise, Scheme scheme) {
    check_state_matches(spec, s);
    return std::visit(
        [&](const auto& st) -> OscState { return step(spec, st, t, dt, noise, scheme); }, s);
}

void check_state_matches(const ModelSpec& spec, const OscState& s) {
    bool ok = false;
    switch (spec.kind) {
        case ModelKind::C:
        case ModelKind::CNR: ok = std::holds_alternative<StateXP>(s); break;
        case ModelKind::SC:
        case ModelKind::CNC: ok = std::holds_alternative<StateSC>(s); break;
        case ModelKind::SC5: ok = std::holds_alternative<StateSC5>(s); break;
    }
    if (!ok) throw DuffingError(ErrorCode::InvalidArgument, "state does not match model kind");
}

namespace {

template <class State>
void run(const ModelSpec& spec, State state, const IntegratorConfig& config,
         const SamplingPlan& plan, Trajectory& traj) {
    const double period = spec.period();
    const int n = config.steps_per_period(period);
    const double dt = config.dt;
    const bool noisy = is_stochastic(spec);
    Rng rng(config.seed);

    check_domain(state, 0.0);
    const int total = config.transient_periods + config.measure_periods;
    for (int k = 0; k < total; ++k) {
        const bool measuring = k >= config.transient_periods;
        const double t0 = k * period;
        for (int j = 0; j < n; ++j) {
            const double t = t0 + j * dt;
            ComplexNoiseIncrement xi;
            if (noisy) {
                xi = draw_increment(spec, rng, dt);
                traj.noise.add(xi);
            }
            try {
                state = step(spec, state, t, dt, xi, config.scheme);
            } catch (const IntegrationError&) {
                throw;
            } catch (const DuffingError& e) {
                throw IntegrationError(e.code(), e.what(), t);
            }
            const bool end_of_period = j + 1 == n;
            const double t_next = end_of_period ? (k + 1) * period : t + dt;
            check_domain(state, t_next);

            if (!measuring) continue;
            const bool strobe = end_of_period && plan.strobes;
            const bool dense = plan.dense_stride > 0 && ((j + 1) % plan.dense_stride == 0);
            if (strobe || dense) {
                if (strobe) traj.strobe_indices.push_back(traj.times.size());
                traj.times.push_back(t_next);
                traj.states.emplace_back(state);
            }
        }
    }
}

}  // namespace

Trajectory integrate(const ModelSpec& spec, const OscState& init, const IntegratorConfig& config,
                     const SamplingPlan& plan) {
    spec.validate();
    config.validate(spec.period());
    check_state_matches(spec, init);

    Trajectory traj;
    traj.spec = spec;
    const std::size_t expected =
        static_cast<std::size_t>(config.measure_periods) *
        (1 + (plan.dense_stride > 0 ? config.steps_per_period(spec.period()) / plan.dense_stride : 0));
    traj.times.reserve(expected);
    traj.states.reserve(expected);
    std::visit([&](const auto& s) { run(spec, s, config, plan, traj); }, init);
    return traj;
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "t,x,p,rho,pi,mu,kappa,r,energy\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out << format_double(traj.times[i]) << ',';
        std::visit(
            [&](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                out << format_double(s.x) << ',' << format_double(s.p) << ',';
                if constexpr (std::is_same_v<S, StateSC>) {
                    out << format_double(s.rho) << ',' << format_double(s.pi) << ",,,,";
                } else if constexpr (std::is_same_v<S, StateSC5>) {
                    out << ",," << format_double(s.mu) << ',' << format_double(s.kappa) << ','
                        << format_double(s.r) << ',';
                } else {
                    out << ",,,,,";
                }
                out << format_double(observable_energy(s, traj.spec)) << '\n';
            },
            traj.states[i]);
    }
}

}  // namespace duffing
