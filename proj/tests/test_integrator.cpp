#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"

#include "duffing/error.hpp"
#include "duffing/integrator.hpp"

using namespace duffing;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

IntegratorConfig short_run(int steps, int transient, int measure, std::uint64_t seed = 1,
                           Scheme scheme = Scheme::EulerMaruyama) {
    IntegratorConfig c = IntegratorConfig::for_period(kTwoPi, steps);
    c.transient_periods = transient;
    c.measure_periods = measure;
    c.seed = seed;
    c.scheme = scheme;
    return c;
}

double scaled_x(const OscState& s, double beta) {
    return std::visit([&](const auto& st) { return beta * st.x; }, s);
}

std::pair<double, double> mean_sd(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - m) * (x - m);
    return {m, std::sqrt(var / static_cast<double>(v.size() - 1))};
}

}  // namespace

TEST_SUITE("integrator") {

TEST_CASE("undamped classical step is explicit Euler") {
    const ModelSpec s = ModelSpec::at(ModelKind::C, 0.0, 0.05);
    const StateXP st{3.0, -2.0};
    const double dt = 0.013, t = 0.4;
    const StateXP out = step(s, st, t, dt, {});
    const double b2 = 0.05 * 0.05;
    CHECK(out.x == st.x + st.p * dt);
    CHECK(out.p == doctest::Approx(st.p + (-b2 * 27.0 + 3.0 + 0.3 / 0.05 * std::cos(t)) * dt).epsilon(1e-15));
}

TEST_CASE("well bottom is a fixed point without drive and damping") {
    ModelSpec s = ModelSpec::at(ModelKind::C, 0.0, 0.01);
    s.g = 0.0;
    for (double dt : {1e-3, 0.1, 1.0}) {
        for (auto scheme : {Scheme::EulerMaruyama, Scheme::StochasticHeun}) {
            const StateXP out = step(s, StateXP{100.0, 0.0}, 0.0, dt, {}, scheme);
            CHECK(out.x == 100.0);
            CHECK(out.p == 0.0);
        }
    }
}

TEST_CASE("one Euler-Maruyama step of the real-noise model") {
    const ModelSpec s = ModelSpec::at(ModelKind::CNR, 0.25, 0.01);
    const StateXP st{50.0, 4.0};
    const double dt = 0.01;
    const StateXP out = step(s, st, 0.0, dt, {0.02, 0.0});
    CHECK(out.x == doctest::Approx(50.0 + 4.0 * 0.01 + 1.0 * 0.02).epsilon(1e-15));
    const double drift_p = -1e-4 * 50.0 * 50.0 * 50.0 + 50.0 - 2 * 0.25 * 4.0 + 0.3 / 0.01;
    CHECK(out.p == doctest::Approx(4.0 + drift_p * dt + 1.0 * 0.02).epsilon(1e-14));
}

TEST_CASE("strobe bookkeeping") {
    const ModelSpec s = ModelSpec::at(ModelKind::SC, 0.138, 0.01);
    const auto traj = integrate(s, default_initial_state(s), short_run(1000, 5, 100));
    CHECK(traj.strobe_indices.size() == 100);
    CHECK(traj.states.size() == 100);
    const double T = s.period();
    for (std::size_t k = 0; k < traj.strobe_indices.size(); ++k) {
        const double t = traj.times[traj.strobe_indices[k]];
        const double r = std::remainder(t, T);
        CHECK(std::abs(r) < 1e-9 * T);
        if (k > 0) CHECK(t > traj.times[traj.strobe_indices[k - 1]]);
    }
    CHECK(traj.times.front() == doctest::Approx(6 * T));
    CHECK(traj.noise.count == 105u * 1000u);
}

TEST_CASE("dense sampling keeps strobes aligned") {
    const ModelSpec s = ModelSpec::at(ModelKind::SC5, 0.138, 0.01);
    SamplingPlan plan;
    plan.dense_stride = 100;
    const auto traj = integrate(s, default_initial_state(s), short_run(1000, 0, 3), plan);
    CHECK(traj.times.size() == 30);
    CHECK(traj.strobe_indices.size() == 3);
    for (std::size_t i = 1; i < traj.times.size(); ++i) CHECK(traj.times[i] > traj.times[i - 1]);
    CHECK(traj.strobe_indices.back() == 29);
}

TEST_CASE("integration is a pure function of its inputs") {
    const ModelSpec s = ModelSpec::at(ModelKind::SC, 0.138, 0.02);
    const auto a = integrate(s, default_initial_state(s), short_run(500, 2, 30, 77));
    const auto b = integrate(s, default_initial_state(s), short_run(500, 2, 30, 77));
    const auto c = integrate(s, default_initial_state(s), short_run(500, 2, 30, 78));
    REQUIRE(a.states.size() == b.states.size());
    bool differs = false;
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        const auto& x = std::get<StateSC>(a.states[i]);
        const auto& y = std::get<StateSC>(b.states[i]);
        const auto& z = std::get<StateSC>(c.states[i]);
        CHECK(x.x == y.x);
        CHECK(x.p == y.p);
        CHECK(x.rho == y.rho);
        CHECK(x.pi == y.pi);
        differs |= x.x != z.x;
    }
    CHECK(differs);
    CHECK(a.noise.checksum == b.noise.checksum);
}

TEST_CASE("consumed noise stream has the sampler's moments") {
    const ModelSpec s = ModelSpec::at(ModelKind::SC, 0.138, 0.01);
    const auto cfg = short_run(1000, 0, 100, 11);
    const auto traj = integrate(s, default_initial_state(s), cfg);
    const double n = static_cast<double>(traj.noise.count);
    CHECK(traj.noise.count == 100000u);
    CHECK(std::abs(traj.noise.mean_abs2() - cfg.dt) < 4 * cfg.dt / std::sqrt(n));
    CHECK(std::abs(traj.noise.mean_r()) < 4 * std::sqrt(cfg.dt / 2 / n));
    CHECK(std::abs(traj.noise.mean_sq_re()) < 4 * cfg.dt / std::sqrt(n));
}

TEST_CASE("convergence order on the damped noise-free oscillator") {
    // Fixed final time t = 2T from the well bottom, error in scaled coordinates.
    const ModelSpec s = ModelSpec::at(ModelKind::C, 0.3, 0.01);
    auto final_state = [&](int steps, Scheme scheme) {
        const auto traj = integrate(s, default_initial_state(s), short_run(steps, 0, 2, 1, scheme));
        return std::get<StateXP>(traj.states.back());
    };
    for (auto [scheme, order] : {std::pair{Scheme::EulerMaruyama, 1.0}, std::pair{Scheme::StochasticHeun, 2.0}}) {
        const StateXP ref = final_state(64000, Scheme::StochasticHeun);
        std::vector<double> err;
        for (int steps : {250, 500, 1000, 2000}) {
            const StateXP st = final_state(steps, scheme);
            err.push_back(0.01 * std::hypot(st.x - ref.x, st.p - ref.p));
        }
        for (std::size_t i = 1; i < err.size(); ++i) {
            const double measured = std::log2(err[i - 1] / err[i]);
            INFO("scheme " << scheme_name(scheme) << " refinement " << i << " order " << measured);
            CHECK(std::abs(measured - order) < 0.3);
        }
    }
}

TEST_CASE("domain guards") {
    SUBCASE("overflow reports the time") {
        const ModelSpec s = ModelSpec::at(ModelKind::C, 0.1, 0.01);
        try {
            integrate(s, StateXP{1e8, 0.0}, short_run(1000, 0, 10));
            FAIL("expected overflow");
        } catch (const IntegrationError& e) {
            CHECK(e.code() == ErrorCode::NumericOverflow);
            CHECK(e.time() > 0.0);
            CHECK(e.time() < 10 * kTwoPi);
        }
    }
    SUBCASE("spread collapse at the start") {
        const ModelSpec s = ModelSpec::at(ModelKind::SC, 0.1, 0.01);
        try {
            integrate(s, StateSC{0.0, 0.0, 5e-5, 0.0}, short_run(1000, 0, 10));
            FAIL("expected spread collapse");
        } catch (const IntegrationError& e) {
            CHECK(e.code() == ErrorCode::SpreadCollapse);
            CHECK(e.time() == 0.0);
        }
    }
    SUBCASE("five-variable spread collapse at large beta") {
        const ModelSpec s = ModelSpec::at(ModelKind::SC5, 0.1, 0.5);
        CHECK_THROWS_AS(integrate(s, default_initial_state(s), short_run(1000, 10, 200)), IntegrationError);
    }
}

TEST_CASE("configuration checks") {
    const ModelSpec s = ModelSpec::at(ModelKind::C, 0.1, 0.01);
    IntegratorConfig c = short_run(1000, 0, 10);
    c.dt = 0.01;
    CHECK_THROWS_AS(integrate(s, default_initial_state(s), c), DuffingError);
    c = short_run(1000, 0, 0);
    CHECK_THROWS_AS(integrate(s, default_initial_state(s), c), DuffingError);
    c = short_run(1000, 0, 10);
    c.dt = -1.0;
    CHECK_THROWS_AS(c.validate(kTwoPi), DuffingError);
    CHECK_THROWS_AS(integrate(s, StateSC{}, short_run(1000, 0, 10)), DuffingError);
    CHECK(short_run(1000, 0, 1).steps_per_period(kTwoPi) == 1000);
    CHECK_THROWS_AS(IntegratorConfig::for_period(kTwoPi, 0), DuffingError);
    CHECK(parse_scheme("heun") == Scheme::StochasticHeun);
    CHECK_FALSE(parse_scheme("rk4").has_value());
}

TEST_CASE("trajectory csv") {
    const ModelSpec s = ModelSpec::at(ModelKind::SC, 0.1, 0.01);
    const auto traj = integrate(s, default_initial_state(s), short_run(1000, 0, 2));
    std::ostringstream out;
    write_trajectory_csv(out, traj);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,x,p,rho,pi,mu,kappa,r,energy");
    std::getline(in, line);
    CHECK(std::count(line.begin(), line.end(), ',') == 8);
    CHECK(line.find(",,,,") != std::string::npos);
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("semiclassical cloud at tiny beta matches the classical one") {
    const ModelSpec c = ModelSpec::at(ModelKind::C, 0.138, 1e-5);
    const ModelSpec sc = ModelSpec::at(ModelKind::SC, 0.138, 1e-5);
    const auto cfg = short_run(1000, 200, 2000, 5);
    const auto a = integrate(c, default_initial_state(c), cfg);
    const auto b = integrate(sc, default_initial_state(sc), cfg);
    std::vector<double> xa, xb;
    for (const auto& st : a.states) xa.push_back(scaled_x(st, 1e-5));
    for (const auto& st : b.states) xb.push_back(scaled_x(st, 1e-5));
    const auto [ma, sa] = mean_sd(xa);
    const auto [mb, sb] = mean_sd(xb);
    INFO("classical " << ma << " +- " << sa << ", semiclassical " << mb << " +- " << sb);
    CHECK(std::abs(ma - mb) < 0.1);
    CHECK(std::abs(sa - sb) < 0.1 * sa);
}

}  // TEST_SUITE
