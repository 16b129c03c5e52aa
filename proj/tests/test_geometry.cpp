#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "doctest.h"

#include "duffing/error.hpp"
#include "duffing/geometry.hpp"

using namespace duffing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

IntegratorConfig strobe_run(int measure, int transient = 200, std::uint64_t seed = 1) {
    IntegratorConfig c = IntegratorConfig::for_period(2.0 * std::numbers::pi);
    c.transient_periods = transient;
    c.measure_periods = measure;
    c.seed = seed;
    return c;
}

PoincareSection section_at(ModelKind kind, double gamma, double beta, int measure = 600,
                           std::uint64_t seed = 1) {
    const ModelSpec s = ModelSpec::at(kind, gamma, beta);
    return poincare_section(integrate(s, default_initial_state(s), strobe_run(measure, 200, seed)));
}

// Synthetic section: a square of side w centred at (cx, cp), sampled on a lattice.
PoincareSection blob(double cx, double cp, double w, double gamma, int n = 30) {
    PoincareSection s;
    s.gamma = gamma;
    s.beta = 0.01;
    s.kind = ModelKind::SC;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            s.points.push_back({cx - w / 2 + w * (i + 0.5) / n, cp - w / 2 + w * (j + 0.5) / n});
        }
    }
    return s;
}

Histogram hist(std::vector<double> v, HistogramRange r = {0.0, 1.0, 4}) {
    return histogram_of(v, Coordinate::X, r);
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("section of a relaxed undriven oscillator sits at the well bottom") {
    ModelSpec s = ModelSpec::at(ModelKind::C, 0.2, 0.01);
    s.g = 0.0;
    const auto sec = poincare_section(integrate(s, StateXP{130.0, 0.0}, strobe_run(50, 100)));
    REQUIRE(sec.points.size() == 50);
    for (const auto& pt : sec.points) {
        CHECK(pt[0] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs(pt[1]) < 1e-9);
    }
    CHECK(sec.beta == 0.01);
    CHECK(sec.gamma == 0.2);
}

TEST_CASE("classical sections are independent of beta in scaled units") {
    const auto a = section_at(ModelKind::C, 0.3, 0.01, 50);
    const auto b = section_at(ModelKind::C, 0.3, 0.001, 50);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i][0] == doctest::Approx(b.points[i][0]).epsilon(1e-8));
        CHECK(a.points[i][1] == doctest::Approx(b.points[i][1]).epsilon(1e-8));
    }
}

TEST_CASE("chaotic classical attractor visits both wells") {
    const auto sec = section_at(ModelKind::C, 0.174, 0.01, 1000);
    double lo = kInf, hi = -kInf;
    for (const auto& pt : sec.points) {
        lo = std::min(lo, pt[0]);
        hi = std::max(hi, pt[0]);
    }
    INFO("x range " << lo << " .. " << hi);
    CHECK(lo < -0.5);
    CHECK(hi > 0.5);
    CHECK(hi < 2.0);
    CHECK(lo > -2.0);
}

TEST_CASE("histogram binning") {
    const auto h = hist({0.1, 0.1, 0.1});
    CHECK(h.counts == std::vector<std::uint64_t>{3, 0, 0, 0});
    CHECK(h.occupied_bins() == 1);

    const auto edges = hist({0.0, 0.25, 0.5, 0.999, 1.0, 1.5, -0.1});
    CHECK(edges.counts == std::vector<std::uint64_t>{1, 1, 1, 2});
    CHECK(edges.out_of_range == 2);
    CHECK(edges.total() + edges.out_of_range == 7);
    CHECK(edges.range_flagged());
    CHECK(edges.bin_left(1) == 0.25);
    CHECK(edges.bin_right(3) == 1.0);

    CHECK_THROWS_AS(hist({2.0, 3.0}), DuffingError);
    CHECK_THROWS_AS(hist({0.5}, {0.0, 1.0, 1}), DuffingError);
    CHECK_THROWS_AS(hist({0.5}, {1.0, 1.0, 4}), DuffingError);
    CHECK(hist({}).total() == 0);
}

TEST_CASE("default range covers the semiclassical sections") {
    for (double beta : {0.0068, 0.02, 0.0341}) {
        const auto sec = section_at(ModelKind::SC, 0.138, beta, 1000);
        for (auto c : {Coordinate::X, Coordinate::P}) {
            const auto h = scaled_histogram(sec, c);
            CHECK(h.total() >= 990);
            CHECK_FALSE(h.range_flagged());
        }
    }
}

TEST_CASE("histogram distance") {
    const std::vector<double> a{3, 1, 0, 2}, b{0, 5, 4, 1}, c{6, 2, 0, 4};
    CHECK(skl_distance(a, a) == 0.0);
    CHECK(std::abs(skl_distance(a, c)) < 1e-12);
    CHECK(skl_distance(a, b) == skl_distance(b, a));
    CHECK(skl_distance(a, b) > 0.0);

    // f1 = (1, 1), f2 = (1, 0): (1)^2 / (2 * 1) = 1/2.
    CHECK(skl_distance(std::vector<double>{1, 1}, std::vector<double>{1, 0}) ==
          doctest::Approx(std::numbers::ln2));
    CHECK(skl_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == kInf);

    CHECK_THROWS_AS(skl_distance(std::vector<double>{1, 1}, std::vector<double>{1}), DuffingError);
    CHECK_THROWS_AS(skl_distance(std::vector<double>{0, 0}, std::vector<double>{1, 1}), DuffingError);

    // Random non-negative pairs.
    std::uint64_t state = 12345;
    auto next = [&] {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(state >> 40) / double(1 << 24);
    };
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> u(16), v(16);
        for (auto& x : u) x = next();
        for (auto& x : v) x = next();
        const double d = skl_distance(u, v);
        CHECK(d >= 0.0);
        CHECK(d == skl_distance(v, u));
        std::vector<double> scaled = v;
        for (auto& x : scaled) x *= 37.5;
        CHECK(std::abs(skl_distance(u, scaled) - d) < 1e-12);
    }
}

TEST_CASE("histogram distance checks the grid and reliability") {
    const auto few = hist({0.1, 0.6});
    CHECK_FALSE(skl_distance(few, few).reliable);
    CHECK(skl_distance(few, few).value == 0.0);
    const auto other = histogram_of(std::vector<double>{0.1}, Coordinate::X, {0.0, 1.0, 5});
    CHECK_THROWS_AS(skl_distance(few, other), DuffingError);
}

TEST_CASE("phase-space distance") {
    const auto a = blob(0.0, 0.0, 1.0, 0.1);
    const auto b = blob(0.3, -0.2, 1.2, 0.2);
    const auto d = phase_distance(a, b);
    CHECK(phase_distance(a, a).value == 0.0);
    CHECK(phase_distance(a, a).reliable);
    CHECK(d.value == phase_distance(b, a).value);

    std::vector<double> ax, bx, ap, bp;
    for (const auto& pt : a.points) ax.push_back(pt[0]), ap.push_back(pt[1]);
    for (const auto& pt : b.points) bx.push_back(pt[0]), bp.push_back(pt[1]);
    const HistogramRange r;
    const double lx = skl_distance(histogram_of(ax, Coordinate::X, r), histogram_of(bx, Coordinate::X, r)).value;
    const double lp = skl_distance(histogram_of(ap, Coordinate::P, r), histogram_of(bp, Coordinate::P, r)).value;
    CHECK(d.value == doctest::Approx(std::sqrt(lx * lx + lp * lp)).epsilon(1e-14));

    auto small = a;
    small.points.resize(kMinSectionPoints - 1);
    CHECK_THROWS_AS(phase_distance(small, b), DuffingError);
    const auto far = blob(1.5, 1.5, 0.2, 0.3);
    CHECK(phase_distance(a, far).infinite());
}

TEST_CASE("periodic orbits are flagged as unreliable") {
    // A period-one orbit puts every strobe in the same bin, so two distinct
    // orbits do not overlap at all.
    const auto p1 = section_at(ModelKind::C, 0.3, 0.01, 600);
    const auto p2 = section_at(ModelKind::C, 0.25, 0.01, 600);
    const auto chaotic = section_at(ModelKind::C, 0.138, 0.01, 600);
    const auto d = phase_distance(p1, p2);
    CHECK_FALSE(d.reliable);
    CHECK(d.infinite());
    const auto dc = phase_distance(p1, chaotic);
    CHECK_FALSE(dc.reliable);
    CHECK((dc.infinite() || dc.value > 3.0));
}

TEST_CASE("intra-model mean") {
    std::vector<PoincareSection> same{blob(0, 0, 1, 0.1), blob(0, 0, 1, 0.2), blob(0, 0, 1, 0.3)};
    auto means = mean_intra_model_distance(same);
    CHECK(means.size() == 3);
    for (const auto& [g, m] : means) {
        CHECK(m.value == 0.0);
        CHECK(m.total == 2);
        CHECK(m.excluded == 0);
    }
    CHECK(grand_mean(means) == 0.0);

    std::vector<PoincareSection> two{blob(0, 0, 1, 0.1), blob(0.2, 0.1, 1.1, 0.2)};
    means = mean_intra_model_distance(two);
    CHECK(means.at(0.1).value == means.at(0.2).value);
    CHECK(means.at(0.1).value == phase_distance(two[0], two[1]).value);

    std::vector<PoincareSection> with_far{blob(0, 0, 1, 0.1), blob(0, 0, 1, 0.2), blob(1.5, 1.5, 0.2, 0.3)};
    means = mean_intra_model_distance(with_far);
    CHECK(means.at(0.1).excluded == 1);
    CHECK(means.at(0.1).flagged);
    CHECK(means.at(0.1).value == 0.0);
    CHECK(means.at(0.3).excluded == 2);
    CHECK(std::isnan(means.at(0.3).value));
    CHECK(grand_mean(means) == 0.0);

    auto mixed = same;
    mixed[1].beta = 0.02;
    CHECK_THROWS_AS(mean_intra_model_distance(mixed), DuffingError);
    auto dup = same;
    dup[2].gamma = 0.1;
    CHECK_THROWS_AS(mean_intra_model_distance(dup), DuffingError);
}

TEST_CASE("cross-model mean and lambda gap") {
    std::vector<PoincareSection> m1{blob(0, 0, 1, 0.1), blob(0, 0, 1, 0.2)};
    std::vector<PoincareSection> m2{blob(0, 0, 1, 0.2), blob(0.1, 0, 1, 0.1)};
    for (auto& s : m2) s.kind = ModelKind::CNC;
    const auto cm = mean_cross_model_distance(m1, m2);
    CHECK(cm.total == 2);
    CHECK(cm.excluded == 0);
    CHECK(cm.value == doctest::Approx(phase_distance(m1[0], m2[1]).value / 2));

    m2[0].beta = 0.01 * (1.0 + 1e-15);
    CHECK_NOTHROW(mean_cross_model_distance(m1, m2));
    m2[0].beta = 0.02;
    CHECK_THROWS_AS(mean_cross_model_distance(m1, m2), DuffingError);

    CHECK(mean_lambda_gap({{0.1, 0.05}, {0.2, 0.1}}, {{0.1, 0.07}, {0.2, 0.04}}) == doctest::Approx(0.04));
    CHECK_THROWS_AS(mean_lambda_gap({{0.1, 0.05}}, {{0.2, 0.05}}), DuffingError);
}

TEST_CASE("energy spectrum") {
    ModelSpec s = ModelSpec::at(ModelKind::C, 0.2, 0.01);
    s.g = 0.0;
    const auto traj = integrate(s, StateXP{130.0, 0.0}, strobe_run(50, 100));
    const auto h = energy_spectrum(traj);
    CHECK(h.occupied_bins() == 1);
    CHECK(h.total() == 50);
    // Scaled well-bottom energy is -1/4.
    const HistogramRange r = kEnergyRange;
    const int bin = static_cast<int>((-0.25 - r.lo) / (r.hi - r.lo) * r.bins);
    CHECK(h.counts[bin] == 50);
    CHECK(spectrum_distance(h, h).value == 0.0);
}

TEST_CASE("csv writers") {
    PoincareSection s;
    s.points = {{0.5, -0.25}, {1.0, 0.0}};
    std::ostringstream sec;
    write_section_csv(sec, s);
    CHECK(sec.str() == "n,x_scaled,p_scaled\n0,0.5,-0.25\n1,1,0\n");

    std::ostringstream hs;
    write_histogram_csv(hs, hist({0.1}, {0.0, 1.0, 2}));
    CHECK(hs.str() == "bin_left,bin_right,count\n0,0.5,1\n0.5,1,0\n");

    std::ostringstream m;
    const std::vector<double> g{0.1, 0.2};
    write_distance_matrix_csv(m, g, g, {{{0.0, true}, {kInf, false}}, {{kInf, false}, {0.0, true}}});
    CHECK(m.str() == "gamma,0.10000000000000001,0.20000000000000001\n"
                     "0.10000000000000001,0,inf\n0.20000000000000001,inf,0\n");
}

}  // TEST_SUITE
