#include "duffing/chaos.hpp"

#include <cmath>
#include <numeric>

#include "duffing/error.hpp"

namespace duffing {

namespace {

template <class State>
std::array<double, StateLayout<State>::size> norm_weights(const ModelSpec& spec) {
    std::array<double, StateLayout<State>::size> w;
    w.fill(1.0);
    w[0] = spec.beta;
    w[1] = spec.beta;
    return w;
}

template <class State>
double separation(const State& a, const State& b,
                  const std::array<double, StateLayout<State>::size>& w) {
    const auto pa = StateLayout<State>::pack(a);
    const auto pb = StateLayout<State>::pack(b);
    double sum = 0.0;
    for (std::size_t k = 0; k < pa.size(); ++k) {
        const double d = w[k] * (pb[k] - pa[k]);
        sum += d * d;
    }
    return std::sqrt(sum);
}

template <class State>
State pull_back(const State& fid, const State& comp, double factor) {
    auto pf = StateLayout<State>::pack(fid);
    const auto pc = StateLayout<State>::pack(comp);
    for (std::size_t k = 0; k < pf.size(); ++k) pf[k] += factor * (pc[k] - pf[k]);
    return StateLayout<State>::unpack(pf);
}

template <class State>
void advance(const ModelSpec& spec, State& s, double t, double dt, const ComplexNoiseIncrement& xi,
             Scheme scheme) {
    try {
        s = step(spec, s, t, dt, xi, scheme);
    } catch (const IntegrationError&) {
        throw;
    } catch (const DuffingError& e) {
        throw IntegrationError(e.code(), e.what(), t);
    }
    check_domain(s, t + dt);
}

struct RealizationResult {
    double lambda = 0.0;
    std::vector<double> log_growth;
    std::vector<std::array<double, 2>> section;
    NoiseStats fid_noise;
    NoiseStats comp_noise;
};

template <class State>
RealizationResult run_realization(const ModelSpec& spec, const IntegratorConfig& config,
                                  const LyapunovOptions& opt, State fid, std::uint64_t seed,
                                  bool keep_section) {
    const double period = spec.period();
    const int n = config.steps_per_period(period);
    const double dt = config.dt;
    const bool noisy = is_stochastic(spec);
    Rng rng(seed);
    RealizationResult res;

    check_domain(fid, 0.0);
    for (int k = 0; k < config.transient_periods; ++k) {
        for (int j = 0; j < n; ++j) {
            ComplexNoiseIncrement xi;
            if (noisy) xi = draw_increment(spec, rng, dt);
            advance(spec, fid, k * period + j * dt, dt, xi, config.scheme);
        }
    }

    const auto w = norm_weights<State>(spec);
    auto offset = StateLayout<State>::pack(fid);
    const double per_component = opt.d0 / std::sqrt(static_cast<double>(offset.size()));
    for (std::size_t k = 0; k < offset.size(); ++k) offset[k] += per_component / w[k];
    State comp = StateLayout<State>::unpack(offset);
    const double start = separation(fid, comp, w);
    comp = pull_back(fid, comp, opt.d0 / start);

    res.log_growth.reserve(config.measure_periods);
    if (keep_section) res.section.reserve(config.measure_periods);
    double sum = 0.0;
    int count = 0;
    for (int m = 0; m < config.measure_periods; ++m) {
        const int k = config.transient_periods + m;
        for (int j = 0; j < n; ++j) {
            const double t = k * period + j * dt;
            ComplexNoiseIncrement xi;
            if (noisy) {
                xi = draw_increment(spec, rng, dt);
                res.fid_noise.add(xi);
                res.comp_noise.add(xi);
            }
            advance(spec, fid, t, dt, xi, config.scheme);
            advance(spec, comp, t, dt, xi, config.scheme);
        }
        const double d = separation(fid, comp, w);
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw IntegrationError(ErrorCode::DegeneratePair, "degenerate pair", (k + 1) * period);
        }
        const double growth = std::log(d / opt.d0);
        if (m >= opt.skip_renorms) {
            sum += growth;
            ++count;
            res.log_growth.push_back(growth);
        }
        comp = pull_back(fid, comp, opt.d0 / d);
        if (keep_section) res.section.push_back({spec.beta * fid.x, spec.beta * fid.p});
    }
    res.lambda = sum / (count * period);
    return res;
}

double block_std_error(const std::vector<double>& series, double period) {
    constexpr std::size_t kBlocks = 10;
    const std::size_t len = series.size() / kBlocks;
    if (len == 0) return 0.0;
    std::array<double, kBlocks> means{};
    for (std::size_t b = 0; b < kBlocks; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < len; ++i) s += series[b * len + i];
        means[b] = s / (len * period);
    }
    const double mean = std::accumulate(means.begin(), means.end(), 0.0) / kBlocks;
    double var = 0.0;
    for (double m : means) var += (m - mean) * (m - mean);
    var /= kBlocks - 1;
    return std::sqrt(var / kBlocks);
}

}  // namespace

std::uint64_t realization_seed(std::uint64_t base, int index) noexcept {
    return index == 0 ? base : mix64(base ^ mix64(static_cast<std::uint64_t>(index)));
}

LyapunovEstimate lyapunov_wolf(const ModelSpec& spec, const IntegratorConfig& config,
                               const LyapunovOptions& options) {
    spec.validate();
    config.validate(spec.period());
    if (!(options.d0 > 0.0)) throw DuffingError(ErrorCode::InvalidArgument, "d0 must be positive");
    if (options.skip_renorms < 0 || options.realizations < 1) {
        throw DuffingError(ErrorCode::InvalidArgument, "invalid lyapunov options");
    }
    if (config.measure_periods - options.skip_renorms < kMinRenorms) {
        throw DuffingError(ErrorCode::InvalidArgument,
                           "measure periods must leave at least 100 renormalizations");
    }
    const OscState init = options.init ? *options.init : default_initial_state(spec);
    check_state_matches(spec, init);

    const int runs = is_stochastic(spec) ? options.realizations : 1;
    LyapunovEstimate est;
    est.d0 = options.d0;
    std::vector<double> first_series;
    for (int r = 0; r < runs; ++r) {
        const bool keep = options.keep_section && r == 0;
        RealizationResult res = std::visit(
            [&](const auto& s) {
                return run_realization(spec, config, options, s, realization_seed(config.seed, r), keep);
            },
            init);
        if (res.fid_noise.count != res.comp_noise.count ||
            res.fid_noise.checksum != res.comp_noise.checksum) {
            throw DuffingError(ErrorCode::DegeneratePair, "companion noise stream diverged");
        }
        est.realization_lambdas.push_back(res.lambda);
        est.n_renorms = static_cast<int>(res.log_growth.size());
        if (r == 0) {
            est.section = std::move(res.section);
            est.fiducial_noise = res.fid_noise;
            est.companion_noise = res.comp_noise;
            first_series = std::move(res.log_growth);
        }
    }

    const auto& ls = est.realization_lambdas;
    est.lambda = std::accumulate(ls.begin(), ls.end(), 0.0) / ls.size();
    if (ls.size() > 1) {
        double var = 0.0;
        for (double l : ls) var += (l - est.lambda) * (l - est.lambda);
        var /= static_cast<double>(ls.size() - 1);
        est.std_error = std::sqrt(var / ls.size());
    } else {
        est.std_error = block_std_error(first_series, spec.period());
    }
    return est;
}

std::string_view class_name(AttractorClass c) noexcept {
    return c == AttractorClass::Chaotic ? "chaotic" : "periodic";
}

std::optional<AttractorClass> parse_class(std::string_view name) noexcept {
    if (name == "chaotic") return AttractorClass::Chaotic;
    if (name == "periodic") return AttractorClass::Periodic;
    return std::nullopt;
}

ComplexityRecord complexity_record(double lambda, double gamma) noexcept {
    const double k = dynamical_complexity(lambda, gamma);
    return {lambda, k, classify_attractor(k)};
}

std::optional<double> beta_break(std::span<const LambdaPoint> curve, double lambda_classical,
                                 std::optional<double> epsilon) {
    if (curve.empty()) throw DuffingError(ErrorCode::InvalidArgument, "empty lambda curve");
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (!(curve[i].beta > curve[i - 1].beta)) {
            throw DuffingError(ErrorCode::InvalidArgument, "lambda curve must be sorted by beta");
        }
    }
    for (const auto& pt : curve) {
        const double eps = epsilon ? *epsilon : 3.0 * std::max(pt.std_error, 0.005);
        if (std::abs(pt.lambda - lambda_classical) > eps) return pt.beta;
    }
    return std::nullopt;
}

}  // namespace duffing
