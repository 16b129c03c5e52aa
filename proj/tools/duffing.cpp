// duffing: command-line front end for the simulation and analysis library.
//
// Every subcommand writes its files below --out and prefixes each file with
// a comment block holding the invocation and the seed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "duffing/chaos.hpp"
#include "duffing/error.hpp"
#include "duffing/geometry.hpp"
#include "duffing/integrator.hpp"
#include "duffing/model.hpp"
#include "duffing/sweep.hpp"

namespace fs = std::filesystem;
using namespace duffing;

namespace {

enum Exit : int {
    kOk = 0,
    kUsage = 2,
    kInvalid = 3,
    kIo = 4,
    kNumeric = 5,
    kData = 6,
    kInternal = 70,
};

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::MalformedConfig: return kInvalid;
        case ErrorCode::Io: return kIo;
        case ErrorCode::NumericOverflow:
        case ErrorCode::SpreadCollapse:
        case ErrorCode::OffManifold:
        case ErrorCode::DegeneratePair: return kNumeric;
        default: return kData;
    }
}

void report_error(std::string_view code, int exit, std::string_view message) {
    std::string msg(message);
    for (char& c : msg) {
        if (c == '\n' || c == '"') c = '\'';
    }
    std::cerr << fmt::format("error code={} exit={} message=\"{}\"\n", code, exit, msg);
}

struct Options {
    std::string model = "sc";
    double gamma = 0.138;
    double beta = 0.01;
    double g = 0.3;
    double omega = 1.0;
    int steps = kDefaultStepsPerPeriod;
    double dt = 0.0;
    int periods = 2000;
    int transient = 200;
    std::uint64_t seed = 1;
    std::string scheme = "em";
    std::string out = "out";
    bool gnuplot = false;
    int bins = 256;
    std::vector<double> range;
};

struct Context {
    std::string invocation;
    Options opt;
};

ModelKind model_of(const std::string& name) {
    const auto k = parse_model(name);
    if (!k) throw DuffingError(ErrorCode::InvalidArgument, "unknown model '" + name + "'");
    return *k;
}

ModelSpec spec_of(const Options& o, double gamma) {
    const ModelSpec s = ModelSpec::at(model_of(o.model), gamma, o.beta, o.g, o.omega);
    s.validate();
    return s;
}

IntegratorConfig config_of(const Options& o, const ModelSpec& spec, std::uint64_t seed) {
    IntegratorConfig c = IntegratorConfig::for_period(spec.period(), o.steps);
    if (o.dt != 0.0) c.dt = o.dt;
    c.transient_periods = o.transient;
    c.measure_periods = o.periods;
    c.seed = seed;
    const auto scheme = parse_scheme(o.scheme);
    if (!scheme) throw DuffingError(ErrorCode::InvalidArgument, "unknown scheme '" + o.scheme + "'");
    c.scheme = *scheme;
    c.validate(spec.period());
    return c;
}

std::uint64_t seed_for(const Options& o, const ModelSpec& spec) {
    return point_seed(o.seed, spec.kind, spec.gamma, o.beta, 0);
}

HistogramRange range_of(const Options& o, HistogramRange def) {
    if (!o.range.empty()) {
        if (o.range.size() != 2) throw DuffingError(ErrorCode::InvalidArgument, "--range takes LO HI");
        def.lo = o.range[0];
        def.hi = o.range[1];
    }
    if (o.bins > 0) def.bins = o.bins;
    return def;
}

fs::path out_file(const Context& ctx, const std::string& name) {
    const fs::path dir(ctx.opt.out);
    std::error_code ec;
    fs::create_directories(dir / fs::path(name).parent_path(), ec);
    if (ec) throw DuffingError(ErrorCode::Io, "cannot create " + (dir / name).parent_path().string());
    return dir / name;
}

std::string header(const Context& ctx, std::uint64_t seed) {
    return fmt::format("# {}\n# seed {}\n", ctx.invocation, seed);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DuffingError(ErrorCode::Io, "cannot write " + path.string());
    f << text;
    if (!f) throw DuffingError(ErrorCode::Io, "write failed for " + path.string());
}

void write_gnuplot(const Context& ctx, const std::string& name, const std::string& body) {
    if (!ctx.opt.gnuplot) return;
    write_text(out_file(ctx, name + ".gp"),
               "set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n"
               "set terminal pngcairo size 900,700\nset output '" + name + ".png'\n" + body);
}

std::string section_name(ModelKind m, double gamma, double beta) {
    return fmt::format("{}_g{}_b{}", model_name(m), gamma, beta);
}

PoincareSection section_for(const Options& o, double gamma) {
    const ModelSpec spec = spec_of(o, gamma);
    const auto traj = integrate(spec, default_initial_state(spec), config_of(o, spec, seed_for(o, spec)));
    return poincare_section(traj);
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Context& ctx, int stride) {
    const ModelSpec spec = spec_of(ctx.opt, ctx.opt.gamma);
    const auto seed = seed_for(ctx.opt, spec);
    SamplingPlan plan;
    plan.dense_stride = stride;
    const auto traj = integrate(spec, default_initial_state(spec), config_of(ctx.opt, spec, seed), plan);
    std::ostringstream ss;
    ss << header(ctx, seed);
    write_trajectory_csv(ss, traj);
    write_text(out_file(ctx, "trajectory.csv"), ss.str());
    write_gnuplot(ctx, "trajectory",
                  fmt::format("set xlabel 'beta x'\nset ylabel 'beta p'\nb = {}\n"
                              "plot 'trajectory.csv' using (b*$2):(b*$3) with dots notitle\n",
                              format_double(spec.beta)));
    return kOk;
}

int cmd_lyapunov(const Context& ctx, int realizations, double d0) {
    const ModelSpec spec = spec_of(ctx.opt, ctx.opt.gamma);
    const auto seed = seed_for(ctx.opt, spec);
    LyapunovOptions lo;
    lo.realizations = realizations;
    lo.d0 = d0;
    const auto est = lyapunov_wolf(spec, config_of(ctx.opt, spec, seed), lo);
    const auto rec = complexity_record(est.lambda, spec.gamma);
    const std::string line =
        fmt::format("model={} gamma={} beta={} lambda={} stderr={} k={} class={} renorms={} seed={}",
                    model_name(spec.kind), format_double(spec.gamma), format_double(spec.nominal_beta()),
                    format_double(rec.lambda), format_double(est.std_error), format_double(rec.k),
                    class_name(rec.cls), est.n_renorms, seed);
    std::cout << line << '\n';
    write_text(out_file(ctx, "lyapunov.txt"), header(ctx, seed) + line + "\n");
    return kOk;
}

int cmd_poincare(const Context& ctx) {
    const auto sec = section_for(ctx.opt, ctx.opt.gamma);
    const ModelSpec spec = spec_of(ctx.opt, ctx.opt.gamma);
    std::ostringstream ss;
    ss << header(ctx, seed_for(ctx.opt, spec));
    write_section_csv(ss, sec);
    write_text(out_file(ctx, "section.csv"), ss.str());
    write_gnuplot(ctx, "section",
                  "set xlabel 'x~'\nset ylabel 'p~'\nplot 'section.csv' using 2:3 with points pt 7 ps 0.3 notitle\n");
    return kOk;
}

int cmd_distance(const Context& ctx, const std::vector<double>& gammas, const std::string& model2) {
    if (gammas.size() < 2) throw DuffingError(ErrorCode::InvalidArgument, "--gammas needs at least two values");
    const HistogramRange range = range_of(ctx.opt, HistogramRange{});
    std::vector<PoincareSection> rows, cols;
    for (double g : gammas) rows.push_back(section_for(ctx.opt, g));
    if (model2.empty()) {
        cols = rows;
    } else {
        Options o2 = ctx.opt;
        o2.model = model2;
        for (double g : gammas) cols.push_back(section_for(o2, g));
    }
    std::vector<std::vector<DistanceResult>> m(rows.size(), std::vector<DistanceResult>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) m[i][j] = phase_distance(rows[i], cols[j], range);
    }
    std::ostringstream ss;
    ss << header(ctx, ctx.opt.seed);
    write_distance_matrix_csv(ss, gammas, gammas, m);
    write_text(out_file(ctx, "distance_matrix.csv"), ss.str());

    if (model2.empty()) {
        const auto means = mean_intra_model_distance(rows, range);
        std::cout << fmt::format("intra_model_mean={} model={} beta={}\n", format_double(grand_mean(means)),
                                 ctx.opt.model, format_double(ctx.opt.beta));
    } else {
        const auto cm = mean_cross_model_distance(rows, cols, range);
        std::cout << fmt::format("cross_model_mean={} models={},{} beta={} excluded={} unreliable={}\n",
                                 format_double(cm.value), ctx.opt.model, model2, format_double(ctx.opt.beta),
                                 cm.excluded, cm.unreliable);
    }
    write_gnuplot(ctx, "distance_matrix",
                  "set datafile missing 'inf'\nset view map\n"
                  "plot 'distance_matrix.csv' matrix rowheaders columnheaders using 1:2:3 with image notitle\n");
    return kOk;
}

int cmd_spectra(const Context& ctx, const std::string& compare) {
    const HistogramRange range = range_of(ctx.opt, kEnergyRange);
    auto spectrum = [&](const Options& o) {
        const ModelSpec spec = spec_of(o, o.gamma);
        return energy_spectrum(integrate(spec, default_initial_state(spec), config_of(o, spec, seed_for(o, spec))),
                               range);
    };
    const auto h = spectrum(ctx.opt);
    std::ostringstream ss;
    ss << header(ctx, ctx.opt.seed);
    write_histogram_csv(ss, h);
    write_text(out_file(ctx, "spectrum.csv"), ss.str());
    if (h.range_flagged()) {
        std::cerr << fmt::format("warning: {} samples outside the energy range\n", h.out_of_range);
    }
    if (!compare.empty()) {
        Options o2 = ctx.opt;
        o2.model = compare;
        const auto h2 = spectrum(o2);
        std::ostringstream s2;
        s2 << header(ctx, ctx.opt.seed);
        write_histogram_csv(s2, h2);
        write_text(out_file(ctx, "spectrum_" + compare + ".csv"), s2.str());
        const auto d = spectrum_distance(h, h2);
        std::cout << fmt::format("spectrum_distance={} reliable={}\n",
                                 d.infinite() ? std::string("inf") : format_double(d.value), d.reliable);
    }
    write_gnuplot(ctx, "spectrum",
                  "set xlabel 'E'\nset style fill solid 0.5\nplot 'spectrum.csv' using (($1+$2)/2):3 with boxes notitle\n");
    return kOk;
}

int cmd_sweep(const Context& ctx, const std::string& config_path, const std::string& preset, int threads,
              bool quiet) {
    SweepConfig cfg;
    if (!config_path.empty()) {
        cfg = build_grid(config_path);
    } else if (preset == "full") {
        cfg = full_preset();
    } else if (preset == "desk") {
        cfg = desk_preset();
    } else {
        throw DuffingError(ErrorCode::InvalidArgument, "unknown preset '" + preset + "'");
    }
    // Fail before spending compute when the existing file cannot take these records.
    if (const fs::path existing = fs::path(ctx.opt.out) / "records.csv"; fs::exists(existing)) {
        read_records(existing, grid_hash(cfg));
    }
    const std::size_t total = cfg.grid.points();
    std::size_t done = 0;
    auto progress = [&](const SweepRecord& r) {
        ++done;
        if (quiet) return;
        std::cerr << fmt::format("[{}/{}] {} gamma={} beta={} rep={} {}\n", done, total, model_name(r.model),
                                 format_double(r.gamma), format_double(r.beta), r.replicate,
                                 r.failed() ? r.error : fmt::format("lambda={:.4f}", r.lambda));
    };
    const auto result = run_sweep(cfg, threads, progress);
    write_records(result.records, out_file(ctx, "records.csv"), cfg,
                  fmt::format("{}\nseed {}", ctx.invocation, cfg.seed));
    for (const auto& [key, sec] : result.sections) {
        std::ostringstream ss;
        ss << header(ctx, point_seed(cfg.seed, key.model, key.gamma, key.beta, 0));
        write_section_csv(ss, sec);
        write_text(out_file(ctx, "sections/" + section_name(key.model, key.gamma, key.beta) + ".csv"), ss.str());
    }
    std::size_t failed = 0;
    for (const auto& r : result.records) failed += r.failed();
    std::cout << fmt::format("records={} failed={} grid_hash={}\n", result.records.size(), failed, grid_hash(cfg));
    write_gnuplot(ctx, "records",
                  "set logscale x\nset xlabel 'beta'\nset ylabel 'lambda'\n"
                  "plot 'records.csv' using 3:6 with points pt 7 ps 0.5 notitle\n");
    return kOk;
}

int cmd_detect(const Context& ctx, const std::string& records_path, double lo, double hi) {
    const auto loaded = read_records(records_path);
    const ModelKind model = model_of(ctx.opt.model);
    const GammaRange range{lo, hi};
    auto fmt_beta = [](const std::optional<double>& b) { return b ? format_double(*b) : std::string("none"); };

    std::string report;
    report += fmt::format("model {}\n", model_name(model));
    report += fmt::format("beta_chaos {}\n", fmt_beta(detect_beta_chaos(loaded.records, model, range)));
    report += fmt::format("beta_chaos_lambda {}\n",
                          fmt_beta(detect_beta_chaos(loaded.records, model, range, ChaosCriterion::PositiveLambda)));
    report += fmt::format("beta_conv {}\n", fmt_beta(detect_beta_conv(loaded.records, model, range)));
    for (const auto& [b, s] : k_spread_by_beta(loaded.records, model, range)) {
        report += fmt::format("k_spread beta={} stdev={}\n", format_double(b), format_double(s));
    }
    for (const auto& [g, b] : detect_beta_break(loaded.records, model, range)) {
        report += fmt::format("beta_break gamma={} beta={}\n", format_double(g), fmt_beta(b));
    }
    std::cout << report;
    write_text(out_file(ctx, "detect.txt"), header(ctx, ctx.opt.seed) + report);
    return kOk;
}

void add_model_flags(CLI::App* sub, Options& o) {
    sub->add_option("--model", o.model, "c, cnr, cnc, sc or sc5")->capture_default_str();
    sub->add_option("--gamma", o.gamma, "damping Gamma")->capture_default_str();
    sub->add_option("--beta", o.beta, "length scale beta")->capture_default_str();
    sub->add_option("--drive", o.g, "drive amplitude g")->capture_default_str();
    sub->add_option("--omega", o.omega, "drive frequency")->capture_default_str();
    sub->add_option("--steps-per-period", o.steps, "integration steps per drive period")->capture_default_str();
    sub->add_option("--dt", o.dt, "step size; must divide the drive period");
    sub->add_option("--periods", o.periods, "measured drive periods")->capture_default_str();
    sub->add_option("--transient", o.transient, "discarded drive periods")->capture_default_str();
    sub->add_option("--seed", o.seed, "base seed")->capture_default_str();
    sub->add_option("--scheme", o.scheme, "em or heun")->capture_default_str();
}

void add_out_flags(CLI::App* sub, Options& o) {
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_flag("--gnuplot-script", o.gnuplot, "also write a gnuplot script");
}

std::string join_args(int argc, char** argv) {
    std::string s = "duffing";
    for (int i = 1; i < argc; ++i) {
        s += ' ';
        s += argv[i];
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dissipative Duffing oscillator: classical, semiclassical and noise-added models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kCodeVersion);
    Context ctx;
    ctx.invocation = join_args(argc, argv);
    Options& o = ctx.opt;

    auto* simulate = app.add_subcommand("simulate", "integrate one trajectory");
    add_model_flags(simulate, o);
    add_out_flags(simulate, o);
    int stride = 0;
    simulate->add_option("--dense-stride", stride, "also keep every n-th step")->check(CLI::NonNegativeNumber);

    auto* lyapunov = app.add_subcommand("lyapunov", "largest Lyapunov exponent");
    add_model_flags(lyapunov, o);
    add_out_flags(lyapunov, o);
    int realizations = 4;
    double d0 = 1e-8;
    lyapunov->add_option("--realizations", realizations, "noise realizations")->capture_default_str();
    lyapunov->add_option("--d0", d0, "renormalization distance")->capture_default_str();

    auto* poincare = app.add_subcommand("poincare", "stroboscopic section");
    add_model_flags(poincare, o);
    add_out_flags(poincare, o);

    auto* distance = app.add_subcommand("distance", "phase-space distance matrix over Gamma");
    add_model_flags(distance, o);
    add_out_flags(distance, o);
    std::vector<double> gammas;
    std::string model2;
    distance->add_option("--gammas", gammas, "Gamma values")->required()->delimiter(',');
    distance->add_option("--against", model2, "second model for a cross-model matrix");
    distance->add_option("--bins", o.bins, "histogram bins")->capture_default_str();
    distance->add_option("--range", o.range, "histogram range LO HI")->expected(2);

    auto* spectra = app.add_subcommand("spectra", "energy spectrum at the strobe instants");
    add_model_flags(spectra, o);
    add_out_flags(spectra, o);
    std::string compare;
    spectra->add_option("--against", compare, "second model to compare with");
    spectra->add_option("--bins", o.bins, "histogram bins");
    spectra->add_option("--range", o.range, "energy range LO HI")->expected(2);

    auto* sweep = app.add_subcommand("sweep", "run a (model, Gamma, beta, replicate) grid");
    add_out_flags(sweep, o);
    std::string config_path, preset = "desk";
    int threads = 0;
    bool quiet = false;
    sweep->add_option("--config", config_path, "JSON sweep configuration")->check(CLI::ExistingFile);
    sweep->add_option("--preset", preset, "desk or full (ignored with --config)")->capture_default_str();
    sweep->add_option("--threads", threads, "worker threads (default: DUFFING_THREADS or all cores)");
    sweep->add_flag("--quiet", quiet, "no progress output");

    auto* detect = app.add_subcommand("detect", "characteristic scales from sweep records");
    std::string records_path;
    double lo = 0.088, hi = 0.2;
    detect->add_option("--records", records_path, "records CSV written by sweep")->required();
    detect->add_option("--model", o.model, "model to analyse")->capture_default_str();
    detect->add_option("--gamma-lo", lo, "exclusive lower Gamma bound")->capture_default_str();
    detect->add_option("--gamma-hi", hi, "inclusive upper Gamma bound")->capture_default_str();
    detect->add_option("--out", o.out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("usage", kUsage, e.what());
        return kUsage;
    }

    try {
        if (*simulate) return cmd_simulate(ctx, stride);
        if (*lyapunov) return cmd_lyapunov(ctx, realizations, d0);
        if (*poincare) return cmd_poincare(ctx);
        if (*distance) return cmd_distance(ctx, gammas, model2);
        if (*spectra) return cmd_spectra(ctx, compare);
        if (*sweep) return cmd_sweep(ctx, config_path, preset, threads, quiet);
        if (*detect) return cmd_detect(ctx, records_path, lo, hi);
    } catch (const DuffingError& e) {
        const int code = exit_code_for(e.code());
        report_error(error_code_name(e.code()), code, e.what());
        return code;
    } catch (const fs::filesystem_error& e) {
        report_error("io", kIo, e.what());
        return kIo;
    } catch (const std::exception& e) {
        report_error("internal", kInternal, e.what());
        return kInternal;
    }
    return kUsage;
}
