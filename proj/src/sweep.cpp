#include "duffing/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "duffing/error.hpp"

namespace duffing {

namespace {

using nlohmann::json;

constexpr const char* kRecordsHeader = "model,gamma,beta,replicate,seed,lambda,lambda_stderr,k,class,error";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double round_sig(double v, int digits) { return std::stod(fmt::format("{:.{}g}", v, digits)); }

bool strictly_increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] > v[i - 1])) return false;
    }
    return true;
}

[[noreturn]] void malformed(const std::string& what) {
    throw DuffingError(ErrorCode::MalformedConfig, what);
}

std::vector<double> parse_axis(const json& j, const char* name, bool log_axis) {
    if (j.is_array()) {
        std::vector<double> v;
        for (const auto& e : j) {
            if (!e.is_number()) malformed(std::string(name) + " values must be numbers");
            v.push_back(e.get<double>());
        }
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    }
    if (!j.is_object()) malformed(std::string(name) + " must be a list or a range object");
    auto num = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number()) {
            malformed(std::string(name) + "." + key + " missing or not a number");
        }
        return j.at(key).get<double>();
    };
    for (const auto& [key, _] : j.items()) {
        static const std::set<std::string> lin{"min", "max", "step"};
        static const std::set<std::string> log{"log10_min", "log10_max", "per_decade", "landmarks"};
        if (!(log_axis ? log : lin).count(key)) malformed(std::string("unknown key ") + name + "." + key);
    }
    if (!log_axis) return arithmetic_grid(num("min"), num("max"), num("step"));
    const bool landmarks = j.value("landmarks", true);
    const double per_decade = num("per_decade");
    if (per_decade != std::floor(per_decade)) malformed("beta.per_decade must be an integer");
    return log_beta_grid(num("log10_min"), num("log10_max"), static_cast<int>(per_decade), landmarks);
}

std::string sanitize(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, int line) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw DuffingError(ErrorCode::CorruptFile, fmt::format("bad number '{}' on line {}", s, line));
    }
    return v;
}

std::uint64_t parse_u64(const std::string& s, int line) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno != 0) {
        throw DuffingError(ErrorCode::CorruptFile, fmt::format("bad integer '{}' on line {}", s, line));
    }
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DuffingError(ErrorCode::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DuffingError(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw DuffingError(ErrorCode::Io, "write failed for " + path.string());
}

SweepRecord evaluate_point(const SweepConfig& cfg, ModelKind model, double gamma, double beta,
                           int replicate, PoincareSection* section) {
    SweepRecord rec;
    rec.model = model;
    rec.gamma = gamma;
    rec.beta = beta;
    rec.replicate = replicate;
    rec.seed = point_seed(cfg.seed, model, gamma, beta, replicate);
    const auto start = std::chrono::steady_clock::now();
    try {
        const ModelSpec spec = ModelSpec::at(model, gamma, beta, cfg.g, cfg.omega);
        IntegratorConfig ic = cfg.integrator(spec);
        ic.seed = rec.seed;
        LyapunovOptions opt;
        opt.realizations = cfg.realizations;
        opt.keep_section = section != nullptr;
        auto est = lyapunov_wolf(spec, ic, opt);
        const auto cr = complexity_record(est.lambda, gamma);
        rec.lambda = cr.lambda;
        rec.lambda_stderr = est.std_error;
        rec.k = cr.k;
        rec.cls = cr.cls;
        if (section) {
            section->points = std::move(est.section);
            section->kind = model;
            section->gamma = gamma;
            section->beta = beta;
        }
    } catch (const DuffingError& e) {
        rec.lambda = rec.lambda_stderr = rec.k = kNaN;
        rec.error = sanitize(fmt::format("{}: {}", error_code_name(e.code()), e.what()));
    }
    rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

struct Task {
    ModelKind model;
    double gamma;
    double beta;
    int replicate;
};

}  // namespace

void SweepGrid::validate() const {
    if (gammas.empty() || betas.empty() || models.empty()) {
        throw DuffingError(ErrorCode::InvalidArgument, "sweep grid has an empty axis");
    }
    if (!strictly_increasing(gammas) || !strictly_increasing(betas)) {
        throw DuffingError(ErrorCode::InvalidArgument, "grid values must be strictly increasing");
    }
    if (replicates < 1) throw DuffingError(ErrorCode::InvalidArgument, "replicates must be >= 1");
    std::set<ModelKind> seen(models.begin(), models.end());
    if (seen.size() != models.size()) throw DuffingError(ErrorCode::InvalidArgument, "duplicate model");
}

IntegratorConfig SweepConfig::integrator(const ModelSpec& spec) const {
    IntegratorConfig ic = IntegratorConfig::for_period(spec.period(), steps_per_period);
    ic.transient_periods = transient_periods;
    ic.measure_periods = measure_periods;
    ic.seed = seed;
    ic.scheme = scheme;
    return ic;
}

json SweepConfig::to_json() const {
    json models = json::array();
    for (auto m : grid.models) models.push_back(std::string(model_name(m)));
    return json{
        {"gamma", grid.gammas},
        {"beta", grid.betas},
        {"models", models},
        {"replicates", grid.replicates},
        {"realizations", realizations},
        {"steps_per_period", steps_per_period},
        {"transient_periods", transient_periods},
        {"measure_periods", measure_periods},
        {"seed", seed},
        {"scheme", std::string(scheme_name(scheme))},
        {"keep_sections", keep_sections},
        {"g", g},
        {"omega", omega},
    };
}

std::vector<double> arithmetic_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw DuffingError(ErrorCode::InvalidArgument, "grid step must be positive");
    }
    std::vector<double> v;
    for (long k = 1;; ++k) {
        const double x = lo + static_cast<double>(k) * step;
        if (x > hi + 1e-9 * step) break;
        v.push_back(std::round(x * 1e12) / 1e12);
    }
    if (v.empty()) throw DuffingError(ErrorCode::InvalidArgument, "empty grid range");
    return v;
}

std::vector<double> log_beta_grid(double log10_lo, double log10_hi, int per_decade, bool landmarks) {
    if (per_decade < 1 || !(log10_hi >= log10_lo)) {
        throw DuffingError(ErrorCode::InvalidArgument, "empty beta range");
    }
    const long n = std::lround(std::floor((log10_hi - log10_lo) * per_decade + 1e-9));
    std::vector<double> v;
    for (long i = 0; i <= n; ++i) v.push_back(round_sig(std::pow(10.0, log10_lo + double(i) / per_decade), 12));
    if (landmarks) {
        for (double b : {kBetaClassical, kBetaChaos, kBetaConv}) {
            std::erase_if(v, [b](double x) { return std::abs(x - b) <= 1e-9 * b; });
            v.push_back(b);
        }
    }
    std::sort(v.begin(), v.end());
    return v;
}

SweepConfig desk_preset() {
    SweepConfig c;
    c.grid.gammas = arithmetic_grid(0.08, 0.2, 0.01);
    c.grid.betas = {1e-5, 1e-4, 1e-3, 0.003, kBetaChaos, 0.01, 0.02, kBetaConv, 0.05};
    c.grid.models = {ModelKind::SC};
    c.grid.replicates = 2;
    c.measure_periods = 2000;
    return c;
}

SweepConfig full_preset() {
    SweepConfig c;
    c.grid.gammas = arithmetic_grid(0.0, 0.35, 0.002);
    c.grid.betas = log_beta_grid(-5.0, -1.0, 8);
    c.grid.models = {ModelKind::C, ModelKind::CNR, ModelKind::CNC, ModelKind::SC};
    c.grid.replicates = 1;
    return c;
}

SweepConfig parse_sweep_config(const json& j) {
    if (!j.is_object()) malformed("sweep config must be a JSON object");
    static const std::set<std::string> known{
        "preset", "gamma", "beta", "models", "replicates", "realizations", "steps_per_period",
        "transient_periods", "measure_periods", "seed", "scheme", "keep_sections", "g", "omega"};
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) malformed("unknown config key '" + key + "'");
    }
    try {
        const std::string preset = j.value("preset", std::string("desk"));
        SweepConfig c;
        if (preset == "desk") {
            c = desk_preset();
        } else if (preset == "full") {
            c = full_preset();
        } else {
            malformed("unknown preset '" + preset + "'");
        }
        if (j.contains("gamma")) c.grid.gammas = parse_axis(j.at("gamma"), "gamma", false);
        if (j.contains("beta")) c.grid.betas = parse_axis(j.at("beta"), "beta", true);
        if (j.contains("models")) {
            c.grid.models.clear();
            for (const auto& m : j.at("models")) {
                const auto kind = parse_model(m.get<std::string>());
                if (!kind) malformed("unknown model '" + m.get<std::string>() + "'");
                c.grid.models.push_back(*kind);
            }
        }
        auto get_int = [&](const char* key, int& dst) {
            if (!j.contains(key)) return;
            if (!j.at(key).is_number_integer()) malformed(std::string(key) + " must be an integer");
            dst = j.at(key).get<int>();
        };
        get_int("replicates", c.grid.replicates);
        get_int("realizations", c.realizations);
        get_int("steps_per_period", c.steps_per_period);
        get_int("transient_periods", c.transient_periods);
        get_int("measure_periods", c.measure_periods);
        if (j.contains("seed")) {
            if (!j.at("seed").is_number_unsigned()) malformed("seed must be a non-negative integer");
            c.seed = j.at("seed").get<std::uint64_t>();
        }
        if (j.contains("scheme")) {
            const auto s = parse_scheme(j.at("scheme").get<std::string>());
            if (!s) malformed("unknown scheme");
            c.scheme = *s;
        }
        c.keep_sections = j.value("keep_sections", c.keep_sections);
        c.g = j.value("g", c.g);
        c.omega = j.value("omega", c.omega);
        c.grid.validate();
        if (c.steps_per_period < 1 || c.transient_periods < 0 || c.realizations < 1) {
            throw DuffingError(ErrorCode::InvalidArgument, "integrator settings out of range");
        }
        return c;
    } catch (const json::exception& e) {
        malformed(e.what());
    }
}

SweepConfig build_grid(const std::filesystem::path& config_file) {
    const std::string text = read_file(config_file);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        malformed(e.what());
    }
    return parse_sweep_config(j);
}

std::uint64_t point_seed(std::uint64_t base, ModelKind model, double gamma, double beta,
                         int replicate) noexcept {
    return derive_seed(base, model_id(model), std::bit_cast<std::uint64_t>(gamma),
                       std::bit_cast<std::uint64_t>(beta), static_cast<std::uint64_t>(replicate));
}

int default_worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("DUFFING_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

SweepResult run_sweep(const SweepConfig& config, int workers,
                      const std::function<void(const SweepRecord&)>& on_done) {
    config.grid.validate();
    std::vector<Task> tasks;
    for (auto m : config.grid.models) {
        for (double gm : config.grid.gammas) {
            for (double b : config.grid.betas) {
                for (int r = 0; r < config.grid.replicates; ++r) tasks.push_back({m, gm, b, r});
            }
        }
    }

    std::vector<SweepRecord> records(tasks.size());
    std::vector<std::optional<PoincareSection>> sections(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex report;

    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const Task& t = tasks[i];
            PoincareSection sec;
            const bool keep = config.keep_sections && t.replicate == 0;
            records[i] = evaluate_point(config, t.model, t.gamma, t.beta, t.replicate, keep ? &sec : nullptr);
            if (keep && !records[i].failed()) sections[i] = std::move(sec);
            if (on_done) {
                std::lock_guard lock(report);
                on_done(records[i]);
            }
        }
    };

    if (workers <= 0) workers = default_worker_count();
    workers = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    SweepResult result;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (sections[i]) result.sections[{tasks[i].model, tasks[i].gamma, tasks[i].beta}] = std::move(*sections[i]);
    }
    result.records = std::move(records);
    sort_records(result.records);
    return result;
}

void sort_records(std::vector<SweepRecord>& records) {
    std::sort(records.begin(), records.end(),
              [](const SweepRecord& a, const SweepRecord& b) { return a.key() < b.key(); });
}

std::string records_to_csv(std::vector<SweepRecord> records) {
    sort_records(records);
    std::string out = std::string(kRecordsHeader) + "\n";
    for (const auto& r : records) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", model_name(r.model), format_double(r.gamma),
                           format_double(r.beta), r.replicate, r.seed, format_double(r.lambda),
                           format_double(r.lambda_stderr), format_double(r.k),
                           r.failed() ? std::string_view{} : class_name(r.cls), sanitize(r.error));
    }
    return out;
}

std::vector<SweepRecord> records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool header = false;
    std::vector<SweepRecord> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != kRecordsHeader) throw DuffingError(ErrorCode::CorruptFile, "unexpected records header");
            header = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 10) {
            throw DuffingError(ErrorCode::CorruptFile, fmt::format("line {} has {} fields", lineno, f.size()));
        }
        SweepRecord r;
        const auto model = parse_model(f[0]);
        if (!model) throw DuffingError(ErrorCode::CorruptFile, fmt::format("unknown model on line {}", lineno));
        r.model = *model;
        r.gamma = parse_number(f[1], lineno);
        r.beta = parse_number(f[2], lineno);
        r.replicate = static_cast<int>(parse_u64(f[3], lineno));
        r.seed = parse_u64(f[4], lineno);
        r.lambda = parse_number(f[5], lineno);
        r.lambda_stderr = parse_number(f[6], lineno);
        r.k = parse_number(f[7], lineno);
        r.error = f[9];
        if (!r.failed()) {
            const auto cls = parse_class(f[8]);
            if (!cls) throw DuffingError(ErrorCode::CorruptFile, fmt::format("bad class on line {}", lineno));
            r.cls = *cls;
        }
        out.push_back(std::move(r));
    }
    if (!header) throw DuffingError(ErrorCode::CorruptFile, "records file has no header");
    return out;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

std::string grid_hash(const SweepConfig& config) {
    // Only the settings a record depends on. The point lists are left out so
    // a partial sweep over a subset can be merged into an existing file.
    json j = config.to_json();
    for (const char* key : {"gamma", "beta", "models", "replicates", "keep_sections"}) j.erase(key);
    return fnv1a_hex(j.dump());
}

std::filesystem::path manifest_path(const std::filesystem::path& records_path) {
    auto p = records_path;
    p += ".manifest.json";
    return p;
}

void write_records(const std::vector<SweepRecord>& records, const std::filesystem::path& path,
                   const SweepConfig& config, const std::string& header) {
    const std::string hash = grid_hash(config);
    std::vector<SweepRecord> merged;
    if (std::filesystem::exists(path)) merged = read_records(path, hash).records;

    std::map<decltype(SweepRecord{}.key()), SweepRecord> by_key;
    for (auto& r : merged) by_key[r.key()] = std::move(r);
    for (const auto& r : records) by_key[r.key()] = r;
    merged.clear();
    for (auto& [_, r] : by_key) merged.push_back(std::move(r));

    std::string text;
    if (!header.empty()) {
        std::istringstream in(header);
        std::string line;
        while (std::getline(in, line)) text += "# " + line + "\n";
    }
    text += records_to_csv(merged);
    write_file(path, text);

    json m{{"grid_hash", hash},
           {"code_version", kCodeVersion},
           {"config", config.to_json()},
           {"records", merged.size()},
           {"records_checksum", fnv1a_hex(text)}};
    write_file(manifest_path(path), m.dump(2) + "\n");
}

LoadedRecords read_records(const std::filesystem::path& path, const std::optional<std::string>& expected_hash) {
    const std::string text = read_file(path);
    const auto mpath = manifest_path(path);
    if (!std::filesystem::exists(mpath)) {
        throw DuffingError(ErrorCode::CorruptFile, "missing manifest " + mpath.string());
    }
    LoadedRecords out;
    try {
        const json m = json::parse(read_file(mpath));
        out.manifest.grid_hash = m.at("grid_hash").get<std::string>();
        out.manifest.code_version = m.at("code_version").get<std::string>();
        out.manifest.config = m.at("config");
        out.manifest.records_checksum = m.at("records_checksum").get<std::string>();
    } catch (const json::exception& e) {
        throw DuffingError(ErrorCode::CorruptFile, std::string("bad manifest: ") + e.what());
    }
    if (out.manifest.records_checksum != fnv1a_hex(text)) {
        throw DuffingError(ErrorCode::CorruptFile, "records checksum does not match manifest");
    }
    if (expected_hash && *expected_hash != out.manifest.grid_hash) {
        throw DuffingError(ErrorCode::HashMismatch,
                           "grid hash " + out.manifest.grid_hash + " differs from " + *expected_hash);
    }
    out.records = records_from_csv(text);
    return out;
}

// ---------------------------------------------------------------------------

std::map<std::pair<double, double>, double> mean_lambda(const std::vector<SweepRecord>& records,
                                                        ModelKind model, const GammaRange& range) {
    std::map<std::pair<double, double>, std::pair<double, int>> acc;
    for (const auto& r : records) {
        if (r.model != model || !range.contains(r.gamma)) continue;
        auto& [sum, n] = acc[{r.gamma, r.beta}];
        if (!r.failed() && std::isfinite(r.lambda)) {
            sum += r.lambda;
            ++n;
        }
    }
    std::map<std::pair<double, double>, double> out;
    for (const auto& [key, v] : acc) out[key] = v.second > 0 ? v.first / v.second : kNaN;
    return out;
}

namespace {

struct Table {
    std::vector<double> gammas;
    std::vector<double> betas;
    std::map<std::pair<double, double>, double> lambda;
};

Table lambda_table(const std::vector<SweepRecord>& records, ModelKind model, const GammaRange& range) {
    Table t;
    t.lambda = mean_lambda(records, model, range);
    std::set<double> gs, bs;
    for (const auto& [key, _] : t.lambda) {
        gs.insert(key.first);
        bs.insert(key.second);
    }
    if (gs.empty()) {
        throw DuffingError(ErrorCode::MissingRecords,
                           fmt::format("no {} records in the Gamma range", model_name(model)));
    }
    t.gammas.assign(gs.begin(), gs.end());
    t.betas.assign(bs.begin(), bs.end());
    for (double g : t.gammas) {
        for (double b : t.betas) {
            if (!t.lambda.count({g, b})) {
                throw DuffingError(ErrorCode::MissingRecords,
                                   fmt::format("no record at gamma={} beta={}", format_double(g), format_double(b)));
            }
        }
    }
    return t;
}

}  // namespace

std::optional<double> detect_beta_chaos(const std::vector<SweepRecord>& records, ModelKind model,
                                        const GammaRange& range, ChaosCriterion criterion) {
    const Table t = lambda_table(records, model, range);
    auto chaotic = [&](double g, double b) {
        const double l = t.lambda.at({g, b});
        if (!std::isfinite(l)) return false;
        if (criterion == ChaosCriterion::PositiveLambda) return l > kLambdaChaosFloor;
        return classify_attractor(dynamical_complexity(l, g)) == AttractorClass::Chaotic;
    };
    std::optional<double> found;
    for (auto it = t.betas.rbegin(); it != t.betas.rend(); ++it) {
        const bool all = std::all_of(t.gammas.begin(), t.gammas.end(), [&](double g) { return chaotic(g, *it); });
        if (!all) break;
        found = *it;
    }
    return found;
}

std::map<double, double> k_spread_by_beta(const std::vector<SweepRecord>& records, ModelKind model,
                                          const GammaRange& range) {
    const Table t = lambda_table(records, model, range);
    std::map<double, double> out;
    for (double b : t.betas) {
        std::vector<double> ks;
        for (double g : t.gammas) {
            const double l = t.lambda.at({g, b});
            if (std::isfinite(l)) ks.push_back(dynamical_complexity(l, g));
        }
        if (ks.size() < 2) {
            out[b] = kNaN;
            continue;
        }
        double mean = 0.0;
        for (double k : ks) mean += k;
        mean /= static_cast<double>(ks.size());
        double var = 0.0;
        for (double k : ks) var += (k - mean) * (k - mean);
        out[b] = std::sqrt(var / static_cast<double>(ks.size() - 1));
    }
    return out;
}

std::optional<double> detect_beta_conv(const std::vector<SweepRecord>& records, ModelKind model,
                                       const GammaRange& range, double fraction) {
    const auto spread = k_spread_by_beta(records, model, range);
    const double ref = spread.begin()->second;
    if (!std::isfinite(ref)) return std::nullopt;
    const double theta = fraction * ref;
    for (const auto& [b, s] : spread) {
        if (std::isfinite(s) && s <= theta) return b;
    }
    return std::nullopt;
}

std::map<double, std::optional<double>> detect_beta_break(const std::vector<SweepRecord>& records,
                                                          ModelKind model, const GammaRange& range) {
    const Table t = lambda_table(records, model, range);
    std::map<std::pair<double, double>, std::pair<double, int>> err;
    for (const auto& r : records) {
        if (r.model != model || !range.contains(r.gamma) || r.failed()) continue;
        auto& [sum, n] = err[{r.gamma, r.beta}];
        sum += r.lambda_stderr;
        ++n;
    }
    std::map<double, double> classical;
    if (model != ModelKind::C) {
        for (const auto& [key, l] : mean_lambda(records, ModelKind::C, range)) classical[key.first] = l;
    }

    std::map<double, std::optional<double>> out;
    for (double g : t.gammas) {
        std::vector<LambdaPoint> curve;
        double ref;
        std::size_t first = 0;
        if (auto it = classical.find(g); it != classical.end() && std::isfinite(it->second)) {
            ref = it->second;
        } else {
            ref = t.lambda.at({g, t.betas.front()});
            first = 1;
        }
        for (std::size_t i = first; i < t.betas.size(); ++i) {
            const double b = t.betas[i];
            const double l = t.lambda.at({g, b});
            if (!std::isfinite(l)) continue;
            const auto& [sum, n] = err[{g, b}];
            curve.push_back({b, l, n > 0 ? sum / n / std::sqrt(static_cast<double>(n)) : 0.0});
        }
        out[g] = (curve.empty() || !std::isfinite(ref)) ? std::nullopt : beta_break(curve, ref);
    }
    return out;
}

}  // namespace duffing
