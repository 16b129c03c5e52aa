#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "duffing/chaos.hpp"
#include "duffing/geometry.hpp"
#include "duffing/integrator.hpp"
#include "duffing/model.hpp"

namespace duffing {

inline constexpr const char* kCodeVersion = "0.1.0";

/// Landmark length scales always present in generated beta grids.
inline constexpr double kBetaClassical = 1e-5;
inline constexpr double kBetaChaos = 0.0068;
inline constexpr double kBetaConv = 0.0341;

struct SweepGrid {
    std::vector<double> gammas;
    std::vector<double> betas;
    std::vector<ModelKind> models;
    int replicates = 1;

    std::size_t points() const noexcept {
        return gammas.size() * betas.size() * models.size() * static_cast<std::size_t>(replicates);
    }
    void validate() const;
};

struct SweepConfig {
    SweepGrid grid;
    int steps_per_period = kDefaultStepsPerPeriod;
    int transient_periods = 200;
    int measure_periods = 2000;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::EulerMaruyama;
    /// Noise realizations averaged inside each lambda estimate.
    int realizations = 4;
    bool keep_sections = true;
    double g = 0.3;
    double omega = 1.0;

    IntegratorConfig integrator(const ModelSpec& spec) const;
    nlohmann::json to_json() const;
};

/// Half-open arithmetic grid (lo, hi] with spacing `step`, rounded to 1e-12.
std::vector<double> arithmetic_grid(double lo, double hi, double step);

/// 10^(log10_lo + i/per_decade) for i = 0.. up to log10_hi, merged with the landmarks.
std::vector<double> log_beta_grid(double log10_lo, double log10_hi, int per_decade,
                                  bool landmarks = true);

/// 12 Gamma values in (0.088, 0.2], 9 beta values including the landmarks,
/// 2 replicates, models SC.
SweepConfig desk_preset();
/// Gamma in (0, 0.35] at spacing 0.002, beta log-uniform in [1e-5, 1e-1].
SweepConfig full_preset();

/// Parses the JSON sweep configuration. Fields left out fall back to the
/// chosen preset ("preset": "desk" | "full", default desk).
SweepConfig parse_sweep_config(const nlohmann::json& j);
SweepConfig build_grid(const std::filesystem::path& config_file);

struct SweepRecord {
    ModelKind model = ModelKind::SC;
    double gamma = 0.0;
    double beta = 0.0;
    int replicate = 0;
    std::uint64_t seed = 0;
    double lambda = 0.0;
    double lambda_stderr = 0.0;
    double k = 0.0;
    AttractorClass cls = AttractorClass::Periodic;
    /// Empty on success, otherwise "<code>: <message>".
    std::string error;
    /// Wall time of the point; not persisted.
    double runtime_s = 0.0;

    bool failed() const noexcept { return !error.empty(); }
    auto key() const { return std::make_tuple(model_id(model), gamma, beta, replicate); }
};

std::uint64_t point_seed(std::uint64_t base, ModelKind model, double gamma, double beta,
                         int replicate) noexcept;

struct SectionKey {
    ModelKind model;
    double gamma;
    double beta;
    auto operator<=>(const SectionKey&) const = default;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    /// Fiducial section of replicate 0 per (model, Gamma, beta), when kept.
    std::map<SectionKey, PoincareSection> sections;
};

/// Worker count: DUFFING_THREADS if set, else the hardware concurrency.
int default_worker_count();

/// Runs every (model, Gamma, beta, replicate) point. Records come back in
/// canonical order whatever the worker count; failing points carry their
/// error instead of being dropped.
SweepResult run_sweep(const SweepConfig& config, int workers = 0,
                      const std::function<void(const SweepRecord&)>& on_done = {});

void sort_records(std::vector<SweepRecord>& records);
/// Canonical CSV: header plus records sorted by (model, gamma, beta, replicate).
std::string records_to_csv(std::vector<SweepRecord> records);
std::vector<SweepRecord> records_from_csv(const std::string& text);

struct Manifest {
    std::string grid_hash;
    std::string code_version = kCodeVersion;
    nlohmann::json config;
    std::string records_checksum;
};

/// FNV-1a over the canonical config serialization.
std::string grid_hash(const SweepConfig& config);
std::string fnv1a_hex(const std::string& bytes);

std::filesystem::path manifest_path(const std::filesystem::path& records_path);

/// Writes records and the JSON sidecar. If the file already exists with the
/// same grid hash the new records are merged in (replacing equal keys);
/// a different hash is an error. `header` lines are written as # comments.
void write_records(const std::vector<SweepRecord>& records, const std::filesystem::path& path,
                   const SweepConfig& config, const std::string& header = {});

struct LoadedRecords {
    std::vector<SweepRecord> records;
    Manifest manifest;
};

/// Reads records plus manifest. Throws CorruptFile on a malformed file or a
/// checksum mismatch and HashMismatch when expected_hash is given and differs.
LoadedRecords read_records(const std::filesystem::path& path,
                           const std::optional<std::string>& expected_hash = std::nullopt);

// ---------------------------------------------------------------------------
// Characteristic scales.

enum class ChaosCriterion {
    /// K = lambda + Gamma > 0.2
    Complexity,
    /// lambda > -0.005
    PositiveLambda,
};

inline constexpr double kLambdaChaosFloor = -0.005;

struct GammaRange {
    double lo = 0.088;   // exclusive
    double hi = 0.2;     // inclusive
    bool contains(double g) const noexcept { return g > lo && g <= hi + 1e-12; }
};

/// Replicate-averaged lambda per (Gamma, beta) for one model; failed replicates are skipped.
std::map<std::pair<double, double>, double> mean_lambda(const std::vector<SweepRecord>& records,
                                                        ModelKind model, const GammaRange& range);

/// Smallest grid beta such that every Gamma in range is chaotic at it and at
/// every larger grid beta.
std::optional<double> detect_beta_chaos(const std::vector<SweepRecord>& records, ModelKind model,
                                        const GammaRange& range = {},
                                        ChaosCriterion criterion = ChaosCriterion::Complexity);

/// Standard deviation over Gamma of K, per grid beta.
std::map<double, double> k_spread_by_beta(const std::vector<SweepRecord>& records, ModelKind model,
                                          const GammaRange& range = {});

/// Smallest grid beta whose K spread is at most `fraction` of the spread at the smallest beta.
std::optional<double> detect_beta_conv(const std::vector<SweepRecord>& records, ModelKind model,
                                       const GammaRange& range = {}, double fraction = 0.25);

/// beta_break per Gamma, measured against lambda at the smallest grid beta
/// (or against C records at the same Gamma when present).
std::map<double, std::optional<double>> detect_beta_break(const std::vector<SweepRecord>& records,
                                                          ModelKind model,
                                                          const GammaRange& range = {});

}  // namespace duffing
