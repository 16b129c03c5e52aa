#pragma once

// Spatial similarity of attractors: stroboscopic sections, coarse-grained
// histograms and the KL-inspired histogram distance.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "duffing/integrator.hpp"
#include "duffing/model.hpp"

namespace duffing {

/// Minimum section size accepted by the distance functions.
inline constexpr std::size_t kMinSectionPoints = 500;
/// Histograms with fewer occupied bins make a comparison unreliable.
inline constexpr std::size_t kMinOccupiedBins = 10;

struct PoincareSection {
    /// Scaled (beta x, beta p) at t = nT.
    std::vector<std::array<double, 2>> points;
    ModelKind kind = ModelKind::C;
    double gamma = 0.0;
    /// Nominal length scale (beta * beta_n for CNC).
    double beta = 0.0;
};

PoincareSection poincare_section(const Trajectory& traj);

enum class Coordinate { X, P, Energy };

struct HistogramRange {
    double lo = -2.5;
    double hi = 2.5;
    int bins = 256;
};

/// Default binning of the scaled energy spectrum.
inline constexpr HistogramRange kEnergyRange{-0.3, 0.7, 128};

struct Histogram {
    HistogramRange range;
    Coordinate coordinate = Coordinate::X;
    std::vector<std::uint64_t> counts;
    std::uint64_t out_of_range = 0;

    std::uint64_t total() const noexcept;
    std::size_t occupied_bins() const noexcept;
    /// More than 1% of the samples fell outside the range.
    bool range_flagged() const noexcept;
    double bin_left(int i) const noexcept;
    double bin_right(int i) const noexcept;
};

/// Uniform binning over [lo, hi); the value hi itself lands in the last bin.
Histogram histogram_of(std::span<const double> values, Coordinate coordinate,
                       const HistogramRange& range);

Histogram scaled_histogram(const PoincareSection& section, Coordinate coordinate,
                           const HistogramRange& range = {});

struct DistanceResult {
    /// +infinity when the histograms have no overlap.
    double value = 0.0;
    bool reliable = true;

    bool infinite() const noexcept;
};

/// l(f1, f2) = -ln[ (sum f1 f2)^2 / (sum f1^2 sum f2^2) ] over bins.
/// Throws on mismatched grids or an all-zero input.
double skl_distance(std::span<const double> f1, std::span<const double> f2);
DistanceResult skl_distance(const Histogram& f1, const Histogram& f2);

/// d = sqrt(l_x^2 + l_p^2). Both sections need at least kMinSectionPoints.
DistanceResult phase_distance(const PoincareSection& a, const PoincareSection& b,
                              const HistogramRange& range = {});

struct IntraModelMean {
    double value = 0.0;
    /// Pairs dropped because they were unreliable or infinite.
    int excluded = 0;
    int total = 0;
    /// More than 20% of the pairs were excluded.
    bool flagged = false;
};

/// Mean over Gamma' != Gamma of phase_distance, for sections at one model and beta.
std::map<double, IntraModelMean> mean_intra_model_distance(std::span<const PoincareSection> sections,
                                                           const HistogramRange& range = {});

/// Average of the per-Gamma means above.
double grand_mean(const std::map<double, IntraModelMean>& means);

struct CrossModelMean {
    double value = 0.0;
    int excluded = 0;     // infinite distances left out of the mean
    int unreliable = 0;   // included, but flagged
    int total = 0;
};

/// Mean over Gamma of d between two models at matched (Gamma, beta).
CrossModelMean mean_cross_model_distance(std::span<const PoincareSection> m1,
                                         std::span<const PoincareSection> m2,
                                         const HistogramRange& range = {});

/// Mean over Gamma of |lambda_1 - lambda_2|; inputs keyed by Gamma.
double mean_lambda_gap(const std::map<double, double>& lambda1,
                       const std::map<double, double>& lambda2);

/// Histogram of the scaled energy at the strobe samples.
Histogram energy_spectrum(const Trajectory& traj, const HistogramRange& range = kEnergyRange);
DistanceResult spectrum_distance(const Histogram& h1, const Histogram& h2);

void write_section_csv(std::ostream& out, const PoincareSection& section);
void write_histogram_csv(std::ostream& out, const Histogram& hist);
/// Square matrix with Gamma row and column headers.
void write_distance_matrix_csv(std::ostream& out, std::span<const double> row_gammas,
                               std::span<const double> col_gammas,
                               const std::vector<std::vector<DistanceResult>>& matrix);

}  // namespace duffing
