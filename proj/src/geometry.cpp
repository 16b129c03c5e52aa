#include "duffing/geometry.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "duffing/error.hpp"

namespace duffing {

namespace {

double scaled_energy(double xs, double ps) { return 0.5 * ps * ps + 0.25 * xs * xs * xs * xs - 0.5 * xs * xs; }

bool same_scale(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

bool same_grid(const HistogramRange& a, const HistogramRange& b) {
    return a.lo == b.lo && a.hi == b.hi && a.bins == b.bins;
}

void check_range(const HistogramRange& range) {
    if (range.bins < 2) throw DuffingError(ErrorCode::InvalidArgument, "histogram needs at least 2 bins");
    if (!(range.hi > range.lo) || !std::isfinite(range.lo) || !std::isfinite(range.hi)) {
        throw DuffingError(ErrorCode::InvalidArgument, "histogram range must satisfy lo < hi");
    }
}

void check_section_size(const PoincareSection& s) {
    if (s.points.size() < kMinSectionPoints) {
        throw DuffingError(ErrorCode::TooFewPoints,
                           "section has " + std::to_string(s.points.size()) + " points, need 500");
    }
}

std::string format_cell(const DistanceResult& d) {
    return d.infinite() ? std::string("inf") : format_double(d.value);
}

}  // namespace

PoincareSection poincare_section(const Trajectory& traj) {
    if (traj.strobe_indices.empty()) {
        throw DuffingError(ErrorCode::TooFewPoints, "trajectory has no strobe samples");
    }
    PoincareSection sec;
    sec.kind = traj.spec.kind;
    sec.gamma = traj.spec.gamma;
    sec.beta = traj.spec.nominal_beta();
    sec.points.reserve(traj.strobe_indices.size());
    const double b = traj.spec.beta;
    for (std::size_t idx : traj.strobe_indices) {
        std::visit([&](const auto& s) { sec.points.push_back({b * s.x, b * s.p}); }, traj.states[idx]);
    }
    return sec;
}

std::uint64_t Histogram::total() const noexcept {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

std::size_t Histogram::occupied_bins() const noexcept {
    std::size_t n = 0;
    for (auto c : counts) n += c > 0;
    return n;
}

bool Histogram::range_flagged() const noexcept {
    const double all = static_cast<double>(total() + out_of_range);
    return all > 0 && static_cast<double>(out_of_range) > 0.01 * all;
}

double Histogram::bin_left(int i) const noexcept {
    return range.lo + (range.hi - range.lo) * i / range.bins;
}

double Histogram::bin_right(int i) const noexcept { return bin_left(i + 1); }

Histogram histogram_of(std::span<const double> values, Coordinate coordinate,
                       const HistogramRange& range) {
    check_range(range);
    Histogram h;
    h.range = range;
    h.coordinate = coordinate;
    h.counts.assign(range.bins, 0);
    const double scale = range.bins / (range.hi - range.lo);
    for (double v : values) {
        if (!(v >= range.lo && v <= range.hi)) {
            ++h.out_of_range;
            continue;
        }
        auto bin = static_cast<int>((v - range.lo) * scale);
        if (bin >= range.bins) bin = range.bins - 1;
        ++h.counts[bin];
    }
    if (!values.empty() && h.total() == 0) {
        throw DuffingError(ErrorCode::EmptyHistogram, "all points out of range");
    }
    return h;
}

Histogram scaled_histogram(const PoincareSection& section, Coordinate coordinate,
                           const HistogramRange& range) {
    std::vector<double> values;
    values.reserve(section.points.size());
    for (const auto& pt : section.points) {
        switch (coordinate) {
            case Coordinate::X: values.push_back(pt[0]); break;
            case Coordinate::P: values.push_back(pt[1]); break;
            case Coordinate::Energy: values.push_back(scaled_energy(pt[0], pt[1])); break;
        }
    }
    return histogram_of(values, coordinate, range);
}

bool DistanceResult::infinite() const noexcept { return std::isinf(value); }

double skl_distance(std::span<const double> f1, std::span<const double> f2) {
    if (f1.size() != f2.size()) throw DuffingError(ErrorCode::GridMismatch, "histogram grids differ");
    double cross = 0.0, self1 = 0.0, self2 = 0.0;
    for (std::size_t i = 0; i < f1.size(); ++i) {
        cross += f1[i] * f2[i];
        self1 += f1[i] * f1[i];
        self2 += f2[i] * f2[i];
    }
    if (!(self1 > 0.0) || !(self2 > 0.0)) {
        throw DuffingError(ErrorCode::EmptyHistogram, "empty histogram");
    }
    if (cross == 0.0) return std::numeric_limits<double>::infinity();
    const double ratio = (cross * cross) / (self1 * self2);
    return std::max(0.0, -std::log(ratio));
}

DistanceResult skl_distance(const Histogram& f1, const Histogram& f2) {
    if (!same_grid(f1.range, f2.range)) {
        throw DuffingError(ErrorCode::GridMismatch, "histogram grids differ");
    }
    std::vector<double> a(f1.counts.begin(), f1.counts.end());
    std::vector<double> b(f2.counts.begin(), f2.counts.end());
    DistanceResult r;
    r.value = skl_distance(a, b);
    r.reliable = f1.occupied_bins() >= kMinOccupiedBins && f2.occupied_bins() >= kMinOccupiedBins;
    return r;
}

DistanceResult phase_distance(const PoincareSection& a, const PoincareSection& b,
                              const HistogramRange& range) {
    check_section_size(a);
    check_section_size(b);
    const auto lx = skl_distance(scaled_histogram(a, Coordinate::X, range),
                                 scaled_histogram(b, Coordinate::X, range));
    const auto lp = skl_distance(scaled_histogram(a, Coordinate::P, range),
                                 scaled_histogram(b, Coordinate::P, range));
    DistanceResult d;
    d.reliable = lx.reliable && lp.reliable;
    d.value = (lx.infinite() || lp.infinite()) ? std::numeric_limits<double>::infinity()
                                               : std::hypot(lx.value, lp.value);
    return d;
}

std::map<double, IntraModelMean> mean_intra_model_distance(std::span<const PoincareSection> sections,
                                                           const HistogramRange& range) {
    const std::size_t n = sections.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (sections[i].kind != sections[0].kind || !same_scale(sections[i].beta, sections[0].beta)) {
            throw DuffingError(ErrorCode::InvalidArgument, "sections must share model and beta");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (sections[i].gamma == sections[j].gamma) {
                throw DuffingError(ErrorCode::InvalidArgument, "duplicate gamma in section set");
            }
        }
    }

    std::vector<std::vector<DistanceResult>> d(n, std::vector<DistanceResult>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            d[i][j] = phase_distance(sections[i], sections[j], range);
            d[j][i] = d[i][j];
        }
    }

    std::map<double, IntraModelMean> out;
    for (std::size_t i = 0; i < n; ++i) {
        IntraModelMean m;
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            ++m.total;
            if (!d[i][j].reliable || d[i][j].infinite()) {
                ++m.excluded;
                continue;
            }
            sum += d[i][j].value;
        }
        const int used = m.total - m.excluded;
        m.value = used > 0 ? sum / used : std::numeric_limits<double>::quiet_NaN();
        m.flagged = m.excluded * 5 > m.total;
        out[sections[i].gamma] = m;
    }
    return out;
}

double grand_mean(const std::map<double, IntraModelMean>& means) {
    double sum = 0.0;
    int n = 0;
    for (const auto& [gamma, m] : means) {
        if (std::isfinite(m.value)) {
            sum += m.value;
            ++n;
        }
    }
    return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

CrossModelMean mean_cross_model_distance(std::span<const PoincareSection> m1,
                                         std::span<const PoincareSection> m2,
                                         const HistogramRange& range) {
    if (m1.empty()) throw DuffingError(ErrorCode::MissingRecords, "no sections to compare");
    CrossModelMean out;
    double sum = 0.0;
    for (const auto& a : m1) {
        const PoincareSection* match = nullptr;
        for (const auto& b : m2) {
            if (b.gamma == a.gamma && same_scale(b.beta, a.beta)) match = &b;
        }
        if (!match) {
            throw DuffingError(ErrorCode::MissingRecords,
                               "no counterpart section at gamma=" + format_double(a.gamma));
        }
        const auto d = phase_distance(a, *match, range);
        ++out.total;
        if (d.infinite()) {
            ++out.excluded;
            continue;
        }
        if (!d.reliable) ++out.unreliable;
        sum += d.value;
    }
    const int used = out.total - out.excluded;
    out.value = used > 0 ? sum / used : std::numeric_limits<double>::quiet_NaN();
    return out;
}

double mean_lambda_gap(const std::map<double, double>& lambda1,
                       const std::map<double, double>& lambda2) {
    if (lambda1.empty()) throw DuffingError(ErrorCode::MissingRecords, "no lambda values");
    double sum = 0.0;
    for (const auto& [gamma, l1] : lambda1) {
        const auto it = lambda2.find(gamma);
        if (it == lambda2.end()) {
            throw DuffingError(ErrorCode::MissingRecords,
                               "no counterpart lambda at gamma=" + format_double(gamma));
        }
        sum += std::abs(l1 - it->second);
    }
    return sum / static_cast<double>(lambda1.size());
}

Histogram energy_spectrum(const Trajectory& traj, const HistogramRange& range) {
    if (traj.strobe_indices.empty()) {
        throw DuffingError(ErrorCode::TooFewPoints, "trajectory has no strobe samples");
    }
    std::vector<double> energies;
    energies.reserve(traj.strobe_indices.size());
    for (std::size_t idx : traj.strobe_indices) {
        std::visit([&](const auto& s) { energies.push_back(observable_energy(s, traj.spec)); },
                   traj.states[idx]);
    }
    return histogram_of(energies, Coordinate::Energy, range);
}

DistanceResult spectrum_distance(const Histogram& h1, const Histogram& h2) { return skl_distance(h1, h2); }

void write_section_csv(std::ostream& out, const PoincareSection& section) {
    out << "n,x_scaled,p_scaled\n";
    for (std::size_t i = 0; i < section.points.size(); ++i) {
        out << i << ',' << format_double(section.points[i][0]) << ','
            << format_double(section.points[i][1]) << '\n';
    }
}

void write_histogram_csv(std::ostream& out, const Histogram& hist) {
    out << "bin_left,bin_right,count\n";
    for (int i = 0; i < hist.range.bins; ++i) {
        out << format_double(hist.bin_left(i)) << ',' << format_double(hist.bin_right(i)) << ','
            << hist.counts[i] << '\n';
    }
}

void write_distance_matrix_csv(std::ostream& out, std::span<const double> row_gammas,
                               std::span<const double> col_gammas,
                               const std::vector<std::vector<DistanceResult>>& matrix) {
    out << "gamma";
    for (double g : col_gammas) out << ',' << format_double(g);
    out << '\n';
    for (std::size_t i = 0; i < row_gammas.size(); ++i) {
        out << format_double(row_gammas[i]);
        for (std::size_t j = 0; j < col_gammas.size(); ++j) out << ',' << format_cell(matrix[i][j]);
        out << '\n';
    }
}

}  // namespace duffing
