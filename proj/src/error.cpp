#include "duffing/error.hpp"

namespace duffing {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::NumericOverflow: return "numeric_overflow";
        case ErrorCode::SpreadCollapse: return "spread_collapse";
        case ErrorCode::OffManifold: return "off_manifold";
        case ErrorCode::DegeneratePair: return "degenerate_pair";
        case ErrorCode::TooFewPoints: return "too_few_points";
        case ErrorCode::GridMismatch: return "grid_mismatch";
        case ErrorCode::EmptyHistogram: return "empty_histogram";
        case ErrorCode::MissingRecords: return "missing_records";
        case ErrorCode::MalformedConfig: return "malformed_config";
        case ErrorCode::Io: return "io";
        case ErrorCode::CorruptFile: return "corrupt_file";
        case ErrorCode::HashMismatch: return "hash_mismatch";
    }
    return "unknown";
}

}  // namespace duffing
