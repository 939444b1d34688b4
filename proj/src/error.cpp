#include "latsep/error.hpp"

namespace latsep {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DegenerateBasis: return "DegenerateBasis";
        case ErrorCode::OutOfRegion: return "OutOfRegion";
        case ErrorCode::BadAction: return "BadAction";
        case ErrorCode::BadDimensions: return "BadDimensions";
        case ErrorCode::ZeroScale: return "ZeroScale";
        case ErrorCode::NotUpperHalfPlane: return "NotUpperHalfPlane";
        case ErrorCode::EmptySpectrum: return "EmptySpectrum";
        case ErrorCode::FlatNeighborhood: return "FlatNeighborhood";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::CollinearPeaks: return "CollinearPeaks";
        case ErrorCode::NoValidCandidate: return "NoValidCandidate";
        case ErrorCode::ConstantImage: return "ConstantImage";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::TooManyLayers: return "TooManyLayers";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace latsep
