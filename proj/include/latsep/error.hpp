#pragma once

#include <stdexcept>
#include <string>

namespace latsep {

enum class ErrorCode {
    DegenerateBasis,
    OutOfRegion,
    BadAction,
    BadDimensions,
    ZeroScale,
    NotUpperHalfPlane,
    EmptySpectrum,
    FlatNeighborhood,
    OutOfRange,
    CollinearPeaks,
    NoValidCandidate,
    ConstantImage,
    IoError,
    UnsupportedFormat,
    TooManyLayers,
    InvalidArgument,
};

const char* to_string(ErrorCode code);

/// Base exception for every failure reported by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

#define LATSEP_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(ErrorCode::Name, what) {} \
    };

LATSEP_DEFINE_ERROR(DegenerateBasis)
LATSEP_DEFINE_ERROR(OutOfRegion)
LATSEP_DEFINE_ERROR(BadAction)
LATSEP_DEFINE_ERROR(BadDimensions)
LATSEP_DEFINE_ERROR(ZeroScale)
LATSEP_DEFINE_ERROR(NotUpperHalfPlane)
LATSEP_DEFINE_ERROR(EmptySpectrum)
LATSEP_DEFINE_ERROR(FlatNeighborhood)
LATSEP_DEFINE_ERROR(OutOfRange)
LATSEP_DEFINE_ERROR(CollinearPeaks)
LATSEP_DEFINE_ERROR(NoValidCandidate)
LATSEP_DEFINE_ERROR(ConstantImage)
LATSEP_DEFINE_ERROR(IoError)
LATSEP_DEFINE_ERROR(UnsupportedFormat)
LATSEP_DEFINE_ERROR(TooManyLayers)
LATSEP_DEFINE_ERROR(InvalidArgument)

#undef LATSEP_DEFINE_ERROR

}  // namespace latsep
