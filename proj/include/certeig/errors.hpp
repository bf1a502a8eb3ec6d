#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace certeig {

enum class ErrorKind {
    // configuration / input errors (exit code 2)
    ParseError,
    InvalidGrid,
    InvalidOptics,
    ShapeMismatch,
    UnsupportedP,
    DimensionCap,
    ContourDegenerate,
    // numerical failures (exit code 1)
    NotContractive,
    IterationCap,
    ZeroImage,
    Stagnation,
    InsufficientData,
    DescentStall,
    SingularSystem,
    Divergence,
    ShiftTooClose,
    ImaginaryResidue,
    ContourHitsSpectrum,
    NoConvergence,
    CertificateFail,
    DegenerateGap,
};

std::string_view to_string(ErrorKind kind);

// True for errors caused by the caller's input rather than by the numerics.
bool is_config_error(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace certeig
