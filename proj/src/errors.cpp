#include "certeig/errors.hpp"

namespace certeig {

std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::InvalidOptics: return "InvalidOptics";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::UnsupportedP: return "UnsupportedP";
    case ErrorKind::DimensionCap: return "DimensionCap";
    case ErrorKind::ContourDegenerate: return "ContourDegenerate";
    case ErrorKind::NotContractive: return "NotContractive";
    case ErrorKind::IterationCap: return "IterationCap";
    case ErrorKind::ZeroImage: return "ZeroImage";
    case ErrorKind::Stagnation: return "Stagnation";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DescentStall: return "DescentStall";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::Divergence: return "Divergence";
    case ErrorKind::ShiftTooClose: return "ShiftTooClose";
    case ErrorKind::ImaginaryResidue: return "ImaginaryResidue";
    case ErrorKind::ContourHitsSpectrum: return "ContourHitsSpectrum";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::CertificateFail: return "CertificateFail";
    case ErrorKind::DegenerateGap: return "DegenerateGap";
    }
    return "Unknown";
}

bool is_config_error(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidGrid:
    case ErrorKind::InvalidOptics:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::UnsupportedP:
    case ErrorKind::DimensionCap:
    case ErrorKind::ContourDegenerate:
        return true;
    default:
        return false;
    }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind)
{
}

}  // namespace certeig
