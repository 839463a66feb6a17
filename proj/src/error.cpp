#include "aop/error.hpp"

namespace aop {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::FormatError: return "FormatError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::MissingStructure: return "MissingStructure";
        case ErrorCode::InsufficientPoints: return "InsufficientPoints";
        case ErrorCode::DegenerateFit: return "DegenerateFit";
        case ErrorCode::DegenerateAxis: return "DegenerateAxis";
        case ErrorCode::PointNotExterior: return "PointNotExterior";
        case ErrorCode::InvalidTriangle: return "InvalidTriangle";
        case ErrorCode::AnisotropicSpacing: return "AnisotropicSpacing";
        case ErrorCode::EmptyStructure: return "EmptyStructure";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
    }
    return "Unknown";
}

bool is_geometric(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingStructure:
        case ErrorCode::InsufficientPoints:
        case ErrorCode::DegenerateFit:
        case ErrorCode::DegenerateAxis:
        case ErrorCode::PointNotExterior:
        case ErrorCode::InvalidTriangle:
        case ErrorCode::AnisotropicSpacing:
            return true;
        default:
            return false;
    }
}

}  // namespace aop
