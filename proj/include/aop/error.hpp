#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aop {

enum class ErrorCode {
    InvalidInput,
    FormatError,
    IoError,
    MissingStructure,
    InsufficientPoints,
    DegenerateFit,
    DegenerateAxis,
    PointNotExterior,
    InvalidTriangle,
    AnisotropicSpacing,
    EmptyStructure,
    InvalidSpec,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library is reported as an aop::Error. The stage names
/// the pipeline step that raised it (empty outside the measurement pipeline).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string stage = {})
        : std::runtime_error(message), code_(code), stage_(std::move(stage)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& stage() const noexcept { return stage_; }

    /// Copy of this error tagged with a pipeline stage, unless one is already set.
    Error with_stage(std::string stage) const {
        return Error(code_, what(), stage_.empty() ? std::move(stage) : stage_);
    }

private:
    ErrorCode code_;
    std::string stage_;
};

/// True for the error kinds produced by the geometric measurement pipeline.
bool is_geometric(ErrorCode code);

}  // namespace aop
