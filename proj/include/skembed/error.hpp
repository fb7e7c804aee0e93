#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skembed {

enum class ErrorCode {
    NonStochasticMatrix,
    NotIrreducible,
    UnknownState,
    InvalidMeasure,
    WindowNotMaterialized,
    NonIntegerBallCount,
    InfeasibleTarget,
    TargetChargesStart,
    NotACrossing,
    FrontierMassPresent,
    BudgetExceeded,
    NotYetVisitable,
    ExcessCensoring,
    InvalidAlternative,
    InvalidConfig,
    InvalidFixture,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace skembed
