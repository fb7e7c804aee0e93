#include "skembed/error.hpp"

namespace skembed {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::NonStochasticMatrix: return "NonStochasticMatrix";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::InvalidMeasure: return "InvalidMeasure";
    case ErrorCode::WindowNotMaterialized: return "WindowNotMaterialized";
    case ErrorCode::NonIntegerBallCount: return "NonIntegerBallCount";
    case ErrorCode::InfeasibleTarget: return "InfeasibleTarget";
    case ErrorCode::TargetChargesStart: return "TargetChargesStart";
    case ErrorCode::NotACrossing: return "NotACrossing";
    case ErrorCode::FrontierMassPresent: return "FrontierMassPresent";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NotYetVisitable: return "NotYetVisitable";
    case ErrorCode::ExcessCensoring: return "ExcessCensoring";
    case ErrorCode::InvalidAlternative: return "InvalidAlternative";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidFixture: return "InvalidFixture";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace skembed
