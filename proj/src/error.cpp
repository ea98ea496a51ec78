#include "erl/error.hpp"

namespace erl {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::CapExceeded: return "CapExceeded";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::InadmissibleWord: return "InadmissibleWord";
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::MonotonicityViolation: return "MonotonicityViolation";
        case ErrorCode::NoFamilyFits: return "NoFamilyFits";
        case ErrorCode::EmptyNeighborhood: return "EmptyNeighborhood";
        case ErrorCode::NotQuantizable: return "NotQuantizable";
        case ErrorCode::UnknownScenario: return "UnknownScenario";
        case ErrorCode::Config: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace erl
