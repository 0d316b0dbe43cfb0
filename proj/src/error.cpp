#include "bhfl/error.hpp"

namespace bhfl {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::TooFewVectors: return "TooFewVectors";
        case ErrorKind::IndivisibleSplit: return "IndivisibleSplit";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::MissingColumn: return "MissingColumn";
        case ErrorKind::NonFiniteState: return "NonFiniteState";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace bhfl
