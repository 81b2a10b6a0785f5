#include "qarcast/error.hpp"

namespace qarcast {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::SeriesTooShort: return "SeriesTooShort";
        case ErrorKind::NonFinite: return "NonFinite";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::RankDeficient: return "RankDeficient";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::InsufficientDoF: return "InsufficientDoF";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::NonMonotoneLabels: return "NonMonotoneLabels";
        case ErrorKind::EmptyFile: return "EmptyFile";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace qarcast
