#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace cangle {

enum class ErrorCode {
    OutOfChart,
    BadParams,
    SingularMetric,
    DegeneratePlane,
    ZeroVector,
    LeftChart,
    StepFailure,
    NotClosed,
    KappaVanishes,
    NonUnitSpeed,
    TauVanishes,
    DomainExhausted,
    DegenerateRuling,
    DegeneratePatch,
    MissingForms,
    LeftPatch,
    ConfigError,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::OutOfChart: return "OutOfChart";
        case ErrorCode::BadParams: return "BadParams";
        case ErrorCode::SingularMetric: return "SingularMetric";
        case ErrorCode::DegeneratePlane: return "DegeneratePlane";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::LeftChart: return "LeftChart";
        case ErrorCode::StepFailure: return "StepFailure";
        case ErrorCode::NotClosed: return "NotClosed";
        case ErrorCode::KappaVanishes: return "KappaVanishes";
        case ErrorCode::NonUnitSpeed: return "NonUnitSpeed";
        case ErrorCode::TauVanishes: return "TauVanishes";
        case ErrorCode::DomainExhausted: return "DomainExhausted";
        case ErrorCode::DegenerateRuling: return "DegenerateRuling";
        case ErrorCode::DegeneratePatch: return "DegeneratePatch";
        case ErrorCode::MissingForms: return "MissingForms";
        case ErrorCode::LeftPatch: return "LeftPatch";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

/// Every failure in the library surfaces as a GeometryError carrying a code.
/// Some codes attach a parameter interval (KappaVanishes, DomainExhausted).
class GeometryError : public std::runtime_error {
public:
    GeometryError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    GeometryError(ErrorCode code, const std::string& what, std::pair<double, double> interval)
        : GeometryError(code, what) {
        interval_ = interval;
    }

    ErrorCode code() const noexcept { return code_; }
    const std::optional<std::pair<double, double>>& interval() const noexcept { return interval_; }

private:
    ErrorCode code_;
    std::optional<std::pair<double, double>> interval_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw GeometryError(code, what);
}

}  // namespace cangle
