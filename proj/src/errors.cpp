#include "qcm/errors.hpp"

namespace qcm {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonHermitian: return "NonHermitian";
        case ErrorCode::NotPSD: return "NotPSD";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::ZeroTrace: return "ZeroTrace";
        case ErrorCode::BadShape: return "BadShape";
        case ErrorCode::NonHermitianH: return "NonHermitianH";
        case ErrorCode::ZeroAmplitude: return "ZeroAmplitude";
        case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
        case ErrorCode::NonPositiveB: return "NonPositiveB";
        case ErrorCode::DuplicateChannel: return "DuplicateChannel";
        case ErrorCode::UnknownAmplitude: return "UnknownAmplitude";
        case ErrorCode::DeadChannel: return "DeadChannel";
        case ErrorCode::RateTooHigh: return "RateTooHigh";
        case ErrorCode::StateCollapse: return "StateCollapse";
        case ErrorCode::SupportViolation: return "SupportViolation";
        case ErrorCode::WrongMode: return "WrongMode";
        case ErrorCode::QuadratureFailure: return "QuadratureFailure";
        case ErrorCode::EmptySample: return "EmptySample";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::BadConfig: return "BadConfig";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

}  // namespace qcm
