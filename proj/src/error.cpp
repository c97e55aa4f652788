#include "agentcomm/error.hpp"

namespace agentcomm {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonGroundStatement: return "NonGroundStatement";
        case ErrorCode::UnitMismatch: return "UnitMismatch";
        case ErrorCode::InvalidComparison: return "InvalidComparison";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::DanglingReference: return "DanglingReference";
        case ErrorCode::DuplicateName: return "DuplicateName";
        case ErrorCode::UnboundVariableInCompare: return "UnboundVariableInCompare";
        case ErrorCode::UnboundVariableInEffect: return "UnboundVariableInEffect";
        case ErrorCode::UnknownAgent: return "UnknownAgent";
        case ErrorCode::UnknownCA: return "UnknownCA";
        case ErrorCode::ContentSchemaMismatch: return "ContentSchemaMismatch";
        case ErrorCode::NoParticipants: return "NoParticipants";
        case ErrorCode::UnknownProtocol: return "UnknownProtocol";
        case ErrorCode::NoProposals: return "NoProposals";
        case ErrorCode::NoProtocolForCA: return "NoProtocolForCA";
        case ErrorCode::MissingInput: return "MissingInput";
        case ErrorCode::TypeMismatch: return "TypeMismatch";
        case ErrorCode::UnboundAtomicOp: return "UnboundAtomicOp";
        case ErrorCode::BindingConflict: return "BindingConflict";
        case ErrorCode::NoBranchApplicable: return "NoBranchApplicable";
        case ErrorCode::IterationBudgetExceeded: return "IterationBudgetExceeded";
        case ErrorCode::HostOperationFailed: return "HostOperationFailed";
        case ErrorCode::UnknownCapabilityClass: return "UnknownCapabilityClass";
        case ErrorCode::UnknownReceiver: return "UnknownReceiver";
        case ErrorCode::Deadlock: return "Deadlock";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::vector<std::string> details)
    : std::runtime_error(std::string(to_string(code)) + ": " + message)
    , code_(code)
    , message_(message)
    , details_(std::move(details)) {}

} // namespace agentcomm
