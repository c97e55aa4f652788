#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agentcomm {

enum class ErrorCode {
    NonGroundStatement,
    UnitMismatch,
    InvalidComparison,
    ParseError,
    SchemaError,
    DanglingReference,
    DuplicateName,
    UnboundVariableInCompare,
    UnboundVariableInEffect,
    UnknownAgent,
    UnknownCA,
    ContentSchemaMismatch,
    NoParticipants,
    UnknownProtocol,
    NoProposals,
    NoProtocolForCA,
    MissingInput,
    TypeMismatch,
    UnboundAtomicOp,
    BindingConflict,
    NoBranchApplicable,
    IterationBudgetExceeded,
    HostOperationFailed,
    UnknownCapabilityClass,
    UnknownReceiver,
    Deadlock,
    ConfigError,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure the library reports as an exception carries one of the
/// codes above. `details` holds extra lines, e.g. every issue found by link().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::vector<std::string> details = {});

    ErrorCode code() const noexcept { return code_; }
    /// The message without the code prefix.
    const std::string& message() const noexcept { return message_; }
    const std::vector<std::string>& details() const noexcept { return details_; }

private:
    ErrorCode code_;
    std::string message_;
    std::vector<std::string> details_;
};

} // namespace agentcomm
