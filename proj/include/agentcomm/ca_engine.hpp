#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agentcomm/action_engine.hpp"

namespace agentcomm {

namespace vocab {
inline constexpr const char* kFpUnsatisfied = "acl:fpUnsatisfied";
inline constexpr const char* kConditionUnsatisfied = "acl:conditionUnsatisfied";
inline constexpr const char* kTimeout = "acl:timeout";
inline constexpr const char* kInvalidInput = "acl:invalidInput";
inline constexpr const char* kRejectedBecause = "acl:rejectedBecause";
inline constexpr const char* kBetterProposal = "acl:betterProposal";
} // namespace vocab

/// Message content; which fields are present must match the act's class.
struct CAContent {
    std::optional<Term> action;
    std::optional<Proposition> proposition;
    std::optional<Condition> condition;
    std::optional<Proposition> reason;

    ContentSchema schema() const noexcept {
        return ContentSchema{action.has_value(), proposition.has_value(), condition.has_value(), reason.has_value()};
    }
};

nlohmann::json content_to_json(const CAContent& content);
CAContent content_from_json(const nlohmann::json& j);

enum class CAStatus { Performed, FpFailed, ActionFailed };
std::string_view to_string(CAStatus s) noexcept;

struct CAInvocation {
    AgentId sender;
    AgentId receiver;
    CAContent content;
    /// Extra conversation roles (initiator, participant); sender, receiver
    /// and self are filled in from the fields above.
    RoleMap roles;
    /// Inputs for the content action when the act carries it out.
    Binding action_inputs;
    /// Conversation id, echoed in the trace when set.
    std::string conversation;
};

struct CAWorld {
    KnowledgeStore& data;
    MentalModel& mental;
    const Registry& registry;
    const HostBindings& hosts;
    Trace* trace = nullptr;
};

struct CAOutcome {
    CAStatus status = CAStatus::Performed;
    /// First solution of the content condition (plus the seed bindings).
    Binding bindings;
    std::vector<AppliedChange> changes;
    std::optional<ExecutionRecord> execution;
    std::optional<Proposition> reason;
    std::string message;

    bool performed() const noexcept { return status == CAStatus::Performed; }
};

/// Role map and seed bindings an act is evaluated with.
RoleMap ca_roles(const CAInvocation& inv);
Binding ca_seed(const CAInvocation& inv, const Registry& registry);

/// Dry run: validates the content and evaluates the feasibility
/// precondition (and, for commissive acts, the content condition) without
/// touching any model.
bool check_feasibility(const CommunicativeActDescription& ca, const CAInvocation& inv, const CAWorld& world);

/// Performs one act. An unsatisfied feasibility precondition yields
/// FpFailed and changes nothing. Otherwise the rational effect is applied
/// and, when the act carries out its content action, the action engine
/// runs it for the executing role. Throws ContentSchemaMismatch.
CAOutcome perform_ca(const CommunicativeActDescription& ca, const CAInvocation& inv, CAWorld& world, Tick now);
/// Same, looking the act up by name (UnknownCA).
CAOutcome perform_ca(std::string_view ca_name, const CAInvocation& inv, CAWorld& world, Tick now);

/// `(action acl:performedBy agent)`, the marker reified once an action ran.
Proposition done_marker(const Term& action, const AgentId& agent);

} // namespace agentcomm
