#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentcomm/descriptions.hpp"
#include "agentcomm/error.hpp"

namespace agentcomm {

namespace vocab {
inline constexpr const char* kFailedBecause = "acl:failedBecause";
inline constexpr const char* kPreconditionUnsatisfied = "acl:preconditionUnsatisfied";
inline constexpr const char* kStepFailed = "acl:stepFailed";
inline constexpr const char* kFailingClause = "acl:failingClause";
inline constexpr const char* kPerformedBy = "acl:performedBy";
inline constexpr const char* kHasCapability = "acl:hasCapability";
} // namespace vocab

/// Predicate under which an action's input or output parameter is stored.
Term input_predicate(const std::string& name);
Term output_predicate(const std::string& name);

struct HostCall {
    const Binding& bindings;
    const KnowledgeStore& data;
    const AgentId& agent;
};

struct HostResult {
    Binding outputs;
    std::optional<std::string> failure;

    static HostResult ok(Binding outputs) { return HostResult{std::move(outputs), std::nullopt}; }
    static HostResult fail(std::string reason) { return HostResult{{}, std::move(reason)}; }
};

/// A simulated service operation; must not mutate anything it can reach.
using HostFunction = std::function<HostResult(const HostCall&)>;

class HostBindings {
public:
    void bind(std::string op, HostFunction fn) { ops_[std::move(op)] = std::move(fn); }
    const HostFunction* find(const std::string& op) const {
        auto it = ops_.find(op);
        return it == ops_.end() ? nullptr : &it->second;
    }
    bool contains(const std::string& op) const { return ops_.contains(op); }
    std::size_t size() const noexcept { return ops_.size(); }

private:
    std::map<std::string, HostFunction> ops_;
};

enum class ExecutionStatus { Succeeded, PreconditionFailed, StepFailed };
std::string_view to_string(ExecutionStatus s) noexcept;

struct ExecutionRecord {
    std::string action;
    AgentId agent;
    Binding inputs;
    Binding outputs;
    bool precondition_held = false;
    /// Input parameters written to the data model before evaluation.
    std::vector<AppliedChange> stored_inputs;
    /// Effects, then output parameters, in application order.
    std::vector<AppliedChange> applied;
    ExecutionStatus status = ExecutionStatus::Succeeded;
    std::optional<Proposition> reason;
    std::string failing_clause;
    std::string message;

    bool succeeded() const noexcept { return status == ExecutionStatus::Succeeded; }
};

struct StepFailure {
    ErrorCode code = ErrorCode::HostOperationFailed;
    std::string message;
};

struct ProcessOutcome {
    Binding bindings;
    std::optional<StepFailure> failure;

    bool ok() const noexcept { return !failure.has_value(); }
};

struct ProcessContext {
    const KnowledgeStore& data;
    const HostBindings& hosts;
    AgentId agent;
};

/// Sequence threads bindings and stops at the first failure. Concurrence
/// runs children in declared order from the same bindings and merges their
/// results (BindingConflict when two children disagree). Alternative runs
/// the first branch whose `when` holds (NoBranchApplicable otherwise).
/// Iteration is do-until, bounded by max_iters (IterationBudgetExceeded).
ProcessOutcome run_process(const ProcessNode& node, const Binding& bindings, const ProcessContext& ctx);

struct ExecuteOptions {
    AgentId agent;
    Trace* trace = nullptr;
};

/// Runs one action against the shared data model. Throws MissingInput,
/// TypeMismatch and UnboundAtomicOp; every other failure is reported in the
/// returned record.
ExecutionRecord execute(const ActionDescription& action, const Binding& inputs, const HostBindings& hosts,
                        KnowledgeStore& data, Tick now, const ExecuteOptions& options = {});

/// Checks a value against a declared data type: a class reached through
/// rdf:type/rdfs:subClassOf, the class itself, or an xsd literal type.
bool conforms(const Term& value, const Term& data_type, const KnowledgeStore& data);

struct ExternalEffects {
    bool satisfiable = false;
    /// True when a prior execution left outputs the effects could be grounded from.
    bool outputs_available = false;
    Binding bindings;
    std::vector<Statement> reified;
};

/// Grounds an action's assert-effects from the data model for a requester
/// that cannot run the action itself. Grounded effects are reified into the
/// requester's actual world. When nothing is recorded yet, the effects still
/// count as satisfiable if every open variable is one the provider supplies
/// (a declared output or `?agent`).
ExternalEffects evaluate_external_effects(const ActionDescription& action, const Binding& inputs,
                                          const KnowledgeStore& data, MentalModel& mm, const AgentId& requester,
                                          Tick now);

} // namespace agentcomm
