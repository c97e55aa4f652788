#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentcomm/matchmaker.hpp"
#include "agentcomm/protocol_engine.hpp"

namespace agentcomm {

/// A goal or plan step written `name(arg, ...)`; arguments use the term
/// token grammar (`?x`, `ex:Drama`, ...). `name` alone means no arguments.
struct GoalTerm {
    std::string name;
    std::vector<Term> args;

    static GoalTerm parse(std::string_view text);
    GoalTerm substitute(const Binding& binding) const;
    std::string to_string() const;
};

struct PlanRule {
    GoalTerm head;
    Condition guard;
    std::vector<GoalTerm> body;

    static PlanRule from_json(const nlohmann::json& j);
};

struct AgentManifest {
    AgentId id;
    /// Actions this agent can run itself.
    std::vector<std::string> capabilities;
    /// Predicates whose data-model facts join the agent's belief base.
    std::vector<std::string> subscriptions;
    std::vector<GoalTerm> goals;
    std::vector<PlanRule> plans;
    std::map<std::string, Condition> proposal_conditions;

    static AgentManifest from_json(const nlohmann::json& j);
    static AgentManifest load_file(const std::filesystem::path& path);
};

enum class GoalKind { Internal, External, Composed };
std::string_view to_string(GoalKind k) noexcept;

struct GoalOutcome {
    AgentId agent;
    std::string goal;
    bool succeeded = false;
    std::string reason;
    Tick tick = 0;

    nlohmann::json to_json() const;
};

struct RunReport {
    std::size_t ticks = 0;
    std::vector<GoalOutcome> goals;
    std::vector<nlohmann::json> conversations;

    bool all_succeeded() const;
    nlohmann::json to_json() const;
};

struct DelegationResult {
    bool succeeded = false;
    std::string reason;
    Binding outputs;
    std::string conversation;
};

struct RuntimeConfig {
    std::optional<Objective> objective;
    Tick timeout_budget = 10;
    std::size_t max_recursion = 16;
};

/// Hosts the agents, the shared data model and the infrastructure they
/// communicate through, and schedules their goals round robin.
class Runtime {
public:
    Runtime(Registry registry, KnowledgeStore data, HostBindings hosts, RuntimeConfig config = {});
    Runtime(const Runtime&) = delete;
    Runtime& operator=(const Runtime&) = delete;

    /// Registers the agent everywhere and records its capability classes
    /// as `(agent acl:hasCapability class)` in the data model.
    void add_agent(AgentManifest manifest);
    bool has_agent(const AgentId& id) const { return agents_.contains(id); }
    std::vector<AgentId> agent_ids() const { return order_; }
    const AgentManifest& manifest(const AgentId& id) const;
    void post_goal(const AgentId& agent, GoalTerm goal);

    GoalKind classify(const AgentId& agent, const std::string& goal) const;
    /// The agent's actual world plus subscribed data-model facts.
    KnowledgeStore belief_base(const AgentId& agent) const;

    DelegationResult delegate_external(const AgentId& requester, const ActionDescription& action,
                                       const Binding& inputs);

    /// Throws InvalidArgument when `max_ticks` is zero.
    RunReport run_scheduler(std::size_t max_ticks);

    KnowledgeStore& data() noexcept { return data_; }
    MentalModel& mental() noexcept { return mental_; }
    Transport& transport() noexcept { return transport_; }
    Matchmaker& matchmaker() noexcept { return matchmaker_; }
    const Registry& registry() const noexcept { return registry_; }
    Trace& trace() noexcept { return trace_; }
    Tick now() const noexcept { return now_; }

private:
    struct Frame {
        GoalTerm goal;
        const PlanRule* rule = nullptr;
        Binding bindings;
        std::size_t pc = 0;
    };
    struct AgentState {
        AgentManifest manifest;
        std::deque<GoalTerm> goals;
        std::vector<Frame> plan;
        std::optional<GoalTerm> current;
    };
    struct StepResult {
        bool ok = true;
        std::string reason;
        Binding bound;
    };

    bool idle(const AgentState& a) const { return !a.current && a.goals.empty(); }
    void agent_step(AgentState& agent);
    StepResult run_step(AgentState& agent, const GoalTerm& step);
    StepResult run_internal(AgentState& agent, const ActionDescription& action, const GoalTerm& step);
    StepResult run_external(AgentState& agent, const ActionDescription& action, const GoalTerm& step);
    StepResult push_plan(AgentState& agent, const GoalTerm& goal);
    void finish_goal(AgentState& agent, bool ok, const std::string& reason);

    Registry registry_;
    KnowledgeStore data_;
    HostBindings hosts_;
    RuntimeConfig config_;
    Trace trace_;
    MentalModel mental_;
    Transport transport_;
    Matchmaker matchmaker_;
    ProposalConditions proposals_;
    std::map<AgentId, AgentState> agents_;
    std::vector<AgentId> order_;
    std::vector<GoalOutcome> outcomes_;
    std::vector<nlohmann::json> conversations_;
    std::size_t conversation_count_ = 0;
    Tick now_ = 0;
};

} // namespace agentcomm
