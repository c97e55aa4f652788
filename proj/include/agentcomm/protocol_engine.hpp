#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentcomm/ca_engine.hpp"
#include "agentcomm/transport.hpp"

namespace agentcomm {

struct Objective {
    enum class Direction { Maximize, Minimize };
    Direction direction = Direction::Maximize;
    std::string variable;

    static Objective from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct Proposal {
    AgentId agent;
    Binding bindings;
};

/// Picks the proposal with the best objective value; ties go to the
/// lexicographically smallest agent id. Proposals that do not bind the
/// objective variable are ignored. Throws NoProposals when none is left.
AgentId evaluate_proposals(const std::vector<Proposal>& proposals, const Objective& objective);

/// Per-agent content conditions offered when proposing an action.
using ProposalConditions = std::map<AgentId, std::map<std::string, Condition>>;

struct ProtocolEnv {
    KnowledgeStore& data;
    MentalModel& mental;
    const Registry& registry;
    const HostBindings& hosts;
    Transport& transport;
    Trace* trace = nullptr;
    const ProposalConditions* proposals = nullptr;
};

struct ConversationSpec {
    std::string id;
    std::string protocol;
    AgentId initiator;
    std::vector<AgentId> participants;
    Term action;
    Binding inputs;
    std::optional<Objective> objective;
    /// Ticks a lane waits for a lost reply before its timeout transition fires.
    Tick timeout_budget = 10;
};

enum class ConversationStatus { Running, Succeeded, Failed };
std::string_view to_string(ConversationStatus s) noexcept;

/// One initiator/participant thread of a conversation.
struct Lane {
    AgentId participant;
    std::string state;
    /// Outcome of the lane's last act; a failure selects `failed` transitions.
    CAStatus last = CAStatus::Performed;
    std::optional<Proposition> reason;
    Binding proposal;
    std::optional<Condition> proposal_condition;
    std::optional<AgentId> executor;
    bool waiting = false;
    Tick waiting_since = 0;
    std::optional<bool> won;
    std::string last_message;
    std::vector<std::string> acts;
};

/// Drives a protocol instance. Each step moves every lane at most one
/// transition. Lanes in a state with winner/loser transitions wait until no
/// lane can move any more, then proposals are evaluated once.
class Conversation {
public:
    /// Throws NoParticipants and UnknownProtocol.
    Conversation(ConversationSpec spec, ProtocolEnv env);

    ConversationStatus step(Tick now);
    /// Steps until the conversation ends or `max_steps` is spent; `now` is
    /// advanced by one per step.
    ConversationStatus run(Tick& now, std::size_t max_steps = 1000);

    ConversationStatus status() const noexcept { return status_; }
    const ConversationSpec& spec() const noexcept { return spec_; }
    const ProtocolDescription& protocol() const noexcept { return *protocol_; }
    const std::vector<Lane>& lanes() const noexcept { return lanes_; }
    const std::optional<AgentId>& winner() const noexcept { return winner_; }
    const std::string& diagnostic() const noexcept { return diagnostic_; }
    std::size_t steps() const noexcept { return steps_; }

    nlohmann::json to_json() const;

private:
    RoleMap roles_for(const Lane& lane) const;
    bool hop(Lane& lane, Tick now);
    void fire(Lane& lane, const Transition& t, Tick now, bool force);
    std::optional<CAInvocation> build_invocation(const Lane& lane, const Transition& t) const;
    bool feasible(const Lane& lane, const Transition& t) const;
    void evaluate_barrier(Tick now);
    bool at_barrier(const Lane& lane) const;
    void fail(std::string diagnostic, Tick now);
    void finish(Tick now);

    ConversationSpec spec_;
    ProtocolEnv env_;
    const ProtocolDescription* protocol_ = nullptr;
    std::vector<Lane> lanes_;
    ConversationStatus status_ = ConversationStatus::Running;
    std::optional<AgentId> winner_;
    bool evaluated_ = false;
    std::string diagnostic_;
    std::size_t steps_ = 0;
};

/// Acts that open a protocol: sent by the initiator from the start state.
std::vector<std::string> opener_cas(const Registry& registry);

/// Chooses the opening act for delegating `action` to `provider_count`
/// providers. A single provider is asked directly, several are called for
/// proposals. The act's rational effect must be expressible with the role,
/// action and capability bindings plus `effect_bindings`.
/// Throws NoParticipants (zero providers) and NoProtocolForCA.
std::string select_ca(const Term& action, std::size_t provider_count, const Binding& effect_bindings,
                      const Registry& registry);

/// The protocol whose opening act is `ca`; NoProtocolForCA otherwise.
const ProtocolDescription& select_protocol(std::string_view ca, const Registry& registry);

} // namespace agentcomm
