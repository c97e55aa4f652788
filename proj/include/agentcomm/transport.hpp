#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "agentcomm/mentality.hpp"
#include "agentcomm/trace.hpp"

namespace agentcomm {

struct Envelope {
    std::string performative;
    AgentId sender;
    AgentId receiver;
    nlohmann::json content = nlohmann::json::object();
    std::string conversation;
    std::string reply_with;
    std::string in_reply_to;
    Tick tick = 0;

    nlohmann::json to_json() const;
    static Envelope from_json(const nlohmann::json& j);
};

/// In-process message passing between registered agents. Each inbox is
/// FIFO; a drop predicate can discard envelopes to simulate lost messages.
class Transport {
public:
    using DropPredicate = std::function<bool(const Envelope&)>;

    void register_agent(const AgentId& id);
    bool has_agent(const AgentId& id) const { return inboxes_.contains(id); }

    /// Returns false when the drop predicate discarded the envelope.
    /// Throws UnknownReceiver.
    bool send(const Envelope& env);
    std::optional<Envelope> receive(const AgentId& id);
    std::size_t pending(const AgentId& id) const;

    void set_drop(DropPredicate drop) { drop_ = std::move(drop); }
    void set_trace(Trace* trace) noexcept { trace_ = trace; }

    std::size_t sent() const noexcept { return sent_; }
    std::size_t dropped() const noexcept { return dropped_; }

    /// Fresh message id within a conversation: `<conv>.m<n>`.
    std::string next_message_id(const std::string& conversation);

private:
    std::map<AgentId, std::deque<Envelope>> inboxes_;
    std::map<std::string, std::size_t> counters_;
    DropPredicate drop_;
    Trace* trace_ = nullptr;
    std::size_t sent_ = 0;
    std::size_t dropped_ = 0;
};

} // namespace agentcomm
