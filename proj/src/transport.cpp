#include "agentcomm/transport.hpp"

#include "agentcomm/error.hpp"

namespace agentcomm {

nlohmann::json Envelope::to_json() const {
    nlohmann::json j{{"performative", performative}, {"sender", sender},   {"receiver", receiver},
                     {"content", content},           {"conv", conversation}, {"reply-with", reply_with},
                     {"tick", tick}};
    if (!in_reply_to.empty()) {
        j["in-reply-to"] = in_reply_to;
    }
    return j;
}

Envelope Envelope::from_json(const nlohmann::json& j) {
    try {
        Envelope e;
        e.performative = j.at("performative").get<std::string>();
        e.sender = j.at("sender").get<std::string>();
        e.receiver = j.at("receiver").get<std::string>();
        e.content = j.value("content", nlohmann::json::object());
        e.conversation = j.value("conv", "");
        e.reply_with = j.value("reply-with", "");
        e.in_reply_to = j.value("in-reply-to", "");
        e.tick = j.value("tick", Tick{0});
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::ParseError, std::string("bad envelope: ") + ex.what());
    }
}

void Transport::register_agent(const AgentId& id) {
    inboxes_.try_emplace(id);
}

bool Transport::send(const Envelope& env) {
    auto it = inboxes_.find(env.receiver);
    if (it == inboxes_.end()) {
        throw Error(ErrorCode::UnknownReceiver, "no agent '" + env.receiver + "' to deliver " + env.performative + " to");
    }
    ++sent_;
    const bool drop = drop_ && drop_(env);
    nlohmann::json line = env.to_json();
    line["event"] = "msg";
    if (drop) {
        line["dropped"] = true;
    }
    emit(trace_, std::move(line));
    if (drop) {
        ++dropped_;
        return false;
    }
    it->second.push_back(env);
    return true;
}

std::optional<Envelope> Transport::receive(const AgentId& id) {
    auto it = inboxes_.find(id);
    if (it == inboxes_.end() || it->second.empty()) {
        return std::nullopt;
    }
    Envelope e = std::move(it->second.front());
    it->second.pop_front();
    return e;
}

std::size_t Transport::pending(const AgentId& id) const {
    auto it = inboxes_.find(id);
    return it == inboxes_.end() ? 0 : it->second.size();
}

std::string Transport::next_message_id(const std::string& conversation) {
    return conversation + ".m" + std::to_string(++counters_[conversation]);
}

} // namespace agentcomm
