#include "agentcomm/matchmaker.hpp"

#include <algorithm>
#include <set>

#include "agentcomm/error.hpp"

namespace agentcomm {

nlohmann::json Advertisement::to_json() const {
    return {{"agent", agent}, {"action", action}, {"capability", term_to_json(capability)}, {"outputs", outputs}};
}

void Matchmaker::register_service(Advertisement ad) {
    if (!ontology_->is_known_class(ad.capability)) {
        throw Error(ErrorCode::UnknownCapabilityClass, ad.capability.to_string() + " is not a known class");
    }
    auto same = [&](const Advertisement& a) { return a.agent == ad.agent && a.action == ad.action; };
    auto it = std::find_if(ads_.begin(), ads_.end(), same);
    if (it != ads_.end()) {
        *it = std::move(ad);
    } else {
        ads_.push_back(std::move(ad));
    }
}

bool Matchmaker::unregister(const AgentId& agent, const std::string& action) {
    auto before = ads_.size();
    std::erase_if(ads_, [&](const Advertisement& a) { return a.agent == agent && a.action == action; });
    return ads_.size() != before;
}

std::vector<AgentId> Matchmaker::lookup(const Term& capability, const std::vector<std::string>& required_outputs) const {
    std::set<AgentId> exact;
    std::set<AgentId> sub;
    for (const auto& ad : ads_) {
        bool has_outputs = std::all_of(required_outputs.begin(), required_outputs.end(), [&](const std::string& o) {
            return std::find(ad.outputs.begin(), ad.outputs.end(), o) != ad.outputs.end();
        });
        if (!has_outputs) {
            continue;
        }
        if (ad.capability == capability) {
            exact.insert(ad.agent);
        } else if (ontology_->is_subclass(ad.capability, capability)) {
            sub.insert(ad.agent);
        }
    }
    std::vector<AgentId> out(exact.begin(), exact.end());
    for (const auto& a : sub) {
        if (!exact.contains(a)) {
            out.push_back(a);
        }
    }
    return out;
}

std::string Matchmaker::handle_line(const std::string& line) {
    nlohmann::json reply;
    try {
        nlohmann::json req;
        try {
            req = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ParseError, e.what());
        }
        if (!req.is_object() || !req.contains("op")) {
            throw Error(ErrorCode::ParseError, "request needs an \"op\"");
        }
        auto str = [&](const char* key) {
            if (!req.contains(key) || !req[key].is_string()) {
                throw Error(ErrorCode::ParseError, std::string("request needs a string \"") + key + "\"");
            }
            return req[key].get<std::string>();
        };
        auto outputs = [&] {
            std::vector<std::string> out;
            if (req.contains("outputs")) {
                for (const auto& o : req["outputs"]) {
                    out.push_back(o.get<std::string>());
                }
            }
            return out;
        };
        const std::string op = str("op");
        if (op == "register") {
            register_service(Advertisement{str("agent"), str("action"), term_from_json(req["capability"]), outputs()});
            reply = {{"ok", true}};
        } else if (op == "unregister") {
            reply = {{"ok", true}, {"removed", unregister(str("agent"), str("action"))}};
        } else if (op == "lookup") {
            reply = {{"ok", true}, {"agents", lookup(term_from_json(req.at("capability")), outputs())}};
        } else {
            throw Error(ErrorCode::InvalidArgument, "unknown op '" + op + "'");
        }
    } catch (const Error& e) {
        reply = {{"ok", false}, {"error", std::string(to_string(e.code()))}, {"message", e.message()}};
    } catch (const nlohmann::json::exception& e) {
        reply = {{"ok", false}, {"error", "ParseError"}, {"message", e.what()}};
    }
    return reply.dump();
}

} // namespace agentcomm
