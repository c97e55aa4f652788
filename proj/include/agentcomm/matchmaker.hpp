#pragma once

#include <string>
#include <vector>

#include "agentcomm/knowledge_store.hpp"
#include "agentcomm/mentality.hpp"

namespace agentcomm {

struct Advertisement {
    AgentId agent;
    std::string action;
    Term capability;
    std::vector<std::string> outputs;

    nlohmann::json to_json() const;
};

/// Capability directory. Lookups match the requested class exactly or
/// through rdfs:subClassOf in the attached ontology.
class Matchmaker {
public:
    explicit Matchmaker(const KnowledgeStore& ontology) : ontology_(&ontology) {}

    /// Throws UnknownCapabilityClass when the ontology does not know the
    /// class. Re-registering the same agent and action replaces the entry.
    void register_service(Advertisement ad);
    bool unregister(const AgentId& agent, const std::string& action);

    /// Exact-class providers first, then subclass providers; each group in
    /// agent id order, every agent listed once. Providers must offer all of
    /// `required_outputs`.
    std::vector<AgentId> lookup(const Term& capability, const std::vector<std::string>& required_outputs = {}) const;

    const std::vector<Advertisement>& advertisements() const noexcept { return ads_; }

    /// Line protocol used by the socket server. Requests are JSON objects:
    ///   {"op":"register","agent":..,"action":..,"capability":..,"outputs":[..]}
    ///   {"op":"unregister","agent":..,"action":..}
    ///   {"op":"lookup","capability":..,"outputs":[..]}
    /// Replies are {"ok":true,...} or {"ok":false,"error":CODE,"message":..}.
    std::string handle_line(const std::string& line);

private:
    const KnowledgeStore* ontology_;
    std::vector<Advertisement> ads_;
};

} // namespace agentcomm
