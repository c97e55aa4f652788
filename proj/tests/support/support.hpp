#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "agentcomm/knowledge_store.hpp"
#include "agentcomm/mentality.hpp"
#include "agentcomm/protocol_engine.hpp"
#include "agentcomm/scenario.hpp"

namespace testsupport {

using namespace agentcomm;

inline std::filesystem::path data_dir() {
    return std::filesystem::path(AGENTCOMM_DATA_DIR);
}

inline std::filesystem::path golden_dir() {
    return std::filesystem::path(AGENTCOMM_GOLDEN_DIR);
}

inline std::filesystem::path scenario_path(const std::string& name) {
    return data_dir() / "scenarios" / (name + ".json");
}

inline Registry shipped_registry() {
    return link(load_bundle(data_dir() / "descriptions"));
}

inline KnowledgeStore movie_ontology() {
    KnowledgeStore ks;
    ks.load_file(data_dir() / "ontology" / "movies.json");
    return ks;
}

/// Deterministic generator for hand-rolled property tests.
class Gen {
public:
    explicit Gen(std::uint32_t seed) : rng_(seed) {}

    int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(range(0, static_cast<int>(v.size()) - 1))];
    }

    Term ground_term() {
        switch (range(0, 3)) {
            case 0: return Term::symbol("ex:n" + std::to_string(range(0, 5)));
            case 1: return Term::number(range(0, 3), chance(0.5) ? "Mbps" : "");
            case 2: return Term::string("lit" + std::to_string(range(0, 2)));
            default: return Term::symbol(std::string(1, static_cast<char>('A' + range(0, 3))));
        }
    }
    Term subject() { return Term::symbol("ex:n" + std::to_string(range(0, 5))); }
    Term predicate() { return Term::symbol("ex:p" + std::to_string(range(0, 3))); }
    Statement statement() { return Statement{subject(), predicate(), ground_term()}; }

    Pattern pattern() {
        static const std::vector<std::string> vars{"a", "b", "c"};
        auto maybe_var = [&](Term t) { return chance(0.5) ? Term::variable(pick(vars)) : t; };
        return Pattern{maybe_var(subject()), maybe_var(predicate()), maybe_var(ground_term())};
    }

    std::mt19937& engine() { return rng_; }

private:
    std::mt19937 rng_;
};

/// Brute force conjunctive join: every tuple of stored statements, one per
/// pattern, in insertion order, kept when the patterns unify consistently.
inline std::vector<Binding> join_oracle(const std::vector<Statement>& stmts, const std::vector<Pattern>& patterns,
                                        const Binding& seed = {}) {
    std::vector<Binding> out;
    if (patterns.empty()) {
        out.push_back(seed);
        return out;
    }
    std::vector<std::size_t> idx(patterns.size(), 0);
    if (stmts.empty()) {
        return out;
    }
    while (true) {
        Binding b = seed;
        bool ok = true;
        for (std::size_t i = 0; i < patterns.size() && ok; ++i) {
            const Pattern& p = patterns[i];
            const Statement& s = stmts[idx[i]];
            const Term* pos[3] = {&p.subject, &p.predicate, &p.object};
            const Term* val[3] = {&s.subject, &s.predicate, &s.object};
            for (int k = 0; k < 3 && ok; ++k) {
                if (pos[k]->is_variable()) {
                    auto it = b.find(pos[k]->text());
                    if (it == b.end()) {
                        b.emplace(pos[k]->text(), *val[k]);
                    } else {
                        ok = it->second == *val[k];
                    }
                } else {
                    ok = *pos[k] == *val[k];
                }
            }
        }
        if (ok) {
            out.push_back(std::move(b));
        }
        std::size_t k = patterns.size();
        while (k > 0) {
            --k;
            if (++idx[k] < stmts.size()) {
                break;
            }
            idx[k] = 0;
            if (k == 0) {
                return out;
            }
        }
    }
}

/// Reflexive-transitive closure of a directed graph by repeated boolean
/// matrix squaring.
inline std::vector<std::vector<bool>> closure_oracle(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<bool>> r(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) {
        r[i][i] = true;
    }
    for (auto [a, b] : edges) {
        r[a][b] = true;
    }
    for (int round = 1; round < n; round *= 2) {
        auto next = r;
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n; ++k) {
                if (!r[i][k]) continue;
                for (int j = 0; j < n; ++j) {
                    if (r[k][j]) next[i][j] = true;
                }
            }
        }
        r = std::move(next);
    }
    return r;
}

/// Replays allocations against a plain map: for each (believer,
/// proposition) the entry with the greatest valid time wins, later calls
/// winning ties.
struct AllocationOracle {
    std::map<std::pair<AgentId, Proposition>, std::pair<Tick, bool>> latest;

    void apply(const EmbeddedProposition& p) {
        auto key = std::make_pair(p.believer, p.base.base);
        auto it = latest.find(key);
        if (it == latest.end() || p.base.valid_time >= it->second.first) {
            latest[key] = {p.base.valid_time, p.belief};
        }
    }
};

/// A standalone conversation setup: shipped descriptions, the movie
/// ontology, simulated hosts and one initiator plus some participants.
struct ConversationRig {
    Registry registry;
    KnowledgeStore data = movie_ontology();
    MentalModel mental;
    HostBindings hosts;
    Transport transport;
    Trace trace;
    ProposalConditions proposals;
    Tick now = 0;

    explicit ConversationRig(const std::vector<AgentId>& agents, Registry reg = shipped_registry())
        : registry(std::move(reg)) {
        for (const auto& a : agents) {
            mental.register_agent(a);
            transport.register_agent(a);
        }
        mental.set_trace(&trace);
        transport.set_trace(&trace);
        hosts.bind("op:videoAbstract", [](const HostCall& call) {
            return HostResult::ok({{"clip", Term::symbol("ex:clip-" + call.bindings.at("movie").text().substr(3))}});
        });
        hosts.bind("op:videoBroadcast", [](const HostCall& call) {
            return HostResult::ok({{"stream", Term::symbol("ex:stream-" + call.bindings.at("movie").text().substr(3) +
                                                           "-" + call.agent)}});
        });
    }

    void capable(const AgentId& agent, const std::string& capability) {
        data.assert_stmt({Term::symbol(agent), Term::symbol("acl:hasCapability"), Term::symbol(capability)});
    }

    /// Offers the broadcast action when the agent's bandwidth exceeds `min_mbps`.
    void bandwidth(const AgentId& agent, double mbps, double min_mbps) {
        data.assert_stmt({Term::symbol(agent), Term::symbol("ex:bandwidth"), Term::number(mbps, "Mbps")});
        proposals[agent]["ex:videoBroadcast"] = condition_from_json(nlohmann::json::array({
            {{"pattern", {"?self", "ex:bandwidth", "?bw"}}, {"scope", "data"}},
            {{"compare", {"?bw", ">", {{"value", min_mbps}, {"unit", "Mbps"}}}}},
        }));
    }

    ProtocolEnv env() { return ProtocolEnv{data, mental, registry, hosts, transport, &trace, &proposals}; }

    ConversationSpec spec(const std::string& protocol, const AgentId& initiator, std::vector<AgentId> participants,
                          const std::string& action) {
        ConversationSpec s;
        s.id = "c1";
        s.protocol = protocol;
        s.initiator = initiator;
        s.participants = std::move(participants);
        s.action = Term::symbol(action);
        s.inputs = {{"movie", Term::symbol("ex:casablanca")}};
        s.objective = Objective{Objective::Direction::Maximize, "bw"};
        return s;
    }
};

/// Safety properties of a finished conversation. Returns a description of
/// the first violation, or an empty string.
inline std::string conversation_safety_problem(const Conversation& conv, const Trace& trace) {
    const auto& proto = conv.protocol();
    if (conv.status() == ConversationStatus::Running) {
        return "conversation still running";
    }
    const std::size_t bound = proto.states.size() * conv.lanes().size();
    if (conv.steps() > bound) {
        return "took " + std::to_string(conv.steps()) + " steps, bound " + std::to_string(bound);
    }
    for (const auto& lane : conv.lanes()) {
        if (!proto.is_accept(lane.state)) {
            return "lane " + lane.participant + " ended in non-accept state " + lane.state;
        }
        std::string state = proto.start_state().id;
        for (const auto& act : lane.acts) {
            const Transition* next = nullptr;
            for (const auto* t : proto.outgoing(state)) {
                if (t->execute == act) next = t;
            }
            if (next == nullptr) {
                return "lane " + lane.participant + " performed " + act + " from " + state;
            }
            state = next->to;
        }
        if (state != lane.state) {
            return "lane " + lane.participant + " replays to " + state + " not " + lane.state;
        }
    }
    bool ended = false;
    for (const auto& line : trace.lines()) {
        const auto& ev = line["event"];
        if (ev == "conversation") {
            ended = true;
        } else if (ended && (ev == "msg" || ev == "transition" || ev == "ca")) {
            return "activity after the conversation ended: " + line.dump();
        } else if (ev == "transition") {
            bool edge = false;
            for (const auto* t : proto.outgoing(line["from"].get<std::string>())) {
                edge |= t->to == line["to"] && t->execute == line["act"];
            }
            if (!edge) {
                return "transition not in the protocol: " + line.dump();
            }
        }
    }
    if (!ended) {
        return "no conversation line traced";
    }
    return {};
}

} // namespace testsupport
