#include "agentcomm/mentality.hpp"

#include "agentcomm/error.hpp"

namespace agentcomm {

Proposition to_proposition(const Statement& s) {
    return Proposition{s.subject, s.predicate, s.object};
}

Statement to_statement(const Proposition& p) {
    return Statement{p.subject, p.predicate, p.object};
}

std::string_view to_string(World world) noexcept {
    return world == World::Actual ? "actual" : "imaginary";
}

EmbeddedProposition reify(const Statement& stmt, const AgentId& believer, bool belief, Tick now) {
    if (!stmt.is_ground()) {
        throw Error(ErrorCode::NonGroundStatement, "cannot reify " + stmt.to_string());
    }
    return EmbeddedProposition{ExtendedProposition{to_proposition(stmt), now}, believer, belief};
}

Statement deify(const EmbeddedProposition& p) {
    return to_statement(p.base.base);
}

void MentalModel::register_agent(const AgentId& id) {
    worlds_.try_emplace(id);
}

std::vector<AgentId> MentalModel::agents() const {
    std::vector<AgentId> out;
    for (const auto& [id, _] : worlds_) {
        out.push_back(id);
    }
    return out;
}

const MentalModel::Worlds& MentalModel::worlds(const AgentId& believer) const {
    auto it = worlds_.find(believer);
    if (it == worlds_.end()) {
        throw Error(ErrorCode::UnknownAgent, "no mental worlds for agent '" + believer + "'");
    }
    return it->second;
}

World MentalModel::allocate(const EmbeddedProposition& p) {
    auto it = worlds_.find(p.believer);
    if (it == worlds_.end()) {
        throw Error(ErrorCode::UnknownAgent, "believer '" + p.believer + "' is not registered");
    }
    Worlds& w = it->second;
    const Proposition& prop = p.base.base;
    const Statement stmt = to_statement(prop);
    const Tick now = p.base.valid_time;

    World result = p.belief ? World::Actual : World::Imaginary;
    auto recorded = w.times.find(prop);
    if (recorded != w.times.end() && now < recorded->second) {
        result = w.actual.contains(stmt) ? World::Actual : World::Imaginary;
    } else {
        KnowledgeStore& target = p.belief ? w.actual : w.imaginary;
        KnowledgeStore& opposite = p.belief ? w.imaginary : w.actual;
        opposite.retract_stmt(stmt);
        if (!target.contains(stmt)) {
            target.assert_stmt(stmt);
        }
        w.times[prop] = now;
    }

    emit(trace_, {{"tick", now},
                  {"event", "allocate"},
                  {"believer", p.believer},
                  {"belief", p.belief},
                  {"triple", triple_to_json(stmt)},
                  {"world", to_string(result)}});
    return result;
}

std::vector<Binding> MentalModel::holds(const AgentId& believer, std::span<const Pattern> patterns,
                                        const Binding& seed) const {
    auto it = worlds_.find(believer);
    if (it == worlds_.end()) {
        return {};
    }
    return it->second.actual.query(patterns, seed);
}

std::optional<World> MentalModel::world_of(const AgentId& believer, const Proposition& p) const {
    const Worlds& w = worlds(believer);
    const Statement stmt = to_statement(p);
    if (w.actual.contains(stmt)) return World::Actual;
    if (w.imaginary.contains(stmt)) return World::Imaginary;
    return std::nullopt;
}

std::optional<Tick> MentalModel::valid_time(const AgentId& believer, const Proposition& p) const {
    const Worlds& w = worlds(believer);
    if (auto it = w.times.find(p); it != w.times.end()) {
        return it->second;
    }
    return std::nullopt;
}

const KnowledgeStore& MentalModel::actual_world(const AgentId& believer) const {
    return worlds(believer).actual;
}

const KnowledgeStore& MentalModel::imaginary_world(const AgentId& believer) const {
    return worlds(believer).imaginary;
}

nlohmann::json MentalModel::snapshot() const {
    auto out = nlohmann::json::object();
    for (const auto& [id, w] : worlds_) {
        auto times = nlohmann::json::array();
        for (const auto& [prop, t] : w.times) {
            times.push_back({triple_to_json(to_statement(prop)), t});
        }
        out[id] = {{"actual", w.actual.to_json()}, {"imaginary", w.imaginary.to_json()}, {"times", times}};
    }
    return out;
}

} // namespace agentcomm
