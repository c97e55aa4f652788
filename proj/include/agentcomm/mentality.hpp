#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agentcomm/knowledge_store.hpp"
#include "agentcomm/trace.hpp"

namespace agentcomm {

using AgentId = std::string;

/// A statement as it lives in the mental layer.
struct Proposition {
    Term subject;
    Term predicate;
    Term object;

    friend bool operator==(const Proposition&, const Proposition&) = default;
    friend std::partial_ordering operator<=>(const Proposition&, const Proposition&) = default;
};

Proposition to_proposition(const Statement& s);
Statement to_statement(const Proposition& p);

struct ExtendedProposition {
    Proposition base;
    Tick valid_time = 0;
};

struct EmbeddedProposition {
    ExtendedProposition base;
    AgentId believer;
    bool belief = true;
};

enum class World { Actual, Imaginary };
std::string_view to_string(World world) noexcept;

/// Wraps a ground statement; throws NonGroundStatement.
EmbeddedProposition reify(const Statement& stmt, const AgentId& believer, bool belief, Tick now);
Statement deify(const EmbeddedProposition& p);

/// Per-believer actual (believed true) and imaginary (believed false)
/// worlds. A proposition lives in at most one of a believer's worlds; the
/// allocation with the greatest valid time decides which, and among equal
/// times the later call wins.
class MentalModel {
public:
    void register_agent(const AgentId& id);
    bool has_agent(const AgentId& id) const { return worlds_.contains(id); }
    std::vector<AgentId> agents() const;

    /// Returns the world the proposition resides in afterwards. A stale
    /// allocation (older than what is recorded) leaves the model unchanged.
    /// Throws UnknownAgent for an unregistered believer.
    World allocate(const EmbeddedProposition& p);

    /// Conjunctive match against the believer's actual world only.
    std::vector<Binding> holds(const AgentId& believer, std::span<const Pattern> patterns,
                               const Binding& seed = {}) const;
    std::vector<Binding> holds(const AgentId& believer, std::initializer_list<Pattern> patterns,
                               const Binding& seed = {}) const {
        return holds(believer, std::span<const Pattern>(patterns.begin(), patterns.size()), seed);
    }

    std::optional<World> world_of(const AgentId& believer, const Proposition& p) const;
    std::optional<Tick> valid_time(const AgentId& believer, const Proposition& p) const;

    const KnowledgeStore& actual_world(const AgentId& believer) const;
    const KnowledgeStore& imaginary_world(const AgentId& believer) const;

    void set_trace(Trace* trace) noexcept { trace_ = trace; }

    /// Canonical dump of every world, for snapshot comparisons.
    nlohmann::json snapshot() const;

private:
    struct Worlds {
        KnowledgeStore actual;
        KnowledgeStore imaginary;
        std::map<Proposition, Tick> times;
    };

    const Worlds& worlds(const AgentId& believer) const;

    std::map<AgentId, Worlds> worlds_;
    Trace* trace_ = nullptr;
};

} // namespace agentcomm
