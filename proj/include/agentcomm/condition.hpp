#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentcomm/knowledge_store.hpp"
#include "agentcomm/mentality.hpp"

namespace agentcomm {

/// Role name (`initiator`, `participant`, `sender`, `receiver`, `self`) to agent.
using RoleMap = std::map<std::string, AgentId>;

/// Where a pattern is evaluated or an effect is applied.
///   "data"          the shared data model
///   "mental:ROLE"   the actual world of the agent bound to ROLE
///   "belief"        the evaluating agent's belief base (plan guards only)
struct Scope {
    enum class Kind { Data, Mental, Belief };
    Kind kind = Kind::Data;
    std::string role;

    static Scope parse(std::string_view text);
    std::string to_string() const;
    friend bool operator==(const Scope&, const Scope&) = default;
};

struct PatternClause {
    Pattern pattern;
    Scope scope;
};

struct CompareClause {
    Term lhs;
    CompareOp op = CompareOp::Eq;
    Term rhs;
};

struct ConditionClause;
/// A conjunction of clauses.
using Condition = std::vector<ConditionClause>;

/// Negation as failure over an inner conjunction.
struct NotClause {
    Condition inner;
};

struct ConditionClause {
    std::variant<PatternClause, CompareClause, NotClause> expr;
};

struct EffectClause {
    enum class Kind { Assert, Retract };
    Kind kind = Kind::Assert;
    Pattern pattern;
    std::optional<Scope> scope;
};

using Effects = std::vector<EffectClause>;

Condition condition_from_json(const nlohmann::json& j);
nlohmann::json condition_to_json(const Condition& c);
Effects effects_from_json(const nlohmann::json& j);
nlohmann::json effects_to_json(const Effects& e);
std::string clause_to_string(const ConditionClause& clause);

/// Variables a condition can bind (pattern variables outside negations).
std::set<std::string> bound_variables(const Condition& c);
/// Every variable mentioned anywhere in the condition.
std::set<std::string> mentioned_variables(const Condition& c);
std::set<std::string> mentioned_variables(const Effects& e);

/// Replaces bound variables throughout the condition.
Condition substitute(const Condition& c, const Binding& binding);

struct EvalContext {
    const KnowledgeStore* data = nullptr;
    const MentalModel* mental = nullptr;
    RoleMap roles;
    const KnowledgeStore* beliefs = nullptr;
};

struct ConditionResult {
    std::vector<Binding> solutions;
    /// Index of the first clause that left no solutions, when the condition failed.
    std::optional<std::size_t> failing_clause;
};

/// Left-to-right evaluation of a conjunction; each clause extends every
/// partial solution in order. Throws UnboundVariableInCompare, UnitMismatch,
/// InvalidComparison, and SchemaError for an unresolvable scope.
ConditionResult evaluate_condition(const Condition& cond, const Binding& bindings, const EvalContext& ctx);

std::vector<Binding> eval_condition(const Condition& cond, const Binding& bindings, const EvalContext& ctx);
std::vector<Binding> eval_condition(const Condition& cond, const Binding& bindings, const KnowledgeStore& data,
                                    const MentalModel& mm, const RoleMap& roles);

struct AppliedChange {
    EffectClause::Kind kind = EffectClause::Kind::Assert;
    Scope::Kind scope = Scope::Kind::Data;
    AgentId believer;
    Statement statement;
    /// False when the change left the target untouched (already present/absent).
    bool changed = false;
};

nlohmann::json change_to_json(const AppliedChange& change);

struct EffectTarget {
    KnowledgeStore* data = nullptr;
    MentalModel* mental = nullptr;
    RoleMap roles;
    /// Used for clauses that do not name a scope.
    Scope default_scope;
};

/// Applies effects in order. Mental asserts allocate a believed-true
/// proposition, mental retracts a believed-false one. Every variable is
/// checked before anything is applied (UnboundVariableInEffect).
std::vector<AppliedChange> apply_effects(const Effects& effects, const Binding& bindings, const EffectTarget& target,
                                         Tick now);

} // namespace agentcomm
