#include "agentcomm/condition.hpp"

#include "agentcomm/error.hpp"

namespace agentcomm {

Scope Scope::parse(std::string_view text) {
    if (text == "data") {
        return Scope{Kind::Data, {}};
    }
    if (text == "belief") {
        return Scope{Kind::Belief, {}};
    }
    constexpr std::string_view kMental = "mental:";
    if (text.starts_with(kMental) && text.size() > kMental.size()) {
        return Scope{Kind::Mental, std::string(text.substr(kMental.size()))};
    }
    throw Error(ErrorCode::ParseError, "unknown scope '" + std::string(text) + "'");
}

std::string Scope::to_string() const {
    switch (kind) {
        case Kind::Data: return "data";
        case Kind::Belief: return "belief";
        case Kind::Mental: return "mental:" + role;
    }
    return {};
}

namespace {

ConditionClause clause_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw Error(ErrorCode::ParseError, "condition clause must be an object: " + j.dump());
    }
    if (j.contains("pattern")) {
        PatternClause clause{pattern_from_json(j["pattern"]), Scope{}};
        if (j.contains("scope")) {
            if (!j["scope"].is_string()) {
                throw Error(ErrorCode::ParseError, "scope must be a string");
            }
            clause.scope = Scope::parse(j["scope"].get<std::string>());
        }
        return ConditionClause{clause};
    }
    if (j.contains("compare")) {
        const auto& c = j["compare"];
        if (!c.is_array() || c.size() != 3 || !c[1].is_string()) {
            throw Error(ErrorCode::ParseError, "compare must be [lhs, op, rhs]: " + c.dump());
        }
        return ConditionClause{
            CompareClause{term_from_json(c[0]), parse_compare_op(c[1].get<std::string>()), term_from_json(c[2])}};
    }
    if (j.contains("not")) {
        const auto& inner = j["not"];
        NotClause clause;
        if (inner.is_array()) {
            clause.inner = condition_from_json(inner);
        } else {
            clause.inner.push_back(clause_from_json(inner));
        }
        return ConditionClause{std::move(clause)};
    }
    throw Error(ErrorCode::ParseError, "unrecognized condition clause: " + j.dump());
}

nlohmann::json clause_to_json(const ConditionClause& clause) {
    return std::visit(
        [](const auto& c) -> nlohmann::json {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, PatternClause>) {
                return {{"pattern", pattern_to_json(c.pattern)}, {"scope", c.scope.to_string()}};
            } else if constexpr (std::is_same_v<T, CompareClause>) {
                return {{"compare", nlohmann::json::array({term_to_json(c.lhs), std::string(to_string(c.op)),
                                                           term_to_json(c.rhs)})}};
            } else {
                return {{"not", condition_to_json(c.inner)}};
            }
        },
        clause.expr);
}

void collect_mentioned(const Condition& c, std::set<std::string>& out) {
    for (const auto& clause : c) {
        std::visit(
            [&out](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, PatternClause>) {
                    auto vars = x.pattern.variables();
                    out.insert(vars.begin(), vars.end());
                } else if constexpr (std::is_same_v<T, CompareClause>) {
                    if (x.lhs.is_variable()) out.insert(x.lhs.text());
                    if (x.rhs.is_variable()) out.insert(x.rhs.text());
                } else {
                    collect_mentioned(x.inner, out);
                }
            },
            clause.expr);
    }
}

} // namespace

Condition condition_from_json(const nlohmann::json& j) {
    if (j.is_null()) {
        return {};
    }
    if (!j.is_array()) {
        throw Error(ErrorCode::ParseError, "condition must be an array of clauses");
    }
    Condition out;
    for (const auto& clause : j) {
        out.push_back(clause_from_json(clause));
    }
    return out;
}

nlohmann::json condition_to_json(const Condition& c) {
    auto out = nlohmann::json::array();
    for (const auto& clause : c) {
        out.push_back(clause_to_json(clause));
    }
    return out;
}

Effects effects_from_json(const nlohmann::json& j) {
    if (j.is_null()) {
        return {};
    }
    if (!j.is_array()) {
        throw Error(ErrorCode::ParseError, "effects must be an array");
    }
    Effects out;
    for (const auto& e : j) {
        if (!e.is_object()) {
            throw Error(ErrorCode::ParseError, "effect must be an object: " + e.dump());
        }
        EffectClause clause;
        if (e.contains("assert")) {
            clause.kind = EffectClause::Kind::Assert;
            clause.pattern = pattern_from_json(e["assert"]);
        } else if (e.contains("retract")) {
            clause.kind = EffectClause::Kind::Retract;
            clause.pattern = pattern_from_json(e["retract"]);
        } else {
            throw Error(ErrorCode::ParseError, "effect needs \"assert\" or \"retract\": " + e.dump());
        }
        if (e.contains("scope")) {
            clause.scope = Scope::parse(e["scope"].get<std::string>());
            if (clause.scope->kind == Scope::Kind::Belief) {
                throw Error(ErrorCode::SchemaError, "effects cannot target the derived belief base");
            }
        }
        out.push_back(std::move(clause));
    }
    return out;
}

nlohmann::json effects_to_json(const Effects& effects) {
    auto out = nlohmann::json::array();
    for (const auto& e : effects) {
        nlohmann::json j;
        j[e.kind == EffectClause::Kind::Assert ? "assert" : "retract"] = pattern_to_json(e.pattern);
        if (e.scope) {
            j["scope"] = e.scope->to_string();
        }
        out.push_back(std::move(j));
    }
    return out;
}

std::string clause_to_string(const ConditionClause& clause) {
    return std::visit(
        [](const auto& c) -> std::string {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, PatternClause>) {
                return c.pattern.to_string() + "@" + c.scope.to_string();
            } else if constexpr (std::is_same_v<T, CompareClause>) {
                return c.lhs.to_string() + " " + std::string(to_string(c.op)) + " " + c.rhs.to_string();
            } else {
                std::string out = "not [";
                for (std::size_t i = 0; i < c.inner.size(); ++i) {
                    out += (i ? ", " : "") + clause_to_string(c.inner[i]);
                }
                return out + "]";
            }
        },
        clause.expr);
}

std::set<std::string> bound_variables(const Condition& c) {
    std::set<std::string> out;
    for (const auto& clause : c) {
        if (const auto* p = std::get_if<PatternClause>(&clause.expr)) {
            auto vars = p->pattern.variables();
            out.insert(vars.begin(), vars.end());
        }
    }
    return out;
}

std::set<std::string> mentioned_variables(const Condition& c) {
    std::set<std::string> out;
    collect_mentioned(c, out);
    return out;
}

std::set<std::string> mentioned_variables(const Effects& effects) {
    std::set<std::string> out;
    for (const auto& e : effects) {
        auto vars = e.pattern.variables();
        out.insert(vars.begin(), vars.end());
    }
    return out;
}

Condition substitute(const Condition& c, const Binding& binding) {
    Condition out;
    out.reserve(c.size());
    for (const auto& clause : c) {
        out.push_back(std::visit(
            [&binding](const auto& x) -> ConditionClause {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, PatternClause>) {
                    return ConditionClause{PatternClause{x.pattern.substitute(binding), x.scope}};
                } else if constexpr (std::is_same_v<T, CompareClause>) {
                    return ConditionClause{CompareClause{resolve(x.lhs, binding), x.op, resolve(x.rhs, binding)}};
                } else {
                    return ConditionClause{NotClause{substitute(x.inner, binding)}};
                }
            },
            clause.expr));
    }
    return out;
}

namespace {

const AgentId& role_agent(const RoleMap& roles, const std::string& role) {
    auto it = roles.find(role);
    if (it == roles.end()) {
        throw Error(ErrorCode::SchemaError, "scope refers to unbound role '" + role + "'");
    }
    return it->second;
}

std::vector<Binding> extend(const ConditionClause& clause, const Binding& sol, const EvalContext& ctx) {
    return std::visit(
        [&](const auto& c) -> std::vector<Binding> {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, PatternClause>) {
                switch (c.scope.kind) {
                    case Scope::Kind::Data:
                        if (ctx.data == nullptr) {
                            throw Error(ErrorCode::SchemaError, "no data model available for " + c.pattern.to_string());
                        }
                        return ctx.data->query({c.pattern}, sol);
                    case Scope::Kind::Mental:
                        if (ctx.mental == nullptr) {
                            throw Error(ErrorCode::SchemaError, "no mental model available for " + c.pattern.to_string());
                        }
                        return ctx.mental->holds(role_agent(ctx.roles, c.scope.role), {c.pattern}, sol);
                    case Scope::Kind::Belief:
                        if (ctx.beliefs == nullptr) {
                            throw Error(ErrorCode::SchemaError, "no belief base available for " + c.pattern.to_string());
                        }
                        return ctx.beliefs->query({c.pattern}, sol);
                }
                return {};
            } else if constexpr (std::is_same_v<T, CompareClause>) {
                const Term& lhs = resolve(c.lhs, sol);
                const Term& rhs = resolve(c.rhs, sol);
                if (lhs.is_variable() || rhs.is_variable()) {
                    throw Error(ErrorCode::UnboundVariableInCompare,
                                "comparison " + c.lhs.to_string() + " " + std::string(to_string(c.op)) + " " +
                                    c.rhs.to_string() + " uses a variable no earlier pattern binds");
                }
                if (compare_terms(lhs, c.op, rhs)) {
                    return {sol};
                }
                return {};
            } else {
                if (evaluate_condition(c.inner, sol, ctx).solutions.empty()) {
                    return {sol};
                }
                return {};
            }
        },
        clause.expr);
}

} // namespace

ConditionResult evaluate_condition(const Condition& cond, const Binding& bindings, const EvalContext& ctx) {
    ConditionResult result;
    result.solutions.push_back(bindings);
    for (std::size_t i = 0; i < cond.size(); ++i) {
        std::vector<Binding> next;
        for (const auto& sol : result.solutions) {
            auto more = extend(cond[i], sol, ctx);
            next.insert(next.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
        }
        result.solutions = std::move(next);
        if (result.solutions.empty()) {
            result.failing_clause = i;
            break;
        }
    }
    return result;
}

std::vector<Binding> eval_condition(const Condition& cond, const Binding& bindings, const EvalContext& ctx) {
    return evaluate_condition(cond, bindings, ctx).solutions;
}

std::vector<Binding> eval_condition(const Condition& cond, const Binding& bindings, const KnowledgeStore& data,
                                    const MentalModel& mm, const RoleMap& roles) {
    return eval_condition(cond, bindings, EvalContext{&data, &mm, roles, nullptr});
}

nlohmann::json change_to_json(const AppliedChange& change) {
    nlohmann::json j{{"op", change.kind == EffectClause::Kind::Assert ? "assert" : "retract"},
                     {"scope", change.scope == Scope::Kind::Data ? "data" : "mental"},
                     {"triple", triple_to_json(change.statement)},
                     {"changed", change.changed}};
    if (!change.believer.empty()) {
        j["believer"] = change.believer;
    }
    return j;
}

std::vector<AppliedChange> apply_effects(const Effects& effects, const Binding& bindings, const EffectTarget& target,
                                         Tick now) {
    std::vector<Statement> grounded;
    grounded.reserve(effects.size());
    for (const auto& e : effects) {
        Pattern p = e.pattern.substitute(bindings);
        if (!p.is_ground()) {
            std::string missing;
            for (const auto& v : p.variables()) {
                missing += (missing.empty() ? "?" : ", ?") + v;
            }
            throw Error(ErrorCode::UnboundVariableInEffect, e.pattern.to_string() + " leaves " + missing + " unbound");
        }
        grounded.push_back(Statement{p.subject, p.predicate, p.object});
    }

    std::vector<AppliedChange> changes;
    for (std::size_t i = 0; i < effects.size(); ++i) {
        const auto& e = effects[i];
        const Scope scope = e.scope.value_or(target.default_scope);
        const Statement& stmt = grounded[i];
        AppliedChange change{e.kind, scope.kind, {}, stmt, false};
        const bool is_assert = e.kind == EffectClause::Kind::Assert;
        if (scope.kind == Scope::Kind::Data) {
            if (target.data == nullptr) {
                throw Error(ErrorCode::SchemaError, "effect targets the data model but none is attached");
            }
            if (is_assert) {
                change.changed = !target.data->contains(stmt);
                target.data->assert_stmt(stmt);
            } else {
                change.changed = target.data->retract_stmt(stmt);
            }
        } else if (scope.kind == Scope::Kind::Mental) {
            if (target.mental == nullptr) {
                throw Error(ErrorCode::SchemaError, "effect targets the mental model but none is attached");
            }
            change.believer = role_agent(target.roles, scope.role);
            auto before = target.mental->world_of(change.believer, to_proposition(stmt));
            auto after = target.mental->allocate(reify(stmt, change.believer, is_assert, now));
            change.changed = !before || *before != after;
        } else {
            throw Error(ErrorCode::SchemaError, "effects cannot target the belief base");
        }
        changes.push_back(std::move(change));
    }
    return changes;
}

} // namespace agentcomm
