#include "agentcomm/ca_engine.hpp"

namespace agentcomm {

std::string_view to_string(CAStatus s) noexcept {
    switch (s) {
        case CAStatus::Performed: return "performed";
        case CAStatus::FpFailed: return "fp_failed";
        case CAStatus::ActionFailed: return "action_failed";
    }
    return "?";
}

nlohmann::json content_to_json(const CAContent& content) {
    nlohmann::json j = nlohmann::json::object();
    if (content.action) {
        j["action"] = term_to_json(*content.action);
    }
    if (content.proposition) {
        j["proposition"] = triple_to_json(to_statement(*content.proposition));
    }
    if (content.condition) {
        j["condition"] = condition_to_json(*content.condition);
    }
    if (content.reason) {
        j["reason"] = triple_to_json(to_statement(*content.reason));
    }
    return j;
}

CAContent content_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw Error(ErrorCode::ParseError, "message content must be an object");
    }
    CAContent c;
    for (const auto& [key, value] : j.items()) {
        if (key == "action") {
            c.action = term_from_json(value);
        } else if (key == "proposition") {
            c.proposition = to_proposition(statement_from_json(value));
        } else if (key == "condition") {
            c.condition = condition_from_json(value);
        } else if (key == "reason") {
            c.reason = to_proposition(statement_from_json(value));
        } else {
            throw Error(ErrorCode::ContentSchemaMismatch, "unknown content field '" + key + "'");
        }
    }
    return c;
}

Proposition done_marker(const Term& action, const AgentId& agent) {
    return Proposition{action, Term::symbol(vocab::kPerformedBy), Term::symbol(agent)};
}

RoleMap ca_roles(const CAInvocation& inv) {
    RoleMap roles = inv.roles;
    roles.insert_or_assign("sender", inv.sender);
    roles.insert_or_assign("receiver", inv.receiver);
    roles.insert_or_assign("self", inv.sender);
    roles.try_emplace("initiator", inv.sender);
    roles.try_emplace("participant", inv.receiver);
    return roles;
}

Binding ca_seed(const CAInvocation& inv, const Registry& registry) {
    Binding seed;
    for (const auto& [role, agent] : ca_roles(inv)) {
        seed.insert_or_assign(role, Term::symbol(agent));
    }
    if (inv.content.action) {
        seed.insert_or_assign("action", *inv.content.action);
        if (inv.content.action->is_symbol()) {
            if (const auto* a = registry.find_action(inv.content.action->text())) {
                seed.insert_or_assign("capability", a->capability);
            }
        }
    }
    if (const auto& p = inv.content.proposition) {
        seed.insert_or_assign("subject", p->subject);
        seed.insert_or_assign("predicate", p->predicate);
        seed.insert_or_assign("object", p->object);
    }
    if (const auto& r = inv.content.reason) {
        seed.insert_or_assign("reasonSubject", r->subject);
        seed.insert_or_assign("reasonPredicate", r->predicate);
        seed.insert_or_assign("reasonObject", r->object);
    }
    return seed;
}

namespace {

std::string schema_text(const ContentSchema& s) {
    std::string out;
    auto add = [&](bool on, const char* name) {
        if (on) {
            out += out.empty() ? name : std::string(", ") + name;
        }
    };
    add(s.action, "action");
    add(s.proposition, "proposition");
    add(s.condition, "condition");
    add(s.reason, "reason");
    return "{" + out + "}";
}

void check_content(const CommunicativeActDescription& ca, const CAInvocation& inv) {
    if (inv.content.schema() != ca.content) {
        throw Error(ErrorCode::ContentSchemaMismatch, "'" + ca.name + "' takes " + schema_text(ca.content) +
                                                          " but the message carries " +
                                                          schema_text(inv.content.schema()));
    }
}

struct Feasibility {
    bool fp = false;
    bool condition = false;
    Binding bindings;
};

Feasibility evaluate_feasibility(const CommunicativeActDescription& ca, const CAInvocation& inv, const CAWorld& world,
                                 const RoleMap& roles, const Binding& seed) {
    Feasibility f;
    EvalContext ctx{&world.data, &world.mental, roles, nullptr};
    auto fp = eval_condition(ca.fp, seed, ctx);
    if (fp.empty()) {
        return f;
    }
    f.fp = true;
    if (ca.searle_class == SearleClass::Commissive && inv.content.condition) {
        auto sols = eval_condition(*inv.content.condition, fp.front(), ctx);
        if (sols.empty()) {
            return f;
        }
        f.condition = true;
        f.bindings = std::move(sols.front());
    } else {
        f.condition = true;
        f.bindings = std::move(fp.front());
    }
    return f;
}

Term reason_subject(const CommunicativeActDescription& ca, const CAInvocation& inv) {
    return inv.content.action ? *inv.content.action : Term::symbol(ca.name);
}

} // namespace

bool check_feasibility(const CommunicativeActDescription& ca, const CAInvocation& inv, const CAWorld& world) {
    check_content(ca, inv);
    auto roles = ca_roles(inv);
    auto f = evaluate_feasibility(ca, inv, world, roles, ca_seed(inv, world.registry));
    return f.fp && f.condition;
}

CAOutcome perform_ca(const CommunicativeActDescription& ca, const CAInvocation& inv, CAWorld& world, Tick now) {
    check_content(ca, inv);
    const RoleMap roles = ca_roles(inv);
    const Binding seed = ca_seed(inv, world.registry);

    CAOutcome out;
    auto trace_line = [&](CAStatus status) {
        nlohmann::json line{{"tick", now},
                            {"event", "ca"},
                            {"act", ca.name},
                            {"sender", inv.sender},
                            {"receiver", inv.receiver},
                            {"content", content_to_json(inv.content)},
                            {"status", to_string(status)}};
        if (!inv.conversation.empty()) {
            line["conv"] = inv.conversation;
        }
        emit(world.trace, std::move(line));
    };

    auto f = evaluate_feasibility(ca, inv, world, roles, seed);
    if (!f.fp || !f.condition) {
        out.status = CAStatus::FpFailed;
        out.reason = Proposition{reason_subject(ca, inv), Term::symbol(vocab::kFailedBecause),
                                 Term::symbol(f.fp ? vocab::kConditionUnsatisfied : vocab::kFpUnsatisfied)};
        out.message = f.fp ? "content condition does not hold" : "feasibility precondition does not hold";
        out.bindings = seed;
        trace_line(out.status);
        return out;
    }
    out.bindings = std::move(f.bindings);

    EffectTarget target{&world.data, &world.mental, roles, Scope{Scope::Kind::Mental, "receiver"}};
    out.changes = apply_effects(ca.re, out.bindings, target, now);
    trace_line(CAStatus::Performed);

    if (!ca.executes) {
        return out;
    }
    const AgentId& executor = *ca.executes == "sender" ? inv.sender : inv.receiver;
    const Term& action_term = *inv.content.action;
    const ActionDescription* action = action_term.is_symbol() ? world.registry.find_action(action_term.text()) : nullptr;
    auto fail = [&](Proposition reason, std::string message) {
        out.status = CAStatus::ActionFailed;
        out.reason = reason;
        out.message = std::move(message);
        world.mental.allocate(reify(to_statement(reason), executor, true, now));
    };
    if (action == nullptr) {
        fail(Proposition{action_term, Term::symbol(vocab::kFailedBecause), Term::symbol(vocab::kInvalidInput)},
             "no action description for " + action_term.to_string());
        return out;
    }
    ExecutionRecord rec;
    try {
        rec = execute(*action, inv.action_inputs, world.hosts, world.data, now, ExecuteOptions{executor, world.trace});
    } catch (const Error& e) {
        if (e.code() != ErrorCode::MissingInput && e.code() != ErrorCode::TypeMismatch &&
            e.code() != ErrorCode::UnboundAtomicOp) {
            throw;
        }
        fail(Proposition{action_term, Term::symbol(vocab::kFailedBecause), Term::symbol(vocab::kInvalidInput)},
             e.what());
        return out;
    }
    if (!rec.succeeded()) {
        Proposition reason = *rec.reason;
        std::string message = rec.message;
        out.execution = std::move(rec);
        fail(std::move(reason), std::move(message));
        return out;
    }
    for (const AgentId& believer : {inv.sender, inv.receiver}) {
        for (const auto& [name, value] : rec.outputs) {
            world.mental.allocate(reify(Statement{action_term, output_predicate(name), value}, believer, true, now));
        }
        world.mental.allocate(reify(to_statement(done_marker(action_term, executor)), believer, true, now));
    }
    for (const auto& [name, value] : rec.outputs) {
        out.bindings.insert_or_assign(name, value);
    }
    out.execution = std::move(rec);
    return out;
}

CAOutcome perform_ca(std::string_view ca_name, const CAInvocation& inv, CAWorld& world, Tick now) {
    return perform_ca(world.registry.ca(ca_name), inv, world, now);
}

} // namespace agentcomm
