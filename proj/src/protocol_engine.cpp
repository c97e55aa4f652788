#include "agentcomm/protocol_engine.hpp"

#include <algorithm>

namespace agentcomm {

Objective Objective::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("variable") || !j["variable"].is_string()) {
        throw Error(ErrorCode::ParseError, "objective needs a \"variable\" string");
    }
    Objective o;
    std::string var = j["variable"].get<std::string>();
    o.variable = !var.empty() && var.front() == '?' ? var.substr(1) : var;
    const std::string dir = j.value("direction", "max");
    if (dir == "max" || dir == "maximize") {
        o.direction = Direction::Maximize;
    } else if (dir == "min" || dir == "minimize") {
        o.direction = Direction::Minimize;
    } else {
        throw Error(ErrorCode::ParseError, "objective direction must be max or min, got '" + dir + "'");
    }
    return o;
}

nlohmann::json Objective::to_json() const {
    return {{"direction", direction == Direction::Maximize ? "max" : "min"}, {"variable", "?" + variable}};
}

AgentId evaluate_proposals(const std::vector<Proposal>& proposals, const Objective& objective) {
    const Proposal* best = nullptr;
    for (const auto& p : proposals) {
        auto it = p.bindings.find(objective.variable);
        if (it == p.bindings.end()) {
            continue;
        }
        if (best == nullptr) {
            best = &p;
            continue;
        }
        const Term& current = best->bindings.at(objective.variable);
        const CompareOp better = objective.direction == Objective::Direction::Maximize ? CompareOp::Gt : CompareOp::Lt;
        if (compare_terms(it->second, better, current) ||
            (compare_terms(it->second, CompareOp::Eq, current) && p.agent < best->agent)) {
            best = &p;
        }
    }
    if (best == nullptr) {
        throw Error(ErrorCode::NoProposals, "no proposal binds ?" + objective.variable);
    }
    return best->agent;
}

std::string_view to_string(ConversationStatus s) noexcept {
    switch (s) {
        case ConversationStatus::Running: return "running";
        case ConversationStatus::Succeeded: return "succeeded";
        case ConversationStatus::Failed: return "failed";
    }
    return "?";
}

Conversation::Conversation(ConversationSpec spec, ProtocolEnv env) : spec_(std::move(spec)), env_(env) {
    protocol_ = &env_.registry.protocol(spec_.protocol);
    if (spec_.participants.empty()) {
        throw Error(ErrorCode::NoParticipants, "conversation " + spec_.id + " has no participants");
    }
    const std::string& start = protocol_->start_state().id;
    for (const auto& p : spec_.participants) {
        Lane lane;
        lane.participant = p;
        lane.state = start;
        lanes_.push_back(std::move(lane));
    }
}

RoleMap Conversation::roles_for(const Lane& lane) const {
    RoleMap roles{{protocol_->initiator_role, spec_.initiator}};
    for (const auto& r : protocol_->participant_roles) {
        roles.emplace(r, lane.participant);
    }
    return roles;
}

std::optional<CAInvocation> Conversation::build_invocation(const Lane& lane, const Transition& t) const {
    const auto& ca = env_.registry.ca(t.execute);
    const RoleMap roles = roles_for(lane);
    CAInvocation inv;
    inv.sender = roles.at(t.sender);
    inv.receiver = roles.at(t.receiver);
    inv.roles = roles;
    inv.action_inputs = spec_.inputs;
    inv.conversation = spec_.id;

    if (ca.content.action) {
        inv.content.action = spec_.action;
    }
    if (ca.content.proposition) {
        inv.content.proposition = done_marker(spec_.action, lane.executor.value_or(inv.sender));
    }
    if (ca.content.condition) {
        if (ca.name == "propose") {
            if (env_.proposals == nullptr) {
                return std::nullopt;
            }
            auto agent = env_.proposals->find(inv.sender);
            if (agent == env_.proposals->end()) {
                return std::nullopt;
            }
            auto cond = agent->second.find(spec_.action.text());
            if (cond == agent->second.end()) {
                return std::nullopt;
            }
            inv.content.condition = cond->second;
        } else if (lane.proposal_condition) {
            inv.content.condition = substitute(*lane.proposal_condition, lane.proposal);
        } else {
            inv.content.condition = Condition{};
        }
    }
    if (ca.content.reason) {
        auto because = [&](const char* why) {
            return Proposition{spec_.action, Term::symbol(vocab::kFailedBecause), Term::symbol(why)};
        };
        switch (t.on) {
            case Trigger::Loser:
                inv.content.reason = Proposition{spec_.action, Term::symbol(vocab::kRejectedBecause),
                                                 Term::symbol(vocab::kBetterProposal)};
                break;
            case Trigger::Timeout: inv.content.reason = because(vocab::kTimeout); break;
            default: inv.content.reason = lane.reason.value_or(because(vocab::kFpUnsatisfied)); break;
        }
    }
    return inv;
}

bool Conversation::feasible(const Lane& lane, const Transition& t) const {
    auto inv = build_invocation(lane, t);
    if (!inv) {
        return false;
    }
    CAWorld world{env_.data, env_.mental, env_.registry, env_.hosts, nullptr};
    return check_feasibility(env_.registry.ca(t.execute), *inv, world);
}

void Conversation::fire(Lane& lane, const Transition& t, Tick now, bool force) {
    auto inv = build_invocation(lane, t);
    const std::string from = lane.state;
    CAStatus outcome_status = CAStatus::FpFailed;
    std::optional<Proposition> reason;

    if (inv) {
        Envelope env;
        env.performative = t.execute;
        env.sender = inv->sender;
        env.receiver = inv->receiver;
        env.content = content_to_json(inv->content);
        env.conversation = spec_.id;
        env.reply_with = env_.transport.next_message_id(spec_.id);
        env.in_reply_to = lane.last_message;
        env.tick = now;
        const bool delivered = env_.transport.send(env);
        if (!delivered && !force) {
            lane.waiting = true;
            lane.waiting_since = now;
            return;
        }
        if (delivered) {
            env_.transport.receive(env.receiver);
        }
        lane.last_message = env.reply_with;

        CAWorld world{env_.data, env_.mental, env_.registry, env_.hosts, env_.trace};
        const auto& ca = env_.registry.ca(t.execute);
        CAOutcome out = perform_ca(ca, *inv, world, now);
        outcome_status = out.status;
        reason = out.reason;
        if (out.performed() && inv->content.condition && ca.name == "propose") {
            lane.proposal = out.bindings;
            lane.proposal_condition = inv->content.condition;
        }
        if (ca.executes && out.status != CAStatus::FpFailed) {
            lane.executor = *ca.executes == "sender" ? inv->sender : inv->receiver;
        }
    } else {
        reason = Proposition{spec_.action, Term::symbol(vocab::kFailedBecause), Term::symbol(vocab::kFpUnsatisfied)};
    }

    lane.waiting = false;
    lane.state = t.to;
    lane.last = outcome_status;
    if (outcome_status != CAStatus::Performed) {
        lane.reason = reason;
    }
    lane.acts.push_back(t.execute);
    emit(env_.trace, {{"tick", now},
                      {"event", "transition"},
                      {"conv", spec_.id},
                      {"lane", lane.participant},
                      {"from", from},
                      {"to", t.to},
                      {"act", t.execute},
                      {"on", to_string(t.on)},
                      {"outcome", to_string(outcome_status)}});
}

bool Conversation::at_barrier(const Lane& lane) const {
    for (const auto* t : protocol_->outgoing(lane.state)) {
        if (t->on == Trigger::Winner || t->on == Trigger::Loser) {
            return true;
        }
    }
    return false;
}

void Conversation::evaluate_barrier(Tick now) {
    if (evaluated_) {
        return;
    }
    bool any = false;
    for (const auto& lane : lanes_) {
        if (lane.waiting) {
            return;
        }
        if (at_barrier(lane)) {
            any = true;
        } else if (!protocol_->is_accept(lane.state)) {
            return;
        }
    }
    if (!any) {
        return;
    }
    evaluated_ = true;

    std::vector<Proposal> proposals;
    nlohmann::json listed = nlohmann::json::array();
    for (const auto& lane : lanes_) {
        if (at_barrier(lane)) {
            proposals.push_back(Proposal{lane.participant, lane.proposal});
            nlohmann::json entry{{"agent", lane.participant}};
            if (spec_.objective) {
                auto it = lane.proposal.find(spec_.objective->variable);
                entry["value"] = it == lane.proposal.end() ? nlohmann::json() : term_to_json(it->second);
            }
            listed.push_back(std::move(entry));
        }
    }
    try {
        if (spec_.objective) {
            winner_ = evaluate_proposals(proposals, *spec_.objective);
        } else {
            winner_ = std::min_element(proposals.begin(), proposals.end(), [](const auto& a, const auto& b) {
                          return a.agent < b.agent;
                      })->agent;
        }
    } catch (const Error& e) {
        diagnostic_ = e.what();
    }
    for (auto& lane : lanes_) {
        if (at_barrier(lane)) {
            lane.won = winner_ && lane.participant == *winner_;
        }
    }
    nlohmann::json line{{"tick", now}, {"event", "evaluate"}, {"conv", spec_.id}, {"proposals", listed}};
    line["winner"] = winner_ ? nlohmann::json(*winner_) : nlohmann::json();
    emit(env_.trace, std::move(line));
}

bool Conversation::hop(Lane& lane, Tick now) {
    const auto outs = protocol_->outgoing(lane.state);
    auto find = [&](Trigger on) -> const Transition* {
        for (const auto* t : outs) {
            if (t->on == on) {
                return t;
            }
        }
        return nullptr;
    };

    if (lane.waiting) {
        if (now - lane.waiting_since < spec_.timeout_budget) {
            return true;
        }
        const Transition* t = find(Trigger::Timeout);
        if (t == nullptr) {
            fail("lane " + lane.participant + " timed out in state " + lane.state + " with no timeout transition", now);
            return false;
        }
        lane.reason = Proposition{spec_.action, Term::symbol(vocab::kFailedBecause), Term::symbol(vocab::kTimeout)};
        fire(lane, *t, now, true);
        return true;
    }

    if (at_barrier(lane)) {
        if (!lane.won) {
            return true;
        }
        const Transition* t = find(*lane.won ? Trigger::Winner : Trigger::Loser);
        if (t == nullptr) {
            fail("lane " + lane.participant + " has no " + (*lane.won ? "winner" : "loser") + " transition from " +
                     lane.state,
                 now);
            return false;
        }
        fire(lane, *t, now, false);
        return true;
    }

    const Transition* failed = find(Trigger::Failed);
    if (lane.last != CAStatus::Performed) {
        if (failed == nullptr) {
            fail("lane " + lane.participant + " carries a failure in state " + lane.state +
                     " but no failed transition leaves it",
                 now);
            return false;
        }
        fire(lane, *failed, now, false);
        return true;
    }

    const Transition* next = nullptr;
    for (const auto* t : outs) {
        if (t->on != Trigger::Performed) {
            continue;
        }
        if (t->guard) {
            Binding seed;
            RoleMap roles = roles_for(lane);
            for (const auto& [role, agent] : roles) {
                seed.emplace(role, Term::symbol(agent));
            }
            seed.emplace("action", spec_.action);
            if (eval_condition(*t->guard, seed, EvalContext{&env_.data, &env_.mental, roles, nullptr}).empty()) {
                continue;
            }
        }
        next = t;
        break;
    }
    if (next == nullptr) {
        if (failed != nullptr) {
            lane.reason = Proposition{spec_.action, Term::symbol(vocab::kFailedBecause), Term::symbol(vocab::kFpUnsatisfied)};
            fire(lane, *failed, now, false);
            return true;
        }
        fail("no enabled transition for lane " + lane.participant + " in state " + lane.state, now);
        return false;
    }
    if (failed != nullptr && !feasible(lane, *next)) {
        lane.reason = Proposition{spec_.action, Term::symbol(vocab::kFailedBecause), Term::symbol(vocab::kFpUnsatisfied)};
        fire(lane, *failed, now, false);
        return true;
    }
    fire(lane, *next, now, false);
    return true;
}

void Conversation::fail(std::string diagnostic, Tick now) {
    status_ = ConversationStatus::Failed;
    diagnostic_ = std::string(to_string(ErrorCode::Deadlock)) + ": " + diagnostic;
    emit(env_.trace, {{"tick", now}, {"event", "deadlock"}, {"conv", spec_.id}, {"diagnostic", diagnostic_}});
    finish(now);
}

void Conversation::finish(Tick now) {
    if (status_ == ConversationStatus::Running) {
        status_ = ConversationStatus::Failed;
        for (const auto& lane : lanes_) {
            const auto* s = protocol_->find_state(lane.state);
            if (s != nullptr && s->kind == StateKind::Accept && !s->failure) {
                status_ = ConversationStatus::Succeeded;
            }
        }
    }
    nlohmann::json line{{"tick", now}, {"event", "conversation"}, {"conv", spec_.id}, {"status", to_string(status_)}};
    line["winner"] = winner_ ? nlohmann::json(*winner_) : nlohmann::json();
    emit(env_.trace, std::move(line));
}

ConversationStatus Conversation::step(Tick now) {
    if (status_ != ConversationStatus::Running) {
        return status_;
    }
    ++steps_;
    evaluate_barrier(now);
    for (auto& lane : lanes_) {
        if (protocol_->is_accept(lane.state)) {
            continue;
        }
        if (!hop(lane, now)) {
            return status_;
        }
    }
    bool done = std::all_of(lanes_.begin(), lanes_.end(),
                            [&](const Lane& l) { return protocol_->is_accept(l.state); });
    if (done) {
        finish(now);
    }
    return status_;
}

ConversationStatus Conversation::run(Tick& now, std::size_t max_steps) {
    for (std::size_t i = 0; i < max_steps && status_ == ConversationStatus::Running; ++i) {
        step(++now);
    }
    if (status_ == ConversationStatus::Running) {
        fail("conversation still running after " + std::to_string(max_steps) + " steps", now);
    }
    return status_;
}

nlohmann::json Conversation::to_json() const {
    nlohmann::json lanes = nlohmann::json::array();
    for (const auto& lane : lanes_) {
        lanes.push_back({{"participant", lane.participant}, {"state", lane.state}, {"acts", lane.acts}});
    }
    nlohmann::json participants = spec_.participants;
    nlohmann::json j{{"id", spec_.id},
                     {"protocol", spec_.protocol},
                     {"initiator", spec_.initiator},
                     {"participants", participants},
                     {"action", term_to_json(spec_.action)},
                     {"status", to_string(status_)},
                     {"lanes", lanes}};
    j["winner"] = winner_ ? nlohmann::json(*winner_) : nlohmann::json();
    if (!diagnostic_.empty()) {
        j["diagnostic"] = diagnostic_;
    }
    return j;
}

std::vector<std::string> opener_cas(const Registry& registry) {
    std::vector<std::string> out;
    for (const auto* p : registry.protocols()) {
        const std::string& start = p->start_state().id;
        for (const auto* t : p->outgoing(start)) {
            if (t->sender == p->initiator_role &&
                std::find(out.begin(), out.end(), t->execute) == out.end()) {
                out.push_back(t->execute);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

const ProtocolDescription* protocol_opened_by(std::string_view ca, const Registry& registry) {
    for (const auto* p : registry.protocols()) {
        for (const auto* t : p->outgoing(p->start_state().id)) {
            if (t->sender == p->initiator_role && t->execute == ca) {
                return p;
            }
        }
    }
    return nullptr;
}

} // namespace

std::string select_ca(const Term& action, std::size_t provider_count, const Binding& effect_bindings,
                      const Registry& registry) {
    if (provider_count == 0) {
        throw Error(ErrorCode::NoParticipants, "no provider for " + action.to_string());
    }
    const std::string family = provider_count == 1 ? "request" : "contract-net";
    std::set<std::string> known{"sender", "receiver", "self", "initiator", "participant", "action"};
    if (action.is_symbol() && registry.find_action(action.text()) != nullptr) {
        known.insert("capability");
    }
    for (const auto& [k, v] : effect_bindings) {
        known.insert(k);
    }
    for (const auto& name : opener_cas(registry)) {
        const auto* p = protocol_opened_by(name, registry);
        if (p == nullptr || p->family != family) {
            continue;
        }
        const auto& ca = registry.ca(name);
        auto vars = mentioned_variables(ca.re);
        if (std::all_of(vars.begin(), vars.end(), [&](const std::string& v) { return known.contains(v); })) {
            return name;
        }
    }
    throw Error(ErrorCode::NoProtocolForCA, "no opening act of a " + family + " protocol fits " + action.to_string());
}

const ProtocolDescription& select_protocol(std::string_view ca, const Registry& registry) {
    if (const auto* p = protocol_opened_by(ca, registry)) {
        return *p;
    }
    throw Error(ErrorCode::NoProtocolForCA, "no protocol opens with '" + std::string(ca) + "'");
}

} // namespace agentcomm
