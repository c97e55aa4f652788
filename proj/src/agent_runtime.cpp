#include "agentcomm/agent_runtime.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace agentcomm {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

Term arg_from_token(std::string_view token) {
    if (token.size() >= 2 && token.front() == '"' && token.back() == '"') {
        return Term::string(std::string(token.substr(1, token.size() - 2)));
    }
    return term_from_token(token);
}

} // namespace

GoalTerm GoalTerm::parse(std::string_view text) {
    text = trim(text);
    GoalTerm g;
    auto open = text.find('(');
    if (open == std::string_view::npos) {
        g.name = std::string(text);
    } else {
        if (text.back() != ')') {
            throw Error(ErrorCode::ParseError, "goal '" + std::string(text) + "' is missing its closing parenthesis");
        }
        g.name = std::string(trim(text.substr(0, open)));
        std::string_view inside = trim(text.substr(open + 1, text.size() - open - 2));
        bool quoted = false;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= inside.size(); ++i) {
            if (i < inside.size() && inside[i] == '"') {
                quoted = !quoted;
            }
            if (i == inside.size() || (inside[i] == ',' && !quoted)) {
                auto token = trim(inside.substr(start, i - start));
                if (token.empty()) {
                    if (i == inside.size() && g.args.empty() && start == 0) {
                        break;
                    }
                    throw Error(ErrorCode::ParseError, "empty argument in goal '" + std::string(text) + "'");
                }
                g.args.push_back(arg_from_token(token));
                start = i + 1;
            }
        }
    }
    if (g.name.empty()) {
        throw Error(ErrorCode::ParseError, "goal '" + std::string(text) + "' has no name");
    }
    return g;
}

GoalTerm GoalTerm::substitute(const Binding& binding) const {
    GoalTerm g{name, {}};
    for (const auto& a : args) {
        g.args.push_back(resolve(a, binding));
    }
    return g;
}

std::string GoalTerm::to_string() const {
    std::string out = name + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        out += (i ? ", " : "") + args[i].to_string();
    }
    return out + ")";
}

PlanRule PlanRule::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("head") || !j["head"].is_string()) {
        throw Error(ErrorCode::ParseError, "plan rule needs a \"head\" string");
    }
    PlanRule r;
    r.head = GoalTerm::parse(j["head"].get<std::string>());
    if (j.contains("guard")) {
        r.guard = condition_from_json(j["guard"]);
    }
    for (const auto& step : j.value("body", nlohmann::json::array())) {
        r.body.push_back(GoalTerm::parse(step.get<std::string>()));
    }
    return r;
}

AgentManifest AgentManifest::from_json(const nlohmann::json& j) {
    try {
        AgentManifest m;
        m.id = j.at("id").get<std::string>();
        m.capabilities = j.value("capabilities", std::vector<std::string>{});
        m.subscriptions = j.value("subscriptions", std::vector<std::string>{});
        for (const auto& g : j.value("goals", nlohmann::json::array())) {
            m.goals.push_back(GoalTerm::parse(g.get<std::string>()));
        }
        for (const auto& p : j.value("plans", nlohmann::json::array())) {
            m.plans.push_back(PlanRule::from_json(p));
        }
        const auto offers = j.value("proposalConditions", nlohmann::json::object());
        for (const auto& [action, cond] : offers.items()) {
            m.proposal_conditions.emplace(action, condition_from_json(cond));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("agent manifest: ") + e.what());
    }
}

AgentManifest AgentManifest::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ConfigError, "cannot open agent manifest " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    return from_json(j);
}

std::string_view to_string(GoalKind k) noexcept {
    switch (k) {
        case GoalKind::Internal: return "internal";
        case GoalKind::External: return "external";
        case GoalKind::Composed: return "composed";
    }
    return "?";
}

nlohmann::json GoalOutcome::to_json() const {
    nlohmann::json j{{"agent", agent}, {"goal", goal}, {"status", succeeded ? "succeeded" : "failed"}, {"tick", tick}};
    if (!reason.empty()) {
        j["reason"] = reason;
    }
    return j;
}

bool RunReport::all_succeeded() const {
    return std::all_of(goals.begin(), goals.end(), [](const GoalOutcome& g) { return g.succeeded; });
}

nlohmann::json RunReport::to_json() const {
    nlohmann::json g = nlohmann::json::array();
    for (const auto& o : goals) {
        g.push_back(o.to_json());
    }
    return {{"ticks", ticks}, {"goals", g}, {"conversations", conversations}, {"succeeded", all_succeeded()}};
}

Runtime::Runtime(Registry registry, KnowledgeStore data, HostBindings hosts, RuntimeConfig config)
    : registry_(std::move(registry)),
      data_(std::move(data)),
      hosts_(std::move(hosts)),
      config_(std::move(config)),
      matchmaker_(data_) {
    mental_.set_trace(&trace_);
    transport_.set_trace(&trace_);
}

void Runtime::add_agent(AgentManifest manifest) {
    const AgentId id = manifest.id;
    if (agents_.contains(id)) {
        throw Error(ErrorCode::DuplicateName, "agent '" + id + "' is defined twice");
    }
    for (const auto& cap : manifest.capabilities) {
        const auto* action = registry_.find_action(cap);
        if (action == nullptr) {
            throw Error(ErrorCode::DanglingReference, "agent '" + id + "' claims unknown action '" + cap + "'");
        }
        data_.assert_stmt(Statement{Term::symbol(id), Term::symbol(vocab::kHasCapability), action->capability});
    }
    mental_.register_agent(id);
    transport_.register_agent(id);
    proposals_[id] = manifest.proposal_conditions;
    AgentState state;
    for (const auto& g : manifest.goals) {
        state.goals.push_back(g);
    }
    state.manifest = std::move(manifest);
    agents_.emplace(id, std::move(state));
    order_.push_back(id);
}

const AgentManifest& Runtime::manifest(const AgentId& id) const {
    auto it = agents_.find(id);
    if (it == agents_.end()) {
        throw Error(ErrorCode::UnknownAgent, "no agent '" + id + "'");
    }
    return it->second.manifest;
}

void Runtime::post_goal(const AgentId& agent, GoalTerm goal) {
    auto it = agents_.find(agent);
    if (it == agents_.end()) {
        throw Error(ErrorCode::UnknownAgent, "no agent '" + agent + "'");
    }
    it->second.goals.push_back(std::move(goal));
}

GoalKind Runtime::classify(const AgentId& agent, const std::string& goal) const {
    if (registry_.find_action(goal) == nullptr) {
        return GoalKind::Composed;
    }
    const auto& caps = manifest(agent).capabilities;
    return std::find(caps.begin(), caps.end(), goal) != caps.end() ? GoalKind::Internal : GoalKind::External;
}

KnowledgeStore Runtime::belief_base(const AgentId& agent) const {
    const auto& m = manifest(agent);
    KnowledgeStore beliefs;
    for (const auto& s : mental_.actual_world(agent).statements()) {
        beliefs.assert_stmt(s);
    }
    for (const auto& pred : m.subscriptions) {
        for (const auto& s : data_.match(Pattern{Term::variable("s"), Term::symbol(pred), Term::variable("o")})) {
            beliefs.assert_stmt(s);
        }
    }
    return beliefs;
}

DelegationResult Runtime::delegate_external(const AgentId& requester, const ActionDescription& action,
                                            const Binding& inputs) {
    DelegationResult result;
    std::vector<std::string> outputs;
    for (const auto& p : action.outputs) {
        outputs.push_back(p.name);
    }
    auto providers = matchmaker_.lookup(action.capability, outputs);
    std::erase(providers, requester);
    emit(&trace_, {{"tick", now_},
                   {"event", "matchmaker"},
                   {"agent", requester},
                   {"capability", term_to_json(action.capability)},
                   {"providers", providers}});
    if (providers.empty()) {
        result.reason = "no provider advertises " + action.capability.to_string();
        return result;
    }

    auto effects = evaluate_external_effects(action, inputs, data_, mental_, requester, now_);
    if (!effects.satisfiable) {
        result.reason = "effects of " + action.name + " cannot be satisfied";
        return result;
    }
    const Term action_term = Term::symbol(action.name);
    const std::string ca = select_ca(action_term, providers.size(), effects.bindings, registry_);
    const auto& protocol = select_protocol(ca, registry_);
    emit(&trace_, {{"tick", now_},
                   {"event", "select"},
                   {"agent", requester},
                   {"action", action.name},
                   {"ca", ca},
                   {"protocol", protocol.name},
                   {"providers", providers}});

    ConversationSpec spec;
    spec.id = "c" + std::to_string(++conversation_count_);
    spec.protocol = protocol.name;
    spec.initiator = requester;
    if (protocol.family == "request") {
        spec.participants = {providers.front()};
    } else {
        spec.participants = providers;
    }
    spec.action = action_term;
    spec.inputs = inputs;
    spec.objective = config_.objective;
    spec.timeout_budget = config_.timeout_budget;
    result.conversation = spec.id;

    Conversation conv(spec, ProtocolEnv{data_, mental_, registry_, hosts_, transport_, &trace_, &proposals_});
    conv.run(now_);
    conversations_.push_back(conv.to_json());
    if (conv.status() != ConversationStatus::Succeeded) {
        result.reason = "conversation " + spec.id + " failed";
        if (!conv.diagnostic().empty()) {
            result.reason += ": " + conv.diagnostic();
        }
        return result;
    }
    for (const auto& p : action.outputs) {
        auto sols = mental_.holds(requester, {Pattern{action_term, output_predicate(p.name), Term::variable("v")}});
        if (sols.empty()) {
            result.reason = "no value received for output '" + p.name + "'";
            return result;
        }
        result.outputs.emplace(p.name, sols.back().at("v"));
    }
    result.succeeded = true;
    return result;
}

namespace {

/// Positional arguments: declared inputs first, then outputs.
std::optional<std::string> bind_arguments(const ActionDescription& action, const GoalTerm& step, Binding& inputs) {
    if (step.args.size() > action.inputs.size() + action.outputs.size()) {
        return "too many arguments for " + action.name;
    }
    for (std::size_t i = 0; i < action.inputs.size(); ++i) {
        if (i >= step.args.size()) {
            return "missing input '" + action.inputs[i].name + "' for " + action.name;
        }
        if (step.args[i].is_variable()) {
            return "input '" + action.inputs[i].name + "' of " + action.name + " is unbound";
        }
        inputs.emplace(action.inputs[i].name, step.args[i]);
    }
    return std::nullopt;
}

Binding bind_outputs(const ActionDescription& action, const GoalTerm& step, const Binding& outputs) {
    Binding bound;
    for (std::size_t i = 0; i < action.outputs.size(); ++i) {
        std::size_t pos = action.inputs.size() + i;
        if (pos < step.args.size() && step.args[pos].is_variable()) {
            auto it = outputs.find(action.outputs[i].name);
            if (it != outputs.end()) {
                bound.emplace(step.args[pos].text(), it->second);
            }
        }
    }
    return bound;
}

} // namespace

Runtime::StepResult Runtime::run_internal(AgentState& agent, const ActionDescription& action, const GoalTerm& step) {
    Binding inputs;
    if (auto err = bind_arguments(action, step, inputs)) {
        return {false, *err, {}};
    }
    ExecutionRecord rec;
    try {
        rec = execute(action, inputs, hosts_, data_, now_, ExecuteOptions{agent.manifest.id, &trace_});
    } catch (const Error& e) {
        return {false, e.what(), {}};
    }
    if (!rec.succeeded()) {
        return {false, action.name + " " + std::string(to_string(rec.status)) + ": " + rec.message, {}};
    }
    for (const auto& [name, value] : rec.outputs) {
        mental_.allocate(reify(Statement{Term::symbol(action.name), output_predicate(name), value}, agent.manifest.id,
                               true, now_));
    }
    return {true, {}, bind_outputs(action, step, rec.outputs)};
}

Runtime::StepResult Runtime::run_external(AgentState& agent, const ActionDescription& action, const GoalTerm& step) {
    Binding inputs;
    if (auto err = bind_arguments(action, step, inputs)) {
        return {false, *err, {}};
    }
    DelegationResult r;
    try {
        r = delegate_external(agent.manifest.id, action, inputs);
    } catch (const Error& e) {
        return {false, e.what(), {}};
    }
    if (!r.succeeded) {
        return {false, r.reason, {}};
    }
    return {true, {}, bind_outputs(action, step, r.outputs)};
}

Runtime::StepResult Runtime::push_plan(AgentState& agent, const GoalTerm& goal) {
    if (agent.plan.size() >= config_.max_recursion) {
        return {false, "plan depth exceeds " + std::to_string(config_.max_recursion) + " at " + goal.to_string(), {}};
    }
    std::optional<KnowledgeStore> beliefs;
    for (const auto& rule : agent.manifest.plans) {
        if (rule.head.name != goal.name || rule.head.args.size() != goal.args.size()) {
            continue;
        }
        Binding b;
        bool unifies = true;
        for (std::size_t i = 0; i < goal.args.size() && unifies; ++i) {
            const Term& h = rule.head.args[i];
            const Term& g = goal.args[i];
            if (g.is_variable()) {
                continue;
            }
            if (h.is_variable()) {
                auto [it, fresh] = b.emplace(h.text(), g);
                unifies = fresh || it->second == g;
            } else {
                unifies = h == g;
            }
        }
        if (!unifies) {
            continue;
        }
        if (!beliefs) {
            beliefs = belief_base(agent.manifest.id);
        }
        RoleMap roles{{"self", agent.manifest.id}};
        b.emplace("self", Term::symbol(agent.manifest.id));
        std::vector<Binding> sols;
        try {
            sols = eval_condition(rule.guard, b, EvalContext{&data_, &mental_, roles, &*beliefs});
        } catch (const Error& e) {
            return {false, e.what(), {}};
        }
        if (sols.empty()) {
            continue;
        }
        agent.plan.push_back(Frame{goal, &rule, std::move(sols.front()), 0});
        emit(&trace_, {{"tick", now_}, {"event", "plan"}, {"agent", agent.manifest.id}, {"goal", goal.to_string()},
                       {"depth", agent.plan.size()}});
        return {true, {}, {}};
    }
    return {false, "no applicable plan rule for " + goal.to_string(), {}};
}

Runtime::StepResult Runtime::run_step(AgentState& agent, const GoalTerm& step) {
    switch (classify(agent.manifest.id, step.name)) {
        case GoalKind::Internal: return run_internal(agent, registry_.action(step.name), step);
        case GoalKind::External: return run_external(agent, registry_.action(step.name), step);
        case GoalKind::Composed: return push_plan(agent, step);
    }
    return {false, "unclassified goal", {}};
}

void Runtime::finish_goal(AgentState& agent, bool ok, const std::string& reason) {
    GoalOutcome o{agent.manifest.id, agent.current ? agent.current->to_string() : std::string{}, ok, reason, now_};
    nlohmann::json line{{"tick", now_},
                        {"event", "goal"},
                        {"agent", o.agent},
                        {"goal", o.goal},
                        {"status", ok ? "succeeded" : "failed"}};
    if (!reason.empty()) {
        line["reason"] = reason;
    }
    emit(&trace_, std::move(line));
    outcomes_.push_back(std::move(o));
    agent.current.reset();
    agent.plan.clear();
}

void Runtime::agent_step(AgentState& agent) {
    if (!agent.current) {
        if (agent.goals.empty()) {
            return;
        }
        agent.current = agent.goals.front();
        agent.goals.pop_front();
        const GoalTerm goal = *agent.current;
        emit(&trace_, {{"tick", now_},
                       {"event", "goal"},
                       {"agent", agent.manifest.id},
                       {"goal", goal.to_string()},
                       {"kind", to_string(classify(agent.manifest.id, goal.name))},
                       {"status", "started"}});
        auto r = run_step(agent, goal);
        if (!r.ok) {
            finish_goal(agent, false, r.reason);
        } else if (agent.plan.empty()) {
            finish_goal(agent, true, {});
        }
        return;
    }

    Frame& top = agent.plan.back();
    if (top.pc >= top.rule->body.size()) {
        Frame done = std::move(agent.plan.back());
        agent.plan.pop_back();
        if (agent.plan.empty()) {
            finish_goal(agent, true, {});
            return;
        }
        Frame& parent = agent.plan.back();
        for (std::size_t i = 0; i < done.goal.args.size(); ++i) {
            if (done.goal.args[i].is_variable()) {
                const Term& v = resolve(done.rule->head.args[i], done.bindings);
                if (!v.is_variable()) {
                    parent.bindings.insert_or_assign(done.goal.args[i].text(), v);
                }
            }
        }
        return;
    }
    const GoalTerm step = top.rule->body[top.pc].substitute(top.bindings);
    ++top.pc;
    const std::size_t frame = agent.plan.size() - 1;
    auto r = run_step(agent, step);
    if (!r.ok) {
        finish_goal(agent, false, r.reason);
        return;
    }
    for (auto& [k, v] : r.bound) {
        agent.plan[frame].bindings.insert_or_assign(k, v);
    }
}

RunReport Runtime::run_scheduler(std::size_t max_ticks) {
    if (max_ticks == 0) {
        throw Error(ErrorCode::InvalidArgument, "max_ticks must be at least 1");
    }
    RunReport report;
    const std::size_t first_outcome = outcomes_.size();
    const std::size_t first_conversation = conversations_.size();
    auto all_idle = [&] {
        return std::all_of(agents_.begin(), agents_.end(), [&](const auto& kv) { return idle(kv.second); });
    };
    while (report.ticks < max_ticks && !all_idle()) {
        ++report.ticks;
        ++now_;
        for (const auto& id : order_) {
            agent_step(agents_.at(id));
        }
    }
    for (const auto& id : order_) {
        auto& a = agents_.at(id);
        if (a.current) {
            finish_goal(a, false, "tick budget exhausted");
        }
        while (!a.goals.empty()) {
            a.current = a.goals.front();
            a.goals.pop_front();
            finish_goal(a, false, "tick budget exhausted");
        }
    }
    report.goals.assign(outcomes_.begin() + static_cast<std::ptrdiff_t>(first_outcome), outcomes_.end());
    report.conversations.assign(conversations_.begin() + static_cast<std::ptrdiff_t>(first_conversation),
                                conversations_.end());
    return report;
}

} // namespace agentcomm
