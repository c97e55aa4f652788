#include "agentcomm/action_engine.hpp"

#include <cmath>
#include <set>

namespace agentcomm {

Term input_predicate(const std::string& name) {
    return Term::symbol("input:" + name);
}

Term output_predicate(const std::string& name) {
    return Term::symbol("output:" + name);
}

std::string_view to_string(ExecutionStatus s) noexcept {
    switch (s) {
        case ExecutionStatus::Succeeded: return "succeeded";
        case ExecutionStatus::PreconditionFailed: return "precondition_failed";
        case ExecutionStatus::StepFailed: return "step_failed";
    }
    return "?";
}

bool conforms(const Term& value, const Term& data_type, const KnowledgeStore& data) {
    const std::string& type = data_type.text();
    if (type == "xsd:string") return value.kind() == TermKind::String;
    if (type == "xsd:decimal" || type == "xsd:double") return value.is_number();
    if (type == "xsd:integer") return value.is_number() && std::trunc(value.number_value()) == value.number_value();
    if (type == "xsd:boolean") return value.kind() == TermKind::Boolean;
    if (type == "owl:Thing" || type == "xsd:anyURI") return value.is_symbol();
    if (!value.is_symbol()) {
        return false;
    }
    if (data.is_subclass(value, data_type)) {
        return true;
    }
    for (const auto& stmt : data.match(Pattern{value, Term::symbol(vocab::kType), Term::variable("c")})) {
        if (data.is_subclass(stmt.object, data_type)) {
            return true;
        }
    }
    return false;
}

namespace {

ProcessOutcome fail(ErrorCode code, std::string message) {
    return ProcessOutcome{{}, StepFailure{code, std::move(message)}};
}

bool holds(const Condition& cond, const Binding& b, const KnowledgeStore& data) {
    return !eval_condition(cond, b, EvalContext{&data, nullptr, {}, nullptr}).empty();
}

} // namespace

ProcessOutcome run_process(const ProcessNode& node, const Binding& bindings, const ProcessContext& ctx) {
    return std::visit(
        [&](const auto& n) -> ProcessOutcome {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, AtomicNode>) {
                const HostFunction* fn = ctx.hosts.find(n.op);
                if (fn == nullptr) {
                    throw Error(ErrorCode::UnboundAtomicOp, "no host binding for '" + n.op + "'");
                }
                HostResult r = (*fn)(HostCall{bindings, ctx.data, ctx.agent});
                if (r.failure) {
                    return fail(ErrorCode::HostOperationFailed, n.op + ": " + *r.failure);
                }
                Binding out = bindings;
                for (auto& [k, v] : r.outputs) {
                    out.insert_or_assign(k, std::move(v));
                }
                return ProcessOutcome{std::move(out), std::nullopt};
            } else if constexpr (std::is_same_v<T, SequenceNode>) {
                Binding current = bindings;
                for (const auto& child : n.children) {
                    auto r = run_process(child, current, ctx);
                    if (!r.ok()) {
                        return r;
                    }
                    current = std::move(r.bindings);
                }
                return ProcessOutcome{std::move(current), std::nullopt};
            } else if constexpr (std::is_same_v<T, ConcurrenceNode>) {
                Binding merged = bindings;
                std::map<std::string, std::size_t> written_by;
                for (std::size_t i = 0; i < n.children.size(); ++i) {
                    auto r = run_process(n.children[i], bindings, ctx);
                    if (!r.ok()) {
                        return r;
                    }
                    for (auto& [k, v] : r.bindings) {
                        auto before = bindings.find(k);
                        if (before != bindings.end() && before->second == v) {
                            continue;
                        }
                        if (auto w = written_by.find(k); w != written_by.end()) {
                            if (merged.at(k) != v) {
                                return fail(ErrorCode::BindingConflict,
                                            "concurrent branches " + std::to_string(w->second) + " and " +
                                                std::to_string(i) + " disagree on ?" + k);
                            }
                            continue;
                        }
                        written_by.emplace(k, i);
                        merged.insert_or_assign(k, v);
                    }
                }
                return ProcessOutcome{std::move(merged), std::nullopt};
            } else if constexpr (std::is_same_v<T, AlternativeNode>) {
                for (const auto& branch : n.branches) {
                    auto sols = eval_condition(branch.when, bindings, EvalContext{&ctx.data, nullptr, {}, nullptr});
                    if (!sols.empty()) {
                        return run_process(*branch.body, sols.front(), ctx);
                    }
                }
                return fail(ErrorCode::NoBranchApplicable, "no alternative branch condition holds");
            } else {
                Binding current = bindings;
                for (int i = 0; i < n.max_iters; ++i) {
                    auto r = run_process(*n.body, current, ctx);
                    if (!r.ok()) {
                        return r;
                    }
                    current = std::move(r.bindings);
                    if (holds(n.until, current, ctx.data)) {
                        return ProcessOutcome{std::move(current), std::nullopt};
                    }
                }
                return fail(ErrorCode::IterationBudgetExceeded,
                            "until condition still false after " + std::to_string(n.max_iters) + " iterations");
            }
        },
        node.node);
}

namespace {

std::vector<AppliedChange> store_parameters(KnowledgeStore& data, const Term& subject, const std::vector<Parameter>& params,
                                            const Binding& values, bool outputs) {
    std::vector<AppliedChange> changes;
    for (const auto& p : params) {
        auto it = values.find(p.name);
        if (it == values.end()) {
            continue;
        }
        const Term pred = outputs ? output_predicate(p.name) : input_predicate(p.name);
        for (const auto& old : data.match(Pattern{subject, pred, Term::variable("old")})) {
            if (old.object != it->second) {
                data.retract_stmt(old);
                changes.push_back(AppliedChange{EffectClause::Kind::Retract, Scope::Kind::Data, {}, old, true});
            }
        }
        Statement stmt{subject, pred, it->second};
        bool fresh = !data.contains(stmt);
        data.assert_stmt(stmt);
        changes.push_back(AppliedChange{EffectClause::Kind::Assert, Scope::Kind::Data, {}, stmt, fresh});
    }
    return changes;
}

void checkpoint(Trace* trace, Tick now, const std::string& action, const char* phase, bool ok) {
    emit(trace, {{"tick", now}, {"event", "check"}, {"action", action}, {"phase", phase}, {"ok", ok}});
}

} // namespace

ExecutionRecord execute(const ActionDescription& action, const Binding& inputs, const HostBindings& hosts,
                        KnowledgeStore& data, Tick now, const ExecuteOptions& options) {
    for (const auto& op : atomic_ops(action.process)) {
        if (!hosts.contains(op)) {
            throw Error(ErrorCode::UnboundAtomicOp, "action '" + action.name + "' uses unbound operation '" + op + "'");
        }
    }
    ExecutionRecord rec;
    rec.action = action.name;
    rec.agent = options.agent;
    for (const auto& p : action.inputs) {
        auto it = inputs.find(p.name);
        if (it == inputs.end()) {
            throw Error(ErrorCode::MissingInput, "action '" + action.name + "' needs input '" + p.name + "'");
        }
        if (!conforms(it->second, p.data_type, data)) {
            throw Error(ErrorCode::TypeMismatch, "input '" + p.name + "' = " + it->second.to_string() +
                                                     " is not a " + p.data_type.to_string());
        }
        rec.inputs.emplace(p.name, it->second);
    }
    checkpoint(options.trace, now, action.name, "before-evaluation", true);

    const Term self = Term::symbol(action.name);
    rec.stored_inputs = store_parameters(data, self, action.inputs, rec.inputs, false);

    Binding bindings = rec.inputs;
    if (!options.agent.empty()) {
        bindings.insert_or_assign("agent", Term::symbol(options.agent));
        bindings.insert_or_assign("self", Term::symbol(options.agent));
    }

    auto finish = [&](ExecutionRecord& r) -> ExecutionRecord& {
        emit(options.trace, {{"tick", now},
                             {"event", "action"},
                             {"name", action.name},
                             {"agent", options.agent},
                             {"status", to_string(r.status)},
                             {"outputs", binding_to_json(r.outputs)}});
        return r;
    };

    auto pre = evaluate_condition(action.precondition, bindings, EvalContext{&data, nullptr, {}, nullptr});
    if (pre.solutions.empty()) {
        rec.status = ExecutionStatus::PreconditionFailed;
        rec.reason = Proposition{self, Term::symbol(vocab::kFailedBecause), Term::symbol(vocab::kPreconditionUnsatisfied)};
        if (pre.failing_clause) {
            rec.failing_clause = clause_to_string(action.precondition[*pre.failing_clause]);
        }
        rec.message = "precondition failed at " + rec.failing_clause;
        return finish(rec);
    }
    rec.precondition_held = true;
    bindings = pre.solutions.front();

    auto outcome = run_process(action.process, bindings, ProcessContext{data, hosts, options.agent});
    auto step_failure = [&](std::string message) -> ExecutionRecord& {
        rec.status = ExecutionStatus::StepFailed;
        rec.reason = Proposition{self, Term::symbol(vocab::kFailedBecause), Term::symbol(vocab::kStepFailed)};
        rec.message = std::move(message);
        return finish(rec);
    };
    if (!outcome.ok()) {
        return step_failure(std::string(to_string(outcome.failure->code)) + ": " + outcome.failure->message);
    }
    for (const auto& p : action.outputs) {
        auto it = outcome.bindings.find(p.name);
        if (it == outcome.bindings.end()) {
            return step_failure("process produced no value for output '" + p.name + "'");
        }
        rec.outputs.emplace(p.name, it->second);
    }

    Binding effect_bindings = outcome.bindings;
    rec.applied = apply_effects(action.effect, effect_bindings,
                                EffectTarget{&data, nullptr, {}, Scope{Scope::Kind::Data, {}}}, now);
    bool effects_hold = true;
    for (const auto& c : rec.applied) {
        effects_hold &= data.contains(c.statement) == (c.kind == EffectClause::Kind::Assert);
    }
    checkpoint(options.trace, now, action.name, "after-update", effects_hold);

    auto stored = store_parameters(data, self, action.outputs, rec.outputs, true);
    rec.applied.insert(rec.applied.end(), stored.begin(), stored.end());

    bool outputs_ok = true;
    const Parameter* bad_output = nullptr;
    for (const auto& p : action.outputs) {
        if (!conforms(rec.outputs.at(p.name), p.data_type, data)) {
            outputs_ok = false;
            bad_output = &p;
            break;
        }
    }
    checkpoint(options.trace, now, action.name, "after-execution", outputs_ok && effects_hold);
    if (!outputs_ok) {
        return step_failure("output '" + bad_output->name + "' is not a " + bad_output->data_type.to_string());
    }
    if (!effects_hold) {
        return step_failure("effects do not hold after execution");
    }
    rec.status = ExecutionStatus::Succeeded;
    return finish(rec);
}

ExternalEffects evaluate_external_effects(const ActionDescription& action, const Binding& inputs,
                                          const KnowledgeStore& data, MentalModel& mm, const AgentId& requester,
                                          Tick now) {
    ExternalEffects result;
    std::vector<Pattern> patterns;
    for (const auto& e : action.effect) {
        if (e.kind == EffectClause::Kind::Assert) {
            patterns.push_back(e.pattern);
        }
    }
    if (patterns.empty()) {
        result.satisfiable = true;
        result.bindings = inputs;
        return result;
    }

    auto sols = data.query(patterns, inputs);
    if (!sols.empty()) {
        result.satisfiable = true;
        result.outputs_available = true;
        result.bindings = sols.front();
        for (const auto& p : patterns) {
            Statement stmt = p.ground(result.bindings);
            mm.allocate(reify(stmt, requester, true, now));
            result.reified.push_back(std::move(stmt));
        }
        return result;
    }

    std::set<std::string> supplied{"agent"};
    for (const auto& p : action.outputs) {
        supplied.insert(p.name);
    }
    for (const auto& p : patterns) {
        for (const auto& v : p.substitute(inputs).variables()) {
            if (!supplied.contains(v)) {
                return result;
            }
        }
    }
    result.satisfiable = true;
    result.bindings = inputs;
    return result;
}

} // namespace agentcomm
