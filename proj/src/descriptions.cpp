#include "agentcomm/descriptions.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "agentcomm/error.hpp"

namespace agentcomm {

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key, std::string_view where) {
    if (!j.is_object() || !j.contains(key)) {
        throw Error(ErrorCode::ParseError, std::string(where) + ": missing field \"" + key + "\"");
    }
    return j.at(key);
}

std::string require_string(const nlohmann::json& j, const char* key, std::string_view where) {
    const auto& v = require(j, key, where);
    if (!v.is_string()) {
        throw Error(ErrorCode::ParseError, std::string(where) + ": field \"" + key + "\" must be a string");
    }
    return v.get<std::string>();
}

} // namespace

SearleClass parse_searle_class(std::string_view text) {
    if (text == "assertive") return SearleClass::Assertive;
    if (text == "directive") return SearleClass::Directive;
    if (text == "commissive") return SearleClass::Commissive;
    if (text == "expressive") return SearleClass::Expressive;
    throw Error(ErrorCode::SchemaError, "unknown Searle class '" + std::string(text) + "'");
}

std::string_view to_string(SearleClass c) noexcept {
    switch (c) {
        case SearleClass::Assertive: return "assertive";
        case SearleClass::Directive: return "directive";
        case SearleClass::Commissive: return "commissive";
        case SearleClass::Expressive: return "expressive";
    }
    return "?";
}

ContentSchema required_content(SearleClass c) noexcept {
    switch (c) {
        case SearleClass::Assertive: return ContentSchema{false, true, false, false};
        case SearleClass::Directive: return ContentSchema{true, false, false, false};
        case SearleClass::Commissive: return ContentSchema{true, false, true, false};
        case SearleClass::Expressive: return ContentSchema{true, false, false, true};
    }
    return {};
}

Trigger parse_trigger(std::string_view text) {
    if (text == "performed") return Trigger::Performed;
    if (text == "failed") return Trigger::Failed;
    if (text == "winner") return Trigger::Winner;
    if (text == "loser") return Trigger::Loser;
    if (text == "timeout") return Trigger::Timeout;
    throw Error(ErrorCode::SchemaError, "unknown transition trigger '" + std::string(text) + "'");
}

std::string_view to_string(Trigger t) noexcept {
    switch (t) {
        case Trigger::Performed: return "performed";
        case Trigger::Failed: return "failed";
        case Trigger::Winner: return "winner";
        case Trigger::Loser: return "loser";
        case Trigger::Timeout: return "timeout";
    }
    return "?";
}

const ProtocolState& ProtocolDescription::start_state() const {
    for (const auto& s : states) {
        if (s.kind == StateKind::Start) {
            return s;
        }
    }
    throw Error(ErrorCode::SchemaError, "protocol '" + name + "' has no start state");
}

const ProtocolState* ProtocolDescription::find_state(std::string_view id) const {
    for (const auto& s : states) {
        if (s.id == id) {
            return &s;
        }
    }
    return nullptr;
}

std::vector<const Transition*> ProtocolDescription::outgoing(std::string_view state) const {
    std::vector<const Transition*> out;
    for (const auto& t : transitions) {
        if (t.from == state) {
            out.push_back(&t);
        }
    }
    return out;
}

bool ProtocolDescription::is_accept(std::string_view state) const {
    const auto* s = find_state(state);
    return s != nullptr && s->kind == StateKind::Accept;
}

// ---------------------------------------------------------------------------

ProcessNode process_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw Error(ErrorCode::ParseError, "process node must be an object: " + j.dump());
    }
    auto children = [](const nlohmann::json& arr) {
        if (!arr.is_array()) {
            throw Error(ErrorCode::ParseError, "process children must be an array");
        }
        std::vector<ProcessNode> out;
        for (const auto& c : arr) {
            out.push_back(process_from_json(c));
        }
        return out;
    };
    if (j.contains("atomic")) {
        if (!j["atomic"].is_string()) {
            throw Error(ErrorCode::ParseError, "atomic node must name a host operation");
        }
        return ProcessNode{AtomicNode{j["atomic"].get<std::string>()}};
    }
    if (j.contains("sequence")) {
        return ProcessNode{SequenceNode{children(j["sequence"])}};
    }
    if (j.contains("concurrence")) {
        return ProcessNode{ConcurrenceNode{children(j["concurrence"])}};
    }
    if (j.contains("alternative")) {
        const auto& arr = j["alternative"];
        if (!arr.is_array() || arr.empty()) {
            throw Error(ErrorCode::SchemaError, "alternative needs at least one branch");
        }
        AlternativeNode alt;
        for (const auto& b : arr) {
            alt.branches.push_back(AlternativeBranch{condition_from_json(b.value("when", nlohmann::json::array())),
                                                     std::make_shared<const ProcessNode>(
                                                         process_from_json(require(b, "do", "alternative branch")))});
        }
        return ProcessNode{std::move(alt)};
    }
    if (j.contains("iteration")) {
        const auto& it = j["iteration"];
        IterationNode node;
        node.body = std::make_shared<const ProcessNode>(process_from_json(require(it, "body", "iteration")));
        node.until = condition_from_json(require(it, "until", "iteration"));
        const auto& max = require(it, "maxIters", "iteration");
        if (!max.is_number_integer() || max.get<int>() < 1) {
            throw Error(ErrorCode::SchemaError, "iteration maxIters must be an integer >= 1");
        }
        node.max_iters = max.get<int>();
        return ProcessNode{std::move(node)};
    }
    throw Error(ErrorCode::ParseError, "unknown process node: " + j.dump());
}

namespace {

void collect_ops(const ProcessNode& node, std::vector<std::string>& out) {
    std::visit(
        [&out](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, AtomicNode>) {
                if (std::find(out.begin(), out.end(), n.op) == out.end()) {
                    out.push_back(n.op);
                }
            } else if constexpr (std::is_same_v<T, SequenceNode> || std::is_same_v<T, ConcurrenceNode>) {
                for (const auto& c : n.children) collect_ops(c, out);
            } else if constexpr (std::is_same_v<T, AlternativeNode>) {
                for (const auto& b : n.branches) collect_ops(*b.body, out);
            } else {
                collect_ops(*n.body, out);
            }
        },
        node.node);
}

std::vector<Parameter> parameters_from_json(const nlohmann::json& j, std::string_view where) {
    if (!j.is_array()) {
        throw Error(ErrorCode::ParseError, std::string(where) + " must be an array");
    }
    std::vector<Parameter> out;
    std::set<std::string> seen;
    for (const auto& p : j) {
        Parameter param{require_string(p, "name", where), Term::symbol(require_string(p, "dataType", where))};
        if (!seen.insert(param.name).second) {
            throw Error(ErrorCode::SchemaError, std::string(where) + ": duplicate parameter '" + param.name + "'");
        }
        out.push_back(std::move(param));
    }
    return out;
}

void validate_protocol(const ProtocolDescription& p) {
    const std::string where = "protocol '" + p.name + "'";
    std::set<std::string> ids;
    int starts = 0;
    int accepts = 0;
    for (const auto& s : p.states) {
        if (!ids.insert(s.id).second) {
            throw Error(ErrorCode::SchemaError, where + ": duplicate state '" + s.id + "'");
        }
        starts += s.kind == StateKind::Start;
        accepts += s.kind == StateKind::Accept;
    }
    if (starts != 1) {
        throw Error(ErrorCode::SchemaError, where + ": needs exactly one start state, found " + std::to_string(starts));
    }
    if (accepts < 1) {
        throw Error(ErrorCode::SchemaError, where + ": needs at least one accept state");
    }
    std::set<std::string> roles(p.participant_roles.begin(), p.participant_roles.end());
    roles.insert(p.initiator_role);
    for (const auto& t : p.transitions) {
        if (!ids.contains(t.from) || !ids.contains(t.to)) {
            throw Error(ErrorCode::SchemaError, where + ": transition " + t.from + " -> " + t.to + " names an unknown state");
        }
        if (!roles.contains(t.sender) || !roles.contains(t.receiver)) {
            throw Error(ErrorCode::SchemaError,
                        where + ": transition " + t.from + " -> " + t.to + " uses an undeclared role");
        }
    }
    for (const auto& s : p.states) {
        auto out = p.outgoing(s.id);
        if (s.kind == StateKind::Accept && !out.empty()) {
            throw Error(ErrorCode::SchemaError, where + ": accept state '" + s.id + "' has outgoing transitions");
        }
        if (s.kind != StateKind::Accept && out.empty()) {
            throw Error(ErrorCode::SchemaError, where + ": state '" + s.id + "' has no outgoing transition");
        }
    }

    // Every state reachable from start.
    std::set<std::string> reached{p.start_state().id};
    std::deque<std::string> frontier{p.start_state().id};
    while (!frontier.empty()) {
        auto cur = frontier.front();
        frontier.pop_front();
        for (const auto* t : p.outgoing(cur)) {
            if (reached.insert(t->to).second) {
                frontier.push_back(t->to);
            }
        }
    }
    for (const auto& s : p.states) {
        if (!reached.contains(s.id)) {
            throw Error(ErrorCode::SchemaError, where + ": state '" + s.id + "' is unreachable from start");
        }
    }

    // An accept state reachable from every state (backward search).
    std::set<std::string> can_finish;
    for (const auto& s : p.states) {
        if (s.kind == StateKind::Accept) {
            can_finish.insert(s.id);
        }
    }
    for (bool grew = true; grew;) {
        grew = false;
        for (const auto& t : p.transitions) {
            if (can_finish.contains(t.to) && can_finish.insert(t.from).second) {
                grew = true;
            }
        }
    }
    for (const auto& s : p.states) {
        if (!can_finish.contains(s.id)) {
            throw Error(ErrorCode::SchemaError, where + ": no accept state reachable from '" + s.id + "'");
        }
    }
}

ProtocolDescription protocol_from_json(const nlohmann::json& j, std::string name) {
    ProtocolDescription p;
    p.name = std::move(name);
    const std::string where = "protocol '" + p.name + "'";
    p.family = j.value("family", std::string{});
    p.initiator_role = require_string(j, "hasInitiator", where);
    const auto& parts = require(j, "hasParticipant", where);
    if (!parts.is_array() || parts.empty()) {
        throw Error(ErrorCode::SchemaError, where + ": hasParticipant must be a non-empty array");
    }
    for (const auto& r : parts) {
        p.participant_roles.push_back(r.get<std::string>());
    }
    const auto& states = require(j, "states", where);
    if (!states.is_array()) {
        throw Error(ErrorCode::ParseError, where + ": states must be an array");
    }
    for (const auto& s : states) {
        ProtocolState st;
        st.id = require_string(s, "id", where);
        auto kind = require_string(s, "kind", where);
        if (kind == "start") st.kind = StateKind::Start;
        else if (kind == "transit") st.kind = StateKind::Transit;
        else if (kind == "accept") st.kind = StateKind::Accept;
        else throw Error(ErrorCode::SchemaError, where + ": unknown state kind '" + kind + "'");
        auto outcome = s.value("outcome", std::string("success"));
        if (outcome != "success" && outcome != "failure") {
            throw Error(ErrorCode::SchemaError, where + ": state outcome must be success or failure");
        }
        st.failure = outcome == "failure";
        if (st.failure && st.kind != StateKind::Accept) {
            throw Error(ErrorCode::SchemaError, where + ": only accept states carry an outcome");
        }
        p.states.push_back(std::move(st));
    }
    const auto& transitions = require(j, "constructedBy", where);
    if (!transitions.is_array()) {
        throw Error(ErrorCode::ParseError, where + ": constructedBy must be an array");
    }
    for (const auto& t : transitions) {
        Transition tr;
        tr.from = require_string(t, "from", where);
        tr.to = require_string(t, "to", where);
        tr.execute = require_string(t, "execute", where);
        tr.sender = require_string(t, "sender", where);
        tr.receiver = require_string(t, "receiver", where);
        if (t.contains("guard") && !t["guard"].is_null()) {
            tr.guard = condition_from_json(t["guard"]);
        }
        tr.on = parse_trigger(t.value("on", std::string("performed")));
        p.transitions.push_back(std::move(tr));
    }
    validate_protocol(p);
    return p;
}

CommunicativeActDescription ca_from_json(const nlohmann::json& j, std::string name) {
    CommunicativeActDescription ca;
    ca.name = std::move(name);
    const std::string where = "communicative act '" + ca.name + "'";
    ca.searle_class = parse_searle_class(require_string(j, "searleClass", where));
    const auto& content = require(j, "content", where);
    auto flag = [&](const char* key) {
        const auto& v = require(content, key, where + " content");
        if (!v.is_boolean()) {
            throw Error(ErrorCode::ParseError, where + ": content flag \"" + key + "\" must be boolean");
        }
        return v.get<bool>();
    };
    ca.content = ContentSchema{flag("action"), flag("proposition"), flag("condition"), flag("reason")};
    ca.fp = condition_from_json(require(j, "fp", where));
    ca.re = effects_from_json(require(j, "re", where));
    if (j.contains("executes")) {
        auto role = j["executes"].get<std::string>();
        if (role != "sender" && role != "receiver") {
            throw Error(ErrorCode::SchemaError, where + ": executes must be \"sender\" or \"receiver\"");
        }
        ca.executes = role;
    }

    const ContentSchema want = required_content(ca.searle_class);
    if (ca.content != want) {
        static constexpr const char* kRule[] = {
            "assertive content contains only a proposition",
            "directive content contains only an action",
            "commissive content contains a condition and an action",
            "expressive content contains a reason and an action",
        };
        throw Error(ErrorCode::SchemaError,
                    where + " violates the Searle content rule: " + kRule[static_cast<int>(ca.searle_class)]);
    }
    if (ca.executes && !ca.content.action) {
        throw Error(ErrorCode::SchemaError, where + ": executes requires action content");
    }
    return ca;
}

ActionDescription action_from_json(const nlohmann::json& j, std::string name) {
    ActionDescription a;
    a.name = std::move(name);
    const std::string where = "action '" + a.name + "'";
    a.capability = Term::symbol(require_string(j, "capability", where));
    a.inputs = parameters_from_json(require(j, "inputs", where), where + " inputs");
    a.outputs = parameters_from_json(require(j, "outputs", where), where + " outputs");
    a.precondition = condition_from_json(require(j, "precondition", where));
    a.effect = effects_from_json(require(j, "effect", where));
    a.process = process_from_json(require(j, "process", where));

    std::set<std::string> available{"agent", "self"};
    for (const auto& p : a.inputs) available.insert(p.name);
    for (const auto& p : a.outputs) available.insert(p.name);
    for (const auto& v : bound_variables(a.precondition)) available.insert(v);
    for (const auto& v : mentioned_variables(a.effect)) {
        if (!available.contains(v)) {
            throw Error(ErrorCode::SchemaError, where + ": effect variable ?" + v + " is never bound");
        }
    }
    for (const auto& e : a.effect) {
        if (e.scope && e.scope->kind != Scope::Kind::Data) {
            throw Error(ErrorCode::SchemaError, where + ": action effects target the data model only");
        }
    }
    return a;
}

} // namespace

std::vector<std::string> atomic_ops(const ProcessNode& node) {
    std::vector<std::string> out;
    collect_ops(node, out);
    return out;
}

const std::string& description_name(const Description& d) {
    return std::visit([](const auto& x) -> const std::string& { return x.name; }, d);
}

std::string_view description_type(const Description& d) {
    switch (d.index()) {
        case 0: return "Protocol";
        case 1: return "CommunicativeAct";
        default: return "Action";
    }
}

Description load_description(const nlohmann::json& j) {
    const std::string type = require_string(j, "type", "description");
    std::string name = require_string(j, "name", "description");
    if (name.empty()) {
        throw Error(ErrorCode::SchemaError, "description name must not be empty");
    }
    try {
        if (type == "Protocol") return protocol_from_json(j, std::move(name));
        if (type == "CommunicativeAct") return ca_from_json(j, std::move(name));
        if (type == "Action") return action_from_json(j, std::move(name));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed description: ") + e.what());
    }
    throw Error(ErrorCode::SchemaError, "unknown description type '" + type + "'");
}

Description load_description(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    return load_description(j);
}

Description load_description_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ConfigError, "cannot open description " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return load_description(std::string_view(ss.str()));
    } catch (const Error& e) {
        throw Error(e.code(), path.filename().string() + ": " + e.what(), e.details());
    }
}

std::vector<Description> load_bundle(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw Error(ErrorCode::ConfigError, "description bundle " + dir.string() + " is not a directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<Description> out;
    for (const auto& f : files) {
        out.push_back(load_description_file(f));
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
const T* find_as(const std::map<std::string, Description, std::less<>>& entries, std::string_view name) {
    auto it = entries.find(name);
    if (it == entries.end()) {
        return nullptr;
    }
    return std::get_if<T>(&it->second);
}

} // namespace

const ProtocolDescription* Registry::find_protocol(std::string_view name) const {
    return find_as<ProtocolDescription>(entries_, name);
}

const CommunicativeActDescription* Registry::find_ca(std::string_view name) const {
    return find_as<CommunicativeActDescription>(entries_, name);
}

const ActionDescription* Registry::find_action(std::string_view name) const {
    return find_as<ActionDescription>(entries_, name);
}

const ProtocolDescription& Registry::protocol(std::string_view name) const {
    if (const auto* p = find_protocol(name)) return *p;
    throw Error(ErrorCode::UnknownProtocol, "no protocol named '" + std::string(name) + "'");
}

const CommunicativeActDescription& Registry::ca(std::string_view name) const {
    if (const auto* c = find_ca(name)) return *c;
    throw Error(ErrorCode::UnknownCA, "no communicative act named '" + std::string(name) + "'");
}

const ActionDescription& Registry::action(std::string_view name) const {
    if (const auto* a = find_action(name)) return *a;
    throw Error(ErrorCode::DanglingReference, "no action named '" + std::string(name) + "'");
}

std::vector<std::string> Registry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : entries_) out.push_back(name);
    return out;
}

std::vector<const ProtocolDescription*> Registry::protocols() const {
    std::vector<const ProtocolDescription*> out;
    for (const auto& [_, d] : entries_) {
        if (const auto* p = std::get_if<ProtocolDescription>(&d)) out.push_back(p);
    }
    return out;
}

std::vector<const CommunicativeActDescription*> Registry::cas() const {
    std::vector<const CommunicativeActDescription*> out;
    for (const auto& [_, d] : entries_) {
        if (const auto* c = std::get_if<CommunicativeActDescription>(&d)) out.push_back(c);
    }
    return out;
}

Registry link(std::vector<Description> descriptions) {
    Registry reg;
    std::vector<std::string> duplicates;
    for (auto& d : descriptions) {
        std::string name = description_name(d);
        if (reg.entries_.contains(name)) {
            duplicates.push_back("duplicate description name '" + name + "'");
            continue;
        }
        reg.entries_.emplace(std::move(name), std::move(d));
    }
    std::sort(duplicates.begin(), duplicates.end());
    duplicates.erase(std::unique(duplicates.begin(), duplicates.end()), duplicates.end());

    std::vector<std::string> dangling;
    for (const auto& [name, d] : reg.entries_) {
        if (const auto* p = std::get_if<ProtocolDescription>(&d)) {
            for (const auto& t : p->transitions) {
                if (reg.find_ca(t.execute) == nullptr) {
                    dangling.push_back("protocol '" + name + "' executes missing communicative act '" + t.execute + "'");
                }
            }
        }
    }
    std::sort(dangling.begin(), dangling.end());
    dangling.erase(std::unique(dangling.begin(), dangling.end()), dangling.end());

    if (!duplicates.empty()) {
        // Which copy of a duplicate survived depends on input order, so
        // dangling references are not reported alongside duplicates.
        throw Error(ErrorCode::DuplicateName, duplicates.front(), duplicates);
    }
    if (!dangling.empty()) {
        throw Error(ErrorCode::DanglingReference, dangling.front(), dangling);
    }
    return reg;
}

} // namespace agentcomm
