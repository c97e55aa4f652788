#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "agentcomm/condition.hpp"

namespace agentcomm {

// ---------------------------------------------------------------------------
// Communicative acts

enum class SearleClass { Assertive, Directive, Commissive, Expressive };

SearleClass parse_searle_class(std::string_view text);
std::string_view to_string(SearleClass c) noexcept;

struct ContentSchema {
    bool action = false;
    bool proposition = false;
    bool condition = false;
    bool reason = false;

    friend bool operator==(const ContentSchema&, const ContentSchema&) = default;
};

/// The content shape each Searle class admits:
///   assertive   proposition only
///   directive   action only
///   commissive  condition + action
///   expressive  reason + action
ContentSchema required_content(SearleClass c) noexcept;

struct CommunicativeActDescription {
    std::string name;
    SearleClass searle_class = SearleClass::Directive;
    ContentSchema content;
    Condition fp;
    Effects re;
    /// Role ("sender" or "receiver") that carries out the content action
    /// when this act is performed; unset for acts that only mention it.
    std::optional<std::string> executes;
};

// ---------------------------------------------------------------------------
// Interaction protocols

enum class StateKind { Start, Transit, Accept };

struct ProtocolState {
    std::string id;
    StateKind kind = StateKind::Transit;
    /// Accept states flagged as failure-terminal end the conversation as failed.
    bool failure = false;
};

/// What licenses a transition out of a state.
///   performed  the lane's last act went through (or the attempted act does)
///   failed     the lane carries a failure, or the success sibling is infeasible
///   winner     the lane won proposal evaluation
///   loser      the lane lost proposal evaluation
///   timeout    the lane waited past the response budget
enum class Trigger { Performed, Failed, Winner, Loser, Timeout };

Trigger parse_trigger(std::string_view text);
std::string_view to_string(Trigger t) noexcept;

struct Transition {
    std::string from;
    std::string to;
    std::string execute;
    std::string sender;
    std::string receiver;
    std::optional<Condition> guard;
    Trigger on = Trigger::Performed;
};

struct ProtocolDescription {
    std::string name;
    /// "request" or "contract-net"; used by act and protocol selection.
    std::string family;
    std::string initiator_role;
    std::vector<std::string> participant_roles;
    std::vector<ProtocolState> states;
    std::vector<Transition> transitions;

    const ProtocolState& start_state() const;
    const ProtocolState* find_state(std::string_view id) const;
    std::vector<const Transition*> outgoing(std::string_view state) const;
    bool is_accept(std::string_view state) const;
};

// ---------------------------------------------------------------------------
// Actions

struct Parameter {
    std::string name;
    Term data_type;
};

struct ProcessNode;

struct AtomicNode {
    std::string op;
};
struct SequenceNode {
    std::vector<ProcessNode> children;
};
struct ConcurrenceNode {
    std::vector<ProcessNode> children;
};
struct AlternativeBranch {
    Condition when;
    std::shared_ptr<const ProcessNode> body;
};
struct AlternativeNode {
    std::vector<AlternativeBranch> branches;
};
struct IterationNode {
    std::shared_ptr<const ProcessNode> body;
    Condition until;
    int max_iters = 1;
};

struct ProcessNode {
    std::variant<AtomicNode, SequenceNode, ConcurrenceNode, AlternativeNode, IterationNode> node;
};

ProcessNode process_from_json(const nlohmann::json& j);
/// Atomic op names in declaration order (duplicates removed).
std::vector<std::string> atomic_ops(const ProcessNode& node);

struct ActionDescription {
    std::string name;
    Term capability;
    std::vector<Parameter> inputs;
    std::vector<Parameter> outputs;
    Condition precondition;
    Effects effect;
    ProcessNode process;
};

// ---------------------------------------------------------------------------
// Loading and linking

using Description = std::variant<ProtocolDescription, CommunicativeActDescription, ActionDescription>;

const std::string& description_name(const Description& d);
std::string_view description_type(const Description& d);

/// Parses and validates one description. Throws ParseError for malformed
/// JSON or missing fields, SchemaError for invariant violations.
Description load_description(std::string_view json_text);
Description load_description(const nlohmann::json& j);
Description load_description_file(const std::filesystem::path& path);
/// Every `*.json` file of a directory, in file-name order.
std::vector<Description> load_bundle(const std::filesystem::path& dir);

/// Resolved, immutable set of descriptions.
class Registry {
public:
    const ProtocolDescription* find_protocol(std::string_view name) const;
    const CommunicativeActDescription* find_ca(std::string_view name) const;
    const ActionDescription* find_action(std::string_view name) const;

    const ProtocolDescription& protocol(std::string_view name) const;
    const CommunicativeActDescription& ca(std::string_view name) const;
    const ActionDescription& action(std::string_view name) const;

    std::vector<std::string> names() const;
    std::vector<const ProtocolDescription*> protocols() const;
    std::vector<const CommunicativeActDescription*> cas() const;
    std::size_t size() const noexcept { return entries_.size(); }

private:
    friend Registry link(std::vector<Description> descriptions);
    std::map<std::string, Description, std::less<>> entries_;
};

/// Resolves cross references. Collects every problem before failing; the
/// thrown Error lists them (sorted) in `details()`, so the outcome does not
/// depend on input order. Throws DuplicateName when any name repeats,
/// otherwise DanglingReference.
Registry link(std::vector<Description> descriptions);

} // namespace agentcomm
