#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentcomm/term.hpp"

namespace agentcomm {

namespace vocab {
inline constexpr const char* kSubClassOf = "rdfs:subClassOf";
inline constexpr const char* kType = "rdf:type";
inline constexpr const char* kClass = "rdfs:Class";
inline constexpr const char* kOwlClass = "owl:Class";
} // namespace vocab

/// A ground triple held by a store.
struct Statement {
    Term subject;
    Term predicate;
    Term object;

    bool is_ground() const noexcept {
        return subject.is_ground() && predicate.is_ground() && object.is_ground();
    }
    std::string to_string() const;

    friend bool operator==(const Statement&, const Statement&) = default;
    friend std::partial_ordering operator<=>(const Statement&, const Statement&) = default;
};

/// A triple whose positions may hold variables.
struct Pattern {
    Term subject;
    Term predicate;
    Term object;

    Pattern substitute(const Binding& binding) const;
    /// Only valid when every position is ground after substitution.
    Statement ground(const Binding& binding) const;
    bool is_ground() const noexcept {
        return subject.is_ground() && predicate.is_ground() && object.is_ground();
    }
    std::set<std::string> variables() const;
    std::string to_string() const;

    friend bool operator==(const Pattern&, const Pattern&) = default;
};

Pattern to_pattern(const Statement& s);

/// Extends `binding` so that `pattern` equals `stmt`; nullopt when impossible.
std::optional<Binding> unify(const Pattern& pattern, const Statement& stmt, const Binding& binding);

nlohmann::json triple_to_json(const Statement& s);
nlohmann::json pattern_to_json(const Pattern& p);
Statement statement_from_json(const nlohmann::json& j);
Pattern pattern_from_json(const nlohmann::json& j);

/// In-memory triple store with set semantics and insertion-ordered,
/// deterministic conjunctive queries.
///
/// Mutation is expected to be serialized by the caller; const member
/// functions never touch shared mutable state, so concurrent readers are
/// safe between writes.
class KnowledgeStore {
public:
    using Revision = std::uint64_t;

    /// Throws NonGroundStatement. Every call bumps the revision, even when
    /// the statement was already present.
    Revision assert_stmt(const Statement& stmt);
    /// Returns true iff the statement was present. Throws NonGroundStatement.
    bool retract_stmt(const Statement& stmt);

    bool contains(const Statement& stmt) const;

    /// Every extension of `seed` that satisfies all patterns. Results are
    /// ordered by the insertion order of the matched statements, pattern by
    /// pattern; an empty pattern list yields `{seed}`.
    std::vector<Binding> query(std::span<const Pattern> patterns, const Binding& seed = {}) const;
    std::vector<Binding> query(std::initializer_list<Pattern> patterns, const Binding& seed = {}) const {
        return query(std::span<const Pattern>(patterns.begin(), patterns.size()), seed);
    }

    /// Statements matching a single pattern, in insertion order.
    std::vector<Statement> match(const Pattern& pattern) const;

    /// Reflexive-transitive closure over rdfs:subClassOf; cycles are fine.
    bool is_subclass(const Term& sub, const Term& super) const;
    /// True when the term is declared a class or takes part in a subclass edge.
    bool is_known_class(const Term& cls) const;

    std::size_t size() const noexcept { return by_seq_.size(); }
    bool empty() const noexcept { return by_seq_.empty(); }
    Revision revision() const noexcept { return revision_; }
    std::vector<Statement> statements() const;

    /// Bootstrap format: JSON array of `[s, p, o]` arrays.
    void load_json(const nlohmann::json& triples);
    void load_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;

private:
    void query_from(std::span<const Pattern> patterns, std::size_t index, const Binding& binding,
                    std::vector<Binding>& out) const;
    std::vector<std::uint64_t> candidates(const Pattern& grounded) const;

    std::map<std::uint64_t, Statement> by_seq_;
    std::map<Statement, std::uint64_t> seq_of_;
    std::unordered_map<Term, std::set<std::uint64_t>> by_subject_;
    std::unordered_map<Term, std::set<std::uint64_t>> by_predicate_;
    std::unordered_map<Term, std::set<std::uint64_t>> by_object_;
    std::uint64_t next_seq_ = 0;
    Revision revision_ = 0;
};

} // namespace agentcomm
