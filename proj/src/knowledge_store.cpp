#include "agentcomm/knowledge_store.hpp"

#include <algorithm>
#include <deque>
#include <fstream>

#include "agentcomm/error.hpp"

namespace agentcomm {

std::string Statement::to_string() const {
    return "(" + subject.to_string() + ", " + predicate.to_string() + ", " + object.to_string() + ")";
}

Pattern Pattern::substitute(const Binding& binding) const {
    return Pattern{resolve(subject, binding), resolve(predicate, binding), resolve(object, binding)};
}

Statement Pattern::ground(const Binding& binding) const {
    Pattern p = substitute(binding);
    if (!p.is_ground()) {
        throw Error(ErrorCode::NonGroundStatement, p.to_string() + " has unbound positions");
    }
    return Statement{p.subject, p.predicate, p.object};
}

std::set<std::string> Pattern::variables() const {
    std::set<std::string> vars;
    for (const Term* t : {&subject, &predicate, &object}) {
        if (t->is_variable()) {
            vars.insert(t->text());
        }
    }
    return vars;
}

std::string Pattern::to_string() const {
    return "(" + subject.to_string() + ", " + predicate.to_string() + ", " + object.to_string() + ")";
}

Pattern to_pattern(const Statement& s) {
    return Pattern{s.subject, s.predicate, s.object};
}

namespace {

bool unify_term(const Term& pattern, const Term& value, Binding& binding) {
    if (!pattern.is_variable()) {
        return pattern == value;
    }
    auto [it, inserted] = binding.emplace(pattern.text(), value);
    return inserted || it->second == value;
}

} // namespace

std::optional<Binding> unify(const Pattern& pattern, const Statement& stmt, const Binding& binding) {
    Binding out = binding;
    if (unify_term(resolve(pattern.subject, out), stmt.subject, out) &&
        unify_term(resolve(pattern.predicate, out), stmt.predicate, out) &&
        unify_term(resolve(pattern.object, out), stmt.object, out)) {
        return out;
    }
    return std::nullopt;
}

nlohmann::json triple_to_json(const Statement& s) {
    return nlohmann::json::array({term_to_json(s.subject), term_to_json(s.predicate), term_to_json(s.object)});
}

nlohmann::json pattern_to_json(const Pattern& p) {
    return nlohmann::json::array({term_to_json(p.subject), term_to_json(p.predicate), term_to_json(p.object)});
}

Pattern pattern_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) {
        throw Error(ErrorCode::ParseError, "a triple must be a 3-element array, got " + j.dump());
    }
    // Subject and predicate positions are always symbols unless variables.
    auto position = [](const nlohmann::json& e) {
        if (e.is_string()) {
            auto s = e.get<std::string>();
            if (!s.empty() && s.front() == '?') {
                return Term::variable(s.substr(1));
            }
            return Term::symbol(std::move(s));
        }
        return term_from_json(e);
    };
    return Pattern{position(j[0]), position(j[1]), term_from_json(j[2])};
}

Statement statement_from_json(const nlohmann::json& j) {
    Pattern p = pattern_from_json(j);
    if (!p.is_ground()) {
        throw Error(ErrorCode::NonGroundStatement, p.to_string() + " contains a variable");
    }
    return Statement{p.subject, p.predicate, p.object};
}

KnowledgeStore::Revision KnowledgeStore::assert_stmt(const Statement& stmt) {
    if (!stmt.is_ground()) {
        throw Error(ErrorCode::NonGroundStatement, stmt.to_string());
    }
    if (!seq_of_.contains(stmt)) {
        auto seq = next_seq_++;
        by_seq_.emplace(seq, stmt);
        seq_of_.emplace(stmt, seq);
        by_subject_[stmt.subject].insert(seq);
        by_predicate_[stmt.predicate].insert(seq);
        by_object_[stmt.object].insert(seq);
    }
    return ++revision_;
}

bool KnowledgeStore::retract_stmt(const Statement& stmt) {
    if (!stmt.is_ground()) {
        throw Error(ErrorCode::NonGroundStatement, stmt.to_string());
    }
    auto it = seq_of_.find(stmt);
    if (it == seq_of_.end()) {
        return false;
    }
    auto seq = it->second;
    auto drop = [seq](auto& index, const Term& key) {
        auto pos = index.find(key);
        pos->second.erase(seq);
        if (pos->second.empty()) {
            index.erase(pos);
        }
    };
    drop(by_subject_, stmt.subject);
    drop(by_predicate_, stmt.predicate);
    drop(by_object_, stmt.object);
    by_seq_.erase(seq);
    seq_of_.erase(it);
    ++revision_;
    return true;
}

bool KnowledgeStore::contains(const Statement& stmt) const {
    return seq_of_.contains(stmt);
}

std::vector<std::uint64_t> KnowledgeStore::candidates(const Pattern& p) const {
    const std::set<std::uint64_t>* best = nullptr;
    bool any_index = false;
    auto consider = [&](const auto& index, const Term& key) {
        if (!key.is_ground()) {
            return;
        }
        any_index = true;
        auto it = index.find(key);
        static const std::set<std::uint64_t> kEmpty;
        const auto* bucket = it == index.end() ? &kEmpty : &it->second;
        if (best == nullptr || bucket->size() < best->size()) {
            best = bucket;
        }
    };
    consider(by_subject_, p.subject);
    consider(by_predicate_, p.predicate);
    consider(by_object_, p.object);

    std::vector<std::uint64_t> out;
    if (any_index) {
        out.assign(best->begin(), best->end());
    } else {
        out.reserve(by_seq_.size());
        for (const auto& [seq, _] : by_seq_) {
            out.push_back(seq);
        }
    }
    return out;
}

void KnowledgeStore::query_from(std::span<const Pattern> patterns, std::size_t index, const Binding& binding,
                                std::vector<Binding>& out) const {
    if (index == patterns.size()) {
        out.push_back(binding);
        return;
    }
    Pattern grounded = patterns[index].substitute(binding);
    for (auto seq : candidates(grounded)) {
        if (auto next = unify(grounded, by_seq_.at(seq), binding)) {
            query_from(patterns, index + 1, *next, out);
        }
    }
}

std::vector<Binding> KnowledgeStore::query(std::span<const Pattern> patterns, const Binding& seed) const {
    std::vector<Binding> out;
    query_from(patterns, 0, seed, out);
    return out;
}

std::vector<Statement> KnowledgeStore::match(const Pattern& pattern) const {
    std::vector<Statement> out;
    for (auto seq : candidates(pattern)) {
        const auto& stmt = by_seq_.at(seq);
        if (unify(pattern, stmt, {})) {
            out.push_back(stmt);
        }
    }
    return out;
}

bool KnowledgeStore::is_subclass(const Term& sub, const Term& super) const {
    if (sub == super) {
        return true;
    }
    const Term sub_class_of = Term::symbol(vocab::kSubClassOf);
    std::set<Term> visited{sub};
    std::deque<Term> frontier{sub};
    while (!frontier.empty()) {
        Term current = frontier.front();
        frontier.pop_front();
        for (const auto& stmt : match(Pattern{current, sub_class_of, Term::variable("super")})) {
            if (stmt.object == super) {
                return true;
            }
            if (visited.insert(stmt.object).second) {
                frontier.push_back(stmt.object);
            }
        }
    }
    return false;
}

bool KnowledgeStore::is_known_class(const Term& cls) const {
    const Term sub_class_of = Term::symbol(vocab::kSubClassOf);
    const Term type = Term::symbol(vocab::kType);
    return contains(Statement{cls, type, Term::symbol(vocab::kClass)}) ||
           contains(Statement{cls, type, Term::symbol(vocab::kOwlClass)}) ||
           !match(Pattern{cls, sub_class_of, Term::variable("x")}).empty() ||
           !match(Pattern{Term::variable("x"), sub_class_of, cls}).empty();
}

std::vector<Statement> KnowledgeStore::statements() const {
    std::vector<Statement> out;
    out.reserve(by_seq_.size());
    for (const auto& [_, stmt] : by_seq_) {
        out.push_back(stmt);
    }
    return out;
}

void KnowledgeStore::load_json(const nlohmann::json& triples) {
    if (!triples.is_array()) {
        throw Error(ErrorCode::ParseError, "ontology must be a JSON array of triples");
    }
    for (const auto& t : triples) {
        assert_stmt(statement_from_json(t));
    }
}

void KnowledgeStore::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ConfigError, "cannot open ontology file " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    load_json(j);
}

nlohmann::json KnowledgeStore::to_json() const {
    auto out = nlohmann::json::array();
    for (const auto& [_, stmt] : by_seq_) {
        out.push_back(triple_to_json(stmt));
    }
    return out;
}

} // namespace agentcomm
