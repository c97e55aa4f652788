#include "agentcomm/term.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "agentcomm/error.hpp"

namespace agentcomm {

namespace {

bool is_symbol_token(std::string_view s) {
    if (s.empty() || s.front() == '?') {
        return false;
    }
    for (char c : s) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '_' || c == '.' || c == ':' || c == '/' || c == '#' || c == '-') {
            continue;
        }
        return false;
    }
    return true;
}

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(15);
    os << v;
    return os.str();
}

} // namespace

Term Term::symbol(std::string name) {
    if (name.empty()) {
        throw Error(ErrorCode::InvalidArgument, "empty symbol");
    }
    Term t;
    t.kind_ = TermKind::Symbol;
    t.text_ = std::move(name);
    return t;
}

Term Term::string(std::string value) {
    Term t;
    t.kind_ = TermKind::String;
    t.text_ = std::move(value);
    return t;
}

Term Term::number(double value, std::string unit) {
    if (std::isnan(value)) {
        throw Error(ErrorCode::InvalidArgument, "NaN is not a valid numeric literal");
    }
    Term t;
    t.kind_ = TermKind::Number;
    t.number_ = value == 0.0 ? 0.0 : value;
    t.text_ = std::move(unit);
    return t;
}

Term Term::boolean(bool value) {
    Term t;
    t.kind_ = TermKind::Boolean;
    t.flag_ = value;
    return t;
}

Term Term::variable(std::string name) {
    if (!name.empty() && name.front() == '?') {
        name.erase(0, 1);
    }
    if (name.empty()) {
        throw Error(ErrorCode::InvalidArgument, "empty variable name");
    }
    Term t;
    t.kind_ = TermKind::Variable;
    t.text_ = std::move(name);
    return t;
}

std::string Term::to_string() const {
    switch (kind_) {
        case TermKind::Symbol: return text_;
        case TermKind::String: return "\"" + text_ + "\"";
        case TermKind::Number: return text_.empty() ? format_number(number_) : format_number(number_) + " " + text_;
        case TermKind::Boolean: return flag_ ? "true" : "false";
        case TermKind::Variable: return "?" + text_;
    }
    return {};
}

CompareOp parse_compare_op(std::string_view text) {
    if (text == "=" || text == "==") return CompareOp::Eq;
    if (text == "!=") return CompareOp::Ne;
    if (text == "<") return CompareOp::Lt;
    if (text == "<=") return CompareOp::Le;
    if (text == ">") return CompareOp::Gt;
    if (text == ">=") return CompareOp::Ge;
    throw Error(ErrorCode::ParseError, "unknown comparison operator '" + std::string(text) + "'");
}

std::string_view to_string(CompareOp op) noexcept {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "?";
}

bool compare_terms(const Term& lhs, CompareOp op, const Term& rhs) {
    if (!lhs.is_ground() || !rhs.is_ground()) {
        throw Error(ErrorCode::UnboundVariableInCompare,
                    "cannot compare " + lhs.to_string() + " with " + rhs.to_string());
    }
    if (lhs.is_number() || rhs.is_number()) {
        if (!lhs.is_number() || !rhs.is_number()) {
            throw Error(ErrorCode::InvalidComparison,
                        "cannot compare number with non-number: " + lhs.to_string() + " " +
                            std::string(to_string(op)) + " " + rhs.to_string());
        }
        if (lhs.unit() != rhs.unit()) {
            throw Error(ErrorCode::UnitMismatch, "unit '" + lhs.unit() + "' vs '" + rhs.unit() + "'");
        }
        double a = lhs.number_value();
        double b = rhs.number_value();
        switch (op) {
            case CompareOp::Eq: return a == b;
            case CompareOp::Ne: return a != b;
            case CompareOp::Lt: return a < b;
            case CompareOp::Le: return a <= b;
            case CompareOp::Gt: return a > b;
            case CompareOp::Ge: return a >= b;
        }
    }
    switch (op) {
        case CompareOp::Eq: return lhs == rhs;
        case CompareOp::Ne: return lhs != rhs;
        default:
            throw Error(ErrorCode::InvalidComparison,
                        "ordering comparison '" + std::string(to_string(op)) + "' needs numeric operands");
    }
}

const Term& resolve(const Term& term, const Binding& binding) {
    if (term.is_variable()) {
        if (auto it = binding.find(term.text()); it != binding.end()) {
            return it->second;
        }
    }
    return term;
}

Term term_from_token(std::string_view token) {
    if (!token.empty() && token.front() == '?') {
        return Term::variable(std::string(token.substr(1)));
    }
    if (token == "true") return Term::boolean(true);
    if (token == "false") return Term::boolean(false);
    if (is_symbol_token(token)) {
        return Term::symbol(std::string(token));
    }
    return Term::string(std::string(token));
}

Term term_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (!s.empty() && s.front() == '?') {
            return Term::variable(s.substr(1));
        }
        if (is_symbol_token(s)) {
            return Term::symbol(std::move(s));
        }
        return Term::string(std::move(s));
    }
    if (j.is_boolean()) {
        return Term::boolean(j.get<bool>());
    }
    if (j.is_number()) {
        return Term::number(j.get<double>());
    }
    if (j.is_object()) {
        if (j.contains("str")) {
            if (!j["str"].is_string()) {
                throw Error(ErrorCode::ParseError, "\"str\" term must hold a string");
            }
            return Term::string(j["str"].get<std::string>());
        }
        if (j.contains("value")) {
            if (!j["value"].is_number()) {
                throw Error(ErrorCode::ParseError, "numeric literal \"value\" must be a number");
            }
            std::string unit;
            if (j.contains("unit")) {
                if (!j["unit"].is_string()) {
                    throw Error(ErrorCode::ParseError, "numeric literal \"unit\" must be a string");
                }
                unit = j["unit"].get<std::string>();
            }
            return Term::number(j["value"].get<double>(), std::move(unit));
        }
    }
    throw Error(ErrorCode::ParseError, "not a term: " + j.dump());
}

nlohmann::json term_to_json(const Term& term) {
    switch (term.kind()) {
        case TermKind::Symbol: return term.text();
        case TermKind::String:
            if (is_symbol_token(term.text()) || term.text() == "true" || term.text() == "false" ||
                (!term.text().empty() && term.text().front() == '?')) {
                return nlohmann::json{{"str", term.text()}};
            }
            return term.text();
        case TermKind::Number:
            if (term.unit().empty()) {
                return term.number_value();
            }
            return nlohmann::json{{"value", term.number_value()}, {"unit", term.unit()}};
        case TermKind::Boolean: return term.bool_value();
        case TermKind::Variable: return "?" + term.text();
    }
    return nullptr;
}

nlohmann::json binding_to_json(const Binding& binding) {
    auto out = nlohmann::json::object();
    for (const auto& [name, value] : binding) {
        out[name] = term_to_json(value);
    }
    return out;
}

} // namespace agentcomm

std::size_t std::hash<agentcomm::Term>::operator()(const agentcomm::Term& t) const noexcept {
    std::size_t h = std::hash<std::string>{}(t.text());
    h ^= std::hash<int>{}(static_cast<int>(t.kind())) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    if (t.is_number()) {
        h ^= std::hash<double>{}(t.number_value()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    if (t.kind() == agentcomm::TermKind::Boolean) {
        h ^= t.bool_value() ? 0x51ed27ULL : 0x2545fULL;
    }
    return h;
}
