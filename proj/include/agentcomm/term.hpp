#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace agentcomm {

enum class TermKind : std::uint8_t { Symbol, String, Number, Boolean, Variable };

/// A value in a triple position: a symbol (`ex:Movie`, or a bare agent id
/// such as `S`), a string literal, a number with an optional unit, a
/// boolean, or a variable (`?name`, stored without the question mark).
class Term {
public:
    Term() = default;

    static Term symbol(std::string name);
    static Term string(std::string value);
    static Term number(double value, std::string unit = {});
    static Term boolean(bool value);
    static Term variable(std::string name);

    TermKind kind() const noexcept { return kind_; }
    bool is_variable() const noexcept { return kind_ == TermKind::Variable; }
    bool is_symbol() const noexcept { return kind_ == TermKind::Symbol; }
    bool is_number() const noexcept { return kind_ == TermKind::Number; }
    bool is_ground() const noexcept { return kind_ != TermKind::Variable; }

    /// Symbol name, string value or variable name.
    const std::string& text() const noexcept { return text_; }
    double number_value() const noexcept { return number_; }
    /// Unit of a numeric literal; empty when unitless.
    const std::string& unit() const noexcept { return text_; }
    bool bool_value() const noexcept { return flag_; }

    /// Human readable form: `?x`, `ex:A`, `"text"`, `1.5 Mbps`, `true`.
    std::string to_string() const;

    friend bool operator==(const Term&, const Term&) = default;
    friend std::partial_ordering operator<=>(const Term&, const Term&) = default;

private:
    TermKind kind_ = TermKind::Symbol;
    std::string text_;
    double number_ = 0.0;
    bool flag_ = false;
};

/// Variable name (without `?`) to ground term.
using Binding = std::map<std::string, Term>;

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

CompareOp parse_compare_op(std::string_view text);
std::string_view to_string(CompareOp op) noexcept;

/// Numbers compare only against numbers of the same unit (UnitMismatch
/// otherwise); non-numeric terms support only `=` and `!=`.
bool compare_terms(const Term& lhs, CompareOp op, const Term& rhs);

/// Applies `binding` to a variable term; other terms are returned unchanged.
const Term& resolve(const Term& term, const Binding& binding);

/// JSON spelling used by every file format:
///   "?x"                            variable
///   "ex:Movie", "S"                 symbol (no whitespace or quotes)
///   "Brokeback Mountain"            string literal (anything else)
///   {"str": "Drama"}                forced string literal
///   2.5 / {"value": 2, "unit": "Mbps"}  number
///   true / false                    boolean
Term term_from_json(const nlohmann::json& j);
nlohmann::json term_to_json(const Term& term);

/// Same grammar applied to a plain string token (used by goal syntax).
Term term_from_token(std::string_view token);

nlohmann::json binding_to_json(const Binding& binding);

} // namespace agentcomm

template <>
struct std::hash<agentcomm::Term> {
    std::size_t operator()(const agentcomm::Term& t) const noexcept;
};
