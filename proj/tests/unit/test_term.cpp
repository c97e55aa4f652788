#include <doctest.h>

#include "agentcomm/error.hpp"
#include "agentcomm/term.hpp"

using namespace agentcomm;
using nlohmann::json;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an agentcomm::Error");
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST_CASE("json spelling round trips for every term kind") {
    const std::vector<Term> terms{
        Term::symbol("ex:Movie"),  Term::symbol("S"),           Term::string("Brokeback Mountain"),
        Term::string("ex:Movie"),  Term::number(2.5),           Term::number(2, "Mbps"),
        Term::boolean(true),       Term::boolean(false),        Term::variable("x"),
    };
    for (const auto& t : terms) {
        CAPTURE(t.to_string());
        CHECK(term_from_json(term_to_json(t)) == t);
    }
}

TEST_CASE("string tokens are classified by shape") {
    CHECK(term_from_json("?movie") == Term::variable("movie"));
    CHECK(term_from_json("ex:Drama").is_symbol());
    CHECK(term_from_json("Brokeback Mountain").kind() == TermKind::String);
    CHECK(term_from_json(json{{"str", "ex:Drama"}}).kind() == TermKind::String);
    auto bw = term_from_json(json{{"value", 1.5}, {"unit", "Mbps"}});
    CHECK(bw.number_value() == 1.5);
    CHECK(bw.unit() == "Mbps");
    CHECK(term_from_token("true") == Term::boolean(true));
    CHECK(Term::variable("?x") == Term::variable("x"));
}

TEST_CASE("to_string forms") {
    CHECK(Term::variable("x").to_string() == "?x");
    CHECK(Term::string("a b").to_string() == "\"a b\"");
    CHECK(Term::number(1.5, "Mbps").to_string() == "1.5 Mbps");
    CHECK(Term::number(3).to_string() == "3");
}

TEST_CASE("numeric comparison respects units") {
    CHECK(compare_terms(Term::number(2, "Mbps"), CompareOp::Gt, Term::number(1, "Mbps")));
    CHECK_FALSE(compare_terms(Term::number(1), CompareOp::Ge, Term::number(2)));
    CHECK(compare_terms(Term::number(2), CompareOp::Eq, Term::number(2.0)));
    CHECK(code_of([] { compare_terms(Term::number(2, "Mbps"), CompareOp::Lt, Term::number(1)); }) ==
          ErrorCode::UnitMismatch);
    CHECK(code_of([] { compare_terms(Term::number(2), CompareOp::Eq, Term::symbol("ex:a")); }) ==
          ErrorCode::InvalidComparison);
}

TEST_CASE("non-numeric terms only support equality") {
    CHECK(compare_terms(Term::symbol("ex:a"), CompareOp::Eq, Term::symbol("ex:a")));
    CHECK(compare_terms(Term::symbol("ex:a"), CompareOp::Ne, Term::string("ex:a")));
    CHECK(code_of([] { compare_terms(Term::symbol("ex:a"), CompareOp::Lt, Term::symbol("ex:b")); }) ==
          ErrorCode::InvalidComparison);
    CHECK(code_of([] { compare_terms(Term::variable("x"), CompareOp::Eq, Term::symbol("ex:b")); }) ==
          ErrorCode::UnboundVariableInCompare);
}

TEST_CASE("operator parsing") {
    for (auto op : {"=", "!=", "<", "<=", ">", ">="}) {
        CHECK(to_string(parse_compare_op(op)) == op);
    }
    CHECK(parse_compare_op("==") == CompareOp::Eq);
    CHECK(code_of([] { parse_compare_op("=~"); }) == ErrorCode::ParseError);
}

TEST_CASE("resolve substitutes bound variables only") {
    Binding b{{"x", Term::symbol("ex:a")}};
    CHECK(resolve(Term::variable("x"), b) == Term::symbol("ex:a"));
    CHECK(resolve(Term::variable("y"), b) == Term::variable("y"));
    CHECK(resolve(Term::symbol("ex:z"), b) == Term::symbol("ex:z"));
}

TEST_CASE("invalid constructions are rejected") {
    CHECK(code_of([] { Term::symbol(""); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { Term::variable("?"); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { Term::number(std::nan("")); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { term_from_json(json{{"str", 3}}); }) == ErrorCode::ParseError);
}
