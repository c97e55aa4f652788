#include <doctest.h>

#include "agentcomm/error.hpp"
#include "support.hpp"

using namespace agentcomm;
using nlohmann::json;

namespace {

Term sym(const std::string& s) { return Term::symbol(s); }

struct Fixture {
    KnowledgeStore data;
    MentalModel mm;
    RoleMap roles{{"sender", "S"}, {"receiver", "T"}};

    Fixture() {
        data.assert_stmt({sym("C"), sym("ex:bandwidth"), Term::number(1.5, "Mbps")});
        data.assert_stmt({sym("D"), sym("ex:bandwidth"), Term::number(2.5, "Mbps")});
        data.assert_stmt({sym("D"), sym("ex:blocked"), Term::boolean(true)});
        mm.register_agent("S");
        mm.register_agent("T");
        mm.allocate(reify({sym("S"), sym("ex:wants"), sym("ex:clip")}, "T", true, 0));
    }

    ConditionResult eval(const json& j, const Binding& b = {}) const {
        return evaluate_condition(condition_from_json(j), b, EvalContext{&data, &mm, roles, nullptr});
    }
};

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

TEST_CASE("pattern then compare filters solutions") {
    Fixture f;
    auto r = f.eval(json::parse(R"([
        {"pattern": ["?a", "ex:bandwidth", "?bw"]},
        {"compare": ["?bw", ">", {"value": 2, "unit": "Mbps"}]}
    ])"));
    REQUIRE(r.solutions.size() == 1);
    CHECK(r.solutions[0].at("a") == sym("D"));
    CHECK_FALSE(r.failing_clause.has_value());
}

TEST_CASE("failing clause index is reported") {
    Fixture f;
    auto r = f.eval(json::parse(R"([
        {"pattern": ["?a", "ex:bandwidth", "?bw"]},
        {"compare": ["?bw", ">", {"value": 9, "unit": "Mbps"}]}
    ])"));
    CHECK(r.solutions.empty());
    CHECK(r.failing_clause == std::size_t{1});
}

TEST_CASE("negation as failure") {
    Fixture f;
    auto r = f.eval(json::parse(R"([
        {"pattern": ["?a", "ex:bandwidth", "?bw"]},
        {"not": [{"pattern": ["?a", "ex:blocked", true]}]}
    ])"));
    REQUIRE(r.solutions.size() == 1);
    CHECK(r.solutions[0].at("a") == sym("C"));
}

TEST_CASE("mental scope reads the role's actual world") {
    Fixture f;
    CHECK(f.eval(json::parse(R"([{"pattern": ["S", "ex:wants", "?x"], "scope": "mental:receiver"}])")).solutions.size() == 1);
    CHECK(f.eval(json::parse(R"([{"pattern": ["S", "ex:wants", "?x"], "scope": "mental:sender"}])")).solutions.empty());
    CHECK(code_of([&] { f.eval(json::parse(R"([{"pattern": ["S", "ex:wants", "?x"], "scope": "mental:initiator"}])")); }) ==
          ErrorCode::SchemaError);
}

TEST_CASE("comparison errors") {
    Fixture f;
    CHECK(code_of([&] { f.eval(json::parse(R"([{"compare": ["?bw", ">", 1]}])")); }) ==
          ErrorCode::UnboundVariableInCompare);
    CHECK(code_of([&] {
              f.eval(json::parse(R"([{"pattern": ["?a", "ex:bandwidth", "?bw"]}, {"compare": ["?bw", ">", 1]}])"));
          }) == ErrorCode::UnitMismatch);
    CHECK(code_of([] { condition_from_json(json::parse(R"([{"compare": ["?bw", ">"]}])")); }) == ErrorCode::ParseError);
    CHECK(code_of([] { condition_from_json(json::parse(R"({"pattern": []})")); }) == ErrorCode::ParseError);
    CHECK(code_of([] { Scope::parse("world"); }) == ErrorCode::ParseError);
}

TEST_CASE("condition json round trip and variable sets") {
    auto j = json::parse(R"([
        {"pattern": ["?a", "ex:bandwidth", "?bw"], "scope": "mental:sender"},
        {"compare": ["?bw", ">=", 1]},
        {"not": [{"pattern": ["?a", "ex:blocked", "?z"]}]}
    ])");
    auto c = condition_from_json(j);
    CHECK(condition_to_json(condition_from_json(condition_to_json(c))) == condition_to_json(c));
    CHECK(bound_variables(c) == std::set<std::string>{"a", "bw"});
    CHECK(mentioned_variables(c) == std::set<std::string>{"a", "bw", "z"});
}

TEST_CASE("effects apply in order and mental retract allocates disbelief") {
    Fixture f;
    auto effects = effects_from_json(json::parse(R"([
        {"assert": ["?x", "ex:seen", "ex:m"]},
        {"retract": ["D", "ex:blocked", true]},
        {"assert": ["?x", "ex:knows", "ex:m"], "scope": "mental:receiver"},
        {"retract": ["S", "ex:wants", "ex:clip"], "scope": "mental:receiver"}
    ])"));
    auto changes = apply_effects(effects, {{"x", sym("S")}}, EffectTarget{&f.data, &f.mm, f.roles, Scope{}}, 3);
    REQUIRE(changes.size() == 4);
    CHECK(f.data.contains({sym("S"), sym("ex:seen"), sym("ex:m")}));
    CHECK_FALSE(f.data.contains({sym("D"), sym("ex:blocked"), Term::boolean(true)}));
    CHECK(f.mm.actual_world("T").contains({sym("S"), sym("ex:knows"), sym("ex:m")}));
    CHECK(f.mm.world_of("T", {sym("S"), sym("ex:wants"), sym("ex:clip")}) == World::Imaginary);
    CHECK(changes[3].believer == "T");
}

TEST_CASE("unbound effect variables are caught before any change") {
    Fixture f;
    auto effects = effects_from_json(json::parse(R"([
        {"assert": ["S", "ex:seen", "ex:m"]},
        {"assert": ["?x", "ex:seen", "ex:m"]}
    ])"));
    auto before = f.data.size();
    CHECK(code_of([&] { apply_effects(effects, {}, EffectTarget{&f.data, &f.mm, f.roles, Scope{}}, 0); }) ==
          ErrorCode::UnboundVariableInEffect);
    CHECK(f.data.size() == before);
}
