#include <doctest.h>

#include "agentcomm/action_engine.hpp"
#include "support.hpp"

using namespace agentcomm;
using nlohmann::json;

namespace {

Term sym(const std::string& s) { return Term::symbol(s); }

ProcessNode node(const char* text) { return process_from_json(json::parse(text)); }

/// Copies binding `from` to `to`, or writes ex:none when `from` is unbound.
HostFunction copy_or_none(std::string from, std::string to) {
    return [from, to](const HostCall& call) {
        auto it = call.bindings.find(from);
        return HostResult::ok({{to, it == call.bindings.end() ? sym("ex:none") : it->second}});
    };
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an agentcomm::Error");
    return ErrorCode::InvalidArgument;
}

ActionDescription broadcast() { return testsupport::shipped_registry().action("ex:videoBroadcast"); }

HostBindings stream_host() {
    HostBindings hosts;
    hosts.bind("op:videoBroadcast", [](const HostCall& call) {
        return HostResult::ok({{"stream", sym("ex:stream-" + call.bindings.at("movie").text().substr(3))}});
    });
    return hosts;
}

} // namespace

TEST_CASE("sequence threads bindings, concurrence starts every child from the same bindings") {
    KnowledgeStore data;
    HostBindings hosts;
    hosts.bind("op:a", [](const HostCall&) { return HostResult::ok({{"x", sym("ex:fromA")}}); });
    hosts.bind("op:b", copy_or_none("x", "y"));
    ProcessContext ctx{data, hosts, "A"};

    auto seq = run_process(node(R"({"sequence": [{"atomic": "op:a"}, {"atomic": "op:b"}]})"), {}, ctx);
    REQUIRE(seq.ok());
    CHECK(seq.bindings.at("y") == sym("ex:fromA"));

    auto par = run_process(node(R"({"concurrence": [{"atomic": "op:a"}, {"atomic": "op:b"}]})"), {}, ctx);
    REQUIRE(par.ok());
    CHECK(par.bindings.at("x") == sym("ex:fromA"));
    CHECK(par.bindings.at("y") == sym("ex:none"));
}

TEST_CASE("concurrent children that disagree conflict") {
    KnowledgeStore data;
    HostBindings hosts;
    hosts.bind("op:a", [](const HostCall&) { return HostResult::ok({{"x", sym("ex:1")}}); });
    hosts.bind("op:b", [](const HostCall&) { return HostResult::ok({{"x", sym("ex:2")}}); });
    auto out = run_process(node(R"({"concurrence": [{"atomic": "op:a"}, {"atomic": "op:b"}]})"), {},
                           ProcessContext{data, hosts, "A"});
    REQUIRE_FALSE(out.ok());
    CHECK(out.failure->code == ErrorCode::BindingConflict);
}

TEST_CASE("iteration is do-until and bounded") {
    KnowledgeStore data;
    HostBindings hosts;
    int calls = 0;
    hosts.bind("op:inc", [&calls](const HostCall& call) {
        ++calls;
        double n = call.bindings.contains("n") ? call.bindings.at("n").number_value() : 0;
        return HostResult::ok({{"n", Term::number(n + 1)}});
    });
    ProcessContext ctx{data, hosts, "A"};

    auto done = run_process(
        node(R"({"iteration": {"body": {"atomic": "op:inc"}, "until": [{"compare": ["?n", ">=", 3]}], "maxIters": 5}})"),
        {}, ctx);
    REQUIRE(done.ok());
    CHECK(calls == 3);
    CHECK(done.bindings.at("n") == Term::number(3));

    calls = 0;
    auto once = run_process(
        node(R"({"iteration": {"body": {"atomic": "op:inc"}, "until": [], "maxIters": 5}})"), {}, ctx);
    REQUIRE(once.ok());
    CHECK(calls == 1);

    calls = 0;
    auto over = run_process(
        node(R"({"iteration": {"body": {"atomic": "op:inc"}, "until": [{"compare": ["?n", ">=", 9]}], "maxIters": 2}})"),
        {}, ctx);
    REQUIRE_FALSE(over.ok());
    CHECK(over.failure->code == ErrorCode::IterationBudgetExceeded);
    CHECK(calls == 2);
}

TEST_CASE("alternative takes the first branch whose guard holds") {
    KnowledgeStore data;
    data.assert_stmt({sym("ex:m"), sym("ex:genre"), sym("ex:Drama")});
    HostBindings hosts;
    hosts.bind("op:drama", [](const HostCall&) { return HostResult::ok({{"pick", sym("ex:drama")}}); });
    hosts.bind("op:other", [](const HostCall&) { return HostResult::ok({{"pick", sym("ex:other")}}); });
    ProcessContext ctx{data, hosts, "A"};
    auto alt = node(R"({"alternative": [
        {"when": [{"pattern": ["?m", "ex:genre", "ex:Comedy"]}], "do": {"atomic": "op:other"}},
        {"when": [{"pattern": ["?m", "ex:genre", "ex:Drama"]}], "do": {"atomic": "op:drama"}},
        {"do": {"atomic": "op:other"}}
    ]})");
    auto out = run_process(alt, {{"m", sym("ex:m")}}, ctx);
    REQUIRE(out.ok());
    CHECK(out.bindings.at("pick") == sym("ex:drama"));

    auto none = run_process(node(R"({"alternative": [
        {"when": [{"pattern": ["?m", "ex:genre", "ex:Comedy"]}], "do": {"atomic": "op:other"}}
    ]})"), {{"m", sym("ex:m")}}, ctx);
    REQUIRE_FALSE(none.ok());
    CHECK(none.failure->code == ErrorCode::NoBranchApplicable);
}

TEST_CASE("host failures become step failures") {
    KnowledgeStore data = testsupport::movie_ontology();
    HostBindings hosts;
    hosts.bind("op:videoBroadcast", [](const HostCall&) { return HostResult::fail("link down"); });
    auto rec = execute(broadcast(), {{"movie", sym("ex:casablanca")}}, hosts, data, 1, {"D"});
    CHECK(rec.status == ExecutionStatus::StepFailed);
    CHECK(rec.message.find("link down") != std::string::npos);
    REQUIRE(rec.reason.has_value());
    CHECK(rec.reason->object == sym(vocab::kStepFailed));
    CHECK_FALSE(data.contains({sym("D"), sym("ex:streaming"), sym("ex:casablanca")}));
}

TEST_CASE("successful execution applies effects, stores parameters and traces checkpoints") {
    KnowledgeStore data = testsupport::movie_ontology();
    Trace trace;
    auto rec = execute(broadcast(), {{"movie", sym("ex:casablanca")}}, stream_host(), data, 4, {"D", &trace});
    REQUIRE(rec.succeeded());
    CHECK(rec.outputs.at("stream") == sym("ex:stream-casablanca"));
    CHECK(data.contains({sym("D"), sym("ex:streaming"), sym("ex:casablanca")}));
    CHECK(data.contains({sym("ex:videoBroadcast"), input_predicate("movie"), sym("ex:casablanca")}));
    CHECK(data.contains({sym("ex:videoBroadcast"), output_predicate("stream"), sym("ex:stream-casablanca")}));

    std::vector<std::string> phases;
    for (const auto& line : trace.lines()) {
        if (line["event"] == "check") {
            CHECK(line["ok"] == true);
            phases.push_back(line["phase"]);
        }
    }
    CHECK(phases == std::vector<std::string>{"before-evaluation", "after-update", "after-execution"});
    CHECK(trace.lines().back()["event"] == "action");
    CHECK(trace.lines().back()["status"] == "succeeded");
}

TEST_CASE("input checks") {
    KnowledgeStore data = testsupport::movie_ontology();
    auto action = broadcast();
    auto hosts = stream_host();
    CHECK(code_of([&] { execute(action, {}, hosts, data, 0); }) == ErrorCode::MissingInput);
    CHECK(code_of([&] { execute(action, {{"movie", sym("ex:Drama")}}, hosts, data, 0); }) == ErrorCode::TypeMismatch);
    CHECK(code_of([&] { execute(action, {{"movie", sym("ex:casablanca")}}, HostBindings{}, data, 0); }) ==
          ErrorCode::UnboundAtomicOp);
}

TEST_CASE("an instance of a subclass conforms, and the precondition still decides") {
    KnowledgeStore data = testsupport::movie_ontology();
    data.assert_stmt({sym("ex:Documentary"), sym(vocab::kSubClassOf), sym("ex:Movie")});
    data.assert_stmt({sym("ex:nanook"), sym(vocab::kType), sym("ex:Documentary")});
    CHECK(conforms(sym("ex:nanook"), sym("ex:Movie"), data));
    CHECK(conforms(sym("ex:Documentary"), sym("ex:Movie"), data));
    CHECK_FALSE(conforms(sym("ex:Drama"), sym("ex:Movie"), data));
    CHECK(conforms(Term::string("x"), sym("xsd:string"), data));
    CHECK(conforms(Term::number(2), sym("xsd:integer"), data));
    CHECK_FALSE(conforms(Term::number(2.5), sym("xsd:integer"), data));

    auto rec = execute(broadcast(), {{"movie", sym("ex:nanook")}}, stream_host(), data, 0, {"D"});
    CHECK(rec.status == ExecutionStatus::PreconditionFailed);
    CHECK(rec.failing_clause.find("ex:Movie") != std::string::npos);
    CHECK(rec.reason->object == sym(vocab::kPreconditionUnsatisfied));
}

TEST_CASE("external effects are grounded from recorded outputs, or left to the provider") {
    KnowledgeStore data = testsupport::movie_ontology();
    MentalModel mm;
    mm.register_agent("S");
    auto action = broadcast();

    auto open = evaluate_external_effects(action, {{"movie", sym("ex:casablanca")}}, data, mm, "S", 0);
    CHECK(open.satisfiable);
    CHECK_FALSE(open.outputs_available);
    CHECK(mm.actual_world("S").empty());

    execute(action, {{"movie", sym("ex:casablanca")}}, stream_host(), data, 1, {"D"});
    auto grounded = evaluate_external_effects(action, {{"movie", sym("ex:casablanca")}}, data, mm, "S", 2);
    CHECK(grounded.satisfiable);
    CHECK(grounded.outputs_available);
    CHECK(grounded.bindings.at("stream") == sym("ex:stream-casablanca"));
    CHECK(mm.actual_world("S").contains({sym("D"), sym("ex:streaming"), sym("ex:casablanca")}));

    auto bad = action;
    bad.effect.push_back(EffectClause{EffectClause::Kind::Assert, Pattern{Term::variable("stranger"), sym("ex:p"), sym("ex:o")}, {}});
    KnowledgeStore empty;
    CHECK_FALSE(evaluate_external_effects(bad, {{"movie", sym("ex:casablanca")}}, empty, mm, "S", 3).satisfiable);
}
