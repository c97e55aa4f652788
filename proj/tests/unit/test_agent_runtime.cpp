#include <doctest.h>

#include "agentcomm/error.hpp"
#include "support.hpp"

using namespace agentcomm;
using nlohmann::json;

namespace {

Term sym(const std::string& s) { return Term::symbol(s); }

std::unique_ptr<Runtime> scenario_runtime(const std::string& name) {
    return build_runtime(ScenarioConfig::load(testsupport::scenario_path(name)));
}

std::vector<json> lines_of(const Runtime& rt, const std::string& event) {
    std::vector<json> out;
    for (const auto& l : const_cast<Runtime&>(rt).trace().lines()) {
        if (l["event"] == event) out.push_back(l);
    }
    return out;
}

} // namespace

TEST_CASE("goal term parsing") {
    auto g = GoalTerm::parse("pickMovie(?genre, ex:Drama, \"Brokeback Mountain\")");
    CHECK(g.name == "pickMovie");
    REQUIRE(g.args.size() == 3);
    CHECK(g.args[0] == Term::variable("genre"));
    CHECK(g.args[1] == sym("ex:Drama"));
    CHECK(g.args[2] == Term::string("Brokeback Mountain"));
    CHECK(GoalTerm::parse("idle").args.empty());
    CHECK(GoalTerm::parse(" watch( ?g ) ").to_string() == "watch(?g)");
    CHECK(g.substitute({{"genre", sym("ex:Comedy")}}).args[0] == sym("ex:Comedy"));
    CHECK_THROWS_AS(GoalTerm::parse("broken(?x"), Error);
    CHECK_THROWS_AS(GoalTerm::parse(""), Error);
}

TEST_CASE("manifests") {
    auto m = AgentManifest::load_file(testsupport::data_dir() / "agents" / "S.json");
    CHECK(m.id == "S");
    CHECK(m.plans.size() == 4);
    CHECK(m.plans[0].body.size() == 2);
    auto d = AgentManifest::load_file(testsupport::data_dir() / "agents" / "D.json");
    CHECK(d.proposal_conditions.contains("ex:videoBroadcast"));
    CHECK_THROWS_AS(AgentManifest::load_file(testsupport::data_dir() / "agents" / "nobody.json"), Error);
    CHECK_THROWS_AS(AgentManifest::from_json(json{{"capabilities", json::array()}}), Error);
}

TEST_CASE("goal classification") {
    auto rt = scenario_runtime("cooperation");
    CHECK(rt->classify("S", "ex:recommend") == GoalKind::Internal);
    CHECK(rt->classify("S", "ex:videoAbstract") == GoalKind::External);
    CHECK(rt->classify("S", "previewMovie") == GoalKind::Composed);
    CHECK(rt->classify("T", "ex:videoAbstract") == GoalKind::Internal);
    CHECK(rt->data().contains({sym("T"), sym(vocab::kHasCapability), sym("ex:VideoAbstractService")}));
}

TEST_CASE("belief base joins the actual world with subscribed facts") {
    auto rt = scenario_runtime("cooperation");
    auto beliefs = rt->belief_base("S");
    CHECK(beliefs.contains({sym("ex:Drama"), sym("rdf:type"), sym("ex:Genre")}));
    CHECK(beliefs.contains({sym("ex:casablanca"), sym("ex:genre"), sym("ex:Drama")}));
    CHECK_FALSE(beliefs.contains({sym("ex:casablanca"), sym("ex:year"), Term::number(1942)}));
    CHECK(rt->belief_base("T").empty());
}

TEST_CASE("a zero tick budget is rejected") {
    auto rt = scenario_runtime("cooperation");
    try {
        rt->run_scheduler(0);
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
}

TEST_CASE("recursive plans stop at the depth bound") {
    auto cfg = ScenarioConfig::load(testsupport::scenario_path("cooperation"));
    RuntimeConfig rc;
    rc.max_recursion = 5;
    Runtime rt(load_registry(cfg.descriptions), testsupport::movie_ontology(), make_host_bindings(cfg.services), rc);
    rt.add_agent(AgentManifest::from_json(json::parse(R"j({
        "id": "R",
        "plans": [{"head": "loop(?x)", "body": ["loop(?x)"]}]
    })j")));
    rt.post_goal("R", GoalTerm::parse("loop(ex:a)"));
    auto report = rt.run_scheduler(50);
    REQUIRE(report.goals.size() == 1);
    CHECK_FALSE(report.goals[0].succeeded);
    CHECK(report.goals[0].reason.find("plan depth exceeds 5") != std::string::npos);
    CHECK(lines_of(rt, "plan").size() == 5);
}

TEST_CASE("unfinished goals fail when the tick budget runs out") {
    auto rt = scenario_runtime("cooperation");
    auto report = rt->run_scheduler(1);
    CHECK_FALSE(report.all_succeeded());
    REQUIRE_FALSE(report.goals.empty());
    CHECK(report.goals.back().reason == "tick budget exhausted");
}

TEST_CASE("external delegation selects request, contract net, or nothing by provider count") {
    const Binding inputs{{"movie", sym("ex:casablanca")}};

    auto one = scenario_runtime("cooperation");
    auto r1 = one->delegate_external("S", one->registry().action("ex:videoAbstract"), inputs);
    CHECK(r1.succeeded);
    CHECK(r1.outputs.at("clip") == sym("ex:clip-casablanca"));
    auto sel1 = lines_of(*one, "select");
    REQUIRE(sel1.size() == 1);
    CHECK(sel1[0]["ca"] == "request");
    CHECK(sel1[0]["protocol"] == "fipa-request");

    auto four = scenario_runtime("coordination");
    auto r4 = four->delegate_external("S", four->registry().action("ex:videoBroadcast"), inputs);
    CHECK(r4.succeeded);
    CHECK(r4.outputs.at("stream").text().find("-D") != std::string::npos);
    auto sel4 = lines_of(*four, "select");
    REQUIRE(sel4.size() == 1);
    CHECK(sel4[0]["ca"] == "cfp");
    CHECK(sel4[0]["providers"] == json::array({"A", "B", "C", "D"}));

    auto none = scenario_runtime("cooperation");
    auto r0 = none->delegate_external("S", none->registry().action("ex:videoBroadcast"), inputs);
    CHECK_FALSE(r0.succeeded);
    CHECK(r0.reason.find("no provider") != std::string::npos);
    CHECK(lines_of(*none, "select").empty());
}

TEST_CASE("composed goals propagate bindings through nested plans") {
    auto rt = scenario_runtime("full");
    auto report = rt->run_scheduler(50);
    CHECK(report.all_succeeded());
    CHECK(report.conversations.size() == 2);
    auto plans = lines_of(*rt, "plan");
    REQUIRE(plans.size() == 2);
    CHECK(plans[0]["depth"] == 1);
    CHECK(plans[1]["depth"] == 2);
    CHECK(rt->mental().actual_world("S").contains(
        {sym("ex:videoBroadcast"), output_predicate("stream"), sym("ex:stream-brokebackMountain-D")}));
}

TEST_CASE("report json") {
    auto rt = scenario_runtime("cooperation");
    auto j = rt->run_scheduler(50).to_json();
    CHECK(j["succeeded"] == true);
    CHECK(j["goals"][0]["status"] == "succeeded");
    CHECK(j["conversations"][0]["protocol"] == "fipa-request");
}
