#include <doctest.h>

#include <fstream>

#include "agentcomm/error.hpp"
#include "support.hpp"

using namespace agentcomm;
using nlohmann::json;

namespace {

json read_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

json shipped(const std::string& file) {
    return read_json(testsupport::data_dir() / "descriptions" / file);
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

json with_content(json ca, const std::string& cls, int mask) {
    ca["searleClass"] = cls;
    ca["content"] = {{"action", (mask & 1) != 0},
                     {"proposition", (mask & 2) != 0},
                     {"condition", (mask & 4) != 0},
                     {"reason", (mask & 8) != 0}};
    ca.erase("executes");
    return ca;
}

} // namespace

TEST_CASE("the shipped bundle loads and links") {
    auto bundle = load_bundle(testsupport::data_dir() / "descriptions");
    CHECK(bundle.size() == 16);
    auto reg = link(bundle);
    CHECK(reg.cas().size() == 10);
    CHECK(reg.protocols().size() == 2);
    CHECK(reg.find_action("ex:videoAbstract") != nullptr);
    CHECK(reg.ca("agree").executes == std::optional<std::string>("sender"));
    CHECK(reg.ca("accept-proposal").executes == std::optional<std::string>("receiver"));
    CHECK_FALSE(reg.ca("request").executes.has_value());
    CHECK(code_of([&] { reg.protocol("fipa-query"); }) == ErrorCode::UnknownProtocol);
    CHECK(code_of([&] { reg.ca("confirm"); }) == ErrorCode::UnknownCA);
}

TEST_CASE("each Searle class admits exactly one content shape") {
    const auto base = shipped("ca-request.json");
    for (const std::string cls : {"assertive", "directive", "commissive", "expressive"}) {
        int accepted = 0;
        for (int mask = 0; mask < 16; ++mask) {
            try {
                load_description(with_content(base, cls, mask));
                ++accepted;
                auto want = required_content(parse_searle_class(cls));
                CHECK(want.action == ((mask & 1) != 0));
                CHECK(want.proposition == ((mask & 2) != 0));
                CHECK(want.condition == ((mask & 4) != 0));
                CHECK(want.reason == ((mask & 8) != 0));
            } catch (const Error& e) {
                CHECK(e.code() == ErrorCode::SchemaError);
            }
        }
        CAPTURE(cls);
        CHECK(accepted == 1);
    }
}

TEST_CASE("typical Searle violations are rejected with the rule named") {
    const auto base = shipped("ca-request.json");
    const std::vector<std::pair<std::string, int>> cases{
        {"assertive", 1 | 2},  // proposition plus an action
        {"directive", 2},      // proposition instead of action
        {"commissive", 1},     // missing condition
        {"expressive", 1 | 4}, // condition instead of reason
    };
    for (const auto& [cls, mask] : cases) {
        try {
            load_description(with_content(base, cls, mask));
            FAIL("accepted " << cls);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SchemaError);
            CHECK(std::string(e.what()).find("Searle content rule") != std::string::npos);
        }
    }
}

TEST_CASE("executes needs action content") {
    auto ca = shipped("ca-agree.json");
    ca["executes"] = "nobody";
    CHECK(code_of([&] { load_description(ca); }) == ErrorCode::SchemaError);
}

TEST_CASE("malformed input") {
    CHECK(code_of([] { load_description(std::string_view("{not json")); }) == ErrorCode::ParseError);
    CHECK(code_of([] { load_description(json{{"type", "Widget"}, {"name", "w"}}); }) == ErrorCode::SchemaError);
    auto action = shipped("action-video-broadcast.json");
    action.erase("process");
    CHECK(code_of([&] { load_description(action); }) == ErrorCode::ParseError);
}

TEST_CASE("protocol structure is validated") {
    auto p = shipped("protocol-fipa-request.json");
    SUBCASE("two start states") {
        p["states"][1]["kind"] = "start";
        CHECK(code_of([&] { load_description(p); }) == ErrorCode::SchemaError);
    }
    SUBCASE("transition to an unknown state") {
        p["constructedBy"][0]["to"] = "nowhere";
        CHECK(code_of([&] { load_description(p); }) == ErrorCode::SchemaError);
    }
    SUBCASE("unknown trigger") {
        p["constructedBy"][0]["on"] = "eventually";
        CHECK(code_of([&] { load_description(p); }) == ErrorCode::SchemaError);
    }
}

TEST_CASE("action effect variables must be bound somewhere") {
    auto a = shipped("action-video-broadcast.json");
    a["effect"].push_back({{"assert", {"?ghost", "ex:p", "ex:o"}}});
    CHECK(code_of([&] { load_description(a); }) == ErrorCode::SchemaError);
}

TEST_CASE("link reports the same problems for every input order") {
    std::vector<json> docs{shipped("protocol-fipa-request.json"), shipped("protocol-fipa-contract-net.json"),
                           shipped("ca-agree.json"), shipped("ca-refuse.json"), shipped("ca-inform.json")};
    std::vector<int> order{0, 1, 2, 3, 4};
    std::optional<std::vector<std::string>> first;
    do {
        std::vector<Description> ds;
        for (int i : order) ds.push_back(load_description(docs[static_cast<std::size_t>(i)]));
        try {
            link(ds);
            FAIL("link accepted a bundle with missing acts");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DanglingReference);
            if (!first) first = e.details();
            CHECK(e.details() == *first);
        }
    } while (std::next_permutation(order.begin(), order.end()));
    REQUIRE(first.has_value());
    CHECK(first->size() >= 3);
}

TEST_CASE("duplicate names win over dangling references") {
    std::vector<Description> ds{load_description(shipped("ca-agree.json")), load_description(shipped("ca-agree.json")),
                                load_description(shipped("protocol-fipa-request.json"))};
    CHECK(code_of([&] { link(ds); }) == ErrorCode::DuplicateName);
}

TEST_CASE("process trees") {
    auto node = process_from_json(json::parse(R"({"sequence": [
        {"atomic": "op:a"},
        {"concurrence": [{"atomic": "op:b"}, {"atomic": "op:a"}]},
        {"iteration": {"body": {"atomic": "op:c"}, "until": [], "maxIters": 3}}
    ]})"));
    CHECK(atomic_ops(node) == std::vector<std::string>{"op:a", "op:b", "op:c"});
    CHECK(code_of([] { process_from_json(json::parse(R"({"loop": []})")); }) == ErrorCode::ParseError);
    CHECK(code_of([] { process_from_json(json::parse(R"({"alternative": []})")); }) == ErrorCode::SchemaError);
}
