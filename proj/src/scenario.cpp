#include "agentcomm/scenario.hpp"

#include <fstream>
#include <sstream>

namespace agentcomm {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& why) {
    throw Error(ErrorCode::ConfigError, where + ": " + why);
}

fs::path resolve_path(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

} // namespace

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j, const fs::path& base) {
    const std::string where = "scenario config";
    ScenarioConfig c;
    try {
        if (!j.is_object()) {
            config_error(where, "scenario config must be a JSON object");
        }
        c.name = j.value("name", std::string("scenario"));
        if (!j.contains("ontology") || !j["ontology"].is_string()) {
            config_error(where, "missing \"ontology\" path");
        }
        if (!j.contains("descriptions") || !j["descriptions"].is_string()) {
            config_error(where, "missing \"descriptions\" directory");
        }
        c.ontology = resolve_path(base, j["ontology"].get<std::string>());
        c.descriptions = resolve_path(base, j["descriptions"].get<std::string>());
        for (const auto& a : j.value("agents", nlohmann::json::array())) {
            if (a.is_string()) {
                c.agents.push_back(AgentManifest::load_file(resolve_path(base, a.get<std::string>())));
            } else {
                c.agents.push_back(AgentManifest::from_json(a));
            }
        }
        const auto services = j.value("services", nlohmann::json::object());
        for (const auto& [op, spec] : services.items()) {
            c.services.emplace(op, ServiceSpec{spec.at("behavior").get<std::string>(),
                                               spec.value("params", nlohmann::json::object())});
        }
        for (const auto& r : j.value("registrations", nlohmann::json::array())) {
            c.registrations.push_back(Registration{r.at("agent").get<std::string>(), r.at("action").get<std::string>()});
        }
        if (j.contains("objective") && !j["objective"].is_null()) {
            c.objective = Objective::from_json(j["objective"]);
        }
        for (const auto& f : j.value("facts", nlohmann::json::array())) {
            c.facts.push_back(statement_from_json(f));
        }
        const auto goals_by_agent = j.value("goals", nlohmann::json::object());
        for (const auto& [agent, goals] : goals_by_agent.items()) {
            auto& list = c.goals[agent];
            for (const auto& g : goals) {
                list.push_back(GoalTerm::parse(g.get<std::string>()));
            }
        }
        c.max_ticks = j.value("maxTicks", std::size_t{100});
        c.timeout_budget = j.value("timeoutBudget", Tick{10});
    } catch (const nlohmann::json::exception& e) {
        config_error(where, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) {
            throw;
        }
        config_error(where, e.what());
    }
    return c;
}

ScenarioConfig ScenarioConfig::load(const fs::path& path) {
    const std::string text = read_text_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        config_error(path.string(), e.what());
    }
    try {
        auto c = from_json(j, path.parent_path());
        if (!fs::is_regular_file(c.ontology)) {
            config_error(path.string(), "ontology file " + c.ontology.string() + " does not exist");
        }
        if (!fs::is_directory(c.descriptions)) {
            config_error(path.string(), "description directory " + c.descriptions.string() + " does not exist");
        }
        return c;
    } catch (const Error& e) {
        config_error(path.string(), e.code() == ErrorCode::ConfigError ? e.message() : std::string(e.what()));
    }
}

namespace {

std::string local_name(const Term& t) {
    const std::string& s = t.text();
    auto pos = s.find_last_of(":#/");
    return pos == std::string::npos ? s : s.substr(pos + 1);
}

std::string param(const ServiceSpec& spec, const char* key, const std::string& op) {
    if (!spec.params.contains(key) || !spec.params[key].is_string()) {
        config_error("service " + op, std::string("behavior '") + spec.behavior + "' needs string param \"" + key + "\"");
    }
    return spec.params[key].get<std::string>();
}

const Term* input_of(const HostCall& call, const std::string& name) {
    auto it = call.bindings.find(name);
    return it == call.bindings.end() ? nullptr : &it->second;
}

} // namespace

HostBindings make_host_bindings(const std::map<std::string, ServiceSpec>& services) {
    HostBindings hosts;
    for (const auto& [op, spec] : services) {
        if (spec.behavior == "catalog-size") {
            const Term cls = Term::symbol(param(spec, "class", op));
            const std::string out = param(spec, "output", op);
            hosts.bind(op, [cls, out](const HostCall& call) {
                auto n = call.data.match(Pattern{Term::variable("m"), Term::symbol(vocab::kType), cls}).size();
                return HostResult::ok({{out, Term::number(static_cast<double>(n))}});
            });
        } else if (spec.behavior == "recommend-by-genre") {
            const std::string in = param(spec, "input", op);
            const std::string out = param(spec, "output", op);
            hosts.bind(op, [in, out](const HostCall& call) {
                const Term* genre = input_of(call, in);
                if (genre == nullptr) {
                    return HostResult::fail("no ?" + in + " given");
                }
                auto sols = call.data.query({Pattern{Term::variable("m"), Term::symbol("ex:genre"), *genre},
                                             Pattern{Term::variable("m"), Term::symbol(vocab::kType),
                                                     Term::symbol("ex:Movie")}});
                if (sols.empty()) {
                    return HostResult::fail("no movie of genre " + genre->to_string());
                }
                return HostResult::ok({{out, sols.front().at("m")}});
            });
        } else if (spec.behavior == "synthetic-clip") {
            const std::string in = param(spec, "input", op);
            const std::string out = param(spec, "output", op);
            hosts.bind(op, [in, out](const HostCall& call) {
                const Term* movie = input_of(call, in);
                if (movie == nullptr || !movie->is_symbol()) {
                    return HostResult::fail("no movie to abstract");
                }
                return HostResult::ok({{out, Term::symbol("ex:clip-" + local_name(*movie))}});
            });
        } else if (spec.behavior == "stream") {
            const std::string in = param(spec, "input", op);
            const std::string out = param(spec, "output", op);
            hosts.bind(op, [in, out](const HostCall& call) {
                const Term* movie = input_of(call, in);
                if (movie == nullptr || !movie->is_symbol()) {
                    return HostResult::fail("no movie to stream");
                }
                return HostResult::ok({{out, Term::symbol("ex:stream-" + local_name(*movie) + "-" + call.agent)}});
            });
        } else {
            config_error("service " + op, "unknown behavior '" + spec.behavior + "'");
        }
    }
    return hosts;
}

Registry load_registry(const fs::path& dir) {
    try {
        return link(load_bundle(dir));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) {
            throw;
        }
        throw Error(ErrorCode::ConfigError, dir.string() + ": " + std::string(e.what()), e.details());
    }
}

std::unique_ptr<Runtime> build_runtime(const ScenarioConfig& config) {
    Registry registry = load_registry(config.descriptions);
    KnowledgeStore data;
    data.load_file(config.ontology);
    for (const auto& f : config.facts) {
        data.assert_stmt(f);
    }
    HostBindings hosts = make_host_bindings(config.services);
    RuntimeConfig rc;
    rc.objective = config.objective;
    rc.timeout_budget = config.timeout_budget;
    auto rt = std::make_unique<Runtime>(std::move(registry), std::move(data), std::move(hosts), rc);
    try {
        for (const auto& m : config.agents) {
            rt->add_agent(m);
        }
        for (const auto& r : config.registrations) {
            if (!rt->has_agent(r.agent)) {
                throw Error(ErrorCode::UnknownAgent, "registration names unknown agent '" + r.agent + "'");
            }
            const auto& action = rt->registry().action(r.action);
            std::vector<std::string> outputs;
            for (const auto& p : action.outputs) {
                outputs.push_back(p.name);
            }
            rt->matchmaker().register_service(Advertisement{r.agent, action.name, action.capability, outputs});
        }
        for (const auto& [agent, goals] : config.goals) {
            for (const auto& g : goals) {
                rt->post_goal(agent, g);
            }
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) {
            throw;
        }
        throw Error(ErrorCode::ConfigError, "scenario " + config.name + ": " + e.what());
    }
    return rt;
}

namespace {

std::string summarize(const ScenarioConfig& config, const RunReport& report) {
    std::ostringstream os;
    os << "scenario " << config.name << ": " << (report.all_succeeded() ? "succeeded" : "failed") << " after "
       << report.ticks << " tick" << (report.ticks == 1 ? "" : "s") << "\n";
    for (const auto& c : report.conversations) {
        os << "  conversation " << c["id"].get<std::string>() << " " << c["protocol"].get<std::string>() << " "
           << c["initiator"].get<std::string>() << " -> ";
        bool first = true;
        for (const auto& p : c["participants"]) {
            os << (first ? "" : ",") << p.get<std::string>();
            first = false;
        }
        os << ": " << c["status"].get<std::string>();
        if (!c["winner"].is_null()) {
            os << " (winner " << c["winner"].get<std::string>() << ")";
        }
        os << "\n";
    }
    for (const auto& g : report.goals) {
        os << "  goal " << g.agent << " " << g.goal << ": " << (g.succeeded ? "succeeded" : "failed");
        if (!g.reason.empty()) {
            os << " (" << g.reason << ")";
        }
        os << "\n";
    }
    return os.str();
}

} // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
    auto rt = build_runtime(config);
    ScenarioResult result;
    result.report = rt->run_scheduler(config.max_ticks);
    result.trace = rt->trace().to_jsonl();
    result.summary = summarize(config, result.report);
    result.exit_code = result.report.all_succeeded() ? exit_code::kSuccess : exit_code::kGoalFailure;
    return result;
}

ScenarioResult run_scenario(const fs::path& config_path) {
    return run_scenario(ScenarioConfig::load(config_path));
}

std::string TraceDiff::to_string() const {
    std::string out;
    for (const auto& p : problems) {
        out += p + "\n";
    }
    return out;
}

namespace {

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!line.empty()) {
            lines.emplace_back(line);
        }
        start = end + 1;
    }
    return lines;
}

nlohmann::json parse_line(const std::string& line) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
        return nlohmann::json(line);
    }
}

std::string describe(const nlohmann::json& j) {
    if (!j.is_object()) {
        return j.dump();
    }
    std::string d = j.value("event", std::string("?"));
    for (const char* key : {"performative", "act", "name", "goal"}) {
        if (j.contains(key) && j[key].is_string()) {
            d += " " + j[key].get<std::string>();
            break;
        }
    }
    if (j.contains("sender") && j.contains("receiver")) {
        d += " " + j["sender"].get<std::string>() + "->" + j["receiver"].get<std::string>();
    }
    return d;
}

} // namespace

TraceDiff verify_trace(std::string_view actual, std::string_view golden) {
    TraceDiff diff;
    const auto a = split_lines(actual);
    const auto g = split_lines(golden);
    const std::size_t common = std::min(a.size(), g.size());
    for (std::size_t i = 0; i < common; ++i) {
        auto ja = parse_line(a[i]);
        auto jg = parse_line(g[i]);
        if (ja != jg) {
            diff.problems.push_back("line " + std::to_string(i + 1) + ": expected " + describe(jg) + " got " +
                                    describe(ja) + "\n  expected: " + jg.dump() + "\n  actual:   " + ja.dump());
        }
    }
    for (std::size_t i = common; i < a.size(); ++i) {
        diff.problems.push_back("surplus line " + std::to_string(i + 1) + ": " + describe(parse_line(a[i])));
    }
    for (std::size_t i = common; i < g.size(); ++i) {
        diff.problems.push_back("missing line " + std::to_string(i + 1) + ": " + describe(parse_line(g[i])));
    }
    diff.equal = diff.problems.empty();
    return diff;
}

TraceDiff verify_trace_files(const fs::path& actual, const fs::path& golden) {
    return verify_trace(read_text_file(actual), read_text_file(golden));
}

} // namespace agentcomm
