#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentcomm/agent_runtime.hpp"

namespace agentcomm {

namespace exit_code {
inline constexpr int kSuccess = 0;
inline constexpr int kGoalFailure = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kTraceMismatch = 3;
} // namespace exit_code

struct ServiceSpec {
    std::string behavior;
    nlohmann::json params = nlohmann::json::object();
};

struct Registration {
    AgentId agent;
    std::string action;
};

struct ScenarioConfig {
    std::string name;
    std::filesystem::path ontology;
    std::filesystem::path descriptions;
    std::vector<AgentManifest> agents;
    std::map<std::string, ServiceSpec> services;
    std::vector<Registration> registrations;
    std::optional<Objective> objective;
    std::vector<Statement> facts;
    std::map<AgentId, std::vector<GoalTerm>> goals;
    std::size_t max_ticks = 100;
    Tick timeout_budget = 10;

    /// Relative paths resolve against the config file's directory. Every
    /// failure is reported as ConfigError naming the file.
    static ScenarioConfig load(const std::filesystem::path& path);
    static ScenarioConfig from_json(const nlohmann::json& j, const std::filesystem::path& base);
};

/// Built-in simulated services:
///   catalog-size        counts instances of params.class into params.output
///   recommend-by-genre  first movie whose ex:genre is the params.input value
///   synthetic-clip      clip id derived from the params.input value
///   stream              stream id derived from the params.input value and agent
/// Throws ConfigError for an unknown behavior.
HostBindings make_host_bindings(const std::map<std::string, ServiceSpec>& services);

/// Loads and links the descriptions (any linker error becomes ConfigError
/// with the original code in the message).
Registry load_registry(const std::filesystem::path& dir);

/// Builds a ready-to-run runtime: descriptions, ontology, facts, agents,
/// matchmaker registrations and goals.
std::unique_ptr<Runtime> build_runtime(const ScenarioConfig& config);

struct ScenarioResult {
    int exit_code = exit_code::kSuccess;
    RunReport report;
    std::string trace;
    std::string summary;
};

ScenarioResult run_scenario(const ScenarioConfig& config);
ScenarioResult run_scenario(const std::filesystem::path& config_path);

struct TraceDiff {
    bool equal = true;
    std::vector<std::string> problems;

    std::string to_string() const;
};

/// Line-by-line comparison of two JSON-lines traces as parsed JSON values.
TraceDiff verify_trace(std::string_view actual, std::string_view golden);
TraceDiff verify_trace_files(const std::filesystem::path& actual, const std::filesystem::path& golden);

std::string read_text_file(const std::filesystem::path& path);

} // namespace agentcomm
