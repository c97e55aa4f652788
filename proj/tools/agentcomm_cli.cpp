#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <csignal>
#include <signal.h>
#include <cstring>
#include <iostream>

#include <CLI11.hpp>

#include "agentcomm/scenario.hpp"

namespace ac = agentcomm;

namespace {

int cmd_run(const std::string& scenario, const std::string& trace_path, const std::string& golden) {
    auto result = ac::run_scenario(std::filesystem::path(scenario));
    std::cout << result.summary;
    if (!trace_path.empty()) {
        std::ofstream out(trace_path, std::ios::binary);
        if (!out) {
            throw ac::Error(ac::ErrorCode::ConfigError, "cannot write trace to " + trace_path);
        }
        out << result.trace;
    }
    if (!golden.empty()) {
        auto diff = ac::verify_trace(result.trace, ac::read_text_file(golden));
        if (!diff.equal) {
            std::cout << "trace differs from " << golden << ":\n" << diff.to_string();
            return ac::exit_code::kTraceMismatch;
        }
        std::cout << "trace matches " << golden << "\n";
    }
    return result.exit_code;
}

int cmd_validate(const std::string& dir) {
    auto registry = ac::load_registry(dir);
    for (const auto& name : registry.names()) {
        std::cout << name << "\n";
    }
    std::cout << registry.size() << " descriptions ok\n";
    return ac::exit_code::kSuccess;
}

std::unique_ptr<ac::Runtime> runtime_for(const std::string& scenario) {
    return ac::build_runtime(ac::ScenarioConfig::load(scenario));
}

int cmd_lookup(const std::string& capability, const std::string& scenario, const std::vector<std::string>& outputs) {
    auto rt = runtime_for(scenario);
    for (const auto& agent : rt->matchmaker().lookup(ac::term_from_token(capability), outputs)) {
        std::cout << agent << "\n";
    }
    return ac::exit_code::kSuccess;
}

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) {
    g_stop = 1;
}

/// Serves the matchmaker line protocol on a unix socket, one request per line.
int cmd_serve(const std::string& scenario, const std::string& socket_path) {
    auto rt = runtime_for(scenario);
    int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (fd < 0) {
        throw ac::Error(ac::ErrorCode::ConfigError, std::string("socket: ") + std::strerror(errno));
    }
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (socket_path.size() >= sizeof(addr.sun_path)) {
        ::close(fd);
        throw ac::Error(ac::ErrorCode::ConfigError, "socket path too long: " + socket_path);
    }
    std::strncpy(addr.sun_path, socket_path.c_str(), sizeof(addr.sun_path) - 1);
    ::unlink(socket_path.c_str());
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 || ::listen(fd, 8) < 0) {
        std::string err = std::strerror(errno);
        ::close(fd);
        throw ac::Error(ac::ErrorCode::ConfigError, "cannot listen on " + socket_path + ": " + err);
    }
    // Installed without SA_RESTART so a signal interrupts the blocking accept.
    struct sigaction sa{};
    sa.sa_handler = on_signal;
    sigemptyset(&sa.sa_mask);
    ::sigaction(SIGINT, &sa, nullptr);
    ::sigaction(SIGTERM, &sa, nullptr);
    std::cerr << "matchmaker listening on " << socket_path << "\n";
    while (!g_stop) {
        int client = ::accept(fd, nullptr, nullptr);
        if (client < 0) {
            if (errno == EINTR) {
                continue;
            }
            break;
        }
        std::string buffer;
        char chunk[4096];
        ssize_t n;
        while ((n = ::read(client, chunk, sizeof(chunk))) > 0) {
            buffer.append(chunk, static_cast<std::size_t>(n));
            std::size_t pos;
            while ((pos = buffer.find('\n')) != std::string::npos) {
                std::string line = buffer.substr(0, pos);
                buffer.erase(0, pos + 1);
                if (line.empty()) {
                    continue;
                }
                std::string reply = rt->matchmaker().handle_line(line) + "\n";
                if (::write(client, reply.data(), reply.size()) < 0) {
                    break;
                }
            }
        }
        ::close(client);
    }
    ::close(fd);
    ::unlink(socket_path.c_str());
    return ac::exit_code::kSuccess;
}

int cmd_verify(const std::string& actual, const std::string& golden) {
    auto diff = ac::verify_trace_files(actual, golden);
    if (!diff.equal) {
        std::cout << diff.to_string();
        return ac::exit_code::kTraceMismatch;
    }
    std::cout << "traces match\n";
    return ac::exit_code::kSuccess;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Run and inspect semantic agent communication scenarios"};
    app.require_subcommand(1);

    std::string scenario, trace_path, golden, dir, capability, socket_path, actual;
    std::vector<std::string> outputs;

    auto* run = app.add_subcommand("run", "Run a scenario config");
    run->add_option("scenario", scenario, "Scenario JSON file")->required();
    run->add_option("--trace", trace_path, "Write the JSON-lines trace here");
    run->add_option("--verify", golden, "Compare the trace against a golden trace");

    auto* validate = app.add_subcommand("validate", "Load and link a description bundle");
    validate->add_option("dir", dir, "Description directory")->required();

    auto* lookup = app.add_subcommand("lookup", "Query a scenario's matchmaker registrations");
    lookup->add_option("capability", capability, "Capability class")->required();
    lookup->add_option("--scenario", scenario, "Scenario JSON file")->required();
    lookup->add_option("--outputs", outputs, "Required output parameters")->delimiter(',');

    auto* serve = app.add_subcommand("serve", "Serve the matchmaker over a unix socket");
    serve->add_option("--scenario", scenario, "Scenario JSON file")->required();
    serve->add_option("--socket", socket_path, "Socket path")->required();

    auto* verify = app.add_subcommand("verify", "Compare two traces");
    verify->add_option("actual", actual, "Trace to check")->required();
    verify->add_option("golden", golden, "Golden trace")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : ac::exit_code::kConfigError;
    }

    try {
        if (*run) return cmd_run(scenario, trace_path, golden);
        if (*validate) return cmd_validate(dir);
        if (*lookup) return cmd_lookup(capability, scenario, outputs);
        if (*serve) return cmd_serve(scenario, socket_path);
        if (*verify) return cmd_verify(actual, golden);
    } catch (const ac::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& d : e.details()) {
            std::cerr << "  " << d << "\n";
        }
        return ac::exit_code::kConfigError;
    }
    return ac::exit_code::kConfigError;
}
