#include "agentcomm/trace.hpp"

#include <fstream>

#include "agentcomm/error.hpp"

namespace agentcomm {

std::string Trace::to_jsonl() const {
    std::string out;
    for (const auto& line : lines_) {
        out += line.dump();
        out += '\n';
    }
    return out;
}

void Trace::write(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw Error(ErrorCode::ConfigError, "cannot write trace to " + path.string());
    }
    os << to_jsonl();
}

} // namespace agentcomm
