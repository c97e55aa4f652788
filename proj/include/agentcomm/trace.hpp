#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace agentcomm {

using Tick = std::uint64_t;

/// Append-only run trace. Every line is a JSON object; nlohmann's default
/// object type keeps keys sorted, so the serialized form is byte-stable.
class Trace {
public:
    void emit(nlohmann::json line) { lines_.push_back(std::move(line)); }

    const std::vector<nlohmann::json>& lines() const noexcept { return lines_; }
    std::size_t size() const noexcept { return lines_.size(); }
    void clear() { lines_.clear(); }

    std::string to_jsonl() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<nlohmann::json> lines_;
};

/// Emits only when a sink is attached.
inline void emit(Trace* trace, nlohmann::json line) {
    if (trace != nullptr) {
        trace->emit(std::move(line));
    }
}

} // namespace agentcomm
