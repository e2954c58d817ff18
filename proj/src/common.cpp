#include "fairsynth/common.hpp"

#include <sstream>

namespace fairsynth {

std::string to_string(ColumnKind kind) {
    return kind == ColumnKind::Continuous ? "continuous" : "binary";
}

ColumnKind column_kind_from_string(const std::string& text) {
    if (text == "continuous") return ColumnKind::Continuous;
    if (text == "binary") return ColumnKind::Binary;
    throw ValidationError("unknown column kind '" + text + "' (expected 'continuous' or 'binary')");
}

namespace {

std::string format_cycle(const std::vector<std::string>& cycle) {
    std::ostringstream out;
    out << "cycle detected: ";
    for (const auto& name : cycle) out << name << " -> ";
    if (!cycle.empty()) out << cycle.front();
    return out.str();
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

CycleError::CycleError(std::vector<std::string> cycle_nodes)
    : ValidationError(format_cycle(cycle_nodes)), cycle(std::move(cycle_nodes)) {}

uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t mix_seed(uint64_t seed, std::string_view tag) {
    return splitmix64(seed ^ fnv1a64(tag));
}

uint64_t mix_seed(uint64_t seed, std::string_view tag, uint64_t extra) {
    return splitmix64(mix_seed(seed, tag) ^ splitmix64(extra));
}

}  // namespace fairsynth
