#include "auctionlab/manifest.hpp"

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "auctionlab/errors.hpp"
#include "auctionlab/version.hpp"

namespace auctionlab {

std::string timestamp_utc() {
    std::time_t now = std::time(nullptr);
    if (const char* pinned = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        const long long epoch = std::strtoll(pinned, &end, 10);
        if (end != pinned && *end == '\0') now = static_cast<std::time_t>(epoch);
    }
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

RunManifest make_manifest(const std::string& command, const nlohmann::json& config_snapshot,
                          const nlohmann::json& seeds, const std::vector<std::string>& outputs) {
    RunManifest manifest;
    manifest.command = command;
    manifest.config_snapshot = config_snapshot;
    manifest.seeds = seeds;
    manifest.version = kVersionTag;
    manifest.started_at = timestamp_utc();
    manifest.outputs = outputs;
    return manifest;
}

nlohmann::json manifest_to_json(const RunManifest& manifest) {
    return {{"command", manifest.command},
            {"config", manifest.config_snapshot},
            {"seeds", manifest.seeds},
            {"version", manifest.version},
            {"started_at", manifest.started_at},
            {"outputs", manifest.outputs}};
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) throw config_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace auctionlab
