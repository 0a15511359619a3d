#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace auctionlab {

/// Everything needed to re-run a command: the command name, the full config
/// it ran with, its seeds, the code version, and the files it is about to
/// write. Written before the results so an interrupted run still documents
/// itself.
struct RunManifest {
    std::string command;
    nlohmann::json config_snapshot;
    nlohmann::json seeds;
    std::string version;
    std::string started_at;
    std::vector<std::string> outputs;
};

/// Manifest with version and start timestamp filled in.
RunManifest make_manifest(const std::string& command, const nlohmann::json& config_snapshot,
                          const nlohmann::json& seeds, const std::vector<std::string>& outputs);

nlohmann::json manifest_to_json(const RunManifest& manifest);

/// ISO 8601 UTC timestamp. Honors SOURCE_DATE_EPOCH so re-runs that pin it
/// produce byte-identical manifests.
std::string timestamp_utc();

/// Write a whole file, creating parent directories; throws on failure.
void write_text_file(const std::string& path, const std::string& content);

/// Read a whole file; throws a config error when unreadable.
std::string read_text_file(const std::string& path);

}  // namespace auctionlab
