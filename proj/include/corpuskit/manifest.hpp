#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace corpuskit {

inline constexpr const char* kToolVersion = "0.1.0";

// One of these is written for every CLI run so any output file can be
// traced back to the exact inputs, config bytes, and seed that made it.
struct RunManifest {
    std::string subcommand;
    std::string tool_version = kToolVersion;
    std::string config_path;
    uint64_t config_hash = 0;
    uint64_t seed = 0;
    size_t threads = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::map<std::string, int64_t> counts;
    double wall_seconds = 0.0;
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json to_json() const;
};

// xxh64 over the raw file bytes, so the hash changes iff the config does.
uint64_t hash_file_bytes(const std::string& path);

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace corpuskit
