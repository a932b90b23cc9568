#include "corpuskit/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "corpuskit/hash.hpp"

namespace corpuskit {

namespace {

std::string hex64(uint64_t value) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["tool"] = "corpuskit";
    j["version"] = tool_version;
    j["subcommand"] = subcommand;
    j["config_path"] = config_path;
    j["config_xxh64"] = config_path.empty() ? "" : hex64(config_hash);
    j["seed"] = seed;
    j["threads"] = threads;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["counts"] = counts;
    j["wall_seconds"] = wall_seconds;
    if (!extra.empty()) j["extra"] = extra;
    return j;
}

uint64_t hash_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for hashing: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string bytes = buffer.str();
    return xxh64_bytes(bytes.data(), bytes.size(), 0);
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << manifest.to_json().dump(2) << "\n";
}

}  // namespace corpuskit
