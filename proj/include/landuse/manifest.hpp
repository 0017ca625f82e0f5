#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "landuse/errors.hpp"
#include "landuse/serialize.hpp"

namespace landuse::io {

inline constexpr const char* kArtifactVersion = "1.0.0";

/// FNV-1a 64-bit over the file bytes; cheap content fingerprint for
/// reproducibility manifests.
inline std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("missing input file: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    char hex[32];
    std::snprintf(hex, sizeof(hex), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return hex;
}

/// Written next to every stage output: input hashes, effective config, seed.
inline void write_manifest(const std::string& output_path, const std::string& stage,
                           const std::vector<std::string>& inputs, const json& config,
                           std::uint64_t seed) {
    json j;
    j["stage"] = stage;
    j["version"] = kArtifactVersion;
    j["seed"] = seed;
    j["config"] = config;
    json in = json::object();
    for (const auto& path : inputs) in[path] = file_hash(path);
    j["inputs"] = std::move(in);
    save_json(j, output_path + ".manifest.json");
}

}  // namespace landuse::io
