#pragma once

#include "latgeo/io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace latgeo {

inline constexpr const char* kToolVersion = "0.1.0";

/// Reproducibility record written next to every command's outputs: the
/// resolved configuration, seed, input digests and produced files. Reruns
/// with identical inputs reproduce identical numeric outputs; only the
/// timestamps differ.
struct RunManifest {
    std::string command;
    Json config = Json::object();
    std::uint64_t seed = 0;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::string> outputs;
    std::string started_at;
    std::string finished_at;
};

std::string iso8601_now();
void write_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest);

} // namespace latgeo
