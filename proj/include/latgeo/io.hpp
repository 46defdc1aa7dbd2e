#pragma once

#include "latgeo/common.hpp"
#include "latgeo/mlp.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace latgeo {

using Json = nlohmann::json;

/// Model and dataset files share one container layout: an 8-byte
/// little-endian header length, a JSON header, then a raw little-endian
/// float64 payload. Loaders reject truncated payloads and headers whose
/// declared shapes disagree with the payload size.

void save_mlp(const std::filesystem::path& path, const Mlp& net);
Mlp load_mlp(const std::filesystem::path& path);

/// Low-level container helpers shared by model and dataset files.
void write_blob(const std::filesystem::path& path, const Json& header,
                const double* payload, std::size_t count);
Json read_blob(const std::filesystem::path& path, std::vector<double>& payload);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// 64-bit FNV-1a of a file's bytes, hex encoded; used for manifest digests.
std::string file_digest(const std::filesystem::path& path);

} // namespace latgeo
