#pragma once

#include "latgeo/common.hpp"
#include "latgeo/io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace latgeo {

/// Sample matrix (one row per sample) with per-sample annotations and the
/// provenance needed to regenerate it (generator name, config echo, seed).
struct Dataset {
    Matrix samples;
    std::vector<std::string> annotation_names;
    Matrix annotations; // count x annotation_names.size()
    Json provenance = Json::object();

    Index count() const { return samples.rows(); }
    Index dim() const { return samples.cols(); }
    void validate() const;
};

/// Binary blob (JSON header + row-major float64 payload) plus an adjacent
/// <stem>.annotations.csv when annotations exist.
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

} // namespace latgeo
