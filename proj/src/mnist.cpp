#include "latgeo/mnist.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

namespace latgeo {
namespace {

constexpr Index kMnistDim = 784;

std::uint32_t read_be32(std::istream& in, const std::string& what) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw IoError("truncated " + what);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

bool looks_like_idx(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    unsigned char b[4] = {0, 0, 0, 0};
    in.read(reinterpret_cast<char*>(b), 4);
    return in && b[0] == 0 && b[1] == 0 && b[2] == 0x08;
}

std::filesystem::path sibling_labels_path(const std::filesystem::path& images) {
    std::string name = images.filename().string();
    auto replace_all = [](std::string& s, const std::string& from, const std::string& to) {
        for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
            s.replace(pos, from.size(), to);
    };
    replace_all(name, "images", "labels");
    replace_all(name, "idx3", "idx1");
    return images.parent_path() / name;
}

Dataset load_idx(const std::filesystem::path& path, Index limit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    const std::uint32_t magic = read_be32(in, "IDX magic in " + path.string());
    if (magic != 2051) throw IoError("not an IDX image file: " + path.string());
    const auto count = static_cast<Index>(read_be32(in, "IDX count"));
    const auto rows = static_cast<Index>(read_be32(in, "IDX rows"));
    const auto cols = static_cast<Index>(read_be32(in, "IDX cols"));
    if (rows * cols != kMnistDim)
        throw IoError("expected 28x28 images in " + path.string());
    const Index take = limit > 0 ? std::min(limit, count) : count;

    std::vector<unsigned char> buf(static_cast<std::size_t>(count) * kMnistDim);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size())
        throw IoError("declared count disagrees with payload size in " + path.string());

    Dataset ds;
    ds.samples.resize(take, kMnistDim);
    for (Index i = 0; i < take; ++i)
        for (Index j = 0; j < kMnistDim; ++j)
            ds.samples(i, j) =
                buf[static_cast<std::size_t>(i) * kMnistDim + static_cast<std::size_t>(j)] >= 128
                    ? 1.0
                    : 0.0;

    const auto labels_path = sibling_labels_path(path);
    if (labels_path != path && std::filesystem::exists(labels_path)) {
        std::ifstream lin(labels_path, std::ios::binary);
        if (!lin) throw IoError("cannot open: " + labels_path.string());
        if (read_be32(lin, "IDX magic in " + labels_path.string()) != 2049)
            throw IoError("not an IDX label file: " + labels_path.string());
        const auto lcount = static_cast<Index>(read_be32(lin, "IDX label count"));
        if (lcount != count)
            throw IoError("label count disagrees with image count for " + path.string());
        std::vector<unsigned char> lab(static_cast<std::size_t>(take));
        lin.read(reinterpret_cast<char*>(lab.data()), static_cast<std::streamsize>(lab.size()));
        if (static_cast<std::size_t>(lin.gcount()) != lab.size())
            throw IoError("truncated label payload in " + labels_path.string());
        ds.annotation_names = {"label"};
        ds.annotations.resize(take, 1);
        for (Index i = 0; i < take; ++i)
            ds.annotations(i, 0) = static_cast<double>(lab[static_cast<std::size_t>(i)]);
    }
    ds.provenance = {{"generator", "mnist"},
                     {"route", "idx"},
                     {"source", path.string()},
                     {"binarization", "threshold 0.5"}};
    return ds;
}

Dataset load_text(const std::filesystem::path& path, Index limit) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());
    std::vector<double> values;
    std::string line;
    Index count = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        double v;
        Index row_dim = 0;
        while (ss >> v) {
            if (v != 0.0 && v != 1.0)
                throw IoError("non-binary value in pre-binarized split: " + path.string());
            values.push_back(v);
            ++row_dim;
        }
        if (row_dim != kMnistDim)
            throw IoError("expected 784 values per row in " + path.string());
        ++count;
        if (limit > 0 && count >= limit) break;
    }
    if (count == 0) throw IoError("no rows in " + path.string());
    Dataset ds;
    ds.samples.resize(count, kMnistDim);
    for (Index i = 0; i < count; ++i)
        for (Index j = 0; j < kMnistDim; ++j)
            ds.samples(i, j) = values[static_cast<std::size_t>(i * kMnistDim + j)];
    ds.provenance = {{"generator", "mnist"},
                     {"route", "text"},
                     {"source", path.string()},
                     {"binarization", "pre-binarized"}};
    return ds;
}

} // namespace

Dataset mnist_load(const std::filesystem::path& path, Index limit) {
    require(limit >= 0, "mnist_load: limit must be nonnegative");
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    return looks_like_idx(path) ? load_idx(path, limit) : load_text(path, limit);
}

} // namespace latgeo
