#include "latgeo/dataset.hpp"

#include <fstream>
#include <sstream>

namespace latgeo {

void Dataset::validate() const {
    require(samples.size() == 0 || samples.allFinite(), "dataset contains non-finite samples");
    if (!annotation_names.empty()) {
        require(annotations.rows() == samples.rows(),
                "annotation count disagrees with sample count");
        require(annotations.cols() == static_cast<Index>(annotation_names.size()),
                "annotation columns disagree with the schema");
    }
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
    ds.validate();
    Json header = {{"format", "latgeo-dataset"},
                   {"version", 1},
                   {"count", ds.count()},
                   {"dim", ds.dim()},
                   {"annotations", ds.annotation_names},
                   {"provenance", ds.provenance}};
    // row-major payload
    std::vector<double> payload(static_cast<std::size_t>(ds.count() * ds.dim()));
    for (Index i = 0; i < ds.count(); ++i)
        for (Index j = 0; j < ds.dim(); ++j)
            payload[static_cast<std::size_t>(i * ds.dim() + j)] = ds.samples(i, j);
    write_blob(path, header, payload.data(), payload.size());

    if (!ds.annotation_names.empty()) {
        std::filesystem::path ann = path;
        ann.replace_extension(".annotations.csv");
        std::ofstream out(ann);
        if (!out) throw IoError("cannot open for writing: " + ann.string());
        out.precision(17);
        for (std::size_t j = 0; j < ds.annotation_names.size(); ++j)
            out << (j ? "," : "") << ds.annotation_names[j];
        out << '\n';
        for (Index i = 0; i < ds.count(); ++i) {
            for (Index j = 0; j < ds.annotations.cols(); ++j)
                out << (j ? "," : "") << ds.annotations(i, j);
            out << '\n';
        }
        if (!out) throw IoError("write failed: " + ann.string());
    }
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::vector<double> payload;
    Json header = read_blob(path, payload);
    if (header.value("format", "") != "latgeo-dataset")
        throw IoError("not a dataset file: " + path.string());
    const Index count = header.at("count").get<Index>();
    const Index dim = header.at("dim").get<Index>();
    if (count < 0 || dim <= 0) throw IoError("bad dataset shape in " + path.string());
    if (payload.size() != static_cast<std::size_t>(count) * static_cast<std::size_t>(dim))
        throw IoError("declared count disagrees with payload size in " + path.string());
    Dataset ds;
    ds.samples.resize(count, dim);
    for (Index i = 0; i < count; ++i)
        for (Index j = 0; j < dim; ++j)
            ds.samples(i, j) = payload[static_cast<std::size_t>(i * dim + j)];
    ds.provenance = header.value("provenance", Json::object());
    ds.annotation_names = header.value("annotations", std::vector<std::string>{});

    if (!ds.annotation_names.empty()) {
        std::filesystem::path ann = path;
        ann.replace_extension(".annotations.csv");
        std::ifstream in(ann);
        if (!in) throw IoError("missing annotations file: " + ann.string());
        std::string line;
        std::getline(in, line); // header row
        ds.annotations.resize(count, static_cast<Index>(ds.annotation_names.size()));
        for (Index i = 0; i < count; ++i) {
            if (!std::getline(in, line))
                throw IoError("annotations shorter than dataset in " + ann.string());
            std::stringstream ss(line);
            std::string cell;
            for (Index j = 0; j < ds.annotations.cols(); ++j) {
                if (!std::getline(ss, cell, ','))
                    throw IoError("annotation row too short in " + ann.string());
                ds.annotations(i, j) = std::stod(cell);
            }
        }
    }
    ds.validate();
    return ds;
}

} // namespace latgeo
