#include "latgeo/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

namespace latgeo {

void write_blob(const std::filesystem::path& path, const Json& header, const double* payload,
                std::size_t count) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    const std::string head = header.dump();
    const std::uint64_t head_len = head.size();
    out.write(reinterpret_cast<const char*>(&head_len), sizeof(head_len));
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    out.write(reinterpret_cast<const char*>(payload),
              static_cast<std::streamsize>(count * sizeof(double)));
    if (!out) throw IoError("write failed: " + path.string());
}

Json read_blob(const std::filesystem::path& path, std::vector<double>& payload) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open: " + path.string());
    const auto file_size = static_cast<std::uint64_t>(in.tellg());
    in.seekg(0);
    std::uint64_t head_len = 0;
    if (file_size < sizeof(head_len)) throw IoError("truncated file: " + path.string());
    in.read(reinterpret_cast<char*>(&head_len), sizeof(head_len));
    if (head_len > file_size - sizeof(head_len))
        throw IoError("corrupt header length in " + path.string());
    std::string head(head_len, '\0');
    in.read(head.data(), static_cast<std::streamsize>(head_len));
    Json header;
    try {
        header = Json::parse(head);
    } catch (const Json::parse_error& e) {
        throw IoError("malformed header in " + path.string() + ": " + e.what());
    }
    const std::uint64_t payload_bytes = file_size - sizeof(head_len) - head_len;
    if (payload_bytes % sizeof(double) != 0)
        throw IoError("payload not a whole number of float64 in " + path.string());
    payload.resize(payload_bytes / sizeof(double));
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload_bytes));
    if (!in) throw IoError("short read: " + path.string());
    return header;
}

void save_mlp(const std::filesystem::path& path, const Mlp& net) {
    Json layers = Json::array();
    std::size_t count = 0;
    for (const auto& l : net.layers()) {
        layers.push_back({{"rows", l.W.rows()},
                          {"cols", l.W.cols()},
                          {"activation", std::string(activation_name(l.act))},
                          {"residual", l.residual}});
        count += static_cast<std::size_t>(l.W.size() + l.b.size());
    }
    Json header = {{"format", "latgeo-mlp"},
                   {"version", 1},
                   {"input_dim", net.input_dim()},
                   {"output_dim", net.output_dim()},
                   {"layers", layers}};
    Vector flat = net.get_params();
    (void)count;
    write_blob(path, header, flat.data(), static_cast<std::size_t>(flat.size()));
}

Mlp load_mlp(const std::filesystem::path& path) {
    std::vector<double> payload;
    Json header = read_blob(path, payload);
    if (header.value("format", "") != "latgeo-mlp")
        throw IoError("not a model file: " + path.string());
    std::vector<Layer> layers;
    std::size_t off = 0;
    for (const auto& jl : header.at("layers")) {
        const Index rows = jl.at("rows").get<Index>();
        const Index cols = jl.at("cols").get<Index>();
        if (rows <= 0 || cols <= 0) throw IoError("bad layer shape in " + path.string());
        Activation act;
        try {
            act = activation_from_name(jl.at("activation").get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw IoError(std::string(e.what()) + " in " + path.string());
        }
        const std::size_t need = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) +
                                 static_cast<std::size_t>(rows);
        if (off + need > payload.size())
            throw IoError("payload shorter than declared shapes in " + path.string());
        Matrix W(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) W(i, j) = payload[off++];
        Vector b(rows);
        for (Index i = 0; i < rows; ++i) b[i] = payload[off++];
        layers.push_back(Layer{std::move(W), std::move(b), act, jl.value("residual", false)});
    }
    if (off != payload.size())
        throw IoError("payload longer than declared shapes in " + path.string());
    Mlp net(std::move(layers));
    if (net.input_dim() != header.at("input_dim").get<Index>() ||
        net.output_dim() != header.at("output_dim").get<Index>())
        throw IoError("dimension metadata disagrees with layer shapes in " + path.string());
    return net;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + hex;
}

} // namespace latgeo
