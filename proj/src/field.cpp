#include "latgeo/field.hpp"

#include "latgeo/threads.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>

namespace latgeo {

void GridSpec::validate() const {
    require(nx >= 2 && ny >= 2, "grid resolution must be at least 2 per axis");
    require(xmax > xmin && ymax > ymin, "grid extent must be positive");
}

Vector GridSpec::node(Index ix, Index iy) const {
    Vector z(2);
    z[0] = xmin + (xmax - xmin) * static_cast<double>(ix) / static_cast<double>(nx - 1);
    z[1] = ymin + (ymax - ymin) * static_cast<double>(iy) / static_cast<double>(ny - 1);
    return z;
}

Index GridSpec::nearest(const Vector& z) const {
    require(z.size() == 2, "grid nodes are two-dimensional");
    auto snap = [](double v, double lo, double hi, Index n) {
        double f = (v - lo) / (hi - lo) * static_cast<double>(n - 1);
        return std::clamp<Index>(static_cast<Index>(std::lround(f)), 0, n - 1);
    };
    return index(snap(z[0], xmin, xmax, nx), snap(z[1], ymin, ymax, ny));
}

bool GridSpec::contains(const Vector& z) const {
    return z.size() == 2 && z[0] >= xmin && z[0] <= xmax && z[1] >= ymin && z[1] <= ymax;
}

DistanceField mf_field(const Mlp& decoder, const GridSpec& grid) {
    grid.validate();
    require(decoder.input_dim() == 2, "mf_field requires a two-dimensional latent space");
    DistanceField field;
    field.grid = grid;
    field.kind = FieldKind::MagnificationFactor;
    field.values.assign(static_cast<std::size_t>(grid.node_count()), 0.0);
    parallel_for(grid.node_count(), [&](Index i) {
        field.values[static_cast<std::size_t>(i)] = magnification_factor(decoder, grid.node(i));
    });
    return field;
}

namespace {

// Batched Jacobian columns at many latent points: T[a].col(i) = dJ/dz_a at
// point i, i.e. J_i = [T[0].col(i) T[1].col(i)].
std::vector<Matrix> batch_jacobians(const Mlp& decoder, const Matrix& Z, Mlp::Cache& cache) {
    decoder.forward_batch(Z, &cache);
    std::vector<Matrix> T0(2);
    for (Index a = 0; a < 2; ++a) {
        Matrix e = Matrix::Zero(2, Z.cols());
        e.row(a).setOnes();
        T0[static_cast<std::size_t>(a)] = std::move(e);
    }
    return decoder.tangent_batch(cache, T0);
}

} // namespace

GridGraph::GridGraph(const Mlp& decoder, const GridSpec& grid, const SmoothingConfig* smoothing)
    : grid_(grid) {
    grid_.validate();
    require(decoder.input_dim() == 2, "grid graph requires a two-dimensional latent space");
    SmoothingConfig cfg = smoothing ? *smoothing : SmoothingConfig{};
    cfg.validate(2);

    const Index n = grid_.node_count();
    w_.assign(static_cast<std::size_t>(n),
              {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
               std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()});

    // steps: E, N, NE, NW in index space
    const std::array<std::pair<Index, Index>, 4> steps{{{1, 0}, {0, 1}, {1, 1}, {-1, 1}}};
    for (std::size_t d = 0; d < steps.size(); ++d) {
        auto [dx, dy] = steps[d];
        std::vector<Index> from;
        from.reserve(static_cast<std::size_t>(n));
        for (Index iy = 0; iy < grid_.ny; ++iy) {
            for (Index ix = 0; ix < grid_.nx; ++ix) {
                Index jx = ix + dx, jy = iy + dy;
                if (jx < 0 || jx >= grid_.nx || jy < 0 || jy >= grid_.ny) continue;
                from.push_back(grid_.index(ix, iy));
            }
        }
        if (from.empty()) continue;
        const Index m = static_cast<Index>(from.size());
        Matrix mid(2, m);
        std::vector<Vector> dz(static_cast<std::size_t>(m));
        for (Index c = 0; c < m; ++c) {
            Index a = from[static_cast<std::size_t>(c)];
            Vector za = grid_.node(a);
            Vector zb = grid_.node(a % grid_.nx + dx, a / grid_.nx + dy);
            mid.col(c) = 0.5 * (za + zb);
            dz[static_cast<std::size_t>(c)] = zb - za;
        }
        Mlp::Cache cache;
        auto T = batch_jacobians(decoder, mid, cache);
        parallel_for(m, [&](Index c) {
            Matrix J(decoder.output_dim(), 2);
            J.col(0) = T[0].col(c);
            J.col(1) = T[1].col(c);
            double wgt = smoothed_velocity_value(J, dz[static_cast<std::size_t>(c)], cfg);
            w_[static_cast<std::size_t>(from[static_cast<std::size_t>(c)])][d] = wgt;
        });
    }
}

void GridGraph::for_each_neighbor(Index node, const std::function<void(Neighbor)>& fn) const {
    const Index ix = node % grid_.nx;
    const Index iy = node / grid_.nx;
    const std::array<std::pair<Index, Index>, 4> steps{{{1, 0}, {0, 1}, {1, 1}, {-1, 1}}};
    for (std::size_t d = 0; d < steps.size(); ++d) {
        auto [dx, dy] = steps[d];
        // forward edge
        Index jx = ix + dx, jy = iy + dy;
        if (jx >= 0 && jx < grid_.nx && jy >= 0 && jy < grid_.ny)
            fn({grid_.index(jx, jy), w_[static_cast<std::size_t>(node)][d]});
        // reverse edge, stored at the other endpoint
        jx = ix - dx;
        jy = iy - dy;
        if (jx >= 0 && jx < grid_.nx && jy >= 0 && jy < grid_.ny)
            fn({grid_.index(jx, jy), w_[static_cast<std::size_t>(grid_.index(jx, jy))][d]});
    }
}

std::vector<double> GridGraph::shortest_paths(Index source_node) const {
    const Index n = grid_.node_count();
    require(source_node >= 0 && source_node < n, "source node out of range");
    std::vector<double> dist(static_cast<std::size_t>(n),
                             std::numeric_limits<double>::infinity());
    using Entry = std::pair<double, Index>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    dist[static_cast<std::size_t>(source_node)] = 0.0;
    heap.emplace(0.0, source_node);
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[static_cast<std::size_t>(u)]) continue;
        for_each_neighbor(u, [&](Neighbor nb) {
            double alt = d + nb.weight;
            if (alt < dist[static_cast<std::size_t>(nb.node)]) {
                dist[static_cast<std::size_t>(nb.node)] = alt;
                heap.emplace(alt, nb.node);
            }
        });
    }
    return dist;
}

double GridGraph::distance(Index from_node, Index to_node) const {
    auto d = shortest_paths(from_node);
    return d[static_cast<std::size_t>(to_node)];
}

DistanceField graph_distance_field(const Mlp& decoder, const GridSpec& grid, const Vector& source,
                                   const SmoothingConfig* smoothing) {
    grid.validate();
    require(grid.contains(source), "source point outside the grid window");
    GridGraph graph(decoder, grid, smoothing);
    DistanceField field;
    field.grid = grid;
    field.kind = FieldKind::GraphDistance;
    field.source = source;
    field.values = graph.shortest_paths(grid.nearest(source));
    return field;
}

void write_field_csv(const std::filesystem::path& path, const DistanceField& field) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "zx,zy,value\n";
    out.precision(17);
    for (Index i = 0; i < field.grid.node_count(); ++i) {
        Vector z = field.grid.node(i);
        out << z[0] << ',' << z[1] << ',' << field.values[static_cast<std::size_t>(i)] << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_field_pgm(const std::filesystem::path& path, const DistanceField& field) {
    const auto [lo_it, hi_it] = std::minmax_element(field.values.begin(), field.values.end());
    const double lo = *lo_it, hi = *hi_it;
    const double span = hi > lo ? hi - lo : 1.0;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "P5\n" << field.grid.nx << ' ' << field.grid.ny << "\n255\n";
    for (Index row = 0; row < field.grid.ny; ++row) {
        const Index iy = field.grid.ny - 1 - row; // ymax at the top
        for (Index ix = 0; ix < field.grid.nx; ++ix) {
            double v = field.values[static_cast<std::size_t>(field.grid.index(ix, iy))];
            auto byte = static_cast<unsigned char>(
                std::clamp(std::lround((v - lo) / span * 255.0), 0l, 255l));
            out.put(static_cast<char>(byte));
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

Json field_sidecar(const DistanceField& field) {
    const auto [lo_it, hi_it] = std::minmax_element(field.values.begin(), field.values.end());
    Json j = {{"grid",
               {{"xmin", field.grid.xmin},
                {"xmax", field.grid.xmax},
                {"ymin", field.grid.ymin},
                {"ymax", field.grid.ymax},
                {"nx", field.grid.nx},
                {"ny", field.grid.ny}}},
              {"kind", field.kind == FieldKind::MagnificationFactor ? "mf" : "graph-distance"},
              {"order", "row-major, iy outer"},
              {"pgm_normalization", {{"min", *lo_it}, {"max", *hi_it}}},
              {"pgm_row0", "ymax"}};
    if (field.source) j["source"] = {(*field.source)[0], (*field.source)[1]};
    return j;
}

} // namespace latgeo
