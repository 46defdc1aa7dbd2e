#pragma once

#include "latgeo/common.hpp"
#include "latgeo/io.hpp"
#include "latgeo/metric.hpp"
#include "latgeo/mlp.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

namespace latgeo {

/// Rectangular evaluation window over a two-dimensional latent space.
struct GridSpec {
    double xmin = -1, xmax = 1;
    double ymin = -1, ymax = 1;
    Index nx = 2, ny = 2;

    void validate() const;
    Index node_count() const { return nx * ny; }
    /// Row-major: iy outer, ix inner.
    Index index(Index ix, Index iy) const { return iy * nx + ix; }
    Vector node(Index ix, Index iy) const;
    Vector node(Index flat) const { return node(flat % nx, flat / nx); }
    Index nearest(const Vector& z) const;
    bool contains(const Vector& z) const;
};

enum class FieldKind { MagnificationFactor, GraphDistance };

struct DistanceField {
    GridSpec grid;
    FieldKind kind = FieldKind::MagnificationFactor;
    std::vector<double> values; // node_count entries, row-major
    std::optional<Vector> source;
};

/// Magnification factor at every grid node; node-parallel, fixed node order.
DistanceField mf_field(const Mlp& decoder, const GridSpec& grid);

/// 8-neighbour grid graph with Riemannian edge weights: the weight between
/// adjacent nodes a,b is the (optionally smoothed) velocity at the edge
/// midpoint with step b-a. Reused for several Dijkstra sources.
class GridGraph {
public:
    GridGraph(const Mlp& decoder, const GridSpec& grid,
              const SmoothingConfig* smoothing = nullptr);

    const GridSpec& grid() const { return grid_; }
    std::vector<double> shortest_paths(Index source_node) const;
    double distance(Index from_node, Index to_node) const;

private:
    GridSpec grid_;
    // undirected weights stored once per node for steps E, N, NE, NW
    std::vector<std::array<double, 4>> w_;

    struct Neighbor {
        Index node;
        double weight;
    };
    void for_each_neighbor(Index node, const std::function<void(Neighbor)>& fn) const;
};

/// Single-source geodesic-distance oracle from the node nearest `source`.
DistanceField graph_distance_field(const Mlp& decoder, const GridSpec& grid,
                                   const Vector& source,
                                   const SmoothingConfig* smoothing = nullptr);

/// CSV with header zx,zy,value in row-major node order.
void write_field_csv(const std::filesystem::path& path, const DistanceField& field);
/// 8-bit binary PGM, min-max normalised; row 0 is the ymax edge.
void write_field_pgm(const std::filesystem::path& path, const DistanceField& field);
Json field_sidecar(const DistanceField& field);

} // namespace latgeo
