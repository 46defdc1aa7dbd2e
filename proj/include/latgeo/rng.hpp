#pragma once

#include "latgeo/common.hpp"

#include <cstdint>
#include <string_view>

namespace latgeo {

/// Deterministic counter-splittable random stream.
///
/// Every stream is identified by a 64-bit key; substreams are derived by
/// mixing the parent key with a label hash or an index, so the draw order
/// of one stream never depends on how much another stream has consumed.
/// Normal variates use Box-Muller on the raw 64-bit output, which pins the
/// exact bit pattern of every draw to the seed (no dependence on the
/// standard library's distribution implementations).
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Child stream for a named purpose ("shuffle", "eps", ...).
    Rng substream(std::string_view label) const;
    /// Child stream for an indexed unit of work (sample i, candidate j, ...).
    Rng substream(std::uint64_t index) const;

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Standard normal draw.
    double normal();

    Vector normal_vector(Index n);
    /// Column-major fill order.
    Matrix normal_matrix(Index rows, Index cols);

    /// Fisher-Yates permutation of 0..n-1.
    std::vector<Index> permutation(Index n);

private:
    std::uint64_t key_;
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace latgeo
