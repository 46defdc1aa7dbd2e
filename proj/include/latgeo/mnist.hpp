#pragma once

#include "latgeo/dataset.hpp"

#include <filesystem>

namespace latgeo {

/// Binarized MNIST loader. Accepts either the pre-binarized text split (one
/// row of 784 space-separated {0,1} values per line) or a raw IDX ubyte image
/// file, which is binarized at a 0.5 intensity threshold. For IDX input a
/// sibling labels file (images->labels, idx3->idx1 in the name) is attached
/// when present. `limit` of 0 loads everything, otherwise the first `limit`
/// rows in file order.
Dataset mnist_load(const std::filesystem::path& path, Index limit = 0);

} // namespace latgeo
