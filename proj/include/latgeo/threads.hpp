#pragma once

#include "latgeo/common.hpp"

#include <functional>

namespace latgeo {

/// Worker count: LATGEO_THREADS when set, otherwise hardware concurrency.
int thread_count();

/// Static-partition parallel loop. Each index is processed exactly once and
/// results must go to disjoint slots, which keeps output independent of the
/// worker count.
void parallel_for(Index n, const std::function<void(Index)>& fn);

} // namespace latgeo
