#include "latgeo/threads.hpp"

#include <cstdlib>
#include <thread>
#include <vector>

namespace latgeo {

int thread_count() {
    if (const char* env = std::getenv("LATGEO_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(Index n, const std::function<void(Index)>& fn) {
    const int workers = std::min<Index>(thread_count(), n) > 0
                            ? static_cast<int>(std::min<Index>(thread_count(), n))
                            : 1;
    if (workers <= 1) {
        for (Index i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (Index i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace latgeo
