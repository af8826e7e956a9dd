#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace multiauto {

// Worker count: MULTIAUTO_THREADS caps hardware_concurrency.
inline unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MULTIAUTO_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
    }
    return hw;
}

// Static block partition of [0, count). body(i) must not throw across threads;
// exceptions are rethrown on the calling thread after join.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    unsigned nw = worker_count();
    if (nw <= 1 || count < 2 * nw) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nw);
    std::size_t chunk = (count + nw - 1) / nw;
    for (unsigned w = 0; w < nw; ++w) {
        std::size_t lo = w * chunk, hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi, w] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

} // namespace multiauto
