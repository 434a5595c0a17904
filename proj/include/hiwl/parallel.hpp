#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace hiwl {

/// Runs body(i) for i in [0, n) on up to `workers` threads. Results must be written to
/// per-index slots so the outcome does not depend on scheduling. The first exception
/// thrown by any task is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
    workers = std::max(1u, workers);
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    const std::size_t w = std::min<std::size_t>(workers, n);
    for (std::size_t id = 0; id < w; ++id) {
        pool.emplace_back([&, id] {
            // strided assignment balances work that grows with the index
            for (std::size_t i = id; i < n; i += w) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

/// Pairwise (tree) summation in index order.
template <class T>
T pairwise_sum(std::span<const T> v) {
    if (v.empty()) return T(0);
    if (v.size() <= 8) {
        T s = v[0];
        for (std::size_t i = 1; i < v.size(); ++i) s += v[i];
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

} // namespace hiwl
