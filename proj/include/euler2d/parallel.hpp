#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace euler2d {

inline unsigned hardware_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1u : n;
}

/// Deterministic parallel map over [0, n): the index space is split into
/// contiguous chunks, one per worker. Each index is processed by exactly one
/// thread, so per-index results do not depend on the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned max_threads = 0) {
    unsigned nt = max_threads == 0 ? hardware_threads() : max_threads;
    nt = static_cast<unsigned>(std::min<std::size_t>(nt, n));
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// Deterministic parallel reduction: per-chunk partial sums are combined in
/// chunk order, so the result is independent of scheduling.
template <typename Fn>
double parallel_sum(std::size_t n, Fn&& term, unsigned max_threads = 0) {
    unsigned nt = max_threads == 0 ? hardware_threads() : max_threads;
    nt = static_cast<unsigned>(std::min<std::size_t>(nt, n));
    if (nt <= 1) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += term(i);
        return s;
    }
    std::vector<double> partial(nt, 0.0);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, t, &term, &partial] {
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) s += term(i);
            partial[t] = s;
        });
    }
    for (auto& th : pool) th.join();
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

} // namespace euler2d
