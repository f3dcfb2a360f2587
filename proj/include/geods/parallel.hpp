#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace geods {

/// Runs body(lo, hi) over contiguous chunks of [begin, end). threads <= 1 runs inline.
template <typename Body>
void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end, int threads, Body&& body) {
    const std::ptrdiff_t n = end - begin;
    if (n <= 0) {
        return;
    }
    const std::ptrdiff_t t = std::min<std::ptrdiff_t>(std::max(threads, 1), n);
    if (t == 1) {
        body(begin, end);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(t - 1));
    const std::ptrdiff_t chunk = (n + t - 1) / t;
    for (std::ptrdiff_t w = 1; w < t; ++w) {
        const std::ptrdiff_t lo = begin + w * chunk;
        const std::ptrdiff_t hi = std::min(end, lo + chunk);
        if (lo < hi) {
            pool.emplace_back([&body, lo, hi] { body(lo, hi); });
        }
    }
    body(begin, std::min(end, begin + chunk));
}

/// Dot product summed in fixed-size blocks so the result does not depend on thread count.
inline double deterministic_dot(std::span<const double> a, std::span<const double> b) {
    constexpr std::size_t kBlock = 4096;
    double total = 0.0;
    for (std::size_t lo = 0; lo < a.size(); lo += kBlock) {
        const std::size_t hi = std::min(a.size(), lo + kBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            s += a[i] * b[i];
        }
        total += s;
    }
    return total;
}

} // namespace geods
