#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace qdiff {

/// Runs body(begin, end) over a static partition of [0, n). Results must not
/// depend on the partition; callers keep reductions in index order.
template <class Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
    const auto w = static_cast<std::size_t>(std::max(1, workers));
    if (w == 1 || n < 2) {
        body(std::size_t{0}, n);
        return;
    }
    const std::size_t chunks = std::min(w, n);
    std::vector<std::exception_ptr> errors(chunks);
    {
        std::vector<std::jthread> threads;
        threads.reserve(chunks);
        for (std::size_t c = 0; c < chunks; ++c) {
            const std::size_t begin = n * c / chunks;
            const std::size_t end = n * (c + 1) / chunks;
            threads.emplace_back([&, c, begin, end] {
                try {
                    body(begin, end);
                } catch (...) {
                    errors[c] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Pairwise (cascade) sum in index order; the tree depends only on the length.
template <class T>
T pairwise_sum(const T* x, std::size_t n) {
    if (n == 0) return T{};
    if (n <= 8) {
        T s = x[0];
        for (std::size_t i = 1; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

}  // namespace qdiff
