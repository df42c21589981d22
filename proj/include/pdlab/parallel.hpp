#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pdlab {

/// Runs body(i) for i in [0, count) on `workers` threads. Items are claimed
/// dynamically, so `body` must write only to slots owned by i. The first
/// exception thrown by any item is rethrown after all threads join.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// Sum of items[first, last) by recursive halving. The tree depends only on
/// the range, never on scheduling, so the result is reproducible bit for bit.
/// `add(acc, x)` accumulates x into acc.
template <class T, class Add>
T pairwise_reduce(const std::vector<T>& items, std::size_t first, std::size_t last, Add add) {
    if (last - first == 1) return items[first];
    const std::size_t mid = first + (last - first) / 2;
    T left = pairwise_reduce(items, first, mid, add);
    add(left, pairwise_reduce(items, mid, last, add));
    return left;
}

[[nodiscard]] inline unsigned default_workers() {
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace pdlab
