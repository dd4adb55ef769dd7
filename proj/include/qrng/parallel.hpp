#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qrng {

/// Runs fn(task) for task in [0, tasks) on up to `workers` threads.
/// Tasks are claimed dynamically; callers must make each task write only to its own output slot.
template <class Fn>
void parallel_for(std::size_t tasks, unsigned workers, Fn&& fn) {
    workers = std::max(1u, workers);
    if (workers == 1 || tasks <= 1) {
        for (std::size_t t = 0; t < tasks; ++t) fn(t);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        try {
            for (std::size_t t = next.fetch_add(1); t < tasks; t = next.fetch_add(1)) fn(t);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(tasks);
        }
    };
    std::vector<std::jthread> pool;
    const auto n = static_cast<unsigned>(std::min<std::size_t>(workers, tasks));
    pool.reserve(n - 1);
    for (unsigned w = 1; w < n; ++w) pool.emplace_back(body);
    body();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace qrng
