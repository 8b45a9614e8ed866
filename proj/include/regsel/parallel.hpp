#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace regsel {

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work is
/// split into contiguous blocks; callers write results by index so the
/// outcome does not depend on scheduling. The first exception is rethrown.
template <typename Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = count * w / workers;
        const std::size_t end = count * (w + 1) / workers;
        threads.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace regsel
