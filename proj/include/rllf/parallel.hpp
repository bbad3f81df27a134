#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rllf {

// Splits [0, n) into contiguous chunks, one per worker, and rethrows the
// first exception raised by any chunk.
template <typename Fn>
void parallel_chunks(std::size_t n, int workers, Fn&& fn) {
    const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n));
    if (w <= 1) {
        if (n > 0) fn(std::size_t{0}, n, std::size_t{0});
        return;
    }
    std::vector<std::thread> threads;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::size_t k = 0; k < w; ++k) {
        const std::size_t begin = n * k / w, end = n * (k + 1) / w;
        threads.emplace_back([&, begin, end, k] {
            try {
                fn(begin, end, k);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace rllf
