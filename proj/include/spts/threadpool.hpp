#pragma once

#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace spts {

// Worker count: PTS_THREADS when set, else hardware concurrency.
inline int worker_count() {
    if (const char* env = std::getenv("PTS_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

// Static round-robin partition: item i runs on worker i % n_threads, so the
// work assignment (and any per-item output slot) is independent of timing.
// The first exception thrown by any item is rethrown on the calling thread.
template <class F>
void parallel_for(int count, int n_threads, F&& fn) {
    n_threads = std::max(1, std::min(n_threads, count));
    if (n_threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(static_cast<size_t>(n_threads));
    std::mutex err_mutex;
    std::exception_ptr first_error;
    for (int w = 0; w < n_threads; ++w)
        workers.emplace_back([&, w] {
            try {
                for (int i = w; i < count; i += n_threads) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace spts
