#include "qcrel/parallel.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qcrel {

void parallel_for(std::size_t n, unsigned max_threads,
                  const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const unsigned want = max_threads == 0 ? hw : std::min(max_threads, hw);
    const unsigned threads =
        static_cast<unsigned>(std::min<std::size_t>(want, n));
    if (threads <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t k = t; k < n; k += threads) fn(k);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace qcrel
