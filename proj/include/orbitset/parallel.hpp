#ifndef ORBITSET_PARALLEL_HPP
#define ORBITSET_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace orbitset {

/// Run fn(i) for i in [0, count) on up to `workers` threads. Work items are
/// claimed from a shared counter; callers must make writes disjoint by index
/// so results never depend on the schedule.
inline void parallel_for(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t)>& fn) {
    if (count == 0)
        return;
    if (workers <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    unsigned n_threads = std::min<unsigned>(workers, std::thread::hardware_concurrency() * 4 + 1);
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, count));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next.store(count); // stop handing out work
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace orbitset

#endif
