#include "sqzmem/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sqzmem {

int worker_count() {
    if (const char* env = std::getenv("SQZMEM_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_blocks(std::int64_t n, std::int64_t block_size, int workers,
                     const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& fn) {
    if (n <= 0) return;
    block_size = std::max<std::int64_t>(1, block_size);
    const std::int64_t blocks = block_count(n, block_size);
    auto run = [&](std::int64_t b) { fn(b, b * block_size, std::min(n, (b + 1) * block_size)); };

    workers = static_cast<int>(std::clamp<std::int64_t>(workers, 1, blocks));
    if (workers == 1) {
        for (std::int64_t b = 0; b < blocks; ++b) run(b);
        return;
    }

    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::int64_t b = next++; b < blocks; b = next++) {
                try {
                    run(b);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = blocks;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace sqzmem
