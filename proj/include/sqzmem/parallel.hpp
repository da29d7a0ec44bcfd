#pragma once

#include <cstdint>
#include <functional>

namespace sqzmem {

/// Worker count: SQZMEM_THREADS if set and positive, else hardware concurrency.
int worker_count();

/// Runs fn(block, begin, end) over fixed-size blocks of [0, n). Block boundaries
/// depend only on n and block_size, so per-block results merged in block order
/// are independent of `workers`. Exceptions from workers are rethrown.
void parallel_blocks(std::int64_t n, std::int64_t block_size, int workers,
                     const std::function<void(std::int64_t block, std::int64_t begin, std::int64_t end)>& fn);

inline std::int64_t block_count(std::int64_t n, std::int64_t block_size) { return (n + block_size - 1) / block_size; }

}  // namespace sqzmem
