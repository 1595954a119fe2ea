#pragma once

#include <cstdint>
#include <functional>

namespace psfcn {

// Process-wide worker budget used by parallel_for. 1 disables threading.
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [begin, end) over contiguous per-thread chunks.
// Each index must write disjoint output, so results are identical for
// any thread count.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace psfcn
