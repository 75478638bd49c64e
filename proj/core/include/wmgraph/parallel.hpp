#pragma once

#include <cstddef>
#include <functional>

namespace wmgraph {

// Worker count from WMGRAPH_THREADS, else hardware concurrency (at least 1).
int thread_count();

// Runs body(i) for i in [0, n). Tasks are independent; callers store results by index
// so the reduction order never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace wmgraph
