#pragma once

#include <cstddef>
#include <functional>

namespace phyloalg {

// Worker count: hardware concurrency, capped by PHYLOALG_THREADS when set.
std::size_t worker_count();

// Runs body(begin, end, worker) over a static partition of [0, n).
// Chunks are contiguous and assigned in order, so reductions that combine
// per-worker partials in worker order are deterministic.
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                     std::size_t workers = 0);

} // namespace phyloalg
