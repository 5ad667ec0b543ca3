#pragma once

#include <cstddef>
#include <functional>

namespace reeb {

/// Worker count: REEB_LAB_THREADS if set and positive, else the hardware concurrency.
unsigned thread_count();

/// Runs body(begin, end) over [0, n) split into fixed-size chunks. The chunking does
/// not depend on the thread count, so per-chunk partial results combined in chunk
/// order are reproducible. The first exception thrown by a chunk is rethrown.
void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t chunk_index, std::size_t begin, std::size_t end)>& body);

}  // namespace reeb
