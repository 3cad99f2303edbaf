#pragma once

#include <cstddef>
#include <functional>

namespace vrts {

// Calls fn(i) for i in [0, n) on up to `jobs` threads. Rethrows the first
// exception after all workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace vrts
