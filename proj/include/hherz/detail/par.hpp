#pragma once

#include <cstddef>
#include <functional>

// Index-space parallel loop. Work items write to disjoint slots; callers
// reduce afterwards in a fixed index order, so the thread schedule never
// changes a result. Thread count is capped by HHERZ_THREADS (0 or unset =
// auto).

namespace hherz::detail {

int thread_count();

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace hherz::detail
