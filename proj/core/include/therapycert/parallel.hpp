#pragma once

#include <cstddef>
#include <functional>

namespace therapycert {

/// Worker count to use for a requested value; 0 means all hardware threads.
std::size_t resolve_workers(std::size_t requested) noexcept;

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index runs exactly once;
/// callers write results by index so output order never depends on scheduling. The first
/// exception thrown by a body is rethrown after all threads join.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

} // namespace therapycert
