#pragma once

#include <cstddef>
#include <functional>

namespace fraqhom {

/// Process-wide worker count used by parallel_for. Defaults to 1.
void set_thread_count(int threads);
int thread_count();

/// Runs body(i) for i in [0, count). Iterations must be independent; each
/// writes only to its own output slot, so results do not depend on the
/// number of workers.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace fraqhom
