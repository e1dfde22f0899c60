#pragma once

#include <cstddef>
#include <functional>

namespace crp {

/// Worker count: CRP_THREADS if set to a positive integer, else hardware concurrency.
std::size_t worker_count();

/// Runs fn(0..count-1) on up to worker_count() threads. Nested calls run
/// serially on the calling thread. If any task throws, the exception from the
/// lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace crp
