#pragma once

#include <cstddef>
#include <functional>

namespace pberg {

/// Worker count for independent-task maps. 0 restores the hardware default.
void set_thread_count(int threads);
int thread_count();

/// Runs body(i) for i in [0, count) on up to thread_count() threads. Each index is
/// handled exactly once; the first exception thrown is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace pberg
