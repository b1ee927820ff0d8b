#pragma once

#include <cstddef>
#include <functional>

namespace levyflow {

/// Worker count: hardware concurrency capped by LEVYFLOW_THREADS.
std::size_t thread_count();

/// Calls body(i) for i in [0, n). Calls may run concurrently; body must only
/// write to slot i of pre-sized outputs. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace levyflow
