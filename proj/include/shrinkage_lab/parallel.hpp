#pragma once

#include <cstddef>
#include <functional>

namespace shrinkage_lab {

/// Worker count used by parallel loops. Defaults to the value of the
/// SHRINKAGE_LAB_THREADS environment variable, else the hardware concurrency.
int thread_count();
/// Overrides the worker count; values < 1 restore the default.
void set_thread_count(int n);

/// Runs body(i) for i in [0, count). Each index runs exactly once; results
/// must be written to per-index slots so the outcome does not depend on
/// scheduling. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace shrinkage_lab
