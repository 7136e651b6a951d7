#pragma once

#include <cstddef>
#include <functional>

namespace quartic {

// Worker count used by parallel_for. Initialised from QUARTIC_THREADS when set,
// otherwise from the hardware; set_thread_count overrides both.
int thread_count();
void set_thread_count(int n);

// Runs body(i) for i in [0, n). Each index writes only its own output slot, so
// results do not depend on the worker count. If bodies throw, the exception of
// the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace quartic
