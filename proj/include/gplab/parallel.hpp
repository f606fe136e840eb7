#pragma once

#include <functional>

namespace gplab {

// GP_LAB_THREADS when set to a positive integer, otherwise the hardware concurrency.
int thread_cap();

// Runs task(0) .. task(count - 1) on at most thread_cap() threads. Tasks write to disjoint slots, so
// results do not depend on scheduling. The exception of the lowest failing index is rethrown.
void parallel_for(int count, const std::function<void(int)>& task);

}  // namespace gplab
