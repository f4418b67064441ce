#pragma once

#include <functional>

namespace fracgelfand {

/// Process-wide worker count used by row-parallel kernels. Defaults to 1.
void set_thread_count(int threads);
int thread_count();

/// Runs body(row) for row in [0, rows), splitting contiguous row blocks across workers.
/// Each row is computed by exactly one worker in a fixed order, so results do not depend
/// on the worker count.
void parallel_rows(int rows, const std::function<void(int)>& body);

}  // namespace fracgelfand
