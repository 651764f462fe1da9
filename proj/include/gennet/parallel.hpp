#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace gennet {

/// Process-wide switch for the per-ε loops. Reads GENNET_THREADS on first use.
struct Parallelism {
  static void set_enabled(bool enabled);
  static bool enabled();
  static void set_threads(unsigned n);
  static unsigned threads();
};

/// Runs body(i) for i in [0, n). Each index must only write its own slot, so
/// the result is identical for any thread count. The exception thrown by the
/// lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gennet
