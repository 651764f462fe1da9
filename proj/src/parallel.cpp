#include "gennet/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

namespace gennet {
namespace {

struct State {
  bool enabled = true;
  unsigned threads = 0;
};

State& state() {
  static State s = [] {
    State init;
    if (const char* env = std::getenv("GENNET_THREADS")) {
      try {
        init.threads = static_cast<unsigned>(std::max(1L, std::stol(env)));
      } catch (...) {
        init.threads = 0;
      }
    }
    if (init.threads == 0) init.threads = std::max(1u, std::thread::hardware_concurrency());
    return init;
  }();
  return s;
}

}  // namespace

void Parallelism::set_enabled(bool enabled) { state().enabled = enabled; }
bool Parallelism::enabled() { return state().enabled; }
void Parallelism::set_threads(unsigned n) { state().threads = std::max(1u, n); }
unsigned Parallelism::threads() { return state().threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers =
      Parallelism::enabled() ? static_cast<unsigned>(std::min<std::size_t>(Parallelism::threads(), n)) : 1u;
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace gennet
