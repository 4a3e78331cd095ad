#ifndef SUBFRAC_PARALLEL_HPP
#define SUBFRAC_PARALLEL_HPP

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace subfrac {

/// Thread budget: hardware concurrency, capped by SUBFRAC_THREADS when set.
inline int thread_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("SUBFRAC_THREADS")) {
    int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

/// Chunked parallel loop over [0, n). The body must be safe to run
/// concurrently for distinct indices; result determinism is the caller's
/// responsibility (write to disjoint slots).
template <class F>
void parallel_for(std::int64_t n, F&& body) {
  const int nt = std::min<std::int64_t>(thread_count(), std::max<std::int64_t>(n, 1));
  if (nt <= 1 || n < 256) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::int64_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const std::int64_t lo = t * chunk;
    const std::int64_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::int64_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace subfrac

#endif
