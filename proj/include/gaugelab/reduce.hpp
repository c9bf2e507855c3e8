#pragma once

// Deterministic reductions and a thread helper. Sums use a pairwise tree so
// the result is independent of the worker count; parallel loops only ever
// write disjoint output ranges.

#include <complex>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace gaugelab {

inline int g_thread_count = 1;

inline void set_thread_count(int n) { g_thread_count = n < 1 ? 1 : n; }

template <typename T>
T pairwise_sum(const T* data, std::size_t n) {
  if (n == 0) return T{};
  if (n <= 8) {
    T s = data[0];
    for (std::size_t i = 1; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

template <typename T>
T pairwise_sum(const std::vector<T>& v) {
  return pairwise_sum(v.data(), v.size());
}

// body(begin, end) over [0, n), partitioned across workers; bodies must only
// touch disjoint state derived from the index range.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const int nw = g_thread_count;
  if (nw <= 1 || n < 1024) {
    body(0, n);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(std::size_t(nw));
  const std::size_t chunk = (n + std::size_t(nw) - 1) / std::size_t(nw);
  for (int w = 0; w < nw; ++w) {
    const std::size_t b = std::size_t(w) * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    workers.emplace_back([&body, b, e] { body(b, e); });
  }
  for (auto& t : workers) t.join();
}

}  // namespace gaugelab
