#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace mechsimp {

/// Worker count from AF_THREADS (positive integer), else hardware concurrency.
inline std::size_t worker_count() {
  if (const char* env = std::getenv("AF_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for every i in [0, count). Work items must not share mutable
/// state; results are written by index so the merge is order independent.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Smallest i in [0, count) with pred(i), regardless of evaluation order.
inline std::optional<std::size_t> parallel_find_first(std::size_t count,
                                                      const std::function<bool(std::size_t)>& pred) {
  std::atomic<std::size_t> best{count};
  parallel_for(count, [&](std::size_t i) {
    if (i >= best.load()) return;
    if (!pred(i)) return;
    std::size_t cur = best.load();
    while (i < cur && !best.compare_exchange_weak(cur, i)) {
    }
  });
  if (best.load() == count) return std::nullopt;
  return best.load();
}

}  // namespace mechsimp
