#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <algorithm>
#include <optional>
#include <thread>
#include <vector>

namespace hssalt {

/// Worker count: the explicit request if given, else HSSALT_WORKERS, else the
/// number of hardware threads (at least 1).
std::size_t resolve_workers(std::optional<std::size_t> requested = std::nullopt);

/// Calls body(i) for i in [0, count) on up to `workers` threads. Each index
/// is processed exactly once; callers write results into index-addressed
/// slots so the outcome does not depend on scheduling. If any call throws,
/// the exception from the lowest failing index is rethrown after all
/// threads finish.
template <typename Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
  if (count == 0) return;
  workers = std::max<std::size_t>(1, std::min(workers, count));
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](std::atomic<std::size_t>& next) {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::atomic<std::size_t> next{0};
  if (workers == 1) {
    run(next);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back([&] { run(next); });
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace hssalt
