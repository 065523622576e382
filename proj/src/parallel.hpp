#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace bloch::detail {

// Runs work(i) for i in [0, count) on up to `threads` threads, strided.
// The first exception (by thread) is rethrown after all threads join.
template <class F>
void parallel_for(int count, int threads, F&& work) {
  threads = std::clamp(threads, 1, std::max(count, 1));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) work(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < count; i += threads) work(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace bloch::detail
