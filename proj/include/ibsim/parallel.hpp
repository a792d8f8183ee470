#ifndef IBSIM_PARALLEL_HPP
#define IBSIM_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ibsim {

// Run fn(i) for i in [0, n) on a small worker pool. Each index writes only
// its own slot in caller-owned storage, so results do not depend on
// scheduling order; the first exception is rethrown after join.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int nw = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  pool.reserve(static_cast<std::size_t>(nw));
  for (int w = 0; w < nw; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ibsim

#endif  // IBSIM_PARALLEL_HPP
