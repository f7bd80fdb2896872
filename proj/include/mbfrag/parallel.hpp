#pragma once

// Replicate engine: runs `count` independent replicates, each on its own RNG
// stream derived from (seed, replicate index). Results land in a slot array
// indexed by replicate, so the aggregate is identical for any thread count.

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "mbfrag/rng.hpp"

namespace mbfrag {

template <class R, class F>
std::vector<R> run_replicates(std::uint64_t seed, std::int64_t count, int threads, F&& fn) {
  std::vector<R> out(static_cast<std::size_t>(count));
  if (threads < 1) threads = 1;
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      std::int64_t r = next.fetch_add(1);
      if (r >= count) break;
      try {
        Rng rng = Rng::for_stream(seed, static_cast<std::uint64_t>(r));
        out[static_cast<std::size_t>(r)] = fn(r, rng);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        break;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

// Convenience: replicates producing one double each.
template <class F>
std::vector<double> run_replicates_d(std::uint64_t seed, std::int64_t count, int threads, F&& fn) {
  return run_replicates<double>(seed, count, threads, std::forward<F>(fn));
}

}  // namespace mbfrag
