#pragma once

// Thin FFTW wrapper: one cached in-place plan per (rank, N, direction).
// Plans are created under a mutex; executing a plan on distinct arrays is
// thread safe. CHERN_EXTREMAL_THREADS caps the FFTW worker count.

#include <fftw3.h>

#include <complex>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>
#include <vector>

namespace chern_extremal::fft {

enum class Direction { forward, inverse };

inline int configured_threads() {
  if (const char* env = std::getenv("CHERN_EXTREMAL_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int rank, int N, Direction dir) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(rank, N, dir);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::size_t size = 1;
    for (int a = 0; a < rank; ++a) size *= static_cast<std::size_t>(N);
    auto* scratch = fftw_alloc_complex(size);
    std::vector<int> dims(rank, N);
    const int sign = dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD;
    fftw_plan plan = fftw_plan_dft(rank, dims.data(), scratch, scratch, sign,
                                   FFTW_ESTIMATE);
    fftw_free(scratch);
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    fftw_cleanup_threads();
  }

 private:
  PlanCache() {
    fftw_init_threads();
    fftw_plan_with_nthreads(configured_threads());
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, Direction>, fftw_plan> plans_;
};

/// Unnormalized in-place transform of a row-major rank-dimensional array
/// with N samples per axis. `data` must be 16-byte aligned.
inline void transform(int rank, int N, std::complex<double>* data,
                      Direction dir) {
  fftw_plan plan = PlanCache::instance().get(rank, N, dir);
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace chern_extremal::fft
