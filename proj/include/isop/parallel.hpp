#pragma once

#include "isop/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace isop {

/// Running first and second moments of k per-path channels.
class PathMoments {
 public:
  explicit PathMoments(int channels = 1)
      : k_(channels), sum_(static_cast<std::size_t>(channels), 0.0),
        cross_(static_cast<std::size_t>(channels * channels), 0.0) {}

  void add(const double* v, bool truncated) {
    ++n_;
    if (truncated) ++truncated_;
    for (int i = 0; i < k_; ++i) {
      sum_[i] += v[i];
      for (int j = i; j < k_; ++j) cross_[i * k_ + j] += v[i] * v[j];
    }
  }

  void merge(const PathMoments& o) {
    n_ += o.n_;
    truncated_ += o.truncated_;
    for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += o.sum_[i];
    for (std::size_t i = 0; i < cross_.size(); ++i) cross_[i] += o.cross_[i];
  }

  int channels() const { return k_; }
  std::size_t n() const { return n_; }
  std::size_t truncated() const { return truncated_; }
  double mean(int i) const { return n_ ? sum_[i] / static_cast<double>(n_) : 0.0; }
  /// Unbiased sample covariance of channels i and j.
  double covariance(int i, int j) const {
    if (n_ < 2) return 0.0;
    if (i > j) std::swap(i, j);
    const double nn = static_cast<double>(n_);
    const double c = (cross_[i * k_ + j] - sum_[i] * sum_[j] / nn) / (nn - 1);
    return i == j ? std::max(c, 0.0) : c;
  }
  double variance(int i) const { return covariance(i, i); }

 private:
  int k_;
  std::size_t n_ = 0, truncated_ = 0;
  std::vector<double> sum_, cross_;
};

/// ISOP_DEFAULT_WORKERS if set, else the hardware concurrency.
unsigned default_workers();

inline constexpr std::size_t kChunkPaths = 1024;

/// Runs n independent paths. Path i draws from Rng(derive_seed(seed, i)) and
/// writes `channels` values; fn returns true when the path was truncated.
/// Chunks are reduced pairwise in index order, so the result is identical
/// for every worker count.
template <typename Fn>
PathMoments run_paths(std::size_t n, int channels, std::uint64_t seed, unsigned workers, Fn&& fn,
                      std::size_t chunk = kChunkPaths) {
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<PathMoments> parts(chunks, PathMoments(channels));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    std::vector<double> out(static_cast<std::size_t>(channels));
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        PathMoments& acc = parts[c];
        const std::size_t end = std::min(n, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) {
          Rng rng(derive_seed(seed, i));
          const bool truncated = fn(static_cast<std::uint64_t>(i), rng, out.data());
          acc.add(out.data(), truncated);
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(chunks);
        return;
      }
    }
  };
  if (workers == 0) workers = default_workers();
  const unsigned used = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(chunks, 1)));
  if (used <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < used; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  // Pairwise tree reduction in chunk order.
  if (chunks == 0) return PathMoments(channels);
  for (std::size_t width = 1; width < chunks; width *= 2)
    for (std::size_t i = 0; i + width < chunks; i += 2 * width) parts[i].merge(parts[i + width]);
  return parts[0];
}

/// Runs fn(i) for i in [0, count) over the worker pool; results land in
/// caller-owned slots so ordering never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  if (workers == 0) workers = default_workers();
  const unsigned used = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  if (used <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < used; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace isop
