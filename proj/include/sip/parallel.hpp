#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <thread>
#include <vector>

namespace sip {

// Compensated (Neumaier) accumulator. Adding the same values in the same
// order always yields the same double, and the compensation term keeps long
// sums of small weights accurate to ~1 ulp.
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }

  // Merge another accumulator into this one (order matters; callers merge in
  // a fixed chunk order to stay deterministic).
  void merge(const NeumaierSum& o) {
    add(o.sum);
    comp += o.comp;
  }

  double value() const { return sum + comp; }
};

// Number of worker threads used by parallel_for when the caller passes 0.
// The CLI sets this from --threads; default is the hardware count.
inline unsigned& default_thread_count() {
  static unsigned n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

inline constexpr std::size_t kParallelChunk = 1u << 14;

// Run body(begin, end, chunk_index) over [0, n) split into fixed-size chunks.
// The chunk layout depends only on n, never on the thread count, so any
// chunk-indexed partial results can be merged in chunk order to give output
// that is identical for 1 thread and for 64.
template <class Body>
void parallel_for(std::size_t n, Body&& body, unsigned threads = 0) {
  if (n == 0) return;
  std::size_t chunks = (n + kParallelChunk - 1) / kParallelChunk;
  unsigned want = threads ? threads : default_thread_count();
  unsigned nthreads = static_cast<unsigned>(
      std::min<std::size_t>(want, chunks));

  if (nthreads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      std::size_t b = c * kParallelChunk;
      std::size_t e = std::min(n, b + kParallelChunk);
      body(b, e, c);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= chunks) break;
      std::size_t b = c * kParallelChunk;
      std::size_t e = std::min(n, b + kParallelChunk);
      body(b, e, c);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

// Deterministic parallel sum of f(i) over [0, n): each fixed-size chunk keeps
// its own compensated sum; chunk sums are merged in chunk-index order.
template <class Fn>
double parallel_sum(std::size_t n, Fn&& f, unsigned threads = 0) {
  if (n == 0) return 0.0;
  std::size_t chunks = (n + kParallelChunk - 1) / kParallelChunk;
  std::vector<NeumaierSum> partial(chunks);
  parallel_for(
      n,
      [&](std::size_t b, std::size_t e, std::size_t c) {
        NeumaierSum s;
        for (std::size_t i = b; i < e; ++i) s.add(f(i));
        partial[c] = s;
      },
      threads);
  NeumaierSum total;
  for (const auto& p : partial) total.merge(p);
  return total.value();
}

} // namespace sip
