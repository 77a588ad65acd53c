#include "projlab/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace projlab {

namespace {

// Running count, mean and centered sum of squares.
struct Moments {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();

  void add(double v) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
    min = std::min(min, v);
    max = std::max(max, v);
  }

  void merge(const Moments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
    const double delta = o.mean - mean;
    const double total = na + nb;
    mean += delta * nb / total;
    m2 += o.m2 + delta * delta * na * nb / total;
    n += o.n;
    min = std::min(min, o.min);
    max = std::max(max, o.max);
  }
};

}  // namespace

int default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(std::int64_t n, int workers, const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) return;
  if (workers <= 0) workers = default_workers();
  const int threads = static_cast<int>(std::min<std::int64_t>(workers, n));
  if (threads == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<McEstimate> mc_run(std::int64_t reps, int n_out, const Stream& stream,
                               int workers, const ReplicateFn& fn) {
  if (reps < 2) throw InvalidArgument("mc_run: reps must be >= 2");
  if (n_out < 1) throw InvalidArgument("mc_run: n_out must be >= 1");
  const std::int64_t batches = std::min<std::int64_t>(kMcBatches, reps);
  std::vector<std::vector<Moments>> partial(batches, std::vector<Moments>(n_out));
  parallel_for(batches, workers, [&](std::int64_t b) {
    const std::int64_t size = reps / batches + (b < reps % batches ? 1 : 0);
    const Stream batch_stream = stream.substream(static_cast<std::uint64_t>(b));
    std::vector<double> out(n_out);
    auto& acc = partial[b];
    for (std::int64_t r = 0; r < size; ++r) {
      Stream s = batch_stream.substream(static_cast<std::uint64_t>(r));
      fn(s, out.data());
      for (int o = 0; o < n_out; ++o) acc[o].add(out[o]);
    }
  });
  std::vector<McEstimate> result(n_out);
  for (int o = 0; o < n_out; ++o) {
    Moments total;
    for (std::int64_t b = 0; b < batches; ++b) total.merge(partial[b][o]);
    const double var = total.m2 / static_cast<double>(total.n - 1);
    result[o] = {total.mean, std::sqrt(var / static_cast<double>(total.n)), total.n, total.min,
                 total.max};
  }
  return result;
}

McEstimate mc_mean(std::int64_t reps, const Stream& stream, int workers,
                   const std::function<double(Stream&)>& fn) {
  return mc_run(reps, 1, stream, workers, [&](Stream& s, double* out) { out[0] = fn(s); })[0];
}

}  // namespace projlab
