#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "projlab/rng.hpp"
#include "projlab/types.hpp"

namespace projlab {

/// Number of batches a replicate budget is split into.
inline constexpr int kMcBatches = 100;

/// Mean and standard error of one Monte Carlo output.
struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::int64_t reps = 0;
  double min = 0.0;
  double max = 0.0;
};

/// Worker count used when a caller passes workers <= 0.
int default_workers();

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Order of execution
/// is unspecified; callers write results by index.
void parallel_for(std::int64_t n, int workers, const std::function<void(std::int64_t)>& fn);

/// Replicate function: draws from `stream` and writes `n_out` values to `out`.
using ReplicateFn = std::function<void(Stream& stream, double* out)>;

/// Runs `reps` replicates split into kMcBatches batches; batch b draws from
/// stream.substream(b), replicate r within a batch from its substream(r).
/// Batches are merged in index order, so the result depends only on the
/// stream and `reps`.
std::vector<McEstimate> mc_run(std::int64_t reps, int n_out, const Stream& stream,
                               int workers, const ReplicateFn& fn);

/// Single-output convenience wrapper.
McEstimate mc_mean(std::int64_t reps, const Stream& stream, int workers,
                   const std::function<double(Stream&)>& fn);

}  // namespace projlab
