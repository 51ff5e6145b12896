#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace dirate {

/// Derive an independent RNG seed for a numbered work item (Monte-Carlo
/// trial). SplitMix64 finalizer; results do not depend on how items are
/// scheduled across workers.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF draw from `probs[0..size)`. Clamps to the last positive entry
/// so rounding in the cumulative sum cannot fall off the end.
int sample_index(const double* probs, int size, double u);

/// Worker count for parallel loops: DIRATE_WORKERS if set, else hardware
/// concurrency, clamped to [1, 64].
int worker_count();

/// Run fn(0..n-1) across workers with a static partition. Each index is
/// processed exactly once; callers that write to per-index slots get results
/// independent of the worker count.
void parallel_for(int n, const std::function<void(int)>& fn, int workers = 0);

/// Nearest-rank empirical quantile plus mean and sample stddev of a batch of
/// Monte-Carlo trial values.
struct TrialSummary {
  double quantile_value = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
};
TrialSummary summarize_trials(const std::vector<double>& values, double quantile);

}  // namespace dirate
