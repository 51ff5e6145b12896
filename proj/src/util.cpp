#include "dirate/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>
#include <vector>

namespace dirate {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

int sample_index(const double* probs, int size, double u) {
  double acc = 0.0;
  int last_positive = -1;
  for (int i = 0; i < size; ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    acc += probs[i];
    if (u < acc) return i;
  }
  return last_positive;
}

int worker_count() {
  if (const char* env = std::getenv("DIRATE_WORKERS")) {
    int v = std::atoi(env);
    if (v >= 1) return std::min(v, 64);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return std::clamp(static_cast<int>(hw), 1, 64);
}

void parallel_for(int n, const std::function<void(int)>& fn, int workers) {
  if (workers <= 0) workers = worker_count();
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

TrialSummary summarize_trials(const std::vector<double>& values, double quantile) {
  const int n = static_cast<int>(values.size());
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  int rank = static_cast<int>(std::ceil(quantile * n)) - 1;
  rank = std::clamp(rank, 0, n - 1);

  TrialSummary out;
  out.quantile_value = sorted[rank];
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.stddev = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  return out;
}

}  // namespace dirate
