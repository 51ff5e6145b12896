#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "dirate/models.hpp"

namespace dirate {

/// A computed information rate with its provenance.
struct RatePoint {
  enum class Method { Exact, ForwardMarginalized, MonteCarlo };

  double rate_bits = 0.0;
  int delay = 1;
  Method method = Method::Exact;

  // Monte-Carlo diagnostics (set when method == MonteCarlo).
  double mc_mean = 0.0;
  double mc_stddev = 0.0;
  double quantile = 0.0;
  int trials = 0;
  int block_length = 0;
  std::uint64_t seed = 0;
};

std::string method_name(RatePoint::Method m);

/// Stationary per-step law of the k-delay window quantities: the joint
/// Q(state, v) of the m source symbols preceding an xhat-block of length k,
/// and the per-letter denominator P(xhat_i | xhat-block prefix, state)
/// obtained by exact summation over the k hidden source symbols.
class KDelayAnalysis {
 public:
  KDelayAnalysis(const JointMarkovModel& joint, int k, std::int64_t budget);

  int delay() const { return delay_; }
  long block_count() const { return block_count_; }  // |recon|^k

  /// Stationary probability of (x-pre state, xhat-block v).
  double block_prob(int state, long vflat) const { return q_full_(state, vflat); }
  /// log2 P(xhat_i = v_k | v prefix, state); requires block_prob > 0.
  double log2_denominator(int state, long vflat) const;

 private:
  int delay_;
  int nrecon_;
  long block_count_;
  Eigen::MatrixXd q_full_;    // states x nrecon^k
  Eigen::MatrixXd q_prefix_;  // states x nrecon^(k-1)
};

/// Exact delay-1 rate: the stationary conditional mutual information
/// I(Xhat; X | state) averaged over the stationary state law.
RatePoint rate_delay1(const JointMarkovModel& joint);

/// Exact k-delay rate via forward marginalization of the hidden source
/// symbols between the reconstruction and its delayed source window.
/// Throws BudgetError when states * |X|^k * |Xhat|^k exceeds the budget.
RatePoint rate_delayk(const JointMarkovModel& joint, int k,
                      std::int64_t budget = 10'000'000);

/// Monte-Carlo information-spectrum estimate: per trial, the per-sample
/// normalized log-ratio of the joint path law to the delayed product law;
/// headline value is the empirical q-quantile over trials (the
/// limsup-in-probability surrogate), with mean and stddev as diagnostics.
RatePoint spectrum_estimate(const JointMarkovModel& joint, int k, int n,
                            int trials, double quantile, std::uint64_t seed,
                            std::int64_t budget = 10'000'000);

}  // namespace dirate
