#pragma once

#include <cstdint>
#include <vector>

#include "dirate/prob.hpp"

namespace dirate {

/// State machinery shared by the m-th order model family: states are the
/// kernel contexts (windows of the last m source symbols), transitions shift
/// one source symbol in.
struct ChainStates {
  std::vector<std::vector<int>> next;  // [state][x] -> state id, -1 undefined
  Eigen::VectorXd stationary;          // over states, zero on transients
};

/// Stationary ergodic m-th order Markov source: kernel P(x_i | x_{i-m}^{i-1}).
class MarkovSourceModel {
 public:
  MarkovSourceModel(int order, Alphabet alphabet, StochasticTable kernel,
                    double tol = 1e-9);

  int order() const { return order_; }
  const Alphabet& alphabet() const { return alphabet_; }
  const StochasticTable& kernel() const { return kernel_; }

  const std::map<Context, int>& states() const { return kernel_.contexts(); }
  const Eigen::VectorXd& stationary() const { return chain_.stationary; }
  int step(int state, int x) const { return chain_.next[state][x]; }

 private:
  int order_;
  Alphabet alphabet_;
  StochasticTable kernel_;
  ChainStates chain_;
};

/// Candidate optimal conditional law ("test channel"):
/// kernel P(xhat_i | x_{i-m}^{i}), the window including the current symbol.
class TestChannelModel {
 public:
  TestChannelModel(int order, Alphabet source, Alphabet recon,
                   StochasticTable kernel, double tol = 1e-9);

  int order() const { return order_; }
  const Alphabet& source_alphabet() const { return source_; }
  const Alphabet& recon_alphabet() const { return recon_; }
  const StochasticTable& kernel() const { return kernel_; }

 private:
  int order_;
  Alphabet source_;
  Alphabet recon_;
  StochasticTable kernel_;
};

/// Factorized joint source/reconstruction process: per-step kernel
/// P(x_i, xhat_i | x_{i-m}^{i-1}) over pair outputs, with the induced source
/// marginal and the stationary law of the m-tuple state chain.
class JointMarkovModel {
 public:
  static JointMarkovModel from_kernel(int order, Alphabet source, Alphabet recon,
                                      StochasticTable joint_kernel,
                                      double tol = 1e-9);

  int order() const { return order_; }
  const Alphabet& source_alphabet() const { return source_; }
  const Alphabet& recon_alphabet() const { return recon_; }

  /// Pair-output kernel; outputs indexed pair_index(x, xhat).
  const StochasticTable& kernel() const { return kernel_; }
  /// Marginal source kernel P(x_i | state), summed over xhat.
  const StochasticTable& source_kernel() const { return source_kernel_; }

  const std::map<Context, int>& states() const { return kernel_.contexts(); }
  const Eigen::VectorXd& stationary() const { return chain_.stationary; }
  int state_count() const { return kernel_.row_count(); }
  int step(int state, int x) const { return chain_.next[state][x]; }

  int pair_index(int x, int xhat) const { return x * recon_.size() + xhat; }

 private:
  JointMarkovModel() = default;
  int order_ = 0;
  Alphabet source_;
  Alphabet recon_;
  StochasticTable kernel_{Alphabet::range(1), 0};
  StochasticTable source_kernel_{Alphabet::range(1), 0};
  ChainStates chain_;
};

/// Joint law P(x_i, xhat_i | state) = P(x_i | state) P(xhat_i | state, x_i).
/// The marginal over xhat reproduces the source kernel exactly.
JointMarkovModel compose_joint(const MarkovSourceModel& source,
                               const TestChannelModel& test);

/// Bayes inversion P(x_i | state, xhat_i); contexts are (state..., xhat).
/// Contexts whose xhat has zero probability given the state are structurally
/// absent.
StochasticTable forward_conditional(const JointMarkovModel& joint);

/// P(xhat_i | state, x_i); contexts are (state..., x), defined where
/// P(x | state) > 0. Recovers the composing test-channel kernel.
StochasticTable reverse_conditional(const JointMarkovModel& joint);

/// A sampled source/reconstruction path. initial_window holds the m warmup
/// source symbols (drawn from the stationary state law) preceding x[0].
struct Trajectory {
  int n = 0;
  std::vector<int> x;
  std::vector<int> xhat;
  std::uint64_t seed = 0;
  Context initial_window;
};

/// Ancestral sampling from the stationary state distribution; deterministic
/// given the seed.
Trajectory sample_trajectory(const JointMarkovModel& joint, int n,
                             std::uint64_t seed);

}  // namespace dirate
