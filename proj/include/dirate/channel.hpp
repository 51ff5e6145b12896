#pragma once

#include <cstdint>
#include <vector>

#include "dirate/directed_info.hpp"
#include "dirate/optimality.hpp"
#include "dirate/prob.hpp"

namespace dirate {

/// Finite-window channel: kernel P(y_i | x_{i-mem_x}^{i}, y_{i-mem_y}^{i-1}),
/// contexts laid out as (x-window incl. current input, then y-window).
class ChannelModel {
 public:
  ChannelModel(int mem_x, int mem_y, Alphabet input, Alphabet output,
               StochasticTable kernel, double tol = 1e-9);

  int mem_x() const { return mem_x_; }
  int mem_y() const { return mem_y_; }
  const Alphabet& input_alphabet() const { return input_; }
  const Alphabet& output_alphabet() const { return output_; }
  const StochasticTable& kernel() const { return kernel_; }

 private:
  int mem_x_, mem_y_;
  Alphabet input_, output_;
  StochasticTable kernel_;
};

/// Input distribution under k-delay feedback:
/// kernel P(x_i | x_{i-win_x}^{i-1}, y_{i-delay-win_y+1}^{i-delay}),
/// contexts laid out as (x-window, then y-window).
class InputPolicy {
 public:
  InputPolicy(int delay, int win_x, int win_y, Alphabet input, Alphabet output,
              StochasticTable kernel, double tol = 1e-9);

  int delay() const { return delay_; }
  int win_x() const { return win_x_; }
  int win_y() const { return win_y_; }
  const Alphabet& input_alphabet() const { return input_; }
  const Alphabet& output_alphabet() const { return output_; }
  const StochasticTable& kernel() const { return kernel_; }

 private:
  int delay_, win_x_, win_y_;
  Alphabet input_, output_;
  StochasticTable kernel_;
};

/// The joint (X, Y) process of a channel driven by an input policy, as a
/// Markov chain on combined windows of the last A inputs and B outputs with
/// A = max(mem_x, win_x), B = max(mem_y, delay + win_y - 1). Stationary law
/// restricted to the single recurrent class.
class ChannelJointProcess {
 public:
  static ChannelJointProcess compose(const ChannelModel& channel,
                                     const InputPolicy& policy,
                                     std::int64_t state_budget = 2048);

  int x_depth() const { return x_depth_; }
  int y_depth() const { return y_depth_; }
  int state_count() const { return static_cast<int>(stationary_.size()); }
  int x_window_count() const { return n_xw_; }
  int y_window_count() const { return n_yw_; }

  const Alphabet& input_alphabet() const { return input_; }
  const Alphabet& output_alphabet() const { return output_; }
  const Eigen::VectorXd& stationary() const { return stationary_; }

  /// P(x_i | state); zero rows on states outside the recurrent class.
  double policy_prob(int state, int x) const { return policy_(state, x); }
  /// P(y_i | state, x_i).
  double channel_prob(int state, int x, int y) const {
    return channel_(static_cast<Eigen::Index>(state) * n_x_ + x, y);
  }
  int step(int state, int x, int y) const {
    return next_[(static_cast<std::size_t>(state) * n_x_ + x) * n_y_ + y];
  }

  int state_id(int xw_id, int yw_id) const { return xw_id * n_yw_ + yw_id; }
  int x_window_of(int state) const { return state / n_yw_; }
  int y_window_of(int state) const { return state % n_yw_; }
  Context decode_x_window(int xw_id) const;
  Context decode_y_window(int yw_id) const;

  /// True when the output process is Markov of order y_depth: the channel
  /// has no input memory and the policy no input history, so the hidden
  /// input influences the output only through the current symbol.
  bool output_markov() const { return x_depth_ == 0; }

  int delay() const { return delay_; }

 private:
  ChannelJointProcess() = default;
  int x_depth_ = 0, y_depth_ = 0, delay_ = 1;
  int n_x_ = 0, n_y_ = 0, n_xw_ = 1, n_yw_ = 1;
  Alphabet input_, output_;
  Eigen::VectorXd stationary_;
  RowMatrix policy_;   // state x input
  RowMatrix channel_;  // (state * n_x + x) x output
  std::vector<int> next_;
};

/// Exact directed-information rate of (channel, policy):
/// E[ log2 P(y_i | x_i, window) - log2 P(y_i | output history) ]. Requires
/// the output process to have a finite Markov order (mem_x == win_x == 0);
/// throws DomainError otherwise, pointing at the Monte-Carlo estimator.
RatePoint feedback_info_rate(const ChannelModel& channel, const InputPolicy& policy);

/// Per-letter cost cells of positive stationary probability, with
/// L = log2 [ P(y_i | x_i, y-window) / P(y_i | y-window) ].
struct CostCell {
  int x;
  Context y_window;
  int y;
  double prob;
  double log_ratio;
};
std::vector<CostCell> supported_cost_cells(const ChannelModel& channel,
                                           const InputPolicy& policy);

/// Cost measure for which the policy attains the feedback capacity:
/// cost = lambda * L + d0 with lambda > 0 and a single constant offset.
CostTable synthesize_cost(const ChannelModel& channel, const InputPolicy& policy,
                          double lambda, double d0);

/// Solve cost = lambda * L + d0 by least squares over supported cells; the
/// channel-side offset is one scalar, unlike the source side's per-cell map.
OptimalityCertificate verify_cost(const ChannelModel& channel,
                                  const InputPolicy& policy, const CostTable& cost,
                                  double tol = 1e-9);

/// Stationary expected per-letter cost of the composed process.
double expected_cost(const ChannelModel& channel, const InputPolicy& policy,
                     const CostTable& cost);

struct ChannelTrajectory {
  int n = 0;
  std::vector<int> x;
  std::vector<int> y;
  std::uint64_t seed = 0;
  Context x_warmup;  // A inputs preceding x[0]
  Context y_warmup;  // B outputs preceding y[0]
};

ChannelTrajectory sample_channel_trajectory(const ChannelJointProcess& process,
                                            int n, std::uint64_t seed);

/// Monte-Carlo spectrum estimate of the directed-information rate. The
/// output-history term P(y_i | y^{i-1}) is computed exactly per path by a
/// forward filter over the hidden input window, so this works for channels
/// and policies with input memory where the exact engine refuses.
RatePoint channel_spectrum_estimate(const ChannelModel& channel,
                                    const InputPolicy& policy, int n, int trials,
                                    double quantile, std::uint64_t seed);

}  // namespace dirate
