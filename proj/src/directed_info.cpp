#include "dirate/directed_info.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <vector>

#include "dirate/util.hpp"

namespace dirate {

std::string method_name(RatePoint::Method m) {
  switch (m) {
    case RatePoint::Method::Exact: return "exact";
    case RatePoint::Method::ForwardMarginalized: return "forward-marginalized";
    case RatePoint::Method::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

KDelayAnalysis::KDelayAnalysis(const JointMarkovModel& joint, int k,
                               std::int64_t budget) {
  if (k < 1) throw ValidationError("delay must be >= 1");
  delay_ = k;
  nrecon_ = joint.recon_alphabet().size();
  const int nx = joint.source_alphabet().size();
  const int nstate = joint.state_count();

  double work = static_cast<double>(nstate) * std::pow(nx, k) * std::pow(nrecon_, k);
  if (work > static_cast<double>(budget)) {
    std::ostringstream msg;
    msg << "k-delay enumeration needs ~" << work << " extended states, budget "
        << budget << "; use the Monte-Carlo spectrum estimator instead";
    throw BudgetError(msg.str());
  }
  block_count_ = 1;
  for (int j = 0; j < k; ++j) block_count_ *= nrecon_;

  q_full_ = Eigen::MatrixXd::Zero(nstate, block_count_);
  const Eigen::VectorXd& pi = joint.stationary();

  // DFS over the k hidden source symbols; vprod[j] carries the stationary
  // probability of each xhat-prefix of length j along the current x-path.
  std::vector<std::vector<double>> vprod(k + 1);
  for (int j = 0; j <= k; ++j) vprod[j].assign(static_cast<size_t>(std::pow(nrecon_, j)), 0.0);

  struct Frame { int state; int x; };
  for (int s0 = 0; s0 < nstate; ++s0) {
    if (pi(s0) <= 0.0) continue;
    vprod[0][0] = pi(s0);
    // explicit stack over the hidden source symbols, x iterated in order
    std::vector<Frame> path(k);
    path[0] = {s0, 0};
    int depth = 0;
    while (depth >= 0) {
      if (depth == k) {
        for (long v = 0; v < block_count_; ++v) q_full_(s0, v) += vprod[k][v];
        --depth;
        continue;
      }
      int x = path[depth].x;
      if (x >= nx) {
        --depth;
        continue;
      }
      ++path[depth].x;
      int state = path[depth].state;
      int next = joint.step(state, x);
      auto row = joint.kernel().row(state);
      bool any = false;
      const long cur = static_cast<long>(vprod[depth].size());
      for (long v = 0; v < cur; ++v) {
        double base = vprod[depth][v];
        for (int vh = 0; vh < nrecon_; ++vh) {
          double w = base * row(joint.pair_index(x, vh));
          vprod[depth + 1][v * nrecon_ + vh] = w;
          if (w > 0.0) any = true;
        }
      }
      if (!any) continue;
      if (next < 0)
        throw ValidationError("joint kernel missing a reachable context");
      ++depth;
      if (depth < k) path[depth] = {next, 0};
    }
  }

  if (k == 1) {
    q_prefix_ = Eigen::MatrixXd::Zero(nstate, 1);
    q_prefix_.col(0) = pi;
  } else {
    q_prefix_ = Eigen::MatrixXd::Zero(nstate, block_count_ / nrecon_);
    for (int s = 0; s < nstate; ++s)
      for (long v = 0; v < block_count_; ++v)
        q_prefix_(s, v / nrecon_) += q_full_(s, v);
  }
}

double KDelayAnalysis::log2_denominator(int state, long vflat) const {
  double num = q_full_(state, vflat);
  double den = q_prefix_(state, vflat / nrecon_);
  if (num <= 0.0 || den <= 0.0)
    throw ValidationError("k-delay denominator requested on a structural zero");
  return std::log2(num) - std::log2(den);
}

namespace {

// E[ log2 P(x, xhat | state) - log2 P(x | state) ] under the stationary law.
double pair_information_term(const JointMarkovModel& joint) {
  const int nx = joint.source_alphabet().size();
  const int nr = joint.recon_alphabet().size();
  const Eigen::VectorXd& pi = joint.stationary();
  double acc = 0.0;
  for (int s = 0; s < joint.state_count(); ++s) {
    if (pi(s) <= 0.0) continue;
    auto row = joint.kernel().row(s);
    auto src = joint.source_kernel().row(s);
    for (int x = 0; x < nx; ++x)
      for (int vh = 0; vh < nr; ++vh) {
        double p = row(joint.pair_index(x, vh));
        if (p <= 0.0) continue;
        acc += pi(s) * p * (std::log2(p) - std::log2(src(x)));
      }
  }
  return acc;
}

}  // namespace

RatePoint rate_delay1(const JointMarkovModel& joint) {
  const int nx = joint.source_alphabet().size();
  const int nr = joint.recon_alphabet().size();
  const int nstate = joint.state_count();
  const Eigen::VectorXd& pi = joint.stationary();

  Eigen::VectorXd triple =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nstate) * nx * nr);
  for (int s = 0; s < nstate; ++s) {
    if (pi(s) <= 0.0) continue;
    auto row = joint.kernel().row(s);
    for (int x = 0; x < nx; ++x)
      for (int vh = 0; vh < nr; ++vh)
        triple(static_cast<Eigen::Index>(s) * nx * nr + x * nr + vh) =
            pi(s) * row(joint.pair_index(x, vh));
  }
  RatePoint pt;
  pt.rate_bits = conditional_mutual_information(triple, nstate, nx, nr);
  pt.delay = 1;
  pt.method = RatePoint::Method::Exact;
  return pt;
}

RatePoint rate_delayk(const JointMarkovModel& joint, int k, std::int64_t budget) {
  KDelayAnalysis analysis(joint, k, budget);

  double numerator = pair_information_term(joint);
  double denominator = 0.0;
  for (int s = 0; s < joint.state_count(); ++s)
    for (long v = 0; v < analysis.block_count(); ++v) {
      double p = analysis.block_prob(s, v);
      if (p <= 0.0) continue;
      denominator += p * analysis.log2_denominator(s, v);
    }

  RatePoint pt;
  pt.rate_bits = numerator - denominator;
  pt.delay = k;
  pt.method = k == 1 ? RatePoint::Method::Exact
                     : RatePoint::Method::ForwardMarginalized;
  return pt;
}

namespace {

// P(xhat-block = v | x-pre state) and its prefix via a forward pass over the
// hidden source symbols; used when the full table is beyond budget.
double lazy_log2_denominator(const JointMarkovModel& joint, int k, int state_pre,
                             const int* v,
                             std::map<std::pair<int, std::vector<int>>, double>& memo) {
  std::vector<int> key(v, v + k);
  auto it = memo.find({state_pre, key});
  if (it != memo.end()) return it->second;

  const int nx = joint.source_alphabet().size();
  const int nstate = joint.state_count();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(nstate);
  alpha(state_pre) = 1.0;
  double prefix_mass = 1.0;
  for (int j = 0; j < k; ++j) {
    if (j == k - 1) prefix_mass = alpha.sum();
    Eigen::VectorXd next = Eigen::VectorXd::Zero(nstate);
    for (int s = 0; s < nstate; ++s) {
      if (alpha(s) <= 0.0) continue;
      auto row = joint.kernel().row(s);
      for (int x = 0; x < nx; ++x) {
        double p = row(joint.pair_index(x, v[j]));
        if (p <= 0.0) continue;
        next(joint.step(s, x)) += alpha(s) * p;
      }
    }
    alpha.swap(next);
  }
  double full_mass = alpha.sum();
  if (full_mass <= 0.0 || prefix_mass <= 0.0)
    throw ValidationError("k-delay denominator requested on a structural zero");
  double value = std::log2(full_mass) - std::log2(prefix_mass);
  memo.emplace(std::make_pair(state_pre, std::move(key)), value);
  return value;
}

}  // namespace

RatePoint spectrum_estimate(const JointMarkovModel& joint, int k, int n,
                            int trials, double quantile, std::uint64_t seed,
                            std::int64_t budget) {
  if (trials < 30) throw ValidationError("spectrum estimate needs trials >= 30");
  if (n < k) throw ValidationError("block length shorter than the delay");
  if (!(quantile > 0.0 && quantile < 1.0))
    throw ValidationError("quantile must lie in (0, 1)");

  // Prefer the exact denominator table; fall back to the lazy per-window
  // forward pass when the table is beyond budget.
  std::unique_ptr<KDelayAnalysis> table;
  try {
    table = std::make_unique<KDelayAnalysis>(joint, k, budget);
  } catch (const BudgetError&) {
    table = nullptr;
  }

  const int nr = joint.recon_alphabet().size();
  std::vector<double> per_trial(trials, 0.0);

  parallel_for(trials, [&](int t) {
    Trajectory traj = sample_trajectory(joint, n, mix_seed(seed, t));
    std::map<std::pair<int, std::vector<int>>, double> memo;

    // Recover the state ids along the path.
    std::vector<int> state(n + 1);
    state[0] = joint.kernel().row_index(traj.initial_window);
    for (int i = 0; i < n; ++i) state[i + 1] = joint.step(state[i], traj.x[i]);

    double acc = 0.0;
    int terms = 0;
    std::vector<int> vwin(k);
    for (int i = k - 1; i < n; ++i) {
      int s_i = state[i];
      auto row = joint.kernel().row(s_i);
      double pj = row(joint.pair_index(traj.x[i], traj.xhat[i]));
      double ps = joint.source_kernel().row(s_i)(traj.x[i]);
      if (pj <= 0.0 || ps <= 0.0)
        throw ValidationError("sampled path hit a structural zero");

      int pre = state[i - k + 1];
      double log_den;
      if (table) {
        long vflat = 0;
        for (int j = 0; j < k; ++j) vflat = vflat * nr + traj.xhat[i - k + 1 + j];
        log_den = table->log2_denominator(pre, vflat);
      } else {
        for (int j = 0; j < k; ++j) vwin[j] = traj.xhat[i - k + 1 + j];
        log_den = lazy_log2_denominator(joint, k, pre, vwin.data(), memo);
      }
      acc += std::log2(pj) - std::log2(ps) - log_den;
      ++terms;
    }
    per_trial[t] = acc / terms;
  });

  TrialSummary summary = summarize_trials(per_trial, quantile);
  RatePoint pt;
  pt.rate_bits = summary.quantile_value;
  pt.delay = k;
  pt.method = RatePoint::Method::MonteCarlo;
  pt.mc_mean = summary.mean;
  pt.mc_stddev = summary.stddev;
  pt.quantile = quantile;
  pt.trials = trials;
  pt.block_length = n;
  pt.seed = seed;
  return pt;
}

}  // namespace dirate
