#include "dirate/channel.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "dirate/util.hpp"

namespace dirate {

namespace {

void require_valid_rows(const StochasticTable& table, double tol, const char* what) {
  if (table.row_count() == 0)
    throw ValidationError(std::string(what) + ": empty kernel");
  auto report = validate_table(table, tol);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    std::ostringstream msg;
    msg << what << ": invalid row, context index (";
    for (size_t i = 0; i < v.context.size(); ++i)
      msg << (i ? "," : "") << v.context[i];
    msg << ")";
    throw ValidationError(msg.str());
  }
}

}  // namespace

ChannelModel::ChannelModel(int mem_x, int mem_y, Alphabet input, Alphabet output,
                           StochasticTable kernel, double tol)
    : mem_x_(mem_x),
      mem_y_(mem_y),
      input_(std::move(input)),
      output_(std::move(output)),
      kernel_(std::move(kernel)) {
  if (mem_x_ < 0 || mem_y_ < 0) throw ValidationError("channel memory orders must be >= 0");
  if (kernel_.context_arity() != mem_x_ + 1 + mem_y_)
    throw ValidationError(
        "channel kernel context arity must be mem_x + 1 + mem_y (input window "
        "including the current symbol, then output window)");
  if (kernel_.output_alphabet() != output_)
    throw ValidationError("channel kernel output alphabet mismatch");
  require_valid_rows(kernel_, tol, "channel kernel");
}

InputPolicy::InputPolicy(int delay, int win_x, int win_y, Alphabet input,
                         Alphabet output, StochasticTable kernel, double tol)
    : delay_(delay),
      win_x_(win_x),
      win_y_(win_y),
      input_(std::move(input)),
      output_(std::move(output)),
      kernel_(std::move(kernel)) {
  if (delay_ < 1) throw ValidationError("feedback delay must be >= 1");
  if (win_x_ < 0 || win_y_ < 0) throw ValidationError("policy window sizes must be >= 0");
  if (kernel_.context_arity() != win_x_ + win_y_)
    throw ValidationError(
        "policy kernel context arity must be win_x + win_y; the y-window "
        "refers to outputs up to time i-delay");
  if (kernel_.output_alphabet() != input_)
    throw ValidationError("policy kernel must emit input symbols");
  require_valid_rows(kernel_, tol, "policy kernel");
}

ChannelJointProcess ChannelJointProcess::compose(const ChannelModel& channel,
                                                 const InputPolicy& policy,
                                                 std::int64_t state_budget) {
  if (channel.input_alphabet() != policy.input_alphabet() ||
      channel.output_alphabet() != policy.output_alphabet())
    throw ValidationError("channel and policy alphabets do not match");

  ChannelJointProcess p;
  p.input_ = channel.input_alphabet();
  p.output_ = channel.output_alphabet();
  p.delay_ = policy.delay();
  p.n_x_ = p.input_.size();
  p.n_y_ = p.output_.size();
  p.x_depth_ = std::max(channel.mem_x(), policy.win_x());
  p.y_depth_ = std::max(channel.mem_y(),
                        policy.win_y() == 0 ? 0 : policy.delay() + policy.win_y() - 1);

  double states = std::pow(p.n_x_, p.x_depth_) * std::pow(p.n_y_, p.y_depth_);
  if (states > static_cast<double>(state_budget))
    throw BudgetError("combined window state space needs " +
                      std::to_string(states) + " states, budget " +
                      std::to_string(state_budget));
  p.n_xw_ = 1;
  for (int i = 0; i < p.x_depth_; ++i) p.n_xw_ *= p.n_x_;
  p.n_yw_ = 1;
  for (int i = 0; i < p.y_depth_; ++i) p.n_yw_ *= p.n_y_;
  const int n = p.n_xw_ * p.n_yw_;

  p.policy_ = RowMatrix::Zero(n, p.n_x_);
  p.channel_ = RowMatrix::Zero(static_cast<Eigen::Index>(n) * p.n_x_, p.n_y_);
  p.next_.assign(static_cast<std::size_t>(n) * p.n_x_ * p.n_y_, -1);

  const int k = policy.delay();
  const int wy = policy.win_y();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  std::vector<std::vector<int>> adj(n);
  std::vector<bool> defined(n, true);

  for (int sid = 0; sid < n; ++sid) {
    Context xw = p.decode_x_window(sid / p.n_yw_);
    Context yw = p.decode_y_window(sid % p.n_yw_);

    Context pol_ctx;
    pol_ctx.insert(pol_ctx.end(), xw.end() - policy.win_x(), xw.end());
    if (wy > 0)
      pol_ctx.insert(pol_ctx.end(),
                     yw.begin() + (p.y_depth_ - k - wy + 1),
                     yw.begin() + (p.y_depth_ - k + 1));
    int pol_row = policy.kernel().row_index(pol_ctx);
    if (pol_row < 0) {
      defined[sid] = false;
      adj[sid].push_back(-1);
      continue;
    }
    auto pol = policy.kernel().row(pol_row);

    bool ok = true;
    for (int x = 0; x < p.n_x_ && ok; ++x) {
      if (pol(x) <= 0.0) continue;
      Context ch_ctx;
      ch_ctx.insert(ch_ctx.end(), xw.end() - channel.mem_x(), xw.end());
      ch_ctx.push_back(x);
      ch_ctx.insert(ch_ctx.end(), yw.end() - channel.mem_y(), yw.end());
      int ch_row = channel.kernel().row_index(ch_ctx);
      if (ch_row < 0) {
        ok = false;
        break;
      }
      p.channel_.row(static_cast<Eigen::Index>(sid) * p.n_x_ + x) =
          channel.kernel().row(ch_row);
    }
    if (!ok) {
      defined[sid] = false;
      adj[sid].push_back(-1);
      continue;
    }
    p.policy_.row(sid) = pol;

    const int xw_id = sid / p.n_yw_;
    const int yw_id = sid % p.n_yw_;
    const int xw_base = p.x_depth_ == 0 ? 0 : (xw_id % (p.n_xw_ / p.n_x_)) * p.n_x_;
    const int yw_base = p.y_depth_ == 0 ? 0 : (yw_id % (p.n_yw_ / p.n_y_)) * p.n_y_;
    for (int x = 0; x < p.n_x_; ++x) {
      double px = pol(x);
      for (int y = 0; y < p.n_y_; ++y) {
        int nxt = p.state_id(p.x_depth_ == 0 ? 0 : xw_base + x,
                             p.y_depth_ == 0 ? 0 : yw_base + y);
        p.next_[(static_cast<std::size_t>(sid) * p.n_x_ + x) * p.n_y_ + y] = nxt;
        double w = px * p.channel_prob(sid, x, y);
        if (w > 0.0) {
          t(sid, nxt) += w;
          adj[sid].push_back(nxt);
        }
      }
    }
  }

  auto name = [&](int sid) {
    std::string s = "x:(" + StochasticTable::context_name(
                                p.decode_x_window(sid / p.n_yw_), p.input_) +
                    ") y:(" +
                    StochasticTable::context_name(p.decode_y_window(sid % p.n_yw_),
                                                  p.output_) +
                    ")";
    return s;
  };
  p.stationary_ = stationary_from_matrix(t, adj, name);
  return p;
}

Context ChannelJointProcess::decode_x_window(int xw_id) const {
  Context w(x_depth_);
  for (int t = x_depth_ - 1; t >= 0; --t) {
    w[t] = xw_id % n_x_;
    xw_id /= n_x_;
  }
  return w;
}

Context ChannelJointProcess::decode_y_window(int yw_id) const {
  Context w(y_depth_);
  for (int t = y_depth_ - 1; t >= 0; --t) {
    w[t] = yw_id % n_y_;
    yw_id /= n_y_;
  }
  return w;
}

namespace {

void require_output_markov(const ChannelJointProcess& process, const char* op) {
  if (process.output_markov()) return;
  throw DomainError(
      std::string(op) +
      ": the output marginal of a process with input memory has no finite "
      "Markov order; use the Monte-Carlo spectrum estimator");
}

}  // namespace

RatePoint feedback_info_rate(const ChannelModel& channel, const InputPolicy& policy) {
  ChannelJointProcess p = ChannelJointProcess::compose(channel, policy);
  require_output_markov(p, "feedback_info_rate");

  const int nx = p.input_alphabet().size();
  const int ny = p.output_alphabet().size();
  double rate = 0.0;
  for (int s = 0; s < p.state_count(); ++s) {
    double pi = p.stationary()(s);
    if (pi <= 0.0) continue;
    Eigen::VectorXd py = Eigen::VectorXd::Zero(ny);
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y)
        py(y) += p.policy_prob(s, x) * p.channel_prob(s, x, y);
    for (int x = 0; x < nx; ++x) {
      double px = p.policy_prob(s, x);
      if (px <= 0.0) continue;
      for (int y = 0; y < ny; ++y) {
        double ch = p.channel_prob(s, x, y);
        if (ch <= 0.0) continue;
        rate += pi * px * ch * (std::log2(ch) - std::log2(py(y)));
      }
    }
  }

  RatePoint pt;
  pt.rate_bits = rate;
  pt.delay = policy.delay();
  pt.method = RatePoint::Method::Exact;
  return pt;
}

std::vector<CostCell> supported_cost_cells(const ChannelModel& channel,
                                           const InputPolicy& policy) {
  ChannelJointProcess p = ChannelJointProcess::compose(channel, policy);
  require_output_markov(p, "cost synthesis/verification");

  const int nx = p.input_alphabet().size();
  const int ny = p.output_alphabet().size();
  std::vector<CostCell> cells;
  for (int s = 0; s < p.state_count(); ++s) {
    double pi = p.stationary()(s);
    if (pi <= 0.0) continue;
    Eigen::VectorXd py = Eigen::VectorXd::Zero(ny);
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y)
        py(y) += p.policy_prob(s, x) * p.channel_prob(s, x, y);
    Context yw = p.decode_y_window(s);
    for (int x = 0; x < nx; ++x) {
      double px = p.policy_prob(s, x);
      if (px <= 0.0) continue;
      for (int y = 0; y < ny; ++y) {
        double ch = p.channel_prob(s, x, y);
        if (ch <= 0.0) continue;
        cells.push_back({x, yw, y, pi * px * ch,
                         std::log2(ch) - std::log2(py(y))});
      }
    }
  }
  return cells;
}

CostTable synthesize_cost(const ChannelModel& channel, const InputPolicy& policy,
                          double lambda, double d0) {
  if (!(lambda > 0.0)) throw ValidationError("synthesize_cost: lambda must be positive");
  CostTable table;
  table.delay = policy.delay();
  table.input = channel.input_alphabet();
  table.output = channel.output_alphabet();
  for (const CostCell& cell : supported_cost_cells(channel, policy)) {
    table.y_window = static_cast<int>(cell.y_window.size());
    Context y_key = cell.y_window;
    y_key.push_back(cell.y);
    table.values[{{cell.x}, y_key}] = lambda * cell.log_ratio + d0;
  }
  return table;
}

OptimalityCertificate verify_cost(const ChannelModel& channel,
                                  const InputPolicy& policy, const CostTable& cost,
                                  double tol) {
  if (cost.input != channel.input_alphabet() ||
      cost.output != channel.output_alphabet())
    throw ValidationError("cost table alphabets do not match the channel");
  if (cost.delay != policy.delay())
    throw ValidationError("cost table delay does not match the policy");

  std::vector<double> log_ratio, measure;
  std::vector<int> group;
  for (const CostCell& cell : supported_cost_cells(channel, policy)) {
    if (static_cast<int>(cell.y_window.size()) != cost.y_window)
      throw ValidationError("cost table y-window length does not match the model");
    Context y_key = cell.y_window;
    y_key.push_back(cell.y);
    auto it = cost.values.find({{cell.x}, y_key});
    if (it == cost.values.end())
      throw ValidationError(
          "cost undefined on supported cell (x " +
          channel.input_alphabet().name(cell.x) + ", y-window " +
          StochasticTable::context_name(y_key, channel.output_alphabet()) + ")");
    log_ratio.push_back(cell.log_ratio);
    measure.push_back(it->second);
    group.push_back(0);
  }
  return solve_scale_offset(log_ratio, measure, group, {Context{}}, tol);
}

double expected_cost(const ChannelModel& channel, const InputPolicy& policy,
                     const CostTable& cost) {
  double total = 0.0;
  for (const CostCell& cell : supported_cost_cells(channel, policy)) {
    Context y_key = cell.y_window;
    y_key.push_back(cell.y);
    auto it = cost.values.find({{cell.x}, y_key});
    if (it == cost.values.end())
      throw ValidationError("cost undefined on a supported cell");
    total += cell.prob * it->second;
  }
  return total;
}

ChannelTrajectory sample_channel_trajectory(const ChannelJointProcess& process,
                                            int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("trajectory length must be >= 1");
  std::mt19937_64 rng(seed);
  const Eigen::VectorXd& pi = process.stationary();
  int state = sample_index(pi.data(), static_cast<int>(pi.size()), uniform01(rng));

  ChannelTrajectory traj;
  traj.n = n;
  traj.seed = seed;
  traj.x_warmup = process.decode_x_window(process.x_window_of(state));
  traj.y_warmup = process.decode_y_window(process.y_window_of(state));
  traj.x.resize(n);
  traj.y.resize(n);

  const int nx = process.input_alphabet().size();
  const int ny = process.output_alphabet().size();
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd pol(nx);
    for (int x = 0; x < nx; ++x) pol(x) = process.policy_prob(state, x);
    int x = sample_index(pol.data(), nx, uniform01(rng));
    Eigen::VectorXd ch(ny);
    for (int y = 0; y < ny; ++y) ch(y) = process.channel_prob(state, x, y);
    int y = sample_index(ch.data(), ny, uniform01(rng));
    traj.x[i] = x;
    traj.y[i] = y;
    state = process.step(state, x, y);
  }
  return traj;
}

RatePoint channel_spectrum_estimate(const ChannelModel& channel,
                                    const InputPolicy& policy, int n, int trials,
                                    double quantile, std::uint64_t seed) {
  if (trials < 30) throw ValidationError("spectrum estimate needs trials >= 30");
  if (n < 1) throw ValidationError("block length must be >= 1");
  if (!(quantile > 0.0 && quantile < 1.0))
    throw ValidationError("quantile must lie in (0, 1)");

  ChannelJointProcess p = ChannelJointProcess::compose(channel, policy);
  const int nx = p.input_alphabet().size();
  const int ny = p.output_alphabet().size();
  const int nxw = p.x_window_count();
  const int nyw = p.y_window_count();

  std::vector<double> per_trial(trials, 0.0);
  parallel_for(trials, [&](int t) {
    ChannelTrajectory traj = sample_channel_trajectory(p, n, mix_seed(seed, t));

    // Filter over the hidden input window given the observed outputs; the
    // true input path enters only through the numerator.
    int yw_id = 0;
    for (int v : traj.y_warmup) yw_id = yw_id * ny + v;
    int xw_true = 0;
    for (int v : traj.x_warmup) xw_true = xw_true * nx + v;

    Eigen::VectorXd alpha(nxw);
    for (int xw = 0; xw < nxw; ++xw) alpha(xw) = p.stationary()(p.state_id(xw, yw_id));
    double mass = alpha.sum();
    if (mass <= 0.0) throw ValidationError("filter initialization hit zero mass");
    alpha /= mass;

    const int xw_mod = p.x_depth() == 0 ? 1 : nxw / nx;
    const int yw_mod = p.y_depth() == 0 ? 1 : nyw / ny;
    double acc = 0.0;
    Eigen::VectorXd alpha_next(nxw);
    for (int i = 0; i < n; ++i) {
      const int y_i = traj.y[i];
      double predictive = 0.0;
      alpha_next.setZero();
      for (int xw = 0; xw < nxw; ++xw) {
        if (alpha(xw) <= 0.0) continue;
        int sid = p.state_id(xw, yw_id);
        for (int x = 0; x < nx; ++x) {
          double w = alpha(xw) * p.policy_prob(sid, x) * p.channel_prob(sid, x, y_i);
          if (w <= 0.0) continue;
          predictive += w;
          int xw_next = p.x_depth() == 0 ? 0 : (xw % xw_mod) * nx + x;
          alpha_next(xw_next) += w;
        }
      }
      if (predictive <= 0.0)
        throw ValidationError("sampled path hit a structural zero in the filter");

      int sid_true = p.state_id(xw_true, yw_id);
      double ch = p.channel_prob(sid_true, traj.x[i], y_i);
      acc += std::log2(ch) - std::log2(predictive);

      alpha = alpha_next / predictive;
      xw_true = p.x_depth() == 0 ? 0 : (xw_true % xw_mod) * nx + traj.x[i];
      yw_id = p.y_depth() == 0 ? 0 : (yw_id % yw_mod) * ny + y_i;
    }
    per_trial[t] = acc / n;
  });

  TrialSummary summary = summarize_trials(per_trial, quantile);
  RatePoint pt;
  pt.rate_bits = summary.quantile_value;
  pt.delay = policy.delay();
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
