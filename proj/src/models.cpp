#include "dirate/models.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "dirate/util.hpp"

namespace dirate {

namespace {

// Shift a window one step: drop the oldest symbol, append x.
Context shifted(const Context& ctx, int x) {
  Context next(ctx.begin() + 1, ctx.end());
  next.push_back(x);
  return next;
}

void require_valid(const StochasticTable& table, double tol, const char* what,
                   const Alphabet& context_alpha) {
  if (table.row_count() == 0)
    throw ValidationError(std::string(what) + ": empty kernel");
  auto report = validate_table(table, tol);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    std::ostringstream msg;
    msg << what << ": invalid row (" ;
    msg << StochasticTable::context_name(v.context, context_alpha) << ")";
    if (v.min_entry < 0) msg << ", negative entry " << v.min_entry;
    if (v.sum_error > tol) msg << ", sum off by " << v.sum_error;
    throw ValidationError(msg.str());
  }
}

// Build the m-tuple chain over kernel contexts. source_prob(state, x) gives
// the per-step source law used for both the support graph and the
// transition matrix.
ChainStates analyze_chain(const StochasticTable& kernel, const Alphabet& source,
                          const std::function<double(int, int)>& source_prob) {
  const int n = kernel.row_count();
  const int nx = source.size();
  ChainStates chain;
  chain.next.assign(n, std::vector<int>(nx, -1));
  std::vector<std::vector<int>> adj(n);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [ctx, s] : kernel.contexts()) {
    for (int x = 0; x < nx; ++x) {
      int target = kernel.row_index(shifted(ctx, x));
      chain.next[s][x] = target;
      double p = source_prob(s, x);
      if (p <= 0.0) continue;
      adj[s].push_back(target);  // -1 marks a missing successor context
      if (target >= 0) t(s, target) += p;
    }
  }
  auto name = [&](int s) {
    return StochasticTable::context_name(kernel.context_of(s), source);
  };
  chain.stationary = stationary_from_matrix(t, adj, name);
  return chain;
}

}  // namespace

MarkovSourceModel::MarkovSourceModel(int order, Alphabet alphabet,
                                     StochasticTable kernel, double tol)
    : order_(order), alphabet_(std::move(alphabet)), kernel_(std::move(kernel)) {
  if (order_ < 1) throw ValidationError("source model order must be >= 1");
  if (kernel_.context_arity() != order_)
    throw ValidationError("source kernel context arity must equal the order");
  if (kernel_.output_alphabet() != alphabet_)
    throw ValidationError("source kernel output alphabet mismatch");
  require_valid(kernel_, tol, "source kernel", alphabet_);
  chain_ = analyze_chain(kernel_, alphabet_, [this](int s, int x) {
    return kernel_.row(s)(x);
  });
}

TestChannelModel::TestChannelModel(int order, Alphabet source, Alphabet recon,
                                   StochasticTable kernel, double tol)
    : order_(order),
      source_(std::move(source)),
      recon_(std::move(recon)),
      kernel_(std::move(kernel)) {
  if (order_ < 1) throw ValidationError("test channel order must be >= 1");
  if (kernel_.context_arity() != order_ + 1)
    throw ValidationError(
        "test channel context arity must be order + 1 (window includes the "
        "current source symbol)");
  if (kernel_.output_alphabet() != recon_)
    throw ValidationError("test channel output alphabet mismatch");
  require_valid(kernel_, tol, "test channel kernel", source_);
}

JointMarkovModel JointMarkovModel::from_kernel(int order, Alphabet source,
                                               Alphabet recon,
                                               StochasticTable joint_kernel,
                                               double tol) {
  JointMarkovModel m;
  m.order_ = order;
  m.source_ = std::move(source);
  m.recon_ = std::move(recon);
  if (order < 1) throw ValidationError("joint model order must be >= 1");
  if (joint_kernel.context_arity() != order)
    throw ValidationError("joint kernel context arity must equal the order");
  if (joint_kernel.output_alphabet().size() != m.source_.size() * m.recon_.size())
    throw ValidationError("joint kernel outputs must cover the (x, xhat) pairs");
  require_valid(joint_kernel, tol, "joint kernel", m.source_);
  m.kernel_ = std::move(joint_kernel);

  const int nx = m.source_.size();
  const int nr = m.recon_.size();
  m.source_kernel_ = StochasticTable(m.source_, order);
  for (const auto& [ctx, idx] : m.kernel_.contexts()) {
    auto joint_row = m.kernel_.row(idx);
    Eigen::VectorXd marginal = Eigen::VectorXd::Zero(nx);
    for (int x = 0; x < nx; ++x)
      marginal(x) = joint_row.segment(static_cast<Eigen::Index>(x) * nr, nr).sum();
    m.source_kernel_.set_row(ctx, marginal);
  }

  m.chain_ = analyze_chain(m.kernel_, m.source_, [&m](int s, int x) {
    return m.source_kernel_.row(s)(x);
  });
  return m;
}

JointMarkovModel compose_joint(const MarkovSourceModel& source,
                               const TestChannelModel& test) {
  if (source.order() != test.order())
    throw ValidationError("compose_joint: order mismatch");
  if (source.alphabet() != test.source_alphabet())
    throw ValidationError("compose_joint: source alphabet mismatch");

  const int nx = source.alphabet().size();
  const int nr = test.recon_alphabet().size();
  StochasticTable joint(Alphabet::range(nx * nr), source.order());
  for (const auto& [ctx, idx] : source.kernel().contexts()) {
    auto src_row = source.kernel().row(idx);
    Eigen::VectorXd row = Eigen::VectorXd::Zero(nx * nr);
    for (int x = 0; x < nx; ++x) {
      double px = src_row(x);
      if (px <= 0.0) continue;
      Context window = ctx;
      window.push_back(x);
      int t = test.kernel().row_index(window);
      if (t < 0)
        throw ValidationError(
            "compose_joint: test channel missing context (" +
            StochasticTable::context_name(window, source.alphabet()) + ")");
      auto test_row = test.kernel().row(t);
      for (int xh = 0; xh < nr; ++xh) row(x * nr + xh) = px * test_row(xh);
    }
    joint.set_row(ctx, row);
  }
  return JointMarkovModel::from_kernel(source.order(), source.alphabet(),
                                       test.recon_alphabet(), std::move(joint));
}

StochasticTable forward_conditional(const JointMarkovModel& joint) {
  const int nx = joint.source_alphabet().size();
  const int nr = joint.recon_alphabet().size();
  StochasticTable fwd(joint.source_alphabet(), joint.order() + 1);
  for (const auto& [ctx, idx] : joint.kernel().contexts()) {
    auto row = joint.kernel().row(idx);
    for (int xh = 0; xh < nr; ++xh) {
      double denom = 0.0;
      for (int x = 0; x < nx; ++x) denom += row(joint.pair_index(x, xh));
      if (denom <= 0.0) continue;  // structurally absent column
      Eigen::VectorXd col(nx);
      for (int x = 0; x < nx; ++x) col(x) = row(joint.pair_index(x, xh)) / denom;
      Context key = ctx;
      key.push_back(xh);
      fwd.set_row(key, col);
    }
  }
  return fwd;
}

StochasticTable reverse_conditional(const JointMarkovModel& joint) {
  const int nx = joint.source_alphabet().size();
  const int nr = joint.recon_alphabet().size();
  StochasticTable rev(joint.recon_alphabet(), joint.order() + 1);
  for (const auto& [ctx, idx] : joint.kernel().contexts()) {
    auto row = joint.kernel().row(idx);
    auto src = joint.source_kernel().row(idx);
    for (int x = 0; x < nx; ++x) {
      if (src(x) <= 0.0) continue;
      Eigen::VectorXd col(nr);
      for (int xh = 0; xh < nr; ++xh)
        col(xh) = row(joint.pair_index(x, xh)) / src(x);
      Context key = ctx;
      key.push_back(x);
      rev.set_row(key, col);
    }
  }
  return rev;
}

Trajectory sample_trajectory(const JointMarkovModel& joint, int n,
                             std::uint64_t seed) {
  if (n < 1) throw ValidationError("trajectory length must be >= 1");
  const int nr = joint.recon_alphabet().size();
  const int npair = joint.source_alphabet().size() * nr;

  std::mt19937_64 rng(seed);
  const Eigen::VectorXd& pi = joint.stationary();
  int state = sample_index(pi.data(), static_cast<int>(pi.size()), uniform01(rng));

  Trajectory traj;
  traj.n = n;
  traj.seed = seed;
  traj.initial_window = joint.kernel().context_of(state);
  traj.x.resize(n);
  traj.xhat.resize(n);
  for (int i = 0; i < n; ++i) {
    auto row = joint.kernel().row(state);
    int pair = sample_index(row.data(), npair, uniform01(rng));
    int x = pair / nr;
    traj.x[i] = x;
    traj.xhat[i] = pair % nr;
    state = joint.step(state, x);
  }
  return traj;
}

}  // namespace dirate
