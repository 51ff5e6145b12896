#include "dirate/optimality.hpp"

#include <cmath>
#include <sstream>

namespace dirate {

std::string status_name(OptimalityCertificate::Status s) {
  switch (s) {
    case OptimalityCertificate::Status::Optimal: return "optimal";
    case OptimalityCertificate::Status::NotOptimal: return "not-optimal";
    case OptimalityCertificate::Status::UnderDetermined: return "under-determined";
  }
  return "unknown";
}

void for_each_supported_cell(const JointMarkovModel& joint, int k,
                             std::int64_t budget,
                             const std::function<void(const SupportCell&)>& fn) {
  KDelayAnalysis analysis(joint, k, budget);

  const int nx = joint.source_alphabet().size();
  const int nr = joint.recon_alphabet().size();
  const Eigen::VectorXd& pi = joint.stationary();

  std::vector<std::vector<double>> vprod(k + 1);
  long block = 1;
  for (int j = 0; j <= k; ++j, block *= nr) vprod[j].assign(block, 0.0);

  struct Frame { int state; int x; };
  SupportCell cell;
  for (int s0 = 0; s0 < joint.state_count(); ++s0) {
    if (pi(s0) <= 0.0) continue;
    vprod[0][0] = pi(s0);
    std::vector<Frame> path(k);
    std::vector<int> xs(k);
    path[0] = {s0, 0};
    int depth = 0;
    while (depth >= 0) {
      if (depth == k) {
        // state where the final (current) source symbol was drawn
        int s_i = path[k - 1].state;
        auto row = joint.kernel().row(s_i);
        cell.x_window = joint.kernel().context_of(s0);
        cell.x_window.insert(cell.x_window.end(), xs.begin(), xs.end());
        const long nblocks = static_cast<long>(vprod[k].size());
        for (long v = 0; v < nblocks; ++v) {
          double p = vprod[k][v];
          if (p <= 0.0) continue;
          double num = row(joint.pair_index(xs[k - 1], static_cast<int>(v % nr)));
          cell.xhat_window.assign(k, 0);
          long rest = v;
          for (int j = k - 1; j >= 0; --j) {
            cell.xhat_window[j] = static_cast<int>(rest % nr);
            rest /= nr;
          }
          cell.prob = p;
          cell.log_ratio = -(std::log2(num) - analysis.log2_denominator(s0, v));
          fn(cell);
        }
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
      auto row = joint.kernel().row(state);
      bool any = false;
      const long cur = static_cast<long>(vprod[depth].size());
      for (long v = 0; v < cur; ++v) {
        double base = vprod[depth][v];
        for (int vh = 0; vh < nr; ++vh) {
          double w = base * row(joint.pair_index(x, vh));
          vprod[depth + 1][v * nr + vh] = w;
          if (w > 0.0) any = true;
        }
      }
      if (!any) continue;
      xs[depth] = x;
      ++depth;
      if (depth < k) path[depth] = {joint.step(state, x), 0};
    }
  }
}

std::vector<SupportCell> supported_cells(const JointMarkovModel& joint, int k,
                                         std::int64_t budget) {
  std::vector<SupportCell> cells;
  for_each_supported_cell(joint, k, budget,
                          [&](const SupportCell& c) { cells.push_back(c); });
  return cells;
}

DistortionTable synthesize_distortion(const JointMarkovModel& joint, int k,
                                      double c, const std::map<Context, double>& d0,
                                      std::int64_t budget) {
  if (!(c > 0.0)) throw ValidationError("synthesize_distortion: c must be positive");
  DistortionTable table;
  table.order = joint.order();
  table.delay = k;
  table.source = joint.source_alphabet();
  table.recon = joint.recon_alphabet();
  for_each_supported_cell(joint, k, budget, [&](const SupportCell& cell) {
    auto it = d0.find(cell.x_window);
    double offset = it == d0.end() ? 0.0 : it->second;
    table.values[{cell.x_window, cell.xhat_window}] = c * cell.log_ratio + offset;
  });
  return table;
}

OptimalityCertificate verify_distortion(const JointMarkovModel& joint, int k,
                                        const DistortionTable& dist, double tol,
                                        std::int64_t budget) {
  if (dist.order != joint.order())
    throw ValidationError("distortion table order does not match the model");
  if (dist.delay != k)
    throw ValidationError("distortion table delay does not match the request");
  if (dist.source != joint.source_alphabet() || dist.recon != joint.recon_alphabet())
    throw ValidationError("distortion table alphabets do not match the model");

  std::vector<double> log_ratio, measure;
  std::vector<int> group;
  std::vector<Context> group_keys;
  std::map<Context, int> group_index;
  for_each_supported_cell(joint, k, budget, [&](const SupportCell& cell) {
    auto it = dist.values.find({cell.x_window, cell.xhat_window});
    if (it == dist.values.end())
      throw ValidationError(
          "distortion undefined on supported cell (x-window " +
          StochasticTable::context_name(cell.x_window, dist.source) +
          ", xhat-window " +
          StochasticTable::context_name(cell.xhat_window, dist.recon) + ")");
    auto [git, fresh] = group_index.emplace(cell.x_window,
                                            static_cast<int>(group_keys.size()));
    if (fresh) group_keys.push_back(cell.x_window);
    log_ratio.push_back(cell.log_ratio);
    measure.push_back(it->second);
    group.push_back(git->second);
  });
  return solve_scale_offset(log_ratio, measure, group, group_keys, tol);
}

RateDistortionPoint rd_point(const JointMarkovModel& joint, int k,
                             const DistortionTable& dist, std::int64_t budget) {
  RateDistortionPoint point;
  point.rate = rate_delayk(joint, k, budget);
  double d = 0.0;
  for_each_supported_cell(joint, k, budget, [&](const SupportCell& cell) {
    auto it = dist.values.find({cell.x_window, cell.xhat_window});
    if (it == dist.values.end())
      throw ValidationError(
          "distortion undefined on supported cell (x-window " +
          StochasticTable::context_name(cell.x_window, dist.source) + ")");
    d += cell.prob * it->second;
  });
  point.distortion = d;
  return point;
}

OptimalityCertificate solve_scale_offset(const std::vector<double>& log_ratio,
                                         const std::vector<double>& measure,
                                         const std::vector<int>& group,
                                         const std::vector<Context>& group_keys,
                                         double tol) {
  const int n = static_cast<int>(log_ratio.size());
  const int ng = static_cast<int>(group_keys.size());
  if (n == 0) throw ValidationError("no supported cells to verify");

  // For any fixed c the optimal offsets are the per-group means of
  // (measure - c L); eliminating them leaves a 1-d least-squares problem in c.
  Eigen::VectorXd mean_l = Eigen::VectorXd::Zero(ng);
  Eigen::VectorXd mean_e = Eigen::VectorXd::Zero(ng);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(ng);
  for (int i = 0; i < n; ++i) {
    mean_l(group[i]) += log_ratio[i];
    mean_e(group[i]) += measure[i];
    count(group[i]) += 1.0;
  }
  mean_l.array() /= count.array();
  mean_e.array() /= count.array();

  double ss_ll = 0.0, ss_le = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i) {
    double lc = log_ratio[i] - mean_l(group[i]);
    double ec = measure[i] - mean_e(group[i]);
    ss_ll += lc * lc;
    ss_le += lc * ec;
    scale = std::max(scale, log_ratio[i] * log_ratio[i]);
  }

  OptimalityCertificate cert;
  auto fill_d0 = [&](double c) {
    for (int g = 0; g < ng; ++g) cert.d0[group_keys[g]] = mean_e(g) - c * mean_l(g);
  };
  auto max_residual = [&](double c) {
    double r = 0.0;
    for (int i = 0; i < n; ++i)
      r = std::max(r, std::abs(measure[i] - c * log_ratio[i] -
                               (mean_e(group[i]) - c * mean_l(group[i]))));
    return r;
  };

  const double rank_eps = 1e-14 * std::max(1.0, scale) * n;
  if (ss_ll <= rank_eps) {
    // L carries no within-group variation: c is unidentifiable.
    cert.c = 0.0;
    fill_d0(0.0);
    cert.residual = max_residual(0.0);
    if (cert.residual <= tol) {
      cert.status = OptimalityCertificate::Status::UnderDetermined;
      cert.note = "scale unidentifiable: log-ratio constant within every context group";
    } else {
      cert.status = OptimalityCertificate::Status::NotOptimal;
      cert.note = "measure varies where the log-ratio does not";
    }
    return cert;
  }

  double c = ss_le / ss_ll;
  cert.c = c;
  fill_d0(c);
  cert.residual = max_residual(c);
  if (cert.residual > tol) {
    cert.status = OptimalityCertificate::Status::NotOptimal;
    cert.note = "residual exceeds tolerance";
  } else if (std::abs(c) <= 1e-12) {
    cert.status = OptimalityCertificate::Status::UnderDetermined;
    cert.note = "degenerate: solved scale is zero, the measure constrains nothing";
  } else if (c < 0.0) {
    cert.status = OptimalityCertificate::Status::NotOptimal;
    cert.note = "solved scale is negative; the condition requires c > 0";
  } else {
    cert.status = OptimalityCertificate::Status::Optimal;
  }
  return cert;
}

}  // namespace dirate
