#include "dirate/prob.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace dirate {

Alphabet::Alphabet(std::vector<std::string> symbols) : names_(std::move(symbols)) {
  for (int i = 0; i < static_cast<int>(names_.size()); ++i) {
    auto [it, fresh] = index_.emplace(names_[i], i);
    if (!fresh) throw ValidationError("duplicate alphabet symbol '" + names_[i] + "'");
  }
  if (names_.empty()) throw ValidationError("empty alphabet");
}

Alphabet Alphabet::range(int n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (int i = 0; i < n; ++i) names.push_back(std::to_string(i));
  return Alphabet(std::move(names));
}

int Alphabet::index(const std::string& symbol) const {
  auto it = index_.find(symbol);
  return it == index_.end() ? -1 : it->second;
}

int Alphabet::index_of(const std::string& symbol) const {
  int i = index(symbol);
  if (i < 0) throw ValidationError("unknown symbol '" + symbol + "'");
  return i;
}

ProbVector::ProbVector(Eigen::VectorXd values, double tolerance)
    : values_(std::move(values)), tolerance_(tolerance) {
  if (values_.size() == 0) throw ValidationError("empty probability vector");
  if (values_.minCoeff() < 0.0)
    throw ValidationError("probability vector has a negative entry");
  double err = std::abs(values_.sum() - 1.0);
  if (err > tolerance_) {
    std::ostringstream msg;
    msg << "probability vector sums to 1 " << (values_.sum() > 1 ? "+ " : "- ")
        << err << ", beyond tolerance " << tolerance_;
    throw ValidationError(msg.str());
  }
}

StochasticTable::StochasticTable(Alphabet output, int context_arity)
    : output_(std::move(output)), context_arity_(context_arity) {
  if (context_arity_ < 0) throw ValidationError("negative context arity");
}

void StochasticTable::set_row(const Context& context, const Eigen::VectorXd& probs) {
  if (static_cast<int>(context.size()) != context_arity_)
    throw ValidationError("context arity mismatch: expected " +
                          std::to_string(context_arity_) + ", got " +
                          std::to_string(context.size()));
  if (probs.size() != output_.size())
    throw ValidationError("row length does not match output alphabet");
  auto it = index_.find(context);
  if (it != index_.end()) {
    rows_.row(it->second) = probs;
    return;
  }
  if (used_rows_ == rows_.rows())
    rows_.conservativeResize(std::max<Eigen::Index>(8, rows_.rows() * 2),
                             output_.size());
  rows_.row(used_rows_) = probs;
  index_.emplace(context, used_rows_);
  context_of_.push_back(context);
  ++used_rows_;
}

bool StochasticTable::has_row(const Context& context) const {
  return index_.count(context) > 0;
}

int StochasticTable::row_index(const Context& context) const {
  auto it = index_.find(context);
  return it == index_.end() ? -1 : it->second;
}

Eigen::Ref<const Eigen::VectorXd> StochasticTable::row(int index) const {
  return rows_.row(index).transpose();
}

Eigen::Ref<const Eigen::VectorXd> StochasticTable::row(const Context& context) const {
  int i = row_index(context);
  if (i < 0)
    throw ValidationError("no row for context (" +
                          context_name(context, output_) + ")");
  return row(i);
}

double StochasticTable::prob(const Context& context, int output) const {
  int i = row_index(context);
  return i < 0 ? 0.0 : rows_(i, output);
}

std::string StochasticTable::context_name(const Context& context,
                                          const Alphabet& alpha) {
  std::string out;
  for (size_t i = 0; i < context.size(); ++i) {
    if (i) out += ',';
    int s = context[i];
    out += (s >= 0 && s < alpha.size()) ? alpha.name(s) : std::to_string(s);
  }
  return out;
}

TableValidation validate_table(const StochasticTable& table, double tol) {
  TableValidation report;
  for (const auto& [context, idx] : table.contexts()) {
    auto r = table.row(idx);
    double min_entry = r.minCoeff();
    double sum_error = std::abs(r.sum() - 1.0);
    if (min_entry < 0.0 || sum_error > tol)
      report.violations.push_back({context, sum_error, min_entry});
  }
  return report;
}

double entropy(const Eigen::Ref<const Eigen::VectorXd>& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0.0) h -= p(i) * std::log2(p(i));
  return h;
}

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

double conditional_mutual_information(const Eigen::Ref<const Eigen::VectorXd>& joint,
                                      int ns, int na, int nb) {
  if (joint.size() != static_cast<Eigen::Index>(ns) * na * nb)
    throw ValidationError("joint vector size does not match (ns, na, nb)");
  double info = 0.0;
  for (int s = 0; s < ns; ++s) {
    const Eigen::Index base = static_cast<Eigen::Index>(s) * na * nb;
    double ps = joint.segment(base, static_cast<Eigen::Index>(na) * nb).sum();
    if (ps <= 0.0) continue;
    Eigen::VectorXd pa = Eigen::VectorXd::Zero(na);
    Eigen::VectorXd pb = Eigen::VectorXd::Zero(nb);
    for (int a = 0; a < na; ++a)
      for (int b = 0; b < nb; ++b) {
        double v = joint(base + a * nb + b);
        pa(a) += v;
        pb(b) += v;
      }
    for (int a = 0; a < na; ++a)
      for (int b = 0; b < nb; ++b) {
        double v = joint(base + a * nb + b);
        if (v <= 0.0) continue;
        info += v * std::log2(v * ps / (pa(a) * pb(b)));
      }
  }
  return info;
}

namespace {

// Iterative Tarjan SCC; -1 edges are recorded as "escapes into undefined".
struct SccResult {
  std::vector<int> comp;           // node -> component id
  int count = 0;
  std::vector<bool> has_escape;    // per component
};

SccResult strongly_connected(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  SccResult out;
  out.comp.assign(n, -1);
  std::vector<int> low(n, -1), disc(n, -1), stack;
  std::vector<bool> on_stack(n, false);
  std::vector<bool> escape(n, false);
  int timer = 0;

  struct Frame { int node; size_t edge; };
  for (int root = 0; root < n; ++root) {
    if (disc[root] >= 0) continue;
    std::vector<Frame> call{{root, 0}};
    disc[root] = low[root] = timer++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [u, ei] = call.back();
      if (ei < adj[u].size()) {
        int v = adj[u][ei++];
        if (v < 0) {
          escape[u] = true;
          continue;
        }
        if (disc[v] < 0) {
          disc[v] = low[v] = timer++;
          stack.push_back(v);
          on_stack[v] = true;
          call.push_back({v, 0});
        } else if (on_stack[v]) {
          low[u] = std::min(low[u], disc[v]);
        }
      } else {
        if (low[u] == disc[u]) {
          int id = out.count++;
          while (true) {
            int w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            out.comp[w] = id;
            if (w == u) break;
          }
        }
        int u_done = u;
        call.pop_back();
        if (!call.empty()) {
          int parent = call.back().node;
          low[parent] = std::min(low[parent], low[u_done]);
        }
      }
    }
  }
  out.has_escape.assign(out.count, false);
  for (int u = 0; u < n; ++u)
    if (escape[u]) out.has_escape[out.comp[u]] = true;
  return out;
}

}  // namespace

std::vector<std::vector<int>> recurrent_classes(
    const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  SccResult scc = strongly_connected(adj);
  // A class is recurrent iff no edge leaves it (including -1 escapes).
  std::vector<bool> recurrent(scc.count, true);
  for (int c = 0; c < scc.count; ++c)
    if (scc.has_escape[c]) recurrent[c] = false;
  for (int u = 0; u < n; ++u)
    for (int v : adj[u])
      if (v >= 0 && scc.comp[v] != scc.comp[u]) recurrent[scc.comp[u]] = false;

  std::vector<std::vector<int>> classes(scc.count);
  for (int u = 0; u < n; ++u) classes[scc.comp[u]].push_back(u);
  std::vector<std::vector<int>> result;
  for (int c = 0; c < scc.count; ++c)
    if (recurrent[c]) result.push_back(std::move(classes[c]));
  std::sort(result.begin(), result.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return result;
}

Eigen::VectorXd stationary_from_matrix(
    const Eigen::MatrixXd& transition,
    const std::function<std::string(int)>& state_name) {
  const int n = static_cast<int>(transition.rows());
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < static_cast<int>(transition.cols()); ++j)
      if (transition(i, j) > 0.0) adj[i].push_back(j);
  return stationary_from_matrix(transition, adj, state_name);
}

Eigen::VectorXd stationary_from_matrix(
    const Eigen::MatrixXd& transition,
    const std::vector<std::vector<int>>& adj,
    const std::function<std::string(int)>& state_name) {
  const int n = static_cast<int>(transition.rows());
  if (transition.cols() != n) throw ValidationError("transition matrix not square");

  auto classes = recurrent_classes(adj);
  if (classes.size() != 1) {
    std::ostringstream msg;
    msg << "non-ergodic chain: " << classes.size() << " recurrent classes:";
    for (const auto& cls : classes) {
      msg << " {";
      for (size_t i = 0; i < cls.size(); ++i)
        msg << (i ? "," : "") << state_name(cls[i]);
      msg << "}";
    }
    throw ValidationError(msg.str());
  }

  const auto& cls = classes.front();
  const int m = static_cast<int>(cls.size());
  Eigen::MatrixXd sub(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) sub(i, j) = transition(cls[i], cls[j]);

  // (sub' - I) pi = 0 with the last equation replaced by sum(pi) = 1.
  Eigen::MatrixXd a = sub.transpose() - Eigen::MatrixXd::Identity(m, m);
  a.row(m - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(m - 1) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd pi = lu.solve(b);
  pi += lu.solve(b - a * pi);  // one refinement pass
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();

  Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) full(cls[i]) = pi(i);
  return full;
}

ProbVector stationary_distribution(const StochasticTable& transition, double tol) {
  const Alphabet& states = transition.output_alphabet();
  const int n = states.size();
  if (transition.context_arity() != 1)
    throw ValidationError("transition table must have 1-symbol contexts");
  if (transition.row_count() == 0) throw ValidationError("empty transition table");

  auto report = validate_table(transition, tol);
  if (!report.ok())
    throw ValidationError("invalid transition table, row (" +
                          StochasticTable::context_name(
                              report.violations.front().context, states) +
                          ")");

  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    int r = transition.row_index({i});
    if (r < 0)
      throw ValidationError("transition table missing a row for state " +
                            states.name(i));
    t.row(i) = transition.row(r).transpose();
  }
  Eigen::VectorXd pi =
      stationary_from_matrix(t, [&](int i) { return states.name(i); });

  double residual = (pi.transpose() * t - pi.transpose()).cwiseAbs().maxCoeff();
  if (residual > 1e-12)
    throw ValidationError("stationary solve residual " + std::to_string(residual));
  return ProbVector(pi, 1e-9);
}

}  // namespace dirate
