#include "dirate/stock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dirate::stock {

BirthDeathChain::BirthDeathChain(std::vector<double> up, std::vector<double> down)
    : up_(std::move(up)), down_(std::move(down)) {
  if (up_.empty() || up_.size() != down_.size())
    throw ValidationError(
        "birth-death chain needs K up-probabilities p_0..p_{K-1} and K "
        "down-probabilities q_1..q_K");
  const int k = top();
  for (int i = 0; i <= k; ++i) {
    double pi = p(i), qi = q(i);
    if (i < k && !(pi > 0.0))
      throw ValidationError("up-probability p_" + std::to_string(i) +
                            " must be positive (irreducibility)");
    if (i > 0 && !(qi > 0.0))
      throw ValidationError("down-probability q_" + std::to_string(i) +
                            " must be positive (irreducibility)");
    if (pi + qi > 1.0 + 1e-15)
      throw ValidationError("state " + std::to_string(i) + ": p_" +
                            std::to_string(i) + " + q_" + std::to_string(i) +
                            " = " + std::to_string(pi + qi) + " exceeds 1");
  }
}

double epsilon_max(const BirthDeathChain& chain) {
  double bound = 0.5;
  for (int j = 1; j <= chain.top(); ++j)
    bound = std::min({bound, chain.q(j), 1.0 - chain.q(j)});
  return bound;
}

StockPolicyParams policy_params(const BirthDeathChain& chain, double epsilon) {
  StockPolicyParams params{epsilon, epsilon_max(chain)};
  if (!(epsilon >= 0.0) || epsilon > params.epsilon_max * (1.0 + 1e-12) + 1e-15 ||
      epsilon >= 0.5) {
    int offender = 1;
    for (int j = 1; j <= chain.top(); ++j)
      if (std::min(chain.q(j), 1.0 - chain.q(j)) <=
          std::min(chain.q(offender), 1.0 - chain.q(offender)))
        offender = j;
    std::ostringstream msg;
    msg << "epsilon " << epsilon << " outside the validity domain [0, "
        << params.epsilon_max << "] set by state " << offender
        << " (q = " << chain.q(offender) << ")";
    throw DomainError(msg.str());
  }
  params.epsilon = std::min(epsilon, params.epsilon_max);
  return params;
}

MarkovSourceModel build_chain(const BirthDeathChain& chain) {
  const int n = chain.top() + 1;
  Alphabet states = Alphabet::range(n);
  StochasticTable kernel(states, 1);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
    if (i > 0) row(i - 1) = chain.q(i);
    if (i < n - 1) row(i + 1) = chain.p(i);
    row(i) = std::max(0.0, 1.0 - chain.p(i) - chain.q(i));
    kernel.set_row({i}, row);
  }
  return MarkovSourceModel(1, states, std::move(kernel));
}

Eigen::VectorXd chain_stationary(const BirthDeathChain& chain) {
  return build_chain(chain).stationary();
}

double epsilon_for(const BirthDeathChain& chain, double distortion) {
  if (distortion < 0.0) throw DomainError("distortion target must be >= 0");
  double pi0 = chain_stationary(chain)(0);
  return distortion / (1.0 - pi0);
}

StochasticTable build_forward_table(const BirthDeathChain& chain, double epsilon) {
  const double eps = policy_params(chain, epsilon).epsilon;
  const int k = chain.top();
  const int n = k + 1;
  StochasticTable table(Alphabet::range(n), 2);  // context (x1, xhat)

  {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
    row(0) = 1.0 - chain.p(0);
    row(1) = chain.p(0);
    table.set_row({0, 0}, row);
    // (0, xhat=1) has zero probability: structurally absent
  }
  for (int j = 1; j <= k; ++j) {
    double pj = chain.p(j), qj = chain.q(j);
    Eigen::VectorXd hit = Eigen::VectorXd::Zero(n);   // xhat = 0
    Eigen::VectorXd miss = Eigen::VectorXd::Zero(n);  // xhat = 1
    hit(j - 1) = eps;
    miss(j - 1) = 1.0 - eps;
    if (j < k) {
      hit(j) = (1.0 - eps) * (1.0 - pj - qj) / (1.0 - qj);
      hit(j + 1) = (1.0 - eps) * pj / (1.0 - qj);
      miss(j) = eps * (1.0 - pj - qj) / (1.0 - qj);
      miss(j + 1) = eps * pj / (1.0 - qj);
    } else {
      hit(k) = 1.0 - eps;
      miss(k) = eps;
    }
    table.set_row({j, 0}, hit);
    table.set_row({j, 1}, miss);
  }
  return table;
}

TestChannelModel build_policy(const BirthDeathChain& chain, double epsilon) {
  const double eps = policy_params(chain, epsilon).epsilon;
  const int k = chain.top();
  Alphabet states = Alphabet::range(k + 1);
  Alphabet decisions = Alphabet::range(2);
  StochasticTable kernel(decisions, 2);  // context (x1, x2)

  auto declare = [&](int x1, int x2, double p_drop) {
    Eigen::VectorXd row(2);
    row(0) = 1.0 - p_drop;
    row(1) = p_drop;
    kernel.set_row({x1, x2}, row);
  };

  declare(0, 0, 0.0);
  if (chain.p(0) > 0.0) declare(0, 1, 0.0);
  for (int j = 1; j <= k; ++j) {
    double qj = chain.q(j);
    declare(j, j - 1, (1.0 - eps) * (qj - eps) / (qj * (1.0 - 2.0 * eps)));
    auto drop_given_no_drop = [&] {
      return eps * (qj - eps) / ((1.0 - qj) * (1.0 - 2.0 * eps));
    };
    if (1.0 - chain.p(j) - qj > 0.0) declare(j, j, drop_given_no_drop());
    if (j < k && chain.p(j) > 0.0) declare(j, j + 1, drop_given_no_drop());
  }
  return TestChannelModel(1, states, decisions, std::move(kernel));
}

DistortionTable distortion_table(const BirthDeathChain& chain) {
  const int k = chain.top();
  DistortionTable table;
  table.order = 1;
  table.delay = 1;
  table.source = Alphabet::range(k + 1);
  table.recon = Alphabet::range(2);
  for (int x1 = 0; x1 <= k; ++x1)
    for (int x2 = std::max(0, x1 - 1); x2 <= std::min(k, x1 + 1); ++x2) {
      bool possible = x2 == x1 - 1   ? chain.q(x1) > 0.0
                      : x2 == x1 + 1 ? chain.p(x1) > 0.0
                                     : 1.0 - chain.p(x1) - chain.q(x1) > 0.0;
      if (!possible) continue;
      bool drop = x2 == x1 - 1;
      table.values[{{x1, x2}, {0}}] = drop ? 1.0 : 0.0;
      if (x1 > 0) table.values[{{x1, x2}, {1}}] = drop ? 0.0 : 1.0;
    }
  return table;
}

double proposition1_rate(const BirthDeathChain& chain, double distortion) {
  Eigen::VectorXd pi = chain_stationary(chain);
  double eps = epsilon_for(chain, distortion);
  try {
    eps = policy_params(chain, eps).epsilon;
  } catch (const DomainError& e) {
    throw DomainError(std::string(e.what()) + "; max distortion " +
                      std::to_string(epsilon_max(chain) * (1.0 - pi(0))));
  }
  double h_eps = binary_entropy(eps);
  double rate = 0.0;
  for (int j = 1; j <= chain.top(); ++j)
    rate += pi(j) * (binary_entropy(chain.q(j)) - h_eps);
  return rate;
}

std::vector<CurvePoint> rd_curve(const BirthDeathChain& chain,
                                 const std::vector<double>& distortion_grid) {
  std::vector<CurvePoint> curve;
  for (double d : distortion_grid) {
    try {
      curve.push_back({d, proposition1_rate(chain, d)});
    } catch (const DomainError&) {
      // outside the validity domain: clipped from the curve
    }
  }
  if (curve.empty())
    throw DomainError("no grid point lies in the validity domain (max D = " +
                      std::to_string(epsilon_max(chain) *
                                     (1.0 - chain_stationary(chain)(0))) +
                      ")");
  return curve;
}

}  // namespace dirate::stock
