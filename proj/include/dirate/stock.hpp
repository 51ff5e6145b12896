#pragma once

#include <vector>

#include "dirate/models.hpp"
#include "dirate/optimality.hpp"

namespace dirate::stock {

/// Birth-death chain on states 0..K: from state i the value moves up with
/// probability p_i (i < K), down with q_i (i > 0), else stays. q_0 and p_K
/// are structurally zero.
class BirthDeathChain {
 public:
  /// up = (p_0 .. p_{K-1}), down = (q_1 .. q_K); all listed probabilities
  /// must be positive (irreducibility) and p_i + q_i <= 1 per state.
  BirthDeathChain(std::vector<double> up, std::vector<double> down);

  int top() const { return static_cast<int>(up_.size()); }  // K
  double p(int state) const { return state < top() ? up_[state] : 0.0; }
  double q(int state) const { return state > 0 ? down_[state - 1] : 0.0; }

 private:
  std::vector<double> up_;
  std::vector<double> down_;
};

/// Predictor parameters: the per-step error probability epsilon and the bound
/// keeping every policy-table entry nonnegative.
struct StockPolicyParams {
  double epsilon = 0.0;
  double epsilon_max = 0.0;  // min over states j >= 1 of min(q_j, 1 - q_j)
};

/// Largest epsilon for which the predictor tables stay valid.
double epsilon_max(const BirthDeathChain& chain);

/// Validate epsilon against the chain; throws DomainError citing the
/// offending state when outside the validity domain.
StockPolicyParams policy_params(const BirthDeathChain& chain, double epsilon);

/// Stationary distribution over the K+1 states.
Eigen::VectorXd chain_stationary(const BirthDeathChain& chain);

/// epsilon = D / (1 - pi_0) for a distortion target D.
double epsilon_for(const BirthDeathChain& chain, double distortion);

/// Order-1 source model of the chain.
MarkovSourceModel build_chain(const BirthDeathChain& chain);

/// The induced conditional P(x_i | x_{i-1}, xhat_i): contexts (x1, xhat).
/// The (state 0, xhat=1) column is structurally absent.
StochasticTable build_forward_table(const BirthDeathChain& chain, double epsilon);

/// The drop predictor P(xhat_i | x_{i-1}, x_i): state-0 contexts always
/// declare xhat = 0; elsewhere the error event carries probability epsilon.
TestChannelModel build_policy(const BirthDeathChain& chain, double epsilon);

/// Prediction-error distortion: 1 on a missed drop (xhat=0, x2=x1-1) and on a
/// false alarm (xhat=1, x2>=x1), else 0. Cells for every positive-probability
/// transition; state-0 contexts carry xhat=0 cells only.
DistortionTable distortion_table(const BirthDeathChain& chain);

/// Closed-form feed-forward rate at distortion D, in bits/sample:
///   R = sum_{i=1..K} pi_i (h(q_i, 1-q_i) - h(eps, 1-eps)),  eps = D/(1-pi_0).
/// Each state with a possible down-move contributes the entropy of its
/// down-move indicator less the prediction-error entropy.
double proposition1_rate(const BirthDeathChain& chain, double distortion);

struct CurvePoint {
  double distortion;
  double rate_bits;
};

/// Sweep proposition1_rate over a distortion grid, dropping points outside
/// the validity domain. Throws DomainError when no grid point is valid.
std::vector<CurvePoint> rd_curve(const BirthDeathChain& chain,
                                 const std::vector<double>& distortion_grid);

}  // namespace dirate::stock
