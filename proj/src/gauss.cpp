#include "dirate/gauss.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace dirate::gauss {

void GaussMarkovParams::validate() const {
  if (!(variance > 0.0)) throw ValidationError("variance must be positive");
  if (!(std::abs(rho) < 1.0)) throw ValidationError("|rho| must be < 1");
  if (a == 0.0) throw ValidationError("reconstruction coefficient a must be nonzero");
}

double innovation_variance(const GaussMarkovParams& params) {
  params.validate();
  return params.variance * (1.0 - params.rho * params.rho);
}

double gauss_rate(const GaussMarkovParams& params, double distortion, bool* clamped) {
  if (!(distortion > 0.0)) throw DomainError("distortion must be positive");
  double raw = 0.5 * std::log2(innovation_variance(params) * params.a * params.a /
                               distortion);
  if (clamped) *clamped = raw < 0.0;
  return std::max(0.0, raw);
}

namespace {

// One Blahut-Arimoto solve at fixed Lagrangian slope s (nats per squared
// unit, s < 0). q is the reconstruction marginal, updated in place so sweeps
// can warm-start. Returns (rate in nats, mean distortion).
struct BaPoint {
  double rate_nats;
  double distortion;
};

BaPoint ba_at_slope(const Eigen::VectorXd& p, const Eigen::MatrixXd& d, double s,
                    Eigen::VectorXd& q, int max_iterations, double tol) {
  const auto n = p.size();
  Eigen::MatrixXd a = (s * d.array()).exp().matrix();
  Eigen::MatrixXd ad = a.cwiseProduct(d);

  bool has_prev = false;
  double prev_rate = 0.0;
  for (int iter = 0; iter < max_iterations; ++iter) {
    Eigen::VectorXd c = a * q;
    // Guard: grid tails can lose all reconstruction mass under extreme
    // slopes; drop those states (their source probability is negligible).
    Eigen::VectorXd r(n);
    double rate_nats = 0.0, dist = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (c(i) <= 0.0 || p(i) <= 0.0) {
        r(i) = 0.0;
        continue;
      }
      r(i) = p(i) / c(i);
      dist += p(i) * ad.row(i).dot(q) / c(i);
      rate_nats -= p(i) * std::log(c(i));
    }
    rate_nats += s * dist;

    Eigen::VectorXd multiplier = a.transpose() * r;
    // log of the largest update multiplier bounds the remaining optimality
    // gap of the alternating minimization; it certifies convergence where
    // successive rate deltas shrink slowly (slopes near zero).
    double gap = std::log(multiplier.maxCoeff());
    bool converged =
        gap <= tol || (has_prev && std::abs(rate_nats - prev_rate) <= tol);
    has_prev = true;
    prev_rate = rate_nats;

    q = q.cwiseProduct(multiplier);
    double mass = q.sum();
    if (mass <= 0.0) throw BudgetError("Blahut-Arimoto iterate lost all mass");
    q /= mass;

    if (converged) return {std::max(0.0, rate_nats), dist};
  }
  throw BudgetError("Blahut-Arimoto did not converge within the iteration budget");
}

}  // namespace

double ba_gaussian_oracle(double innovation_var, double distortion,
                          const BlahutArimotoOptions& options) {
  if (!(innovation_var > 0.0)) throw ValidationError("innovation variance must be positive");
  if (!(distortion > 0.0)) throw DomainError("distortion must be positive");
  const double sigma = std::sqrt(innovation_var);
  const double width = options.half_width > 0.0 ? options.half_width : 8.0 * sigma;
  if (options.grid < 256) throw ValidationError("grid must have >= 256 points");
  if (width < 6.0 * sigma) throw ValidationError("half-width must be >= 6 sigma");

  const int g = options.grid;
  Eigen::VectorXd x(g);
  for (int i = 0; i < g; ++i) x(i) = -width + 2.0 * width * i / (g - 1);
  Eigen::VectorXd p = (-x.array().square() / (2.0 * innovation_var)).exp();
  p /= p.sum();

  Eigen::MatrixXd d(g, g);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) d(i, j) = (x(i) - x(j)) * (x(i) - x(j));

  const double mean = p.dot(x);
  const double var_disc = p.dot((x.array() - mean).square().matrix());
  if (distortion >= var_disc) return 0.0;

  const double tol_nats = options.tol * std::log(2.0);
  Eigen::VectorXd q = p;

  // D(s) grows toward var_disc as s -> 0-. Sweep the slope toward the target
  // distortion; the landing tolerance is loose because the final rate is
  // corrected along the tangent with slope s. Accepting an early landing
  // also keeps the sweep out of the slowly-converging region near s = 0.
  BaPoint best{0.0, -1.0};
  double s_best = 0.0;
  auto eval = [&](double s) {
    BaPoint at = ba_at_slope(p, d, s, q, options.max_iterations, tol_nats);
    if (best.distortion < 0.0 || std::abs(at.distortion - distortion) <
                                     std::abs(best.distortion - distortion)) {
      best = at;
      s_best = s;
    }
    return at;
  };
  auto landed = [&] {
    return std::abs(best.distortion - distortion) <= 3e-3 * distortion;
  };

  double s_lo = -1.0 / (2.0 * distortion);  // slope of the continuous curve
  BaPoint at_lo = eval(s_lo);
  double s_hi = s_lo;
  BaPoint at_hi = at_lo;
  int guard = 0;
  while (!landed() && at_lo.distortion > distortion) {
    s_hi = s_lo;
    at_hi = at_lo;
    s_lo *= 2.0;
    at_lo = eval(s_lo);
    if (++guard > 60) throw BudgetError("Lagrangian bracketing failed (low side)");
  }
  while (!landed() && at_hi.distortion < distortion) {
    s_lo = s_hi;
    at_lo = at_hi;
    s_hi *= 0.5;
    at_hi = eval(s_hi);
    if (++guard > 120) throw BudgetError("Lagrangian bracketing failed (high side)");
  }
  for (int iter = 0; iter < 60 && !landed(); ++iter) {
    double s_mid = 0.5 * (s_lo + s_hi);
    BaPoint at_mid = eval(s_mid);
    if (at_mid.distortion < distortion) {
      s_lo = s_mid;
    } else {
      s_hi = s_mid;
    }
  }

  // Tangent correction from the achieved distortion to the target.
  double rate_nats = best.rate_nats + s_best * (distortion - best.distortion);
  return std::max(0.0, rate_nats / std::log(2.0));
}

}  // namespace dirate::gauss
