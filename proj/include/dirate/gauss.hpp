#pragma once

#include "dirate/error.hpp"

namespace dirate::gauss {

/// First-order Gauss-Markov source X_n = rho X_{n-1} + N_n with stationary
/// variance sigma^2, reconstructing a X_n + b X_{n-1} under squared error.
struct GaussMarkovParams {
  double variance = 1.0;  // sigma^2 > 0
  double rho = 0.0;       // |rho| < 1
  double a = 1.0;         // a != 0
  double b = 0.0;         // does not enter the rate

  void validate() const;
};

/// sigma^2 (1 - rho^2), the variance of the driving noise.
double innovation_variance(const GaussMarkovParams& params);

/// Closed-form feed-forward rate at squared-error distortion D:
///   R = max(0, 1/2 log2( sigma^2 (1 - rho^2) a^2 / D )).
/// Negative raw values are clamped to zero; *clamped reports when that
/// happened. Throws DomainError for D <= 0.
double gauss_rate(const GaussMarkovParams& params, double distortion,
                  bool* clamped = nullptr);

struct BlahutArimotoOptions {
  double half_width = 0.0;   // grid support [-W, W]; 0 means 8 * sigma_N
  int grid = 1024;           // points for source and reconstruction (>= 256)
  int max_iterations = 20000;
  double tol = 1e-9;         // stop when successive rate iterates differ <= tol
                             // or the certified optimality gap falls below it
};

/// Independent check of the closed form: rate-distortion function of the
/// discretized Gaussian innovation under squared error, computed by
/// Blahut-Arimoto with a Lagrangian sweep bracketing the target distortion.
/// Returns bits/sample. Throws BudgetError on non-convergence.
double ba_gaussian_oracle(double innovation_variance, double distortion,
                          const BlahutArimotoOptions& options = {});

}  // namespace dirate::gauss
