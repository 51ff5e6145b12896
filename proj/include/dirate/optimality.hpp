#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dirate/directed_info.hpp"
#include "dirate/models.hpp"

namespace dirate {

/// A per-letter measure cell: a pair of symbol windows. Distortion cells are
/// (x-window of m+k source symbols, xhat-window of k reconstruction symbols);
/// cost cells are ([x_i], [y-window..., y_i]).
using Cell = std::pair<Context, Context>;

struct DistortionTable {
  int order = 1;  // m of the joint family
  int delay = 1;  // k
  Alphabet source;
  Alphabet recon;
  std::map<Cell, double> values;
};

struct CostTable {
  int delay = 1;
  int y_window = 0;  // output-history length inside the second window
  Alphabet input;
  Alphabet output;
  std::map<Cell, double> values;
};

/// Solved (c, d0) pair certifying (or failing to certify) that a candidate
/// conditional law attains the optimum for the given per-letter measure.
struct OptimalityCertificate {
  enum class Status { Optimal, NotOptimal, UnderDetermined };

  Status status = Status::UnderDetermined;
  double c = 0.0;       // solved positive scale (lambda on the channel side)
  double residual = 0.0;  // max-absolute equation violation
  std::map<Context, double> d0;  // offset per source cell; single entry with an
                                 // empty key on the channel side
  std::string note;
};

std::string status_name(OptimalityCertificate::Status s);

/// One positive-probability cell of the per-letter factorization, with the
/// log-ratio L entering the optimality condition: the measure is optimal for
/// the joint iff measure(cell) = c * L(cell) + d0(x-window) for some c > 0.
struct SupportCell {
  Context x_window;     // m + k source symbols, oldest first
  Context xhat_window;  // k reconstruction symbols
  double prob;          // stationary probability of the cell
  double log_ratio;     // L = -log2 [ P(x_i, xhat_i | state) / denominator ]
};

/// Visit every positive-probability cell of (joint, k). Cell count is
/// states * |X|^k * |Xhat|^k; refuses beyond the budget.
void for_each_supported_cell(const JointMarkovModel& joint, int k,
                             std::int64_t budget,
                             const std::function<void(const SupportCell&)>& fn);

std::vector<SupportCell> supported_cells(const JointMarkovModel& joint, int k,
                                         std::int64_t budget = 2'000'000);

/// Build the distortion family member with scale c > 0 and per-source-cell
/// offset d0 (missing keys read as 0) for which the joint's conditional law
/// is optimal. Cells of zero probability are omitted.
DistortionTable synthesize_distortion(const JointMarkovModel& joint, int k,
                                      double c,
                                      const std::map<Context, double>& d0,
                                      std::int64_t budget = 2'000'000);

/// Solve measure = c * L + d0(x-window) in the least-squares sense over all
/// supported cells and certify. Residual is the max-absolute violation;
/// optimal requires residual <= tol and c > 0.
OptimalityCertificate verify_distortion(const JointMarkovModel& joint, int k,
                                        const DistortionTable& dist, double tol = 1e-9,
                                        std::int64_t budget = 2'000'000);

struct RateDistortionPoint {
  RatePoint rate;
  double distortion = 0.0;
};

/// Evaluate the (rate, expected distortion) pair of the joint at delay k.
/// When verify_distortion certifies the table, this point lies on the
/// feed-forward rate-distortion curve.
RateDistortionPoint rd_point(const JointMarkovModel& joint, int k,
                             const DistortionTable& dist,
                             std::int64_t budget = 10'000'000);

/// Exact least squares for measure_i = c * L_i + d0[group_i]: the offsets are
/// eliminated by centering within each group, the scale is solved in the
/// remaining one-dimensional problem, and rank deficiency (no within-group
/// variation of L) is detected explicitly.
OptimalityCertificate solve_scale_offset(const std::vector<double>& log_ratio,
                                         const std::vector<double>& measure,
                                         const std::vector<int>& group,
                                         const std::vector<Context>& group_keys,
                                         double tol);

}  // namespace dirate
