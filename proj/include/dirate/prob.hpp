#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dirate/error.hpp"

namespace dirate {

/// A conditioning window of symbol indices, oldest symbol first.
using Context = std::vector<int>;

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Finite symbol set with stable name <-> index mapping.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> symbols);

  /// Alphabet {"0", "1", ..., "n-1"}.
  static Alphabet range(int n);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }

  /// Index of a symbol name, -1 if unknown.
  int index(const std::string& symbol) const;
  /// Index of a symbol name; throws ValidationError if unknown.
  int index_of(const std::string& symbol) const;

  bool operator==(const Alphabet& other) const { return names_ == other.names_; }
  bool operator!=(const Alphabet& other) const { return !(*this == other); }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
};

/// Probability vector over a finite alphabet: entries >= 0, |sum - 1| <= tol.
class ProbVector {
 public:
  explicit ProbVector(Eigen::VectorXd values, double tolerance = 1e-12);

  const Eigen::VectorXd& values() const { return values_; }
  double tolerance() const { return tolerance_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_(i); }

 private:
  Eigen::VectorXd values_;
  double tolerance_;
};

/// Conditional law P(output | context): one probability row per context.
/// Contexts not present are structural zeros (the conditioning event has
/// probability zero by construction); within a row, 0.0 entries are
/// zero-probability outcomes.
class StochasticTable {
 public:
  StochasticTable(Alphabet output, int context_arity);

  int context_arity() const { return context_arity_; }
  const Alphabet& output_alphabet() const { return output_; }
  int row_count() const { return static_cast<int>(context_of_.size()); }

  /// Insert or overwrite a row. Values are stored as given; call
  /// validate_table to check them.
  void set_row(const Context& context, const Eigen::VectorXd& probs);

  bool has_row(const Context& context) const;
  /// Row index for a context, -1 if absent.
  int row_index(const Context& context) const;

  Eigen::Ref<const Eigen::VectorXd> row(int index) const;
  Eigen::Ref<const Eigen::VectorXd> row(const Context& context) const;

  /// P(output | context); 0.0 when the context row is structurally absent.
  double prob(const Context& context, int output) const;

  const std::map<Context, int>& contexts() const { return index_; }
  const Context& context_of(int index) const { return context_of_.at(index); }

  /// Human-readable "a,b,c" form of a context, for diagnostics. Symbol names
  /// are taken from `alpha` (used for every position).
  static std::string context_name(const Context& context, const Alphabet& alpha);

 private:
  Alphabet output_;
  int context_arity_;
  std::map<Context, int> index_;
  std::vector<Context> context_of_;
  RowMatrix rows_;  // row i: distribution for context_of_[i]
  int used_rows_ = 0;
};

struct TableViolation {
  Context context;
  double sum_error;   // |row sum - 1|
  double min_entry;   // most negative entry (>= 0 when signs are fine)
};

struct TableValidation {
  std::vector<TableViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Report every row whose entries are negative or whose sum strays from 1 by
/// more than tol. Empty report means the table is a valid conditional law.
TableValidation validate_table(const StochasticTable& table, double tol = 1e-12);

/// Shannon entropy in bits, with 0 log 0 := 0. Accepts any nonnegative vector
/// (callers pass validated rows).
double entropy(const Eigen::Ref<const Eigen::VectorXd>& p);

/// h(p, 1-p) in bits.
double binary_entropy(double p);

/// I(A; B | S) in bits from a flattened joint over triples (s, a, b), indexed
/// s * (na*nb) + a * nb + b. Zero-probability cells are skipped.
double conditional_mutual_information(const Eigen::Ref<const Eigen::VectorXd>& joint,
                                      int ns, int na, int nb);

/// Recurrent classes of a finite directed graph. adj[i] lists successors of
/// node i; an entry of -1 marks an edge into undefined territory (a context
/// the model does not cover), which disqualifies the source's class from
/// being recurrent. Classes are returned sorted by smallest member.
std::vector<std::vector<int>> recurrent_classes(
    const std::vector<std::vector<int>>& adj);

/// Stationary distribution of a row-stochastic matrix restricted to its
/// single recurrent class (zero on transient states). Solves (T' - I) pi = 0
/// with a normalization row plus one step of iterative refinement.
/// Throws ValidationError when the recurrent class is not unique; state_name
/// is used to spell out the offending classes.
Eigen::VectorXd stationary_from_matrix(
    const Eigen::MatrixXd& transition,
    const std::function<std::string(int)>& state_name);

/// As above, but with the support graph supplied by the caller. adj may hold
/// -1 edges for transitions into contexts the model does not define; such
/// edges keep the source state out of any recurrent class. transition rows
/// must be stochastic on the recurrent class itself.
Eigen::VectorXd stationary_from_matrix(
    const Eigen::MatrixXd& transition,
    const std::vector<std::vector<int>>& adj,
    const std::function<std::string(int)>& state_name);

/// Stationary distribution of a square transition table (contexts are
/// 1-tuples over the output alphabet). pi T = pi with residual <= 1e-12.
ProbVector stationary_distribution(const StochasticTable& transition,
                                   double tol = 1e-12);

}  // namespace dirate
