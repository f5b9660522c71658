#ifndef DLM_FILTERED_SPACE_HPP
#define DLM_FILTERED_SPACE_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace dlm {

/// Raised when a space, measure, or configuration fails validation.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Finite filtered probability space: outcomes with strictly positive
/// probabilities and a refining chain of partitions F_0 c ... c F_T,
/// with F_0 trivial.  Random objects live on the atoms of F_T (the
/// terminal atoms), which need not be singletons.
///
/// Atoms are stored as sorted lists; atom identity is positional, so all
/// evaluations are deterministic.  Instances are immutable after build.
class FilteredSpace {
public:
  /// Validates and builds; throws ValidationError on any violation:
  /// non-positive or non-normalized probabilities (tolerance 1e-12),
  /// partitions not covering the outcome set exactly, F_0 non-trivial,
  /// or a partition that does not refine its predecessor.
  static FilteredSpace build(int horizon,
                             std::vector<std::string> outcome_labels,
                             std::vector<double> probabilities,
                             std::vector<std::vector<std::vector<int>>> partitions);

  int horizon() const { return horizon_; }
  int n_outcomes() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& outcome_labels() const { return labels_; }
  const std::vector<double>& outcome_prob() const { return prob_; }

  /// Number of terminal (F_T) atoms: the index space of random variables.
  int n_terminal() const { return static_cast<int>(terminal_prob_.size()); }
  const std::vector<double>& terminal_prob() const { return terminal_prob_; }

  /// Atoms of F_t as sorted lists of terminal-atom indices.
  const std::vector<std::vector<int>>& atoms(int t) const { return atoms_[t]; }
  int n_atoms(int t) const { return static_cast<int>(atoms_[t].size()); }

  /// Index of the F_t atom containing terminal atom k.
  int atom_of(int t, int k) const { return atom_of_[t][k]; }

  /// P(A) for atom a of F_t.
  double atom_prob(int t, int a) const { return atom_prob_[t][a]; }

  /// Original outcome-level partition (used for serialization).
  const std::vector<std::vector<std::vector<int>>>& outcome_partitions() const {
    return outcome_partitions_;
  }

  /// Label for atom a of F_t: "*" for the full space, otherwise the
  /// member outcome labels joined with commas.
  std::string atom_label(int t, int a) const;

private:
  FilteredSpace() = default;

  int horizon_ = 0;
  std::vector<std::string> labels_;
  std::vector<double> prob_;
  std::vector<std::vector<std::vector<int>>> outcome_partitions_;

  std::vector<double> terminal_prob_;
  std::vector<std::vector<std::vector<int>>> atoms_;  // [t][atom] -> terminal indices
  std::vector<std::vector<int>> atom_of_;             // [t][terminal] -> atom index
  std::vector<std::vector<double>> atom_prob_;        // [t][atom]
};

/// Two-point tree: T=1, outcomes {u,d} with probability 1/2 each.
FilteredSpace make_tree2();

/// Uniform binomial tree: T=2, four outcomes, F_1 = {{w1,w2},{w3,w4}}.
FilteredSpace make_tree4();

} // namespace dlm

#endif
