#ifndef DLM_MEASURES_HPP
#define DLM_MEASURES_HPP

#include <functional>
#include <memory>
#include <string>

#include "dlm/cond_ops.hpp"
#include "dlm/density.hpp"
#include "dlm/random_var.hpp"

namespace dlm {

enum class InputKind { Variable, Process };

/// A dynamic LM-measure: a family of maps phi_t sending payoffs (random
/// variables) or dividend processes to F_t-measurable extended-valued
/// random variables.  Higher values mean better (utility convention);
/// risk measures enter as their negatives.  Instances are immutable and
/// evaluation is pure.
class DynamicMeasure {
public:
  using VarEval = std::function<RandomVar(const RandomVar&, int)>;
  using ProcEval = std::function<RandomVar(const AdaptedProcess&, int)>;

  DynamicMeasure() = default;

  static DynamicMeasure variable(std::string name, VarEval f);
  static DynamicMeasure process(std::string name, ProcEval f);

  const std::string& name() const { return name_; }
  InputKind kind() const { return kind_; }

  RandomVar operator()(const RandomVar& x, int t) const;
  RandomVar operator()(const AdaptedProcess& v, int t) const;

private:
  std::string name_;
  InputKind kind_ = InputKind::Variable;
  VarEval var_eval_;
  ProcEval proc_eval_;
};

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// Conditional alpha-quantile: on each F_t atom the smallest outcome value
/// whose conditional cdf strictly exceeds alpha (the supremum of the open
/// sub-level set {y : P[X <= y | A] <= alpha} of the step cdf).
DynamicMeasure var_measure(double alpha);

/// Conditional weighted value at risk: essinf over the density box
/// [0, 1/alpha] of E[Z X|F_t].
DynamicMeasure wvar_measure(double alpha);

/// Entropic utility: (1/gamma) ln E[exp(gamma X)|F_t], conditional
/// expectation when gamma = 0.  Evaluated with log-sum-exp shifting.
DynamicMeasure entropic_measure(double gamma);

/// Entropic with the deterministic risk-aversion schedule
/// gamma_t = g0 * ratio^t; works on any space.
DynamicMeasure entropic_varying(double g0, double ratio);

/// Entropic with an explicit adapted risk-aversion process; bound to the
/// space the process lives on.
DynamicMeasure entropic_nonconstant(const AdaptedProcess& gammas);

/// A strictly increasing continuous scalar utility with its inverse,
/// extended to +-inf by limits.
struct Utility {
  std::string name;
  std::function<double(double)> u;
  std::function<double(double)> u_inv;
  XReal lim_lo, lim_hi;          // U(-inf), U(+inf)

  XReal apply(XReal x) const;
  XReal apply_inv(XReal y) const;

  static Utility identity();
  static Utility exponential(double gamma);  // gamma != 0
  static Utility cubic();
};

/// Dynamic certainty equivalent U^{-1}(E[U(X)|F_t]); the pair (U, U^{-1})
/// is probe-checked at construction (deviation > 1e-9 is rejected).
DynamicMeasure certainty_equivalent(Utility u);

/// Dynamic gain-loss ratio on processes, with S_t the remaining dividends:
/// E[S_t|F_t]/E[S_t^-|F_t] where the conditional mean is positive, +inf
/// when the loss part vanishes there, 0 otherwise.
DynamicMeasure glr_measure();

/// Dynamic RAROC at level alpha: E[S_t|F_t]/(-rho_t) where the mean is
/// positive and the risk part rho_t (the WV@R of S_t) is negative; +inf
/// where rho_t >= 0; 0 otherwise.
DynamicMeasure raroc_measure(double alpha);

/// Member rho^x of the TV@R utility family: robust expectation of S_t
/// over the density box [0, 1+x].
DynamicMeasure tvar_family_member(double x);

/// Convention for reading an acceptability index off a decreasing family.
/// Canonical takes sup{x : value >= 0}; Literal reproduces the
/// "value <= 0" form, which degenerates on decreasing families.
enum class IndexConvention { Canonical, Literal };

/// TV@R acceptability index for processes, built from the tvar family.
DynamicMeasure tvar_index(IndexConvention convention = IndexConvention::Canonical);

/// One-step slice of a process measure: X |-> phi_t(X paid at t+1 only).
/// The input must be F_{t+1}-measurable and t < T.
DynamicMeasure rv_slice_measure(const DynamicMeasure& proc_measure);

/// Conditional expectation as a measure (both kinds are handy).
DynamicMeasure expectation_measure();

/// Process family member E[S_t|F_t] - x (the expectation-minus-x family).
DynamicMeasure expectation_minus_process(double x);

// Test fixtures exercised by the certification suite.
DynamicMeasure fixture_time_constant();         // phi_t(X) = t
DynamicMeasure fixture_nonlocal();              // phi_t(X) = E[X|F_0]
DynamicMeasure fixture_shifted_expectation();   // E[X|F_t] - 1

// ---------------------------------------------------------------------------
// Axiom checkers
// ---------------------------------------------------------------------------

struct PropertyVerdict {
  std::string property;
  bool pass = true;
  long trials = 0;
  unsigned long long seed = 0;
  std::string detail;  // witness summary when failed
};

/// Extended property flags from randomized falsification.
struct PropertyProfile {
  bool super_additive = true;
  bool normalized = true;
  bool cash_additive = true;
  bool quasi_concave = true;
  bool concave = true;
  bool scale_invariant = true;
  bool positively_homogeneous = true;
  bool translation_invariant = true;   // processes; vacuous for variables
  bool independent_of_past = true;     // processes; vacuous for variables
  bool law_invariant = true;           // tested only on uniform spaces
  bool law_invariance_tested = false;
  long trials = 0;
};

/// Randomized falsification of locality and monotonicity.
PropertyVerdict check_lm_axioms(const DynamicMeasure& phi, const FilteredSpace& space,
                                long trials, unsigned long long seed);

PropertyProfile check_extended_properties(const DynamicMeasure& phi, const FilteredSpace& space,
                                          long trials, unsigned long long seed);

} // namespace dlm

#endif
