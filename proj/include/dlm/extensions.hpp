#ifndef DLM_EXTENSIONS_HPP
#define DLM_EXTENSIONS_HPP

#include "dlm/update_rules.hpp"

namespace dlm {

enum class ExtensionSide { Upper, Lower };

struct ExtensionResult {
  RandomVar value;
  bool diverged = false;
};

/// Upper/lower extension of a variable measure from finite payoffs to
/// extended-valued ones, preserving locality and monotonicity.  The
/// infinite dominating family of the definition collapses, per F_t atom,
/// to a canonical clamp sequence: on the upper side an atom carrying +inf
/// has an empty dominating set (value +inf) and otherwise the value is
/// the monotone limit of the measure applied to the input clamped below
/// at -M, M doubling from 2^10.  Stabilization within 1e-12 ends the
/// limit; atoms still moving after 40 doublings are reported as -inf
/// (upper) / +inf (lower) with the divergence flag set.
class ExtensionEvaluator {
public:
  ExtensionEvaluator(DynamicMeasure base, ExtensionSide side);

  const DynamicMeasure& base() const { return base_; }
  ExtensionSide side() const { return side_; }

  ExtensionResult evaluate(const RandomVar& xbar, int t) const;

private:
  DynamicMeasure base_;
  ExtensionSide side_;
};

RandomVar upper_extension(const DynamicMeasure& phi, const RandomVar& xbar, int t);
RandomVar lower_extension(const DynamicMeasure& phi, const RandomVar& xbar, int t);

/// Extension used as an update rule mu_{t,s}(m) = phi^hat_t(m);
/// s-invariant by construction.
UpdateRule rule_from_extension(const DynamicMeasure& phi, ExtensionSide side);

/// Falsifies phi- <= phi_hat <= phi+ on sampled extended inputs.
PropertyVerdict check_sandwich(const DynamicMeasure& phi,
                               const std::function<RandomVar(const RandomVar&, int)>& candidate,
                               const FilteredSpace& space, long trials, unsigned long long seed);

/// Tests the extension-as-rule for projectivity and cross-checks the
/// equivalence with phi_t fixing F_t-measurable inputs.
PropertyVerdict check_extension_projective(const DynamicMeasure& phi, ExtensionSide side,
                                           const FilteredSpace& space, long trials,
                                           unsigned long long seed);

/// One-step process rule mu_{t,t+1}(m, V) = slice(phi)^-_t(m + V_t), the
/// middle-acceptance machinery for process measures.
UpdateRule one_step_extension_rule(const DynamicMeasure& proc_measure,
                                   ExtensionSide side = ExtensionSide::Lower);

} // namespace dlm

#endif
