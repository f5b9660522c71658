#ifndef DLM_DENSITY_HPP
#define DLM_DENSITY_HPP

#include "dlm/random_var.hpp"

namespace dlm {

/// Box-constrained family of densities D_t = {Z : lo <= Z <= hi,
/// E[Z|F_t] = 1}, one box per terminal atom, shared across t (the time
/// dependence enters through the conditional-mean constraint).
/// Construction requires lo <= 1 <= hi pointwise, so Z = 1 is always
/// feasible and every D_t is nonempty.
class DensityFamily {
public:
  static DensityFamily box(const FilteredSpace& space, double hi);
  static DensityFamily bounds(const FilteredSpace& space,
                              std::vector<double> lo, std::vector<double> hi);
  /// Degenerate box [1,1]: robust expectations reduce to E[.|F_t].
  static DensityFamily singleton(const FilteredSpace& space);

  const FilteredSpace& space() const { return *space_; }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }

  /// Whether the F_t-conditional normalization of a raw density Z lies in
  /// the box on every atom charged by Z.
  bool contains_conditional(const RandomVar& z, int t, double tol = 1e-9) const;

  /// Same test restricted to a single F_t atom.
  bool atom_feasible(const RandomVar& z, int t, int a, double tol = 1e-9) const;

private:
  DensityFamily(const FilteredSpace& space, std::vector<double> lo, std::vector<double> hi);

  const FilteredSpace* space_;
  std::vector<double> lo_, hi_;
};

/// Robust expectation essinf_{Z in D_t} E[Z X|F_t] for finite-valued X.
/// Per atom this is a one-constraint box LP solved exactly by filling
/// weight toward the smallest values first.
RandomVar min_conditional_expectation(const DensityFamily& d, const RandomVar& x, int t);

/// esssup variant: weight fills toward the largest values first.
RandomVar max_conditional_expectation(const DensityFamily& d, const RandomVar& x, int t);

/// Robust expectation of an extended-valued argument via the clamp-and-
/// limit scheme: X is clamped to [-M, M] with M doubling from 2^10 until
/// the per-atom optimum stabilizes within 1e-12; atoms still moving after
/// 40 doublings are reported as +-inf with the divergence flag set.
struct ClampedRobust {
  RandomVar value;
  bool diverged = false;
};
ClampedRobust min_conditional_expectation_extended(const DensityFamily& d,
                                                   const RandomVar& x, int t);
ClampedRobust max_conditional_expectation_extended(const DensityFamily& d,
                                                   const RandomVar& x, int t);

} // namespace dlm

#endif
