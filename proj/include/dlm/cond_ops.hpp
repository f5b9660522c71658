#ifndef DLM_COND_OPS_HPP
#define DLM_COND_OPS_HPP

#include "dlm/random_var.hpp"

namespace dlm {

/// Generalized F_t-conditional expectation E[X|F_t] = E[X+|F_t] - E[X-|F_t],
/// with the difference taken under the extended-real conventions (so atoms
/// carrying both +inf and -inf mass evaluate to -inf).
RandomVar cond_expectation(const RandomVar& x, int t);

/// F_t-conditional essential infimum: the per-atom minimum, which on a
/// finite space is the largest F_t-measurable lower bound of X.
RandomVar cond_essinf(const RandomVar& x, int t);

/// Esssup_t(X) = -Essinf_t(-X); the per-atom maximum.
RandomVar cond_esssup(const RandomVar& x, int t);

/// Pointwise infimum of a finite family, left at F_T level (callers
/// compose with cond_essinf when conditioning is needed).  The empty
/// family evaluates to +inf (essinf of the empty set).
RandomVar family_essinf(const FilteredSpace& space, const std::vector<RandomVar>& family);

/// Pointwise supremum of a finite family; empty family gives -inf.
RandomVar family_esssup(const FilteredSpace& space, const std::vector<RandomVar>& family);

} // namespace dlm

#endif
