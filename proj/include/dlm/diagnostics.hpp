#ifndef DLM_DIAGNOSTICS_HPP
#define DLM_DIAGNOSTICS_HPP

#include <cstdint>

namespace dlm {

/// Clamp-and-limit evaluations report per-atom limits that fail to
/// stabilize within the doubling budget through this counter, so callers
/// (the CLI) can distinguish a genuine infinite value from a flagged
/// divergence without threading flags through every value type.
void note_divergence();
std::uint64_t divergence_count();
void reset_divergence_count();

/// Comparison margin used by the certification checks (default 1e-9,
/// applied relative to the magnitudes involved).  Set once before a run;
/// checks treat it as immutable while running.
void set_certifier_margin(double margin);
double certifier_margin();

} // namespace dlm

#endif
