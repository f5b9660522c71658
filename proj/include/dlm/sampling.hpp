#ifndef DLM_SAMPLING_HPP
#define DLM_SAMPLING_HPP

#include <cstdint>
#include <random>

#include "dlm/random_var.hpp"

namespace dlm {

/// Independent RNG stream for trial `index` of run `seed`; trials are
/// reproducible individually, so batches can run in any order.
std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t index);

double u01(std::mt19937_64& rng);
double uniform(std::mt19937_64& rng, double lo, double hi);
int uniform_int(std::mt19937_64& rng, int lo, int hi);  // inclusive

/// Payoff sampler mixing plain uniform values with structured corners:
/// small integer grids (to land on quantile breakpoints), atom indicator
/// patterns, and single-atom spikes.  Quantile-type measures violate time
/// consistency only at cdf breakpoints, so pure uniform sampling is not
/// enough.
RandomVar sample_rv(const FilteredSpace& space, std::mt19937_64& rng);

/// Variant with occasional +-inf entries for extension tests.
RandomVar sample_rv_extended(const FilteredSpace& space, std::mt19937_64& rng,
                             double p_inf = 0.15);

/// F_t-measurable sample (constant per F_t atom).
RandomVar sample_rv_measurable(const FilteredSpace& space, int t, std::mt19937_64& rng);

/// Dividend process sampler with sign-structured corners (large positive
/// or negative dividends at a single time, mixed tails).
AdaptedProcess sample_process(const FilteredSpace& space, std::mt19937_64& rng);

/// Random pair t < s within the horizon.
std::pair<int, int> sample_t_s(const FilteredSpace& space, std::mt19937_64& rng);

/// Random tree space with the given depth and branching at most
/// max_branch; probabilities are small rationals, frequently non-uniform.
FilteredSpace random_tree(std::uint64_t seed, int depth, int max_branch);

/// The certification suite: TREE2, TREE4, and n random depth-3 trees with
/// branching at most 3, derived deterministically from `seed`.
std::vector<FilteredSpace> certification_suite(std::uint64_t seed, int n_random);

} // namespace dlm

#endif
