#ifndef DLM_TESTS_LP_ORACLE_HPP
#define DLM_TESTS_LP_ORACLE_HPP

// Test-only oracle for the per-atom robust expectation: enumerates the
// vertices of {Z : lo <= Z <= hi, sum q Z = 1} (every vertex has at most
// one coordinate off its bounds) and takes the best objective value.
// Independent of the production greedy path on purpose.

#include <cmath>
#include <vector>

#include "dlm/density.hpp"

namespace dlm_test {

inline double atom_lp_oracle(const dlm::FilteredSpace& sp, const std::vector<int>& atom,
                             double atom_p, const std::vector<double>& lo,
                             const std::vector<double>& hi, const std::vector<double>& xv,
                             bool minimize) {
  const int n = static_cast<int>(atom.size());
  std::vector<double> q(n);
  for (int i = 0; i < n; ++i) q[i] = sp.terminal_prob()[atom[i]] / atom_p;

  double best = minimize ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<double>& z) {
    double budget = 0.0, value = 0.0;
    for (int i = 0; i < n; ++i) {
      budget += q[i] * z[i];
      value += q[i] * z[i] * xv[atom[i]];
    }
    if (std::abs(budget - 1.0) > 1e-9) return;
    best = minimize ? std::min(best, value) : std::max(best, value);
  };

  // assignments of all coordinates to a bound, with one optional
  // fractional coordinate absorbing the budget residual
  for (int frac = -1; frac < n; ++frac) {
    const int free_bits = frac < 0 ? n : n - 1;
    for (int mask = 0; mask < (1 << free_bits); ++mask) {
      std::vector<double> z(n);
      int bit = 0;
      for (int i = 0; i < n; ++i) {
        if (i == frac) continue;
        z[i] = (mask >> bit & 1) ? hi[atom[i]] : lo[atom[i]];
        ++bit;
      }
      if (frac >= 0) {
        double rest = 1.0;
        for (int i = 0; i < n; ++i)
          if (i != frac) rest -= q[i] * z[i];
        if (q[frac] <= 0) continue;
        z[frac] = rest / q[frac];
        if (z[frac] < lo[atom[frac]] - 1e-9 || z[frac] > hi[atom[frac]] + 1e-9) continue;
      }
      consider(z);
    }
  }
  return best;
}

inline dlm::RandomVar robust_oracle(const dlm::DensityFamily& d, const dlm::RandomVar& x, int t,
                                    bool minimize) {
  const dlm::FilteredSpace& sp = d.space();
  std::vector<double> xv(sp.n_terminal());
  for (int k = 0; k < sp.n_terminal(); ++k) xv[k] = x[k].value();
  dlm::RandomVar out(sp, dlm::XReal(0.0));
  for (int a = 0; a < sp.n_atoms(t); ++a) {
    const double v =
        atom_lp_oracle(sp, sp.atoms(t)[a], sp.atom_prob(t, a), d.lo(), d.hi(), xv, minimize);
    for (int k : sp.atoms(t)[a]) out[k] = dlm::XReal(v);
  }
  return out;
}

} // namespace dlm_test

#endif
