#include "dlm/density.hpp"

#include "dlm/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace dlm {

DensityFamily::DensityFamily(const FilteredSpace& space, std::vector<double> lo,
                             std::vector<double> hi)
    : space_(&space), lo_(std::move(lo)), hi_(std::move(hi)) {
  const int m = space.n_terminal();
  if (static_cast<int>(lo_.size()) != m || static_cast<int>(hi_.size()) != m)
    throw ValidationError("density bounds size mismatch");
  for (int k = 0; k < m; ++k) {
    if (!(lo_[k] >= 0.0) || !(lo_[k] <= hi_[k]))
      throw ValidationError("density bounds must satisfy 0 <= lo <= hi");
    if (lo_[k] > 1.0 || hi_[k] < 1.0)
      throw ValidationError("density box excludes Z = 1; family would be empty or degenerate");
  }
}

DensityFamily DensityFamily::box(const FilteredSpace& space, double hi) {
  const int m = space.n_terminal();
  return DensityFamily(space, std::vector<double>(m, 0.0), std::vector<double>(m, hi));
}

DensityFamily DensityFamily::bounds(const FilteredSpace& space, std::vector<double> lo,
                                    std::vector<double> hi) {
  return DensityFamily(space, std::move(lo), std::move(hi));
}

DensityFamily DensityFamily::singleton(const FilteredSpace& space) {
  const int m = space.n_terminal();
  return DensityFamily(space, std::vector<double>(m, 1.0), std::vector<double>(m, 1.0));
}

bool DensityFamily::atom_feasible(const RandomVar& z, int t, int a, double tol) const {
  const FilteredSpace& sp = *space_;
  const auto& atom = sp.atoms(t)[a];
  double mass = 0.0;
  for (int k : atom) mass += sp.terminal_prob()[k] * z[k].value();
  const double pa = sp.atom_prob(t, a);
  if (mass <= tol * pa) return true;  // atom uncharged by Z: vacuously feasible
  const double e = mass / pa;         // E[Z|A]
  for (int k : atom) {
    const double zc = z[k].value() / e;
    if (zc < lo_[k] - tol || zc > hi_[k] + tol) return false;
  }
  return true;
}

bool DensityFamily::contains_conditional(const RandomVar& z, int t, double tol) const {
  for (int a = 0; a < space_->n_atoms(t); ++a)
    if (!atom_feasible(z, t, a, tol)) return false;
  return true;
}

namespace {

/// Exact solution of min/max sum_k q_k Z_k x_k over lo <= Z <= hi,
/// sum_k q_k Z_k = 1 on one atom: start at the lower bound and spend the
/// remaining budget on coordinates in value order.
double atom_robust(const FilteredSpace& sp, const std::vector<int>& atom, double pa,
                   const std::vector<double>& lo, const std::vector<double>& hi,
                   const std::vector<double>& xv, bool minimize) {
  std::vector<int> order(atom);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return minimize ? xv[i] < xv[j] : xv[i] > xv[j];
  });
  double budget = 1.0;
  double value = 0.0;
  for (int k : atom) {
    const double q = sp.terminal_prob()[k] / pa;
    budget -= q * lo[k];
    value += q * lo[k] * xv[k];
  }
  for (int k : order) {
    if (budget <= 0.0) break;
    const double q = sp.terminal_prob()[k] / pa;
    const double room = q * (hi[k] - lo[k]);
    const double take = std::min(room, budget);
    value += take * xv[k];
    budget -= take;
  }
  return value;
}

RandomVar robust_expectation(const DensityFamily& d, const RandomVar& x, int t, bool minimize) {
  const FilteredSpace& sp = d.space();
  if (!x.is_finite())
    throw ValidationError("robust expectation requires finite values; use the clamped variant");
  std::vector<double> xv(sp.n_terminal());
  for (int k = 0; k < sp.n_terminal(); ++k) xv[k] = x[k].value();
  RandomVar out(sp, XReal(0.0));
  const auto& atoms = sp.atoms(t);
  for (int a = 0; a < static_cast<int>(atoms.size()); ++a) {
    const double v = atom_robust(sp, atoms[a], sp.atom_prob(t, a), d.lo(), d.hi(), xv, minimize);
    for (int k : atoms[a]) out[k] = XReal(v);
  }
  return out;
}

ClampedRobust robust_extended(const DensityFamily& d, const RandomVar& x, int t, bool minimize) {
  const FilteredSpace& sp = d.space();
  if (x.is_finite())
    return {robust_expectation(d, x, t, minimize), false};

  constexpr int kDoublings = 40;
  constexpr double kStabTol = 1e-12;
  const int na = sp.n_atoms(t);
  std::vector<double> prev(na), cur(na);
  std::vector<bool> settled(na, false);
  std::vector<double> xv(sp.n_terminal());
  double m_bound = 1024.0;
  for (int step = 0; step <= kDoublings; ++step, m_bound *= 2.0) {
    for (int k = 0; k < sp.n_terminal(); ++k)
      xv[k] = std::clamp(x[k].is_finite() ? x[k].value()
                                          : (x[k].is_pos_inf() ? m_bound : -m_bound),
                         -m_bound, m_bound);
    for (int a = 0; a < na; ++a)
      cur[a] = atom_robust(sp, sp.atoms(t)[a], sp.atom_prob(t, a), d.lo(), d.hi(), xv, minimize);
    if (step > 0) {
      bool all = true;
      for (int a = 0; a < na; ++a) {
        if (std::abs(cur[a] - prev[a]) <= kStabTol) settled[a] = true;
        all = all && settled[a];
      }
      if (all) break;
    }
    prev = cur;
  }
  ClampedRobust res{RandomVar(sp, XReal(0.0)), false};
  for (int a = 0; a < na; ++a) {
    XReal v(cur[a]);
    if (!settled[a]) {
      res.diverged = true;
      note_divergence();
      v = cur[a] > prev[a] ? XReal::pos_inf() : XReal::neg_inf();
    }
    for (int k : sp.atoms(t)[a]) res.value[k] = v;
  }
  return res;
}

} // namespace

RandomVar min_conditional_expectation(const DensityFamily& d, const RandomVar& x, int t) {
  return robust_expectation(d, x, t, true);
}

RandomVar max_conditional_expectation(const DensityFamily& d, const RandomVar& x, int t) {
  return robust_expectation(d, x, t, false);
}

ClampedRobust min_conditional_expectation_extended(const DensityFamily& d, const RandomVar& x,
                                                   int t) {
  return robust_extended(d, x, t, true);
}

ClampedRobust max_conditional_expectation_extended(const DensityFamily& d, const RandomVar& x,
                                                   int t) {
  return robust_extended(d, x, t, false);
}

} // namespace dlm
