#include "dlm/cond_ops.hpp"

namespace dlm {

namespace {

/// E[Y|A] for Y >= 0, as weighted average over the atom; any +inf value
/// with positive probability makes the result +inf.
XReal nonneg_atom_mean(const FilteredSpace& sp, const std::vector<int>& atom,
                       double atom_p, const RandomVar& y) {
  double acc = 0.0;
  for (int k : atom) {
    const XReal v = y[k];
    if (v.is_pos_inf()) return XReal::pos_inf();
    acc += sp.terminal_prob()[k] * v.value();
  }
  return XReal(acc / atom_p);
}

} // namespace

RandomVar cond_expectation(const RandomVar& x, int t) {
  const FilteredSpace& sp = x.space();
  RandomVar pos = x.apply([](XReal v) { return xmax(v, XReal(0.0)); });
  RandomVar neg = x.apply([](XReal v) { return xmax(-v, XReal(0.0)); });
  RandomVar out(sp, XReal(0.0));
  const auto& atoms = sp.atoms(t);
  for (int a = 0; a < static_cast<int>(atoms.size()); ++a) {
    const double pa = sp.atom_prob(t, a);
    const XReal e = xreal_sub(nonneg_atom_mean(sp, atoms[a], pa, pos),
                              nonneg_atom_mean(sp, atoms[a], pa, neg));
    for (int k : atoms[a]) out[k] = e;
  }
  return out;
}

RandomVar cond_essinf(const RandomVar& x, int t) {
  const FilteredSpace& sp = x.space();
  RandomVar out(sp, XReal(0.0));
  for (const auto& atom : sp.atoms(t)) {
    XReal m = x[atom.front()];
    for (int k : atom) m = xmin(m, x[k]);
    for (int k : atom) out[k] = m;
  }
  return out;
}

RandomVar cond_esssup(const RandomVar& x, int t) {
  const FilteredSpace& sp = x.space();
  RandomVar out(sp, XReal(0.0));
  for (const auto& atom : sp.atoms(t)) {
    XReal m = x[atom.front()];
    for (int k : atom) m = xmax(m, x[k]);
    for (int k : atom) out[k] = m;
  }
  return out;
}

RandomVar family_essinf(const FilteredSpace& space, const std::vector<RandomVar>& family) {
  if (family.empty()) return RandomVar(space, XReal::pos_inf());
  RandomVar out = family.front();
  for (size_t i = 1; i < family.size(); ++i)
    for (int k = 0; k < out.size(); ++k) out[k] = xmin(out[k], family[i][k]);
  return out;
}

RandomVar family_esssup(const FilteredSpace& space, const std::vector<RandomVar>& family) {
  if (family.empty()) return RandomVar(space, XReal::neg_inf());
  RandomVar out = family.front();
  for (size_t i = 1; i < family.size(); ++i)
    for (int k = 0; k < out.size(); ++k) out[k] = xmax(out[k], family[i][k]);
  return out;
}

} // namespace dlm
