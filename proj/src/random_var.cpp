#include "dlm/random_var.hpp"

#include <cassert>

namespace dlm {

RandomVar::RandomVar(const FilteredSpace& space, XReal constant)
    : space_(&space), values_(space.n_terminal(), constant) {}

RandomVar::RandomVar(const FilteredSpace& space, std::vector<XReal> values)
    : space_(&space), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != space.n_terminal())
    throw ValidationError("random variable has wrong number of values");
}

bool RandomVar::is_measurable(int t) const {
  for (const auto& atom : space_->atoms(t)) {
    const XReal v = values_[atom.front()];
    for (int k : atom)
      if (values_[k] != v) return false;
  }
  return true;
}

bool RandomVar::is_finite() const {
  for (const auto& v : values_)
    if (!v.is_finite()) return false;
  return true;
}

XReal RandomVar::at_atom(int t, int a) const {
  return values_[space_->atoms(t)[a].front()];
}

RandomVar RandomVar::apply(XReal (*f)(XReal)) const {
  std::vector<XReal> out(values_.size());
  for (size_t k = 0; k < values_.size(); ++k) out[k] = f(values_[k]);
  return RandomVar(*space_, std::move(out));
}

namespace {
template <class F>
RandomVar zip(const RandomVar& a, const RandomVar& b, F f) {
  assert(&a.space() == &b.space());
  std::vector<XReal> out(a.size());
  for (int k = 0; k < a.size(); ++k) out[k] = f(a[k], b[k]);
  return RandomVar(a.space(), std::move(out));
}
} // namespace

RandomVar operator+(const RandomVar& a, const RandomVar& b) { return zip(a, b, xreal_add); }
RandomVar operator-(const RandomVar& a, const RandomVar& b) { return zip(a, b, xreal_sub); }
RandomVar operator*(const RandomVar& a, const RandomVar& b) { return zip(a, b, xreal_mul); }

RandomVar operator-(const RandomVar& a) {
  std::vector<XReal> out(a.size());
  for (int k = 0; k < a.size(); ++k) out[k] = -a[k];
  return RandomVar(a.space(), std::move(out));
}

RandomVar operator+(const RandomVar& a, XReal c) {
  std::vector<XReal> out(a.size());
  for (int k = 0; k < a.size(); ++k) out[k] = xreal_add(a[k], c);
  return RandomVar(a.space(), std::move(out));
}

RandomVar operator*(XReal c, const RandomVar& a) {
  std::vector<XReal> out(a.size());
  for (int k = 0; k < a.size(); ++k) out[k] = xreal_mul(c, a[k]);
  return RandomVar(a.space(), std::move(out));
}

bool dominated_by(const RandomVar& a, const RandomVar& b) {
  for (int k = 0; k < a.size(); ++k)
    if (!(a[k] <= b[k])) return false;
  return true;
}

AdaptedProcess::AdaptedProcess(const FilteredSpace& space, std::vector<RandomVar> components)
    : components_(std::move(components)) {
  if (static_cast<int>(components_.size()) != space.horizon() + 1)
    throw ValidationError("process needs T+1 components");
  for (int t = 0; t <= space.horizon(); ++t)
    if (!components_[t].is_measurable(t))
      throw ValidationError("process component at t=" + std::to_string(t) +
                            " is not F_t-measurable");
}

AdaptedProcess AdaptedProcess::zero(const FilteredSpace& space) {
  std::vector<RandomVar> cs(space.horizon() + 1, RandomVar(space, XReal(0.0)));
  return AdaptedProcess(space, std::move(cs));
}

RandomVar AdaptedProcess::tail_sum(int t) const {
  RandomVar s = components_[t];
  for (int i = t + 1; i <= horizon(); ++i) s = s + components_[i];
  return s;
}

AdaptedProcess mult_t(const RandomVar& m, const AdaptedProcess& v, int t) {
  if (!m.is_measurable(t))
    throw ValidationError("multiplier is not F_t-measurable");
  std::vector<RandomVar> cs = v.components();
  for (int i = t; i <= v.horizon(); ++i) cs[i] = m * cs[i];
  return AdaptedProcess(v.space(), std::move(cs));
}

RandomVar mult_t(const RandomVar& m, const RandomVar& x, int t) {
  if (!m.is_measurable(t))
    throw ValidationError("multiplier is not F_t-measurable");
  return m * x;
}

AdaptedProcess cash_at_process(const RandomVar& m, int t) {
  if (!m.is_measurable(t))
    throw ValidationError("cash flow at t must be F_t-measurable");
  const FilteredSpace& sp = m.space();
  std::vector<RandomVar> cs(sp.horizon() + 1, RandomVar(sp, XReal(0.0)));
  cs[t] = m;
  return AdaptedProcess(sp, std::move(cs));
}

RandomVar cash_at_variable(const RandomVar& m, int t) {
  if (!m.is_measurable(t))
    throw ValidationError("cash flow at t must be F_t-measurable");
  return m;
}

RandomVar indicator(const FilteredSpace& space, int t, int a) {
  RandomVar x(space, XReal(0.0));
  for (int k : space.atoms(t)[a]) x[k] = XReal(1.0);
  return x;
}

RandomVar patch_atom(const RandomVar& x, const RandomVar& y, int t, int a) {
  RandomVar out = y;
  for (int k : x.space().atoms(t)[a]) out[k] = x[k];
  return out;
}

} // namespace dlm
