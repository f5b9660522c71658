#ifndef DLM_RANDOM_VAR_HPP
#define DLM_RANDOM_VAR_HPP

#include <vector>

#include "dlm/filtered_space.hpp"
#include "dlm/xreal.hpp"

namespace dlm {

/// Extended-real random variable on the terminal atoms of a space.
/// Measurability with respect to F_t means constancy on every F_t atom.
class RandomVar {
public:
  RandomVar() : space_(nullptr) {}
  RandomVar(const FilteredSpace& space, XReal constant);
  RandomVar(const FilteredSpace& space, std::vector<XReal> values);

  const FilteredSpace& space() const { return *space_; }
  bool attached() const { return space_ != nullptr; }
  int size() const { return static_cast<int>(values_.size()); }

  XReal operator[](int k) const { return values_[k]; }
  XReal& operator[](int k) { return values_[k]; }
  const std::vector<XReal>& values() const { return values_; }

  bool is_measurable(int t) const;
  bool is_finite() const;

  /// Value on atom a of F_t; requires F_t-measurability.
  XReal at_atom(int t, int a) const;

  RandomVar apply(XReal (*f)(XReal)) const;

  friend bool operator==(const RandomVar& a, const RandomVar& b) {
    return a.values_ == b.values_;
  }

private:
  const FilteredSpace* space_;
  std::vector<XReal> values_;
};

RandomVar operator+(const RandomVar& a, const RandomVar& b);
RandomVar operator-(const RandomVar& a, const RandomVar& b);
RandomVar operator*(const RandomVar& a, const RandomVar& b);
RandomVar operator-(const RandomVar& a);
RandomVar operator+(const RandomVar& a, XReal c);
RandomVar operator*(XReal c, const RandomVar& a);

/// a <= b pointwise.
bool dominated_by(const RandomVar& a, const RandomVar& b);

/// Adapted process V_0..V_T with V_t measurable with respect to F_t.
class AdaptedProcess {
public:
  AdaptedProcess() = default;

  /// Validates adaptedness; throws ValidationError otherwise.
  AdaptedProcess(const FilteredSpace& space, std::vector<RandomVar> components);

  static AdaptedProcess zero(const FilteredSpace& space);

  const FilteredSpace& space() const { return components_.front().space(); }
  int horizon() const { return static_cast<int>(components_.size()) - 1; }

  const RandomVar& operator[](int t) const { return components_[t]; }
  const std::vector<RandomVar>& components() const { return components_; }

  /// Remaining cumulative dividend S_t = sum_{i=t..T} V_i.
  RandomVar tail_sum(int t) const;

  friend bool operator==(const AdaptedProcess& a, const AdaptedProcess& b) {
    return a.components_ == b.components_;
  }

private:
  std::vector<RandomVar> components_;
};

/// The t-multiplication m ._t V = (V_0,...,V_{t-1}, m V_t, m V_{t+1}, ...).
/// Note 0 ._t V zeroes only the components from t on, so it is not the
/// zero process.  m must be F_t-measurable.
AdaptedProcess mult_t(const RandomVar& m, const AdaptedProcess& v, int t);

/// For random variables the t-multiplication is the plain product.
RandomVar mult_t(const RandomVar& m, const RandomVar& x, int t);

/// Cash flow of size m received at time t: (0,...,0,m,0,...,0).
AdaptedProcess cash_at_process(const RandomVar& m, int t);

/// Same notation for random variables: the payoff itself.
RandomVar cash_at_variable(const RandomVar& m, int t);

/// Indicator of atom a of F_t.
RandomVar indicator(const FilteredSpace& space, int t, int a);

/// 1_A X + 1_{A^c} Y with A = atom a of F_t.
RandomVar patch_atom(const RandomVar& x, const RandomVar& y, int t, int a);

} // namespace dlm

#endif
