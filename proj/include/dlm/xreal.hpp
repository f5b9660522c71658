#ifndef DLM_XREAL_HPP
#define DLM_XREAL_HPP

#include <cmath>
#include <limits>
#include <string>

namespace dlm {

/// Extended real number with the arithmetic conventions used throughout
/// the library:  inf - inf = -inf + inf = -inf,  and  0 * (+-inf) = 0.
/// Note that the distributive law fails under these rules:
///   (-1) * (inf - inf) = +inf,  while  -inf + inf = -inf.
/// NaN is never a valid state; all operations are total on {R, +inf, -inf}.
class XReal {
public:
  constexpr XReal() : v_(0.0) {}
  constexpr XReal(double v) : v_(v) {}

  static constexpr XReal pos_inf() { return XReal(std::numeric_limits<double>::infinity()); }
  static constexpr XReal neg_inf() { return XReal(-std::numeric_limits<double>::infinity()); }

  double value() const { return v_; }
  bool is_finite() const { return std::isfinite(v_); }
  bool is_pos_inf() const { return std::isinf(v_) && v_ > 0; }
  bool is_neg_inf() const { return std::isinf(v_) && v_ < 0; }

  friend bool operator==(XReal a, XReal b) { return a.v_ == b.v_; }
  friend bool operator!=(XReal a, XReal b) { return a.v_ != b.v_; }
  friend bool operator<(XReal a, XReal b) { return a.v_ < b.v_; }
  friend bool operator<=(XReal a, XReal b) { return a.v_ <= b.v_; }
  friend bool operator>(XReal a, XReal b) { return a.v_ > b.v_; }
  friend bool operator>=(XReal a, XReal b) { return a.v_ >= b.v_; }

  friend XReal operator-(XReal a) { return XReal(-a.v_); }

  std::string str() const;

private:
  double v_;
};

/// a + b under the convention inf - inf = -inf.
XReal xreal_add(XReal a, XReal b);

/// a - b, defined as a + (-b).
XReal xreal_sub(XReal a, XReal b);

/// a * b under the convention 0 * (+-inf) = 0.
XReal xreal_mul(XReal a, XReal b);

inline XReal operator+(XReal a, XReal b) { return xreal_add(a, b); }
inline XReal operator-(XReal a, XReal b) { return xreal_sub(a, b); }
inline XReal operator*(XReal a, XReal b) { return xreal_mul(a, b); }

inline XReal xmin(XReal a, XReal b) { return a <= b ? a : b; }
inline XReal xmax(XReal a, XReal b) { return a >= b ? a : b; }

/// Gap rhs - lhs as a plain double for tolerance checks; comparisons where
/// one side is infinite report an infinite gap unless both sides agree.
double gap_below(XReal lhs, XReal rhs);

/// |a - b| as a plain double; 0 when both are the same infinity.
double abs_gap(XReal a, XReal b);

} // namespace dlm

#endif
