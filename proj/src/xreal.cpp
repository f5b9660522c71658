#include "dlm/xreal.hpp"

namespace dlm {

XReal xreal_add(XReal a, XReal b) {
  const double x = a.value(), y = b.value();
  if (std::isinf(x) && std::isinf(y) && (x > 0) != (y > 0))
    return XReal::neg_inf();
  if (std::isinf(x)) return a;
  if (std::isinf(y)) return b;
  return XReal(x + y);
}

XReal xreal_sub(XReal a, XReal b) { return xreal_add(a, -b); }

XReal xreal_mul(XReal a, XReal b) {
  const double x = a.value(), y = b.value();
  if (x == 0.0 || y == 0.0) return XReal(0.0);
  if (std::isinf(x) || std::isinf(y))
    return (x > 0) == (y > 0) ? XReal::pos_inf() : XReal::neg_inf();
  return XReal(x * y);
}

std::string XReal::str() const {
  if (is_pos_inf()) return "inf";
  if (is_neg_inf()) return "-inf";
  return std::to_string(v_);
}

double gap_below(XReal lhs, XReal rhs) {
  if (lhs >= rhs) return 0.0;
  // lhs < rhs strictly from here on
  if (rhs.is_pos_inf() || lhs.is_neg_inf())
    return std::numeric_limits<double>::infinity();
  return rhs.value() - lhs.value();
}

double abs_gap(XReal a, XReal b) {
  if (a == b) return 0.0;
  if (!a.is_finite() || !b.is_finite())
    return std::numeric_limits<double>::infinity();
  return std::abs(a.value() - b.value());
}

} // namespace dlm
