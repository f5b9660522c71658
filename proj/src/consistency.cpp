#include "dlm/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "dlm/diagnostics.hpp"
#include "dlm/sampling.hpp"

namespace dlm {

namespace {

constexpr double kMatchTol = 1e-12;  // premise-equality tolerance for pair checks

/// Comparison scale: floating noise on large ratios must not read as a
/// violation, so margins grow with the magnitudes involved.
double cmp_scale(XReal a, XReal b) {
  double s = 1.0;
  if (a.is_finite()) s = std::max(s, std::abs(a.value()));
  if (b.is_finite()) s = std::max(s, std::abs(b.value()));
  return s;
}

struct TrialInput {
  int t = 0, s = 1;
  InputKind kind = InputKind::Variable;
  RandomVar x;
  AdaptedProcess v;
};

TrialInput draw_trial(InputKind kind, const FilteredSpace& sp, std::mt19937_64& rng) {
  TrialInput in;
  in.kind = kind;
  auto [t, s] = sample_t_s(sp, rng);
  in.t = t;
  in.s = s;
  if (kind == InputKind::Variable) in.x = sample_rv(sp, rng);
  else in.v = sample_process(sp, rng);
  return in;
}

RandomVar eval(const DynamicMeasure& phi, const TrialInput& in, int t) {
  return in.kind == InputKind::Variable ? phi(in.x, t) : phi(in.v, t);
}

Witness base_witness(const TrialInput& in, long trial) {
  Witness w;
  w.kind = in.kind;
  w.x = in.x;
  w.v = in.v;
  w.t = in.t;
  w.s = in.s;
  w.trial = trial;
  return w;
}

/// Largest per-atom violation of lhs >= rhs (acceptance) or lhs <= rhs.
std::optional<std::pair<int, double>> direction_violation(const RandomVar& lhs,
                                                          const RandomVar& rhs, Direction dir) {
  int where = -1;
  double worst = 0.0;
  for (int k = 0; k < lhs.size(); ++k) {
    const double g = dir == Direction::Acceptance ? gap_below(lhs[k], rhs[k])
                                                  : gap_below(rhs[k], lhs[k]);
    if (g > certifier_margin() * cmp_scale(lhs[k], rhs[k]) && g > worst) { worst = g; where = k; }
  }
  if (where < 0) return std::nullopt;
  return std::make_pair(where, worst);
}

ConsistencyVerdict make_verdict(const DynamicMeasure& phi, std::string property,
                                std::string direction, const FilteredSpace&, long trials,
                                unsigned long long seed) {
  ConsistencyVerdict v;
  v.property = std::move(property);
  v.direction = std::move(direction);
  v.measure = phi.name();
  v.trials = trials;
  v.seed = seed;
  return v;
}

const char* dir_str(Direction d) {
  return d == Direction::Acceptance ? "acceptance" : "rejection";
}

/// Shift a payoff by a constant, or a process by a constant on every
/// component strictly after t (keeping the time-t dividend and its sign
/// gate untouched).
RandomVar shifted(const RandomVar& x, double delta) { return x + XReal(delta); }

AdaptedProcess shifted_future(const AdaptedProcess& v, int t, double delta) {
  std::vector<RandomVar> cs = v.components();
  for (int u = t + 1; u <= v.horizon(); ++u) cs[u] = cs[u] + XReal(delta);
  return AdaptedProcess(v.space(), std::move(cs));
}

/// Counterexamples must survive a +-1e-6 shift of the input: violations
/// living only on a floating-point knife edge (exact-zero branch points
/// blown up by root-type inverses) are artifacts, not counterexamples.
constexpr double kConfirmShift = 1e-6;

template <class MarginFn>
bool confirm_violation(MarginFn margin_at) {
  return margin_at(kConfirmShift) > 0.0 && margin_at(-kConfirmShift) > 0.0;
}

} // namespace

const std::vector<TCProperty>& all_properties() {
  static const std::vector<TCProperty> props = {
      TCProperty::WeakAcceptance,     TCProperty::WeakRejection,
      TCProperty::SemiWeakAcceptance, TCProperty::SemiWeakRejection,
      TCProperty::MiddleAcceptance,   TCProperty::MiddleRejection,
      TCProperty::Strong,             TCProperty::Submartingale,
      TCProperty::Supermartingale};
  return props;
}

std::string property_code(TCProperty p) {
  switch (p) {
    case TCProperty::WeakAcceptance: return "WA";
    case TCProperty::WeakRejection: return "WR";
    case TCProperty::SemiWeakAcceptance: return "sWA";
    case TCProperty::SemiWeakRejection: return "sWR";
    case TCProperty::MiddleAcceptance: return "MA";
    case TCProperty::MiddleRejection: return "MR";
    case TCProperty::Strong: return "STR";
    case TCProperty::Submartingale: return "Sub";
    case TCProperty::Supermartingale: return "Sup";
  }
  return "?";
}

std::string property_cli_name(TCProperty p) {
  switch (p) {
    case TCProperty::WeakAcceptance: return "weak-acceptance";
    case TCProperty::WeakRejection: return "weak-rejection";
    case TCProperty::SemiWeakAcceptance: return "semiweak-acceptance";
    case TCProperty::SemiWeakRejection: return "semiweak-rejection";
    case TCProperty::MiddleAcceptance: return "middle-acceptance";
    case TCProperty::MiddleRejection: return "middle-rejection";
    case TCProperty::Strong: return "strong";
    case TCProperty::Submartingale: return "submartingale";
    case TCProperty::Supermartingale: return "supermartingale";
  }
  return "?";
}

std::optional<TCProperty> property_from_cli(const std::string& s) {
  for (TCProperty p : all_properties())
    if (property_cli_name(p) == s || property_code(p) == s) return p;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Random-variable checks
// ---------------------------------------------------------------------------

ConsistencyVerdict check_weak(const DynamicMeasure& phi, const FilteredSpace& sp, Direction dir,
                              long trials, unsigned long long seed) {
  auto v = make_verdict(phi, "WA", dir_str(dir), sp, trials, seed);
  if (dir == Direction::Rejection) v.property = "WR";
  if (phi.kind() != InputKind::Variable)
    throw ValidationError("check_weak expects a variable measure");
  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
    const TrialInput in = draw_trial(phi.kind(), sp, rng);
    auto violation_at = [&](double delta) -> std::optional<std::pair<int, double>> {
      const RandomVar x = shifted(in.x, delta);
      const RandomVar at_s = phi(x, in.s);
      const RandomVar bound = dir == Direction::Acceptance ? cond_essinf(at_s, in.t)
                                                           : cond_esssup(at_s, in.t);
      return direction_violation(phi(x, in.t), bound, dir);
    };
    if (auto viol = violation_at(0.0)) {
      auto margin_at = [&](double d) { auto r = violation_at(d); return r ? r->second : 0.0; };
      if (!confirm_violation(margin_at)) continue;
      const RandomVar at_s = phi(in.x, in.s);
      const RandomVar bound = dir == Direction::Acceptance ? cond_essinf(at_s, in.t)
                                                           : cond_esssup(at_s, in.t);
      Witness w = base_witness(in, i);
      w.lhs = phi(in.x, in.t)[viol->first];
      w.rhs = bound[viol->first];
      w.margin = viol->second;
      v.pass = false;
      v.witness = std::move(w);
      return v;
    }
  }
  return v;
}

ConsistencyVerdict check_martingale_tc(const DynamicMeasure& phi, const FilteredSpace& sp,
                                       bool supermartingale, long trials,
                                       unsigned long long seed) {
  auto v = make_verdict(phi, supermartingale ? "Sup" : "Sub",
                        supermartingale ? "acceptance" : "rejection", sp, trials, seed);
  if (phi.kind() != InputKind::Variable)
    throw ValidationError("check_martingale_tc expects a variable measure");
  const Direction dir = supermartingale ? Direction::Acceptance : Direction::Rejection;
  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
    const TrialInput in = draw_trial(phi.kind(), sp, rng);
    auto violation_at = [&](double delta) -> std::optional<std::pair<int, double>> {
      const RandomVar x = shifted(in.x, delta);
      return direction_violation(phi(x, in.t), cond_expectation(phi(x, in.s), in.t), dir);
    };
    if (auto viol = violation_at(0.0)) {
      auto margin_at = [&](double d) { auto r = violation_at(d); return r ? r->second : 0.0; };
      if (!confirm_violation(margin_at)) continue;
      const RandomVar at_t = phi(in.x, in.t);
      const RandomVar bound = cond_expectation(phi(in.x, in.s), in.t);
      Witness w = base_witness(in, i);
      w.lhs = at_t[viol->first];
      w.rhs = bound[viol->first];
      w.margin = viol->second;
      v.pass = false;
      v.witness = std::move(w);
      return v;
    }
  }
  return v;
}

namespace {

/// Middle-consistency probe: premise phi_s(X) >= phi_s(Y) (acceptance,
/// within kMatchTol slack) must force phi_t(X) >= phi_t(Y).
std::optional<Witness> middle_probe(const DynamicMeasure& phi, const TrialInput& in,
                                    const RandomVar& at_s, const RandomVar& at_t,
                                    const RandomVar& y, Direction dir, long trial) {
  const RandomVar ys = phi(y, in.s);
  for (int k = 0; k < at_s.size(); ++k) {
    const double g = dir == Direction::Acceptance ? gap_below(at_s[k], ys[k])
                                                  : gap_below(ys[k], at_s[k]);
    if (g > kMatchTol * cmp_scale(at_s[k], ys[k])) return std::nullopt;  // premise fails
  }
  const RandomVar yt = phi(y, in.t);
  if (auto viol = direction_violation(at_t, yt, dir)) {
    Witness w = base_witness(in, trial);
    w.has_pair = true;
    w.x2 = y;
    w.lhs = at_t[viol->first];
    w.rhs = yt[viol->first];
    w.margin = viol->second;
    return w;
  }
  return std::nullopt;
}

} // namespace

ConsistencyVerdict check_middle(const DynamicMeasure& phi, const FilteredSpace& sp, Direction dir,
                                long trials, unsigned long long seed,
                                std::optional<ExtensionSide> side) {
  auto v = make_verdict(phi, dir == Direction::Acceptance ? "MA" : "MR", dir_str(dir), sp,
                        trials, seed);
  if (phi.kind() != InputKind::Variable)
    throw ValidationError("check_middle expects a variable measure; use the process variant");
  ExtensionEvaluator ext(phi, side.value_or(dir == Direction::Acceptance
                                                ? ExtensionSide::Lower
                                                : ExtensionSide::Upper));
  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
    const TrialInput in = draw_trial(phi.kind(), sp, rng);
    const RandomVar yb = sample_rv_measurable(sp, in.s, rng);
    const double shift = uniform(rng, 0.0, 2.0);

    // probes rebuilt per input shift: 0 = the measured level itself,
    // 1 = sampled F_s-measurable benchmark, 2 = shifted level,
    // 3 = extension inequality (extended levels)
    auto probe_witness = [&](double delta, int kind) -> std::optional<Witness> {
      TrialInput pin = in;
      pin.x = shifted(in.x, delta);
      const RandomVar at_s = phi(pin.x, in.s);
      const RandomVar at_t = phi(pin.x, in.t);
      if (kind == 3) {
        if (at_s.is_finite()) return std::nullopt;
        const RandomVar r = ext.evaluate(at_s, in.t).value;
        if (auto viol = direction_violation(at_t, r, dir)) {
          Witness w = base_witness(pin, i);
          w.lhs = at_t[viol->first];
          w.rhs = r[viol->first];
          w.margin = viol->second;
          w.note = "extension inequality on extended level";
          return w;
        }
        return std::nullopt;
      }
      if (kind != 1 && !at_s.is_finite()) return std::nullopt;
      RandomVar y;
      switch (kind) {
        case 0: y = at_s; break;
        case 1: y = yb; break;
        default:
          y = at_s + XReal(dir == Direction::Acceptance ? -shift : shift);
      }
      auto w = middle_probe(phi, pin, at_s, at_t, y, dir, i);
      if (w && kind == 0) w->note = "level probe phi_s(X)";
      if (w && kind == 1) w->note = "sampled F_s-measurable benchmark";
      if (w && kind == 2) w->note = "shifted level probe";
      return w;
    };

    for (int kind : {0, 1, 2, 3}) {
      if (auto w = probe_witness(0.0, kind)) {
        auto margin_at = [&](double d) {
          auto r = probe_witness(d, kind);
          return r ? r->margin : 0.0;
        };
        if (!confirm_violation(margin_at)) continue;
        v.pass = false;
        v.witness = std::move(*w);
        return v;
      }
    }
  }
  return v;
}

ConsistencyVerdict check_strong(const DynamicMeasure& phi, const FilteredSpace& sp, long trials,
                                unsigned long long seed, ExtensionSide side) {
  auto v = make_verdict(phi, "STR", "both", sp, trials, seed);
  if (phi.kind() != InputKind::Variable)
    throw ValidationError("check_strong expects a variable measure; use the process variant");
  ExtensionEvaluator ext(phi, side);
  long exercised_pairs = 0;

  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
    const TrialInput in = draw_trial(phi.kind(), sp, rng);
    const int a = uniform_int(rng, 0, sp.n_atoms(in.s) - 1);
    const RandomVar z = sample_rv(sp, rng);

    // prong (a): recursivity phi_t(X) = ext(phi_s(X)) at t
    auto recursivity_margin = [&](double delta) -> double {
      const RandomVar x = shifted(in.x, delta);
      const RandomVar at_s = phi(x, in.s);
      const ExtensionResult r = ext.evaluate(at_s, in.t);
      if (r.diverged) return 0.0;
      const RandomVar at_t = phi(x, in.t);
      double worst = 0.0;
      for (int k = 0; k < at_t.size(); ++k) {
        const double g = abs_gap(at_t[k], r.value[k]);
        if (g > certifier_margin() * cmp_scale(at_t[k], r.value[k])) worst = std::max(worst, g);
      }
      return worst;
    };
    if (recursivity_margin(0.0) > 0.0 && confirm_violation(recursivity_margin)) {
      const RandomVar at_s = phi(in.x, in.s);
      const RandomVar at_t = phi(in.x, in.t);
      const ExtensionResult r = ext.evaluate(at_s, in.t);
      Witness w = base_witness(in, i);
      for (int k = 0; k < at_t.size(); ++k)
        if (abs_gap(at_t[k], r.value[k]) > certifier_margin() * cmp_scale(at_t[k], r.value[k])) {
          w.lhs = at_t[k];
          w.rhs = r.value[k];
          w.margin = abs_gap(at_t[k], r.value[k]);
          break;
        }
      w.note = "recursivity through the LM-extension";
      v.pass = false;
      v.witness = std::move(w);
      return v;
    }

    // prong (b): equal-phi_s pairs; first by collapsing one F_s atom to
    // its measured level, then by patch-and-bisect when the measure does
    // not fix measurable payoffs
    enum class PairKind { None, Collapse, Bisect };
    PairKind used = PairKind::None;
    auto build_pair = [&](double delta) -> std::optional<RandomVar> {
      const RandomVar x = shifted(in.x, delta);
      const RandomVar at_s = phi(x, in.s);
      const XReal target = at_s.at_atom(in.s, a);
      if (!target.is_finite()) return std::nullopt;

      RandomVar y = x;
      for (int k : sp.atoms(in.s)[a]) y[k] = target;
      const RandomVar ys = phi(y, in.s);
      bool premise = true;
      for (int k = 0; k < ys.size(); ++k)
        if (abs_gap(ys[k], at_s[k]) > kMatchTol * cmp_scale(ys[k], at_s[k])) {
          premise = false;
          break;
        }
      if (premise) {
        used = PairKind::Collapse;
        return y;
      }

      // bisect a scalar shift of a resampled patch until phi_s matches
      auto patched = [&](double c) {
        RandomVar y2 = x;
        for (int k : sp.atoms(in.s)[a]) y2[k] = xreal_add(z[k], XReal(c));
        return y2;
      };
      auto level = [&](double c) { return phi(patched(c), in.s).at_atom(in.s, a); };
      double lo = -64.0, hi = 64.0;
      bool bracket = level(lo) <= target && level(hi) >= target;
      for (int widen = 0; !bracket && widen < 6; ++widen) {
        lo *= 4.0;
        hi *= 4.0;
        bracket = level(lo) <= target && level(hi) >= target;
      }
      if (!bracket) return std::nullopt;
      for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (level(mid) <= target) lo = mid;
        else hi = mid;
      }
      const RandomVar y2 = patched(lo);
      const RandomVar y2s = phi(y2, in.s);
      for (int k = 0; k < y2s.size(); ++k)
        if (abs_gap(y2s[k], at_s[k]) > kMatchTol * cmp_scale(y2s[k], at_s[k]))
          return std::nullopt;
      used = PairKind::Bisect;
      return y2;
    };
    auto pair_margin = [&](double delta) -> double {
      const auto y = build_pair(delta);
      if (!y) return 0.0;
      const RandomVar x = shifted(in.x, delta);
      const RandomVar at_t = phi(x, in.t);
      const RandomVar yt = phi(*y, in.t);
      double worst = 0.0;
      for (int k = 0; k < at_t.size(); ++k) {
        const double g = abs_gap(at_t[k], yt[k]);
        if (g > certifier_margin() * cmp_scale(at_t[k], yt[k])) worst = std::max(worst, g);
      }
      return worst;
    };

    const auto y0 = build_pair(0.0);
    if (y0) {
      ++exercised_pairs;
      if (pair_margin(0.0) > 0.0 && confirm_violation(pair_margin)) {
        const RandomVar at_t = phi(in.x, in.t);
        const RandomVar yt = phi(*y0, in.t);
        Witness w = base_witness(in, i);
        w.has_pair = true;
        w.x2 = *y0;
        for (int k = 0; k < at_t.size(); ++k)
          if (abs_gap(at_t[k], yt[k]) > certifier_margin() * cmp_scale(at_t[k], yt[k])) {
            w.lhs = at_t[k];
            w.rhs = yt[k];
            w.margin = abs_gap(at_t[k], yt[k]);
            break;
          }
        w.note = used == PairKind::Collapse ? "collapsed-atom pair" : "patch-and-bisect pair";
        v.pass = false;
        v.witness = std::move(w);
        return v;
      }
    }
  }
  if (exercised_pairs == 0) v.direction = "both (pair prong not exercised)";
  return v;
}

// ---------------------------------------------------------------------------
// Process checks// ---------------------------------------------------------------------------
// Process checks
// ---------------------------------------------------------------------------

namespace {

TrialInput draw_process_trial(const FilteredSpace& sp, std::mt19937_64& rng) {
  TrialInput in;
  in.kind = InputKind::Process;
  in.t = uniform_int(rng, 0, sp.horizon() - 1);
  in.s = in.t + 1;
  in.v = sample_process(sp, rng);
  return in;
}

} // namespace

ConsistencyVerdict check_weak_process(const DynamicMeasure& phi, const FilteredSpace& sp,
                                      Direction dir, long trials, unsigned long long seed) {
  auto v = make_verdict(phi, dir == Direction::Acceptance ? "WA" : "WR", dir_str(dir), sp,
                        trials, seed);
  if (phi.kind() != InputKind::Process)
    throw ValidationError("check_weak_process expects a process measure");
  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
    const TrialInput in = draw_process_trial(sp, rng);
    auto violation_at = [&](double delta) -> std::optional<std::pair<int, double>> {
      const AdaptedProcess pv = shifted_future(in.v, in.t, delta);
      const RandomVar next = phi(pv, in.t + 1);
      const RandomVar base = dir == Direction::Acceptance ? cond_essinf(next, in.t)
                                                          : cond_esssup(next, in.t);
      return direction_violation(phi(pv, in.t), base + pv[in.t], dir);
    };
    if (auto viol = violation_at(0.0)) {
      auto margin_at = [&](double d) { auto r = violation_at(d); return r ? r->second : 0.0; };
      if (!confirm_violation(margin_at)) continue;
      const RandomVar next = phi(in.v, in.t + 1);
      const RandomVar base = dir == Direction::Acceptance ? cond_essinf(next, in.t)
                                                          : cond_esssup(next, in.t);
      const RandomVar bound = base + in.v[in.t];
      Witness w = base_witness(in, i);
      w.lhs = phi(in.v, in.t)[viol->first];
      w.rhs = bound[viol->first];
      w.margin = viol->second;
      v.pass = false;
      v.witness = std::move(w);
      return v;
    }
  }
  return v;
}

ConsistencyVerdict check_semiweak_process(const DynamicMeasure& phi, const FilteredSpace& sp,
                                          Direction dir, long trials, unsigned long long seed) {
  auto v = make_verdict(phi, dir == Direction::Acceptance ? "sWA" : "sWR", dir_str(dir), sp,
                        trials, seed);
  if (phi.kind() != InputKind::Process)
    throw ValidationError("check_semiweak_process expects a process measure");
  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
    const TrialInput in = draw_process_trial(sp, rng);
    // the dividend sign gates the inequality atom by atom
    auto violation_at = [&](double delta) -> std::optional<std::pair<int, double>> {
      const AdaptedProcess pv = shifted_future(in.v, in.t, delta);
      const RandomVar next = phi(pv, in.t + 1);
      const RandomVar base = dir == Direction::Acceptance ? cond_essinf(next, in.t)
                                                          : cond_esssup(next, in.t);
      const RandomVar at_t = phi(pv, in.t);
      int where = -1;
      double worst = 0.0;
      for (int a = 0; a < sp.n_atoms(in.t); ++a) {
        const XReal div = pv[in.t].at_atom(in.t, a);
        const bool active = dir == Direction::Acceptance ? div >= XReal(0.0) : div <= XReal(0.0);
        if (!active) continue;
        for (int k : sp.atoms(in.t)[a]) {
          const double g = dir == Direction::Acceptance ? gap_below(at_t[k], base[k])
                                                        : gap_below(base[k], at_t[k]);
          if (g > certifier_margin() * cmp_scale(at_t[k], base[k]) && g > worst) { worst = g; where = k; }
        }
      }
      if (where < 0) return std::nullopt;
      return std::make_pair(where, worst);
    };
    if (auto viol = violation_at(0.0)) {
      auto margin_at = [&](double d) { auto r = violation_at(d); return r ? r->second : 0.0; };
      if (!confirm_violation(margin_at)) continue;
      const RandomVar next = phi(in.v, in.t + 1);
      const RandomVar base = dir == Direction::Acceptance ? cond_essinf(next, in.t)
                                                          : cond_esssup(next, in.t);
      Witness w = base_witness(in, i);
      w.lhs = phi(in.v, in.t)[viol->first];
      w.rhs = base[viol->first];
      w.margin = viol->second;
      v.pass = false;
      v.witness = std::move(w);
      return v;
    }
  }
  return v;
}

ConsistencyVerdict check_martingale_process(const DynamicMeasure& phi, const FilteredSpace& sp,
                                            bool supermartingale, long trials,
                                            unsigned long long seed) {
  auto v = make_verdict(phi, supermartingale ? "Sup" : "Sub",
                        supermartingale ? "acceptance" : "rejection", sp, trials, seed);
  if (phi.kind() != InputKind::Process)
    throw ValidationError("check_martingale_process expects a process measure");
  const Direction dir = supermartingale ? Direction::Acceptance : Direction::Rejection;
  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
    const TrialInput in = draw_process_trial(sp, rng);
    auto violation_at = [&](double delta) -> std::optional<std::pair<int, double>> {
      const AdaptedProcess pv = shifted_future(in.v, in.t, delta);
      const RandomVar bound = cond_expectation(phi(pv, in.t + 1), in.t) + pv[in.t];
      return direction_violation(phi(pv, in.t), bound, dir);
    };
    if (auto viol = violation_at(0.0)) {
      auto margin_at = [&](double d) { auto r = violation_at(d); return r ? r->second : 0.0; };
      if (!confirm_violation(margin_at)) continue;
      const RandomVar bound = cond_expectation(phi(in.v, in.t + 1), in.t) + in.v[in.t];
      Witness w = base_witness(in, i);
      w.lhs = phi(in.v, in.t)[viol->first];
      w.rhs = bound[viol->first];
      w.margin = viol->second;
      v.pass = false;
      v.witness = std::move(w);
      return v;
    }
  }
  return v;
}

ConsistencyVerdict check_middle_process(const DynamicMeasure& phi, const FilteredSpace& sp,
                                        Direction dir, long trials, unsigned long long seed) {
  auto v = make_verdict(phi, dir == Direction::Acceptance ? "MA" : "MR", dir_str(dir), sp,
                        trials, seed);
  if (phi.kind() != InputKind::Process)
    throw ValidationError("check_middle_process expects a process measure");
  const UpdateRule rule = one_step_extension_rule(
      phi, dir == Direction::Acceptance ? ExtensionSide::Lower : ExtensionSide::Upper);
  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
    const TrialInput in = draw_process_trial(sp, rng);
    auto violation_at = [&](double delta) -> std::optional<std::pair<int, double>> {
      const AdaptedProcess pv = shifted_future(in.v, in.t, delta);
      const RandomVar level = phi(pv, in.t + 1);
      const RandomVar bound = rule.apply(level, in.t, in.t + 1, pv);
      return direction_violation(phi(pv, in.t), bound, dir);
    };
    if (auto viol = violation_at(0.0)) {
      auto margin_at = [&](double d) { auto r = violation_at(d); return r ? r->second : 0.0; };
      if (!confirm_violation(margin_at)) continue;
      const RandomVar bound = rule.apply(phi(in.v, in.t + 1), in.t, in.t + 1, in.v);
      Witness w = base_witness(in, i);
      w.lhs = phi(in.v, in.t)[viol->first];
      w.rhs = bound[viol->first];
      w.margin = viol->second;
      w.note = "one-step slice-extension rule";
      v.pass = false;
      v.witness = std::move(w);
      return v;
    }
  }
  return v;
}

ConsistencyVerdict check_strong_process(const DynamicMeasure& phi, const FilteredSpace& sp,
                                        long trials, unsigned long long seed) {
  auto v = make_verdict(phi, "STR", "both", sp, trials, seed);
  if (phi.kind() != InputKind::Process)
    throw ValidationError("check_strong_process expects a process measure");
  long exercised = 0;
  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
    const TrialInput in = draw_process_trial(sp, rng);
    const int b = uniform_int(rng, 0, sp.n_atoms(in.t + 1) - 1);
    std::vector<RandomVar> patch_vals;
    for (int u = in.t + 1; u <= sp.horizon(); ++u)
      patch_vals.push_back(sample_rv_measurable(sp, u, rng));

    // rebuild the future on one F_{t+1} atom, shifting cash at t+1 until
    // phi_{t+1} matches; V_t is untouched so the premise holds exactly
    auto build_pair = [&](double delta) -> std::optional<AdaptedProcess> {
      const AdaptedProcess base = shifted_future(in.v, in.t, delta);
      const RandomVar next = phi(base, in.t + 1);
      const XReal target = next.at_atom(in.t + 1, b);

      std::vector<RandomVar> alt(base.components());
      for (int u = in.t + 1; u <= sp.horizon(); ++u)
        alt[u] = patch_atom(patch_vals[u - in.t - 1], base[u], in.t + 1, b);
      auto with_shift = [&](double c) {
        std::vector<RandomVar> cs = alt;
        RandomVar shift_rv(sp, XReal(0.0));
        for (int k : sp.atoms(in.t + 1)[b]) shift_rv[k] = XReal(c);
        cs[in.t + 1] = cs[in.t + 1] + shift_rv;
        return AdaptedProcess(sp, std::move(cs));
      };
      auto level_at = [&](double c) {
        return phi(with_shift(c), in.t + 1).at_atom(in.t + 1, b);
      };

      double c_star = 0.0;
      bool matched = false;
      if (!target.is_finite() || target == XReal(0.0)) {
        // plateau targets (0 and +-inf are common for indices)
        for (double c : {0.0, 2.0, -2.0, 8.0, -8.0, 32.0, -32.0, 128.0, -128.0, 1024.0,
                         -1024.0})
          if (level_at(c) == target) { c_star = c; matched = true; break; }
      } else {
        double lo = -64.0, hi = 64.0;
        bool bracket = level_at(lo) <= target && level_at(hi) >= target;
        for (int widen = 0; !bracket && widen < 5; ++widen) {
          lo *= 4.0;
          hi *= 4.0;
          bracket = level_at(lo) <= target && level_at(hi) >= target;
        }
        if (bracket) {
          for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (level_at(mid) <= target) lo = mid;
            else hi = mid;
          }
          c_star = lo;
          matched = abs_gap(level_at(lo), target) <= kMatchTol;
        }
      }
      if (!matched) return std::nullopt;
      const AdaptedProcess v2 = with_shift(c_star);
      const RandomVar next2 = phi(v2, in.t + 1);
      for (int k = 0; k < next2.size(); ++k)
        if (abs_gap(next2[k], next[k]) > kMatchTol * cmp_scale(next2[k], next[k]))
          return std::nullopt;
      return v2;
    };
    auto pair_margin = [&](double delta) -> double {
      const auto v2 = build_pair(delta);
      if (!v2) return 0.0;
      const AdaptedProcess base = shifted_future(in.v, in.t, delta);
      const RandomVar at_t = phi(base, in.t);
      const RandomVar at_t2 = phi(*v2, in.t);
      double worst = 0.0;
      for (int k = 0; k < at_t.size(); ++k) {
        const double g = abs_gap(at_t[k], at_t2[k]);
        if (g > certifier_margin() * cmp_scale(at_t[k], at_t2[k])) worst = std::max(worst, g);
      }
      return worst;
    };

    const auto pair0 = build_pair(0.0);
    if (!pair0) continue;
    ++exercised;
    if (pair_margin(0.0) > 0.0 && confirm_violation(pair_margin)) {
      const RandomVar at_t = phi(in.v, in.t);
      const RandomVar at_t2 = phi(*pair0, in.t);
      Witness w = base_witness(in, i);
      w.has_pair = true;
      w.v2 = *pair0;
      for (int k = 0; k < at_t.size(); ++k)
        if (abs_gap(at_t[k], at_t2[k]) > certifier_margin() * cmp_scale(at_t[k], at_t2[k])) {
          w.lhs = at_t[k];
          w.rhs = at_t2[k];
          w.margin = abs_gap(at_t[k], at_t2[k]);
          break;
        }
      w.note = "matched-future pair";
      v.pass = false;
      v.witness = std::move(w);
      return v;
    }
  }
  if (exercised == 0) v.direction = "both (pair prong not exercised)";
  return v;
}

// ---------------------------------------------------------------------------
// Rule / benchmark checks
// ---------------------------------------------------------------------------

ConsistencyVerdict check_mu_tc(const DynamicMeasure& phi, const UpdateRule& mu,
                               const FilteredSpace& sp, Direction dir, long trials,
                               unsigned long long seed) {
  auto v = make_verdict(phi, "mu[" + mu.name() + "]", dir_str(dir), sp, trials, seed);
  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
    TrialInput in = phi.kind() == InputKind::Variable ? draw_trial(phi.kind(), sp, rng)
                                                      : draw_process_trial(sp, rng);
    if (mu.flags().one_step_only) in.s = in.t + 1;
    auto violation_at = [&](double delta) -> std::optional<std::pair<int, double>> {
      TrialInput pin = in;
      if (in.kind == InputKind::Variable) pin.x = shifted(in.x, delta);
      else pin.v = shifted_future(in.v, in.t, delta);
      const RandomVar at_s = eval(phi, pin, in.s);
      const RandomVar level = pin.kind == InputKind::Variable
                                  ? mu.apply(at_s, in.t, in.s)
                                  : mu.apply(at_s, in.t, in.s, pin.v);
      return direction_violation(eval(phi, pin, in.t), level, dir);
    };
    if (auto viol = violation_at(0.0)) {
      auto margin_at = [&](double d) { auto r = violation_at(d); return r ? r->second : 0.0; };
      if (!confirm_violation(margin_at)) continue;
      const RandomVar at_s = eval(phi, in, in.s);
      const RandomVar level = phi.kind() == InputKind::Variable
                                  ? mu.apply(at_s, in.t, in.s)
                                  : mu.apply(at_s, in.t, in.s, in.v);
      Witness w = base_witness(in, i);
      w.lhs = eval(phi, in, in.t)[viol->first];
      w.rhs = level[viol->first];
      w.margin = viol->second;
      w.note = mu.name();
      v.pass = false;
      v.witness = std::move(w);
      return v;
    }
  }
  return v;
}

ConsistencyVerdict check_benchmark(const DynamicMeasure& phi, const BenchmarkFamily& y,
                                   const FilteredSpace& sp, Direction dir, long trials,
                                   unsigned long long seed) {
  auto v = make_verdict(phi, "benchmark[" + y.name + "]", dir_str(dir), sp, trials, seed);
  if (phi.kind() != InputKind::Variable)
    throw ValidationError("check_benchmark expects a variable measure");

  // raw benchmark payoffs with cached evaluations per time
  std::vector<RandomVar> gens = y.generators;
  if (y.all_constants)
    for (double c : y.constant_levels) gens.emplace_back(sp, XReal(c));
  std::map<int, std::vector<RandomVar>> phi_cache;
  auto phi_of = [&](int t) -> const std::vector<RandomVar>& {
    auto it = phi_cache.find(t);
    if (it == phi_cache.end()) {
      std::vector<RandomVar> vals;
      vals.reserve(gens.size());
      for (const auto& cand : gens) vals.push_back(phi(cand, t));
      it = phi_cache.emplace(t, std::move(vals)).first;
    }
    return it->second;
  };

  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
    const TrialInput in = draw_trial(phi.kind(), sp, rng);

    // probe kinds: j < gens.size() compares against the raw benchmark j;
    // j >= gens.size() is the locality-amplified constant probe on atom
    // j - gens.size()
    auto probe_witness = [&](double delta, size_t j) -> std::optional<Witness> {
      TrialInput pin = in;
      pin.x = shifted(in.x, delta);
      RandomVar cand;
      if (j < gens.size()) {
        cand = gens[j];
      } else {
        if (!y.all_constants) return std::nullopt;
        const int a = static_cast<int>(j - gens.size());
        const RandomVar lvl_src = phi(pin.x, in.s);
        if (!lvl_src.is_finite()) return std::nullopt;
        XReal lvl = lvl_src[sp.atoms(in.t)[a].front()];
        for (int k : sp.atoms(in.t)[a])
          lvl = dir == Direction::Acceptance ? xmin(lvl, lvl_src[k]) : xmax(lvl, lvl_src[k]);
        const XReal off = dir == Direction::Acceptance ? XReal(64.0) : XReal(-64.0);
        pin.x = patch_atom(pin.x, RandomVar(sp, off), in.t, a);
        cand = RandomVar(sp, lvl);
      }
      const RandomVar ps = phi(pin.x, in.s);
      const RandomVar ys_val = j < gens.size() ? phi_of(in.s)[j] : phi(cand, in.s);
      for (int k = 0; k < ps.size(); ++k) {
        const double g = dir == Direction::Acceptance ? gap_below(ps[k], ys_val[k])
                                                      : gap_below(ys_val[k], ps[k]);
        if (g > kMatchTol * cmp_scale(ps[k], ys_val[k])) return std::nullopt;
      }
      const RandomVar pt = phi(pin.x, in.t);
      const RandomVar yt_val = j < gens.size() ? phi_of(in.t)[j] : phi(cand, in.t);
      if (auto viol = direction_violation(pt, yt_val, dir)) {
        Witness w = base_witness(pin, i);
        w.has_pair = true;
        w.x2 = cand;
        w.lhs = pt[viol->first];
        w.rhs = yt_val[viol->first];
        w.margin = viol->second;
        return w;
      }
      return std::nullopt;
    };

    const size_t n_probes = gens.size() + (y.all_constants ? sp.n_atoms(in.t) : 0);
    for (size_t j = 0; j < n_probes; ++j) {
      if (auto w = probe_witness(0.0, j)) {
        auto margin_at = [&](double d) {
          auto r = probe_witness(d, j);
          return r ? r->margin : 0.0;
        };
        if (!confirm_violation(margin_at)) continue;
        v.pass = false;
        v.witness = std::move(*w);
        return v;
      }
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Dispatcher, replay, taxonomy
// ---------------------------------------------------------------------------

ConsistencyVerdict run_property(const DynamicMeasure& phi, TCProperty prop,
                                const FilteredSpace& sp, long trials, unsigned long long seed,
                                std::optional<ExtensionSide> side) {
  const bool proc = phi.kind() == InputKind::Process;
  switch (prop) {
    case TCProperty::WeakAcceptance:
      return proc ? check_weak_process(phi, sp, Direction::Acceptance, trials, seed)
                  : check_weak(phi, sp, Direction::Acceptance, trials, seed);
    case TCProperty::WeakRejection:
      return proc ? check_weak_process(phi, sp, Direction::Rejection, trials, seed)
                  : check_weak(phi, sp, Direction::Rejection, trials, seed);
    case TCProperty::SemiWeakAcceptance: {
      // for random variables semi-weak coincides with weak
      auto v = proc ? check_semiweak_process(phi, sp, Direction::Acceptance, trials, seed)
                    : check_weak(phi, sp, Direction::Acceptance, trials, seed);
      v.property = "sWA";
      return v;
    }
    case TCProperty::SemiWeakRejection: {
      auto v = proc ? check_semiweak_process(phi, sp, Direction::Rejection, trials, seed)
                    : check_weak(phi, sp, Direction::Rejection, trials, seed);
      v.property = "sWR";
      return v;
    }
    case TCProperty::MiddleAcceptance:
      return proc ? check_middle_process(phi, sp, Direction::Acceptance, trials, seed)
                  : check_middle(phi, sp, Direction::Acceptance, trials, seed, side);
    case TCProperty::MiddleRejection:
      return proc ? check_middle_process(phi, sp, Direction::Rejection, trials, seed)
                  : check_middle(phi, sp, Direction::Rejection, trials, seed, side);
    case TCProperty::Strong:
      return proc ? check_strong_process(phi, sp, trials, seed)
                  : check_strong(phi, sp, trials, seed, side.value_or(ExtensionSide::Lower));
    case TCProperty::Submartingale:
      return proc ? check_martingale_process(phi, sp, false, trials, seed)
                  : check_martingale_tc(phi, sp, false, trials, seed);
    case TCProperty::Supermartingale:
      return proc ? check_martingale_process(phi, sp, true, trials, seed)
                  : check_martingale_tc(phi, sp, true, trials, seed);
  }
  throw ValidationError("unknown property");
}

double replay_witness(const DynamicMeasure& phi, const std::string& code,
                      const std::string& direction, const Witness& w) {
  const bool proc = w.kind == InputKind::Process;
  const Direction dir =
      direction == "rejection" ? Direction::Rejection : Direction::Acceptance;
  auto dir_gap = [&](const RandomVar& lhs, const RandomVar& rhs) {
    double worst = 0.0;
    for (int k = 0; k < lhs.size(); ++k)
      worst = std::max(worst, dir == Direction::Acceptance ? gap_below(lhs[k], rhs[k])
                                                           : gap_below(rhs[k], lhs[k]));
    return worst;
  };
  auto eq_gap = [](const RandomVar& a, const RandomVar& b) {
    double worst = 0.0;
    for (int k = 0; k < a.size(); ++k) worst = std::max(worst, abs_gap(a[k], b[k]));
    return worst;
  };

  if (code == "WA" || code == "WR" || code == "sWA" || code == "sWR") {
    if (!proc) {
      const RandomVar at_s = phi(w.x, w.s);
      const RandomVar bound = dir == Direction::Acceptance ? cond_essinf(at_s, w.t)
                                                           : cond_esssup(at_s, w.t);
      return dir_gap(phi(w.x, w.t), bound);
    }
    const RandomVar next = phi(w.v, w.t + 1);
    RandomVar base = dir == Direction::Acceptance ? cond_essinf(next, w.t)
                                                  : cond_esssup(next, w.t);
    const RandomVar at_t = phi(w.v, w.t);
    const bool semi = code[0] == 's';
    double worst = 0.0;
    const FilteredSpace& sp = w.v.space();
    for (int a = 0; a < sp.n_atoms(w.t); ++a) {
      const XReal div = w.v[w.t].at_atom(w.t, a);
      if (semi) {
        const bool active = dir == Direction::Acceptance ? div >= XReal(0.0) : div <= XReal(0.0);
        if (!active) continue;
      }
      for (int k : sp.atoms(w.t)[a]) {
        const XReal rhs = semi ? base[k] : xreal_add(base[k], div);
        worst = std::max(worst, dir == Direction::Acceptance ? gap_below(at_t[k], rhs)
                                                             : gap_below(rhs, at_t[k]));
      }
    }
    return worst;
  }
  if (code == "Sub" || code == "Sup") {
    if (!proc) return dir_gap(phi(w.x, w.t), cond_expectation(phi(w.x, w.s), w.t));
    const RandomVar bound = cond_expectation(phi(w.v, w.t + 1), w.t) + w.v[w.t];
    return dir_gap(phi(w.v, w.t), bound);
  }
  if (code == "MA" || code == "MR") {
    if (proc) {
      const UpdateRule rule = one_step_extension_rule(
          phi, dir == Direction::Acceptance ? ExtensionSide::Lower : ExtensionSide::Upper);
      const RandomVar bound = rule.apply(phi(w.v, w.t + 1), w.t, w.t + 1, w.v);
      return dir_gap(phi(w.v, w.t), bound);
    }
    if (w.has_pair) {
      const RandomVar at_s = phi(w.x, w.s), ys = phi(w.x2, w.s);
      for (int k = 0; k < at_s.size(); ++k) {
        const double g = dir == Direction::Acceptance ? gap_below(at_s[k], ys[k])
                                                      : gap_below(ys[k], at_s[k]);
        if (g > kMatchTol) return 0.0;  // premise does not replay
      }
      return dir_gap(phi(w.x, w.t), phi(w.x2, w.t));
    }
    ExtensionEvaluator ext(phi, dir == Direction::Acceptance ? ExtensionSide::Lower
                                                             : ExtensionSide::Upper);
    return dir_gap(phi(w.x, w.t), ext.evaluate(phi(w.x, w.s), w.t).value);
  }
  if (code == "STR") {
    if (proc) {
      if (!w.has_pair) return 0.0;
      if (eq_gap(w.v[w.t], w.v2[w.t]) > 0.0) return 0.0;
      if (eq_gap(phi(w.v, w.t + 1), phi(w.v2, w.t + 1)) > kMatchTol) return 0.0;
      return eq_gap(phi(w.v, w.t), phi(w.v2, w.t));
    }
    if (w.has_pair) {
      if (eq_gap(phi(w.x, w.s), phi(w.x2, w.s)) > kMatchTol) return 0.0;
      return eq_gap(phi(w.x, w.t), phi(w.x2, w.t));
    }
    ExtensionEvaluator ext(phi, ExtensionSide::Lower);
    return eq_gap(phi(w.x, w.t), ext.evaluate(phi(w.x, w.s), w.t).value);
  }
  throw ValidationError("replay: unsupported property " + code);
}

CertificationReport taxonomy_report(const DynamicMeasure& phi,
                                    const std::vector<FilteredSpace>& suite,
                                    const std::vector<std::string>& labels, long trials,
                                    unsigned long long seed) {
  CertificationReport rep;
  rep.measure = phi.name();
  for (TCProperty p : all_properties()) {
    CertificationReport::Cell cell;
    cell.prop = p;
    for (size_t i = 0; i < suite.size(); ++i) {
      ConsistencyVerdict v = run_property(phi, p, suite[i], trials, seed);
      v.space_label = i < labels.size() ? labels[i] : "space" + std::to_string(i);
      cell.pass = cell.pass && v.pass;
      const bool failed = !v.pass;
      cell.per_space.push_back(std::move(v));
      if (failed) break;  // one counterexample settles the cell
    }
    rep.cells.push_back(std::move(cell));
  }
  rep.profile = check_extended_properties(phi, suite.size() > 1 ? suite[1] : suite[0],
                                          std::min<long>(trials, 2000), seed);

  auto cell_pass = [&](TCProperty p) {
    for (const auto& c : rep.cells)
      if (c.prop == p) return c.pass;
    return false;
  };
  // implication edges exercised on this trial set
  if (cell_pass(TCProperty::Supermartingale))
    rep.edge_notes.push_back(std::string("Sup=>WA: ") +
                             (cell_pass(TCProperty::WeakAcceptance) ? "confirmed" : "VIOLATED"));
  if (cell_pass(TCProperty::Submartingale))
    rep.edge_notes.push_back(std::string("Sub=>WR: ") +
                             (cell_pass(TCProperty::WeakRejection) ? "confirmed" : "VIOLATED"));
  if (cell_pass(TCProperty::Strong) && rep.profile.cash_additive)
    rep.edge_notes.push_back(
        std::string("STR=>middle (cash-additive): ") +
        (cell_pass(TCProperty::MiddleAcceptance) && cell_pass(TCProperty::MiddleRejection)
             ? "confirmed"
             : "VIOLATED"));
  rep.edge_notes.push_back("scale-invariance vs STR edge: informational only");
  return rep;
}

std::string taxonomy_markdown(const std::vector<CertificationReport>& rows) {
  std::ostringstream os;
  os << "| measure |";
  for (TCProperty p : all_properties()) os << " " << property_code(p) << " |";
  os << "\n|---|";
  for (size_t i = 0; i < all_properties().size(); ++i) os << "---|";
  os << "\n";
  for (const auto& r : rows) {
    os << "| " << r.measure << " |";
    for (const auto& c : r.cells) {
      if (c.pass) {
        long n = c.per_space.empty() ? 0 : c.per_space.front().trials;
        os << " ✓ n=" << n << " |";
      } else {
        long at = -1;
        for (const auto& v : c.per_space)
          if (!v.pass && v.witness) at = v.witness->trial;
        os << " ✗ @" << at << " |";
      }
    }
    os << "\n";
  }
  return os.str();
}

std::string taxonomy_csv(const std::vector<CertificationReport>& rows) {
  std::ostringstream os;
  auto field = [](const std::string& s) {
    return s.find(',') == std::string::npos ? s : "\"" + s + "\"";
  };
  os << "measure,property,verdict,trials,witness_trial,witness_space\n";
  for (const auto& r : rows)
    for (const auto& c : r.cells) {
      long at = -1;
      std::string space;
      long n = 0;
      for (const auto& v : c.per_space) {
        n = v.trials;
        if (!v.pass && v.witness) { at = v.witness->trial; space = v.space_label; }
      }
      os << field(r.measure) << "," << property_code(c.prop) << ","
         << (c.pass ? "pass" : "counterexample") << "," << n << "," << at << ","
         << field(space) << "\n";
    }
  return os.str();
}

} // namespace dlm
