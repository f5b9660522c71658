#include "dlm/extensions.hpp"

#include "dlm/diagnostics.hpp"

#include "dlm/sampling.hpp"

namespace dlm {

ExtensionEvaluator::ExtensionEvaluator(DynamicMeasure base, ExtensionSide side)
    : base_(std::move(base)), side_(side) {
  if (base_.kind() != InputKind::Variable)
    throw ValidationError("extensions are defined for variable measures");
}

ExtensionResult ExtensionEvaluator::evaluate(const RandomVar& xbar, int t) const {
  const FilteredSpace& sp = xbar.space();
  if (xbar.is_finite()) return {base_(xbar, t), false};  // extension property

  constexpr int kDoublings = 40;
  constexpr double kStabTol = 1e-12;
  const bool upper = side_ == ExtensionSide::Upper;
  const XReal empty_value = upper ? XReal::pos_inf() : XReal::neg_inf();
  const XReal diverge_value = upper ? XReal::neg_inf() : XReal::pos_inf();

  ExtensionResult res{RandomVar(sp, XReal(0.0)), false};
  for (int a = 0; a < sp.n_atoms(t); ++a) {
    const auto& atom = sp.atoms(t)[a];
    bool empty_side = false;
    bool needs_limit = false;
    for (int k : atom) {
      if (xbar[k] == empty_value) empty_side = true;      // no dominating payoff
      if (!xbar[k].is_finite()) needs_limit = true;
    }
    XReal val;
    if (empty_side) {
      val = empty_value;
    } else if (!needs_limit) {
      // finite on this atom: localize and evaluate the base measure
      RandomVar loc(sp, XReal(0.0));
      for (int k : atom) loc[k] = xbar[k];
      val = base_(loc, t).at_atom(t, a);
    } else {
      double m_bound = 1024.0;
      XReal prev, cur;
      bool settled = false;
      for (int step = 0; step <= kDoublings; ++step, m_bound *= 2.0) {
        RandomVar loc(sp, XReal(0.0));
        for (int k : atom) {
          double v = xbar[k].is_finite() ? xbar[k].value()
                                         : (upper ? -m_bound : m_bound);
          loc[k] = XReal(std::clamp(v, -m_bound, m_bound));
        }
        cur = base_(loc, t).at_atom(t, a);
        if (step > 0 && abs_gap(cur, prev) <= kStabTol) { settled = true; break; }
        prev = cur;
      }
      if (settled) {
        val = cur;
      } else {
        val = diverge_value;
        res.diverged = true;
        note_divergence();
      }
    }
    for (int k : atom) res.value[k] = val;
  }
  return res;
}

RandomVar upper_extension(const DynamicMeasure& phi, const RandomVar& xbar, int t) {
  return ExtensionEvaluator(phi, ExtensionSide::Upper).evaluate(xbar, t).value;
}

RandomVar lower_extension(const DynamicMeasure& phi, const RandomVar& xbar, int t) {
  return ExtensionEvaluator(phi, ExtensionSide::Lower).evaluate(xbar, t).value;
}

UpdateRule rule_from_extension(const DynamicMeasure& phi, ExtensionSide side) {
  UpdateRule::Flags f;
  f.s_invariant = true;
  const std::string nm =
      std::string(side == ExtensionSide::Upper ? "ext_upper[" : "ext_lower[") + phi.name() + "]";
  ExtensionEvaluator ev(phi, side);
  return UpdateRule::plain(nm, f, [ev](const RandomVar& m, int t, int) {
    return ev.evaluate(m, t).value;
  });
}

PropertyVerdict check_sandwich(const DynamicMeasure& phi,
                               const std::function<RandomVar(const RandomVar&, int)>& candidate,
                               const FilteredSpace& sp, long trials, unsigned long long seed) {
  PropertyVerdict v{"sandwich", true, trials, seed, ""};
  ExtensionEvaluator lo(phi, ExtensionSide::Lower), hi(phi, ExtensionSide::Upper);
  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed ^ 0xe27, static_cast<std::uint64_t>(i));
    const int t = uniform_int(rng, 0, sp.horizon());
    const RandomVar x = sample_rv_extended(sp, rng);
    const RandomVar mid = candidate(x, t);
    const RandomVar a = lo.evaluate(x, t).value;
    const RandomVar b = hi.evaluate(x, t).value;
    for (int k = 0; k < sp.n_terminal(); ++k)
      if (gap_below(mid[k], a[k]) > 1e-9 || gap_below(b[k], mid[k]) > 1e-9) {
        v.pass = false;
        v.detail = "sandwich violated at trial " + std::to_string(i) + ", t=" +
                   std::to_string(t) + ": " + a[k].str() + " / " + mid[k].str() + " / " +
                   b[k].str();
        return v;
      }
  }
  return v;
}

PropertyVerdict check_extension_projective(const DynamicMeasure& phi, ExtensionSide side,
                                           const FilteredSpace& sp, long trials,
                                           unsigned long long seed) {
  PropertyVerdict v{"extension_projective", true, trials, seed, ""};
  ExtensionEvaluator ev(phi, side);
  bool rule_projective = true, fixes_measurable = true;
  for (long i = 0; i < trials && (rule_projective || fixes_measurable); ++i) {
    auto rng = trial_rng(seed ^ 0x31f, static_cast<std::uint64_t>(i));
    const int t = uniform_int(rng, 0, sp.horizon());
    RandomVar m = sample_rv_measurable(sp, t, rng);
    if (fixes_measurable) {
      const RandomVar fixed = phi(m, t);
      for (int k = 0; k < sp.n_terminal(); ++k)
        if (abs_gap(fixed[k], m[k]) > 1e-9) fixes_measurable = false;
    }
    if (rule_projective) {
      if (rng() % 4 == 0) {
        // extended measurable level
        const int a = uniform_int(rng, 0, sp.n_atoms(t) - 1);
        const XReal inf_v = (rng() % 2) ? XReal::pos_inf() : XReal::neg_inf();
        for (int k : sp.atoms(t)[a]) m[k] = inf_v;
      }
      const RandomVar r = ev.evaluate(m, t).value;
      for (int k = 0; k < sp.n_terminal(); ++k)
        if (abs_gap(r[k], m[k]) > 1e-9) rule_projective = false;
    }
  }
  v.pass = rule_projective;
  if (rule_projective != fixes_measurable)
    v.detail = "projectivity and identity-on-measurable disagree";
  else
    v.detail = fixes_measurable ? "phi fixes F_t-measurable inputs" :
                                  "phi moves F_t-measurable inputs";
  return v;
}

UpdateRule one_step_extension_rule(const DynamicMeasure& proc_measure, ExtensionSide side) {
  if (proc_measure.kind() != InputKind::Process)
    throw ValidationError("one_step_extension_rule needs a process measure");
  const DynamicMeasure slice = rv_slice_measure(proc_measure);
  UpdateRule::Flags f;
  f.one_step_only = true;
  const std::string nm = "slice_ext[" + proc_measure.name() + "]";
  return UpdateRule::with_context(
      nm, f, [slice, side](const RandomVar& m, int t, int, const AdaptedProcess& ctx) {
        const RandomVar level = m + ctx[t];
        // the slice is local+monotone on L_{t+1}; extend per F_t atom
        ExtensionEvaluator ev(slice, side);
        return ev.evaluate(level, t).value;
      });
}

} // namespace dlm
