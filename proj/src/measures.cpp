#include "dlm/measures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dlm/duality.hpp"
#include "dlm/sampling.hpp"

namespace dlm {

DynamicMeasure DynamicMeasure::variable(std::string name, VarEval f) {
  DynamicMeasure m;
  m.name_ = std::move(name);
  m.kind_ = InputKind::Variable;
  m.var_eval_ = std::move(f);
  return m;
}

DynamicMeasure DynamicMeasure::process(std::string name, ProcEval f) {
  DynamicMeasure m;
  m.name_ = std::move(name);
  m.kind_ = InputKind::Process;
  m.proc_eval_ = std::move(f);
  return m;
}

RandomVar DynamicMeasure::operator()(const RandomVar& x, int t) const {
  if (kind_ != InputKind::Variable)
    throw ValidationError(name_ + " expects a process input");
  return var_eval_(x, t);
}

RandomVar DynamicMeasure::operator()(const AdaptedProcess& v, int t) const {
  if (kind_ != InputKind::Process)
    throw ValidationError(name_ + " expects a random-variable input");
  return proc_eval_(v, t);
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

DynamicMeasure var_measure(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("var: alpha must be in (0,1)");
  std::ostringstream nm;
  nm << "var[alpha=" << alpha << "]";
  return DynamicMeasure::variable(nm.str(), [alpha](const RandomVar& x, int t) {
    const FilteredSpace& sp = x.space();
    RandomVar out(sp, XReal(0.0));
    for (const auto& atom : sp.atoms(t)) {
      double pa = 0.0;
      std::vector<std::pair<XReal, double>> pts;
      for (int k : atom) {
        pts.emplace_back(x[k], sp.terminal_prob()[k]);
        pa += sp.terminal_prob()[k];
      }
      std::sort(pts.begin(), pts.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double cum = 0.0;
      XReal q = pts.back().first;
      for (const auto& [v, p] : pts) {
        cum += p / pa;
        if (cum > alpha + 1e-12) { q = v; break; }
      }
      for (int k : atom) out[k] = q;
    }
    return out;
  });
}

DynamicMeasure wvar_measure(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("wvar: alpha must be in (0,1)");
  std::ostringstream nm;
  nm << "wvar[alpha=" << alpha << "]";
  return DynamicMeasure::variable(nm.str(), [alpha](const RandomVar& x, int t) {
    const DensityFamily d = DensityFamily::box(x.space(), 1.0 / alpha);
    if (x.is_finite()) return min_conditional_expectation(d, x, t);
    return min_conditional_expectation_extended(d, x, t).value;
  });
}

namespace {

/// (1/gamma) ln E[exp(gamma X)|A] on one atom, log-sum-exp shifted.
XReal entropic_atom(const FilteredSpace& sp, const std::vector<int>& atom, double pa,
                    const RandomVar& x, double gamma) {
  // the value that dominates E[exp(gamma X)] when present on the atom
  const XReal dominant = gamma > 0 ? XReal::pos_inf() : XReal::neg_inf();
  double best = -std::numeric_limits<double>::infinity();
  for (int k : atom) {
    if (x[k] == dominant) return dominant;  // exp term is +inf
    if (x[k].is_finite()) best = std::max(best, gamma * x[k].value());
  }
  if (best == -std::numeric_limits<double>::infinity())
    return -dominant;  // all mass at exp(...) = 0, so log gives -inf / +inf
  double acc = 0.0;
  for (int k : atom) {
    if (!x[k].is_finite()) continue;  // exp term 0
    acc += sp.terminal_prob()[k] / pa * std::exp(gamma * x[k].value() - best);
  }
  return XReal((best + std::log(acc)) / gamma);
}

RandomVar entropic_eval(const RandomVar& x, int t, const std::vector<double>& gamma_per_atom) {
  const FilteredSpace& sp = x.space();
  RandomVar out(sp, XReal(0.0));
  const auto& atoms = sp.atoms(t);
  for (int a = 0; a < static_cast<int>(atoms.size()); ++a) {
    const double g = gamma_per_atom[a];
    XReal v;
    if (g == 0.0) {
      // conditional expectation on this atom
      RandomVar e = cond_expectation(x, t);
      v = e[atoms[a].front()];
    } else {
      v = entropic_atom(sp, atoms[a], sp.atom_prob(t, a), x, g);
    }
    for (int k : atoms[a]) out[k] = v;
  }
  return out;
}

} // namespace

DynamicMeasure entropic_measure(double gamma) {
  std::ostringstream nm;
  nm << "entropic[gamma=" << gamma << "]";
  return DynamicMeasure::variable(nm.str(), [gamma](const RandomVar& x, int t) {
    if (gamma == 0.0) return cond_expectation(x, t);
    std::vector<double> g(x.space().n_atoms(t), gamma);
    return entropic_eval(x, t, g);
  });
}

DynamicMeasure entropic_varying(double g0, double ratio) {
  std::ostringstream nm;
  nm << "entropic_t[g0=" << g0 << ",ratio=" << ratio << "]";
  return DynamicMeasure::variable(nm.str(), [g0, ratio](const RandomVar& x, int t) {
    const double g = g0 * std::pow(ratio, t);
    std::vector<double> gs(x.space().n_atoms(t), g);
    return entropic_eval(x, t, gs);
  });
}

DynamicMeasure entropic_nonconstant(const AdaptedProcess& gammas) {
  for (int t = 0; t <= gammas.horizon(); ++t)
    if (!gammas[t].is_finite())
      throw ValidationError("risk-aversion process must be finite");
  return DynamicMeasure::variable("entropic_t[process]", [gammas](const RandomVar& x, int t) {
    const FilteredSpace& sp = x.space();
    if (&sp != &gammas.space())
      throw ValidationError("entropic_t: input lives on a different space than gamma");
    std::vector<double> gs(sp.n_atoms(t));
    for (int a = 0; a < sp.n_atoms(t); ++a) gs[a] = gammas[t].at_atom(t, a).value();
    return entropic_eval(x, t, gs);
  });
}

// ---------------------------------------------------------------------------
// Certainty equivalents
// ---------------------------------------------------------------------------

XReal Utility::apply(XReal x) const {
  if (x.is_pos_inf()) return lim_hi;
  if (x.is_neg_inf()) return lim_lo;
  return XReal(u(x.value()));
}

XReal Utility::apply_inv(XReal y) const {
  if (y >= lim_hi) return XReal::pos_inf();
  if (y <= lim_lo) return XReal::neg_inf();
  return XReal(u_inv(y.value()));
}

Utility Utility::identity() {
  return Utility{"identity", [](double x) { return x; }, [](double y) { return y; },
                 XReal::neg_inf(), XReal::pos_inf()};
}

Utility Utility::exponential(double gamma) {
  if (gamma == 0.0) throw ValidationError("exponential utility needs gamma != 0");
  std::ostringstream nm;
  nm << "exp[gamma=" << gamma << "]";
  if (gamma > 0)
    return Utility{nm.str(), [gamma](double x) { return std::exp(gamma * x); },
                   [gamma](double y) { return std::log(y) / gamma; },
                   XReal(0.0), XReal::pos_inf()};
  return Utility{nm.str(), [gamma](double x) { return std::exp(gamma * x); },
                 [gamma](double y) { return std::log(y) / gamma; },
                 XReal::pos_inf(), XReal(0.0)};
}

Utility Utility::cubic() {
  return Utility{"cubic", [](double x) { return x * x * x; },
                 [](double y) { return std::cbrt(y); },
                 XReal::neg_inf(), XReal::pos_inf()};
}

DynamicMeasure certainty_equivalent(Utility u) {
  for (double x = -8.0; x <= 8.0; x += 0.5)
    if (std::abs(u.u_inv(u.u(x)) - x) > 1e-9)
      throw ValidationError("certainty equivalent: U_inv(U(x)) deviates on probe grid");
  // exp utilities are anti-monotone in the risk sense when gamma < 0, but
  // U must be strictly increasing; reject decreasing pairs
  if (!(u.u(1.0) > u.u(0.0)))
    throw ValidationError("certainty equivalent: U must be strictly increasing");
  const std::string nm = "ce[" + u.name + "]";
  return DynamicMeasure::variable(nm, [u](const RandomVar& x, int t) {
    RandomVar ux(x.space(), XReal(0.0));
    for (int k = 0; k < x.size(); ++k) ux[k] = u.apply(x[k]);
    RandomVar e = cond_expectation(ux, t);
    RandomVar out(x.space(), XReal(0.0));
    for (int k = 0; k < x.size(); ++k) out[k] = u.apply_inv(e[k]);
    return out;
  });
}

// ---------------------------------------------------------------------------
// Performance measures on processes
// ---------------------------------------------------------------------------

namespace {

RandomVar positive_part_neg(const RandomVar& s) {
  return s.apply([](XReal v) { return xmax(-v, XReal(0.0)); });
}

/// Branch quantities of the ratio measures are snapped to zero below
/// 1e-12 of the tail-sum magnitude, so exact-zero dividends scaled by an
/// irrational factor keep their branch.
double branch_snap(double v, const std::vector<int>& atom, const RandomVar& s) {
  double sc = 1.0;
  for (int k : atom) sc = std::max(sc, std::abs(s[k].value()));
  return std::abs(v) <= 1e-12 * sc ? 0.0 : v;
}

} // namespace

DynamicMeasure glr_measure() {
  return DynamicMeasure::process("glr", [](const AdaptedProcess& v, int t) {
    const FilteredSpace& sp = v.space();
    const RandomVar s = v.tail_sum(t);
    if (!s.is_finite()) throw ValidationError("glr: process must have finite values");
    const RandomVar num = cond_expectation(s, t);
    const RandomVar den = cond_expectation(positive_part_neg(s), t);
    RandomVar out(sp, XReal(0.0));
    for (const auto& atom : sp.atoms(t)) {
      const double e = branch_snap(num[atom.front()].value(), atom, s);
      const double l = branch_snap(den[atom.front()].value(), atom, s);
      XReal r(0.0);
      if (e > 0.0) r = (l > 0.0) ? XReal(e / l) : XReal::pos_inf();
      for (int k : atom) out[k] = r;
    }
    return out;
  });
}

DynamicMeasure raroc_measure(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("raroc: alpha must be in (0,1)");
  std::ostringstream nm;
  nm << "raroc[alpha=" << alpha << "]";
  return DynamicMeasure::process(nm.str(), [alpha](const AdaptedProcess& v, int t) {
    const FilteredSpace& sp = v.space();
    const RandomVar s = v.tail_sum(t);
    if (!s.is_finite()) throw ValidationError("raroc: process must have finite values");
    const RandomVar num = cond_expectation(s, t);
    const DensityFamily d = DensityFamily::box(sp, 1.0 / alpha);
    const RandomVar rho = min_conditional_expectation(d, s, t);
    RandomVar out(sp, XReal(0.0));
    for (const auto& atom : sp.atoms(t)) {
      const double e = branch_snap(num[atom.front()].value(), atom, s);
      const double r = branch_snap(rho[atom.front()].value(), atom, s);
      XReal val(0.0);
      if (r >= 0.0) val = XReal::pos_inf();   // implies e >= r >= 0
      else if (e > 0.0) val = XReal(e / -r);
      for (int k : atom) out[k] = val;
    }
    return out;
  });
}

DynamicMeasure tvar_family_member(double x) {
  if (!(x >= 0.0)) throw ValidationError("tvar family: x must be >= 0");
  std::ostringstream nm;
  nm << "tvar_family[x=" << x << "]";
  return DynamicMeasure::process(nm.str(), [x](const AdaptedProcess& v, int t) {
    const RandomVar s = v.tail_sum(t);
    if (!s.is_finite()) throw ValidationError("tvar family: process must have finite values");
    const DensityFamily d = DensityFamily::box(v.space(), 1.0 + x);
    return min_conditional_expectation(d, s, t);
  });
}

DynamicMeasure tvar_index(IndexConvention convention) {
  const char* nm = convention == IndexConvention::Canonical ? "tvar_index" : "tvar_index[literal]";
  return index_from_family(
      nm, [](double x) { return tvar_family_member(x); }, IndexGrid{}, convention);
}

DynamicMeasure rv_slice_measure(const DynamicMeasure& proc_measure) {
  if (proc_measure.kind() != InputKind::Process)
    throw ValidationError("rv_slice_measure needs a process measure");
  const std::string nm = "slice[" + proc_measure.name() + "]";
  return DynamicMeasure::variable(nm, [proc_measure](const RandomVar& x, int t) {
    const FilteredSpace& sp = x.space();
    if (t >= sp.horizon()) throw ValidationError("rv slice needs t < T");
    if (!x.is_measurable(t + 1))
      throw ValidationError("rv slice input must be F_{t+1}-measurable");
    return proc_measure(cash_at_process(x, t + 1), t);
  });
}

DynamicMeasure expectation_measure() {
  return DynamicMeasure::variable("expectation",
                                  [](const RandomVar& x, int t) { return cond_expectation(x, t); });
}

DynamicMeasure expectation_minus_process(double x) {
  std::ostringstream nm;
  nm << "exp_minus[x=" << x << "]";
  return DynamicMeasure::process(nm.str(), [x](const AdaptedProcess& v, int t) {
    return cond_expectation(v.tail_sum(t), t) + XReal(-x);
  });
}

DynamicMeasure fixture_time_constant() {
  return DynamicMeasure::variable("fixture_t", [](const RandomVar& x, int t) {
    return RandomVar(x.space(), XReal(static_cast<double>(t)));
  });
}

DynamicMeasure fixture_nonlocal() {
  return DynamicMeasure::variable("fixture_nonlocal", [](const RandomVar& x, int t) {
    (void)t;
    return cond_expectation(x, 0);
  });
}

DynamicMeasure fixture_shifted_expectation() {
  return DynamicMeasure::variable("fixture_shifted", [](const RandomVar& x, int t) {
    return cond_expectation(x, t) + XReal(-1.0);
  });
}

// ---------------------------------------------------------------------------
// Axiom checkers
// ---------------------------------------------------------------------------

namespace {

struct SampledInput {
  RandomVar x;
  AdaptedProcess v;
};

SampledInput sample_input(const DynamicMeasure& phi, const FilteredSpace& sp,
                          std::mt19937_64& rng) {
  SampledInput in;
  if (phi.kind() == InputKind::Variable) in.x = sample_rv(sp, rng);
  else in.v = sample_process(sp, rng);
  return in;
}

RandomVar eval_input(const DynamicMeasure& phi, const SampledInput& in, int t) {
  return phi.kind() == InputKind::Variable ? phi(in.x, t) : phi(in.v, t);
}

SampledInput restrict_input(const DynamicMeasure& phi, const SampledInput& in,
                            const FilteredSpace& sp, int t, int a) {
  SampledInput out;
  const RandomVar ind = indicator(sp, t, a);
  if (phi.kind() == InputKind::Variable) out.x = ind * in.x;
  else out.v = mult_t(ind, in.v, t);
  return out;
}

} // namespace

PropertyVerdict check_lm_axioms(const DynamicMeasure& phi, const FilteredSpace& sp, long trials,
                                unsigned long long seed) {
  PropertyVerdict v{"lm_axioms", true, trials, seed, ""};
  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
    const int t = uniform_int(rng, 0, sp.horizon());
    const SampledInput in = sample_input(phi, sp, rng);
    const RandomVar lhs = eval_input(phi, in, t);

    // locality on a random F_t atom
    const int a = uniform_int(rng, 0, sp.n_atoms(t) - 1);
    const RandomVar rhs = eval_input(phi, restrict_input(phi, in, sp, t, a), t);
    for (int k : sp.atoms(t)[a])
      if (abs_gap(lhs[k], rhs[k]) > 1e-9) {
        v.pass = false;
        std::ostringstream os;
        os << "locality violated at trial " << i << ", t=" << t << ", atom " << a
           << ": " << lhs[k].str() << " vs " << rhs[k].str();
        v.detail = os.str();
        return v;
      }

    // monotonicity: bump the input upward
    SampledInput hi = in;
    if (phi.kind() == InputKind::Variable) {
      RandomVar bump = sample_rv(sp, rng);
      hi.x = in.x + bump.apply([](XReal b) { return xmax(b, XReal(0.0)); });
    } else {
      std::vector<RandomVar> cs = in.v.components();
      const int tt = uniform_int(rng, 0, sp.horizon());
      RandomVar bump = sample_rv_measurable(sp, tt, rng);
      cs[tt] = cs[tt] + bump.apply([](XReal b) { return xmax(b, XReal(0.0)); });
      hi.v = AdaptedProcess(sp, std::move(cs));
    }
    const RandomVar up = eval_input(phi, hi, t);
    for (int k = 0; k < sp.n_terminal(); ++k)
      if (gap_below(up[k], lhs[k]) > 1e-9) {
        v.pass = false;
        std::ostringstream os;
        os << "monotonicity violated at trial " << i << ", t=" << t << ": "
           << up[k].str() << " < " << lhs[k].str();
        v.detail = os.str();
        return v;
      }
  }
  return v;
}

PropertyProfile check_extended_properties(const DynamicMeasure& phi, const FilteredSpace& sp,
                                          long trials, unsigned long long seed) {
  PropertyProfile p;
  p.trials = trials;
  const bool is_var = phi.kind() == InputKind::Variable;

  bool uniform_space = true;
  for (double q : sp.terminal_prob())
    if (std::abs(q - sp.terminal_prob()[0]) > 1e-12) uniform_space = false;
  p.law_invariance_tested = uniform_space;

  auto scale = [](XReal a, XReal b) {
    double s = 1.0;
    if (a.is_finite()) s = std::max(s, std::abs(a.value()));
    if (b.is_finite()) s = std::max(s, std::abs(b.value()));
    return s;
  };
  auto ge = [scale](const RandomVar& a, const RandomVar& b) {
    for (int k = 0; k < a.size(); ++k)
      if (gap_below(a[k], b[k]) > 1e-9 * scale(a[k], b[k])) return false;
    return true;
  };
  auto eq = [scale](const RandomVar& a, const RandomVar& b) {
    for (int k = 0; k < a.size(); ++k)
      if (abs_gap(a[k], b[k]) > 1e-9 * scale(a[k], b[k])) return false;
    return true;
  };

  // normalization probe
  {
    const RandomVar zero(sp, XReal(0.0));
    const AdaptedProcess zp = AdaptedProcess::zero(sp);
    for (int t = 0; t <= sp.horizon(); ++t) {
      const RandomVar z = is_var ? phi(zero, t) : phi(zp, t);
      for (int k = 0; k < sp.n_terminal(); ++k)
        if (abs_gap(z[k], XReal(0.0)) > 1e-9) p.normalized = false;
    }
  }

  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed ^ 0xabcdef, static_cast<std::uint64_t>(i));
    const int t = uniform_int(rng, 0, sp.horizon());
    const SampledInput in = sample_input(phi, sp, rng);
    const SampledInput in2 = sample_input(phi, sp, rng);
    const RandomVar f1 = eval_input(phi, in, t);
    const RandomVar f2 = eval_input(phi, in2, t);

    // super-additivity: phi(X+Y) >= phi(X) + phi(Y)
    {
      SampledInput sum;
      if (is_var) sum.x = in.x + in2.x;
      else {
        std::vector<RandomVar> cs;
        for (int u = 0; u <= sp.horizon(); ++u) cs.push_back(in.v[u] + in2.v[u]);
        sum.v = AdaptedProcess(sp, std::move(cs));
      }
      if (!ge(eval_input(phi, sum, t), f1 + f2)) p.super_additive = false;
    }

    // cash additivity: phi(X + m 1_t) = phi(X) + m
    {
      const RandomVar m = sample_rv_measurable(sp, t, rng);
      SampledInput shifted;
      if (is_var) shifted.x = in.x + m;
      else {
        std::vector<RandomVar> cs = in.v.components();
        cs[t] = cs[t] + m;
        shifted.v = AdaptedProcess(sp, std::move(cs));
      }
      if (!eq(eval_input(phi, shifted, t), f1 + m)) p.cash_additive = false;
    }

    // lambda in [0,1], F_t-measurable, for concavity probes
    {
      RandomVar lam(sp, XReal(0.0));
      for (const auto& atom : sp.atoms(t)) {
        const XReal l(u01(rng));
        for (int k : atom) lam[k] = l;
      }
      RandomVar one_m_lam = RandomVar(sp, XReal(1.0)) - lam;
      SampledInput mix;
      if (is_var) mix.x = lam * in.x + one_m_lam * in2.x;
      else {
        std::vector<RandomVar> cs = mult_t(lam, in.v, t).components();
        const auto other = mult_t(one_m_lam, in2.v, t).components();
        for (int u = 0; u <= sp.horizon(); ++u) cs[u] = cs[u] + other[u];
        mix.v = AdaptedProcess(sp, std::move(cs));
      }
      const RandomVar fm = eval_input(phi, mix, t);
      RandomVar floor_val(sp, XReal(0.0));
      for (int k = 0; k < sp.n_terminal(); ++k) floor_val[k] = xmin(f1[k], f2[k]);
      if (!ge(fm, floor_val)) p.quasi_concave = false;
      if (!ge(fm, lam * f1 + one_m_lam * f2)) p.concave = false;
    }

    // scaling: beta > 0, F_t-measurable
    {
      RandomVar beta(sp, XReal(0.0));
      for (const auto& atom : sp.atoms(t)) {
        const XReal b(std::exp(uniform(rng, -1.5, 1.5)));
        for (int k : atom) beta[k] = b;
      }
      SampledInput scaled;
      if (is_var) scaled.x = beta * in.x;
      else scaled.v = mult_t(beta, in.v, t);
      const RandomVar fs = eval_input(phi, scaled, t);
      if (!eq(fs, f1)) p.scale_invariant = false;
      if (!eq(fs, beta * f1)) p.positively_homogeneous = false;
    }

    if (!is_var) {
      // translation invariance: cash at t vs cash at s
      const int s = uniform_int(rng, t, sp.horizon());
      const RandomVar m = sample_rv_measurable(sp, t, rng);
      std::vector<RandomVar> cs1 = in.v.components(), cs2 = in.v.components();
      cs1[t] = cs1[t] + m;
      cs2[s] = cs2[s] + m;
      SampledInput a, b;
      a.v = AdaptedProcess(sp, std::move(cs1));
      b.v = AdaptedProcess(sp, std::move(cs2));
      if (!eq(eval_input(phi, a, t), eval_input(phi, b, t))) p.translation_invariant = false;

      // independence of the past: phi_t(V) = phi_t(V - 0 ._t V)
      SampledInput wiped;
      std::vector<RandomVar> cs = in.v.components();
      for (int u = 0; u < t; ++u) cs[u] = RandomVar(sp, XReal(0.0));
      wiped.v = AdaptedProcess(sp, std::move(cs));
      if (!eq(eval_input(phi, wiped, t), f1)) p.independent_of_past = false;
    }

    // law invariance via a random transposition of equally likely atoms
    if (uniform_space && is_var && sp.n_terminal() > 1 && t == 0) {
      const int i1 = uniform_int(rng, 0, sp.n_terminal() - 1);
      const int i2 = uniform_int(rng, 0, sp.n_terminal() - 1);
      RandomVar perm = in.x;
      std::swap(perm[i1], perm[i2]);
      if (!eq(phi(perm, 0), f1)) p.law_invariant = false;
    }
  }
  return p;
}

} // namespace dlm
