#include "dlm/update_rules.hpp"

#include <cmath>
#include <sstream>

#include "dlm/sampling.hpp"

namespace dlm {

UpdateRule UpdateRule::plain(std::string name, Flags flags, Apply f) {
  UpdateRule r;
  r.name_ = std::move(name);
  r.flags_ = flags;
  r.apply_ = std::move(f);
  return r;
}

UpdateRule UpdateRule::with_context(std::string name, Flags flags, ApplyCtx f) {
  UpdateRule r;
  r.name_ = std::move(name);
  r.flags_ = flags;
  r.flags_.uses_process_context = true;
  r.apply_ctx_ = std::move(f);
  return r;
}

RandomVar UpdateRule::apply(const RandomVar& m, int t, int s) const {
  if (s <= t) throw ValidationError("update rule needs s > t");
  if (flags_.one_step_only && s != t + 1)
    throw ValidationError(name_ + " is one-step only");
  if (flags_.uses_process_context)
    throw ValidationError(name_ + " needs a process context");
  return apply_(m, t, s);
}

RandomVar UpdateRule::apply(const RandomVar& m, int t, int s, const AdaptedProcess& ctx) const {
  if (s <= t) throw ValidationError("update rule needs s > t");
  if (flags_.one_step_only && s != t + 1)
    throw ValidationError(name_ + " is one-step only");
  if (!flags_.uses_process_context) return apply_(m, t, s);
  return apply_ctx_(m, t, s, ctx);
}

UpdateRule essinf_rule() {
  UpdateRule::Flags f;
  f.s_invariant = f.projective = true;
  return UpdateRule::plain("essinf", f, [](const RandomVar& m, int t, int) {
    return cond_essinf(m, t);
  });
}

UpdateRule esssup_rule() {
  UpdateRule::Flags f;
  f.s_invariant = f.projective = true;
  return UpdateRule::plain("esssup", f, [](const RandomVar& m, int t, int) {
    return cond_esssup(m, t);
  });
}

UpdateRule expectation_rule() {
  UpdateRule::Flags f;
  f.s_invariant = f.projective = true;
  return UpdateRule::plain("expectation", f, [](const RandomVar& m, int t, int) {
    return cond_expectation(m, t);
  });
}

UpdateRule density_rule(double alpha, Direction dir) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("density rule: alpha in (0,1)");
  UpdateRule::Flags f;
  f.s_invariant = f.projective = true;
  std::ostringstream nm;
  nm << "density[alpha=" << alpha << (dir == Direction::Rejection ? ",sup" : "") << "]";
  return UpdateRule::plain(nm.str(), f, [alpha, dir](const RandomVar& m, int t, int) {
    const DensityFamily d = DensityFamily::box(m.space(), 1.0 / alpha);
    return dir == Direction::Acceptance
               ? min_conditional_expectation_extended(d, m, t).value
               : max_conditional_expectation_extended(d, m, t).value;
  });
}

UpdateRule density_rule(const DensityFamily& d, Direction dir) {
  UpdateRule::Flags f;
  f.s_invariant = f.projective = true;
  return UpdateRule::plain(dir == Direction::Acceptance ? "density[family]" : "density[family,sup]",
                           f, [d, dir](const RandomVar& m, int t, int) {
                             return dir == Direction::Acceptance
                                        ? min_conditional_expectation_extended(d, m, t).value
                                        : max_conditional_expectation_extended(d, m, t).value;
                           });
}

UpdateRule discount_rule(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("discount rule: alpha in (0,1)");
  UpdateRule::Flags f;
  f.s_invariant = true;  // catalog flag; the weighting depends only on s - t
  std::ostringstream nm;
  nm << "discount[alpha=" << alpha << "]";
  return UpdateRule::plain(nm.str(), f, [alpha](const RandomVar& m, int t, int s) {
    const RandomVar e = cond_expectation(m, t);
    const double up = std::pow(alpha, s - t), down = std::pow(alpha, t - s);
    RandomVar out(m.space(), XReal(0.0));
    for (int k = 0; k < e.size(); ++k)
      out[k] = xreal_mul(XReal(e[k] >= XReal(0.0) ? up : down), e[k]);
    return out;
  });
}

UpdateRule make_rule(const std::string& kind, double alpha) {
  if (kind == "essinf") return essinf_rule();
  if (kind == "esssup") return esssup_rule();
  if (kind == "expectation") return expectation_rule();
  if (kind == "density") return density_rule(alpha);
  if (kind == "discount") return discount_rule(alpha);
  if (kind == "entropic") return entropic_rule(alpha);
  throw ValidationError("unknown rule kind: " + kind);
}

UpdateRule nested_compose(const UpdateRule& one_step) {
  UpdateRule::Flags f = one_step.flags();
  f.one_step_only = false;
  const std::string nm = "nested[" + one_step.name() + "]";
  if (!one_step.flags().uses_process_context) {
    return UpdateRule::plain(nm, f, [one_step](const RandomVar& m, int t, int s) {
      RandomVar cur = m;
      for (int u = s - 1; u >= t; --u) cur = one_step.apply(cur, u, u + 1);
      return cur;
    });
  }
  return UpdateRule::with_context(
      nm, f, [one_step](const RandomVar& m, int t, int s, const AdaptedProcess& ctx) {
        RandomVar cur = m;
        for (int u = s - 1; u >= t; --u) cur = one_step.apply(cur, u, u + 1, ctx);
        return cur;
      });
}

UpdateRule process_rule_from_rv_rule(const UpdateRule& rv_rule, std::function<XReal(XReal)> f,
                                     const std::string& f_name) {
  if (abs_gap(f(XReal(0.0)), XReal(0.0)) != 0.0)
    throw ValidationError("process rule lift needs f(0) = 0");
  UpdateRule::Flags fl = rv_rule.flags();
  fl.one_step_only = true;
  const std::string nm = rv_rule.name() + "+" + f_name + "(V_t)";
  return UpdateRule::with_context(
      nm, fl, [rv_rule, f](const RandomVar& m, int t, int s, const AdaptedProcess& ctx) {
        RandomVar base = rv_rule.apply(m, t, s);
        RandomVar out(m.space(), XReal(0.0));
        for (int k = 0; k < out.size(); ++k) out[k] = xreal_add(base[k], f(ctx[t][k]));
        return out;
      });
}

DynamicMeasure compose_measure_backward_variable(const UpdateRule& one_step) {
  const std::string nm = "composed[" + one_step.name() + "]";
  return DynamicMeasure::variable(nm, [one_step](const RandomVar& x, int t) {
    RandomVar cur = x;
    for (int u = x.space().horizon() - 1; u >= t; --u) cur = one_step.apply(cur, u, u + 1);
    return cur;
  });
}

DynamicMeasure compose_measure_backward_process(const UpdateRule& one_step) {
  const std::string nm = "composed_proc[" + one_step.name() + "]";
  return DynamicMeasure::process(nm, [one_step](const AdaptedProcess& v, int t) {
    const int T = v.horizon();
    RandomVar cur = v[T];
    for (int u = T - 1; u >= t; --u)
      cur = one_step.apply(cur, u, u + 1, v) + v[u];
    return cur;
  });
}

UpdateRule entropic_rule(double gamma) {
  UpdateRule::Flags f;
  f.s_invariant = f.projective = true;
  std::ostringstream nm;
  nm << "entropic_rule[gamma=" << gamma << "]";
  const DynamicMeasure ent = entropic_measure(gamma);
  return UpdateRule::plain(nm.str(), f, [ent](const RandomVar& m, int t, int) {
    return ent(m, t);
  });
}

// ---------------------------------------------------------------------------
// Benchmark families
// ---------------------------------------------------------------------------

BenchmarkFamily BenchmarkFamily::constants() {
  BenchmarkFamily y;
  y.name = "constants";
  y.all_constants = true;
  y.constant_levels = {-10, -5, -2, -1, -0.5, 0, 0.5, 1, 2, 5, 10};
  return y;
}

BenchmarkFamily BenchmarkFamily::zero(const FilteredSpace& space) {
  BenchmarkFamily y;
  y.name = "zero";
  y.generators = {RandomVar(space, XReal(0.0))};
  return y;
}

BenchmarkFamily BenchmarkFamily::finite(std::string name, std::vector<RandomVar> generators) {
  if (generators.empty()) throw ValidationError("benchmark family needs generators");
  BenchmarkFamily y;
  y.name = std::move(name);
  y.generators = std::move(generators);
  return y;
}

BenchmarkFamily BenchmarkFamily::full_space(const FilteredSpace& space, int n_samples,
                                            unsigned long long seed) {
  BenchmarkFamily y;
  y.name = "full_space";
  auto rng = trial_rng(seed, 0x5a5a);
  for (int i = 0; i < n_samples; ++i) {
    RandomVar x(space, XReal(0.0));
    for (int k = 0; k < space.n_terminal(); ++k) x[k] = XReal(uniform(rng, -10.0, 10.0));
    y.generators.push_back(std::move(x));
  }
  return y;
}

std::vector<RandomVar> benchmark_localize(const BenchmarkFamily& y, const FilteredSpace& space,
                                          int t, int max_out, std::mt19937_64& rng) {
  std::vector<RandomVar> gens = y.generators;
  if (y.all_constants)
    for (double c : y.constant_levels) gens.emplace_back(space, XReal(c));
  if (gens.empty()) throw ValidationError("benchmark family has no generators at t");

  const int n = static_cast<int>(gens.size());
  const int k = space.n_atoms(t);
  if (static_cast<long long>(n) * k > 1'000'000)
    throw ValidationError("benchmark localization cap exceeded");

  // patchings 1_A Y1 + 1_{A^c} Y2 over F_t-sets A, deduplicated
  auto patch_set = [&](const RandomVar& y1, const RandomVar& y2, unsigned mask) {
    RandomVar v = y2;
    for (int a = 0; a < k; ++a)
      if (mask >> a & 1)
        for (int idx : space.atoms(t)[a]) v[idx] = y1[idx];
    return v;
  };
  std::vector<RandomVar> out;
  auto push_unique = [&](RandomVar v) {
    for (const auto& u : out)
      if (u == v) return;
    out.push_back(std::move(v));
  };

  const double combos = std::pow(2.0, k) * n * n;
  if (k <= 16 && combos <= 4.0 * max_out) {
    for (unsigned mask = 0; mask < (1u << k); ++mask)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          push_unique(patch_set(gens[i], gens[j], mask));
          if (static_cast<int>(out.size()) >= max_out) return out;
        }
  } else {
    for (const auto& g : gens) {
      push_unique(g);
      if (static_cast<int>(out.size()) >= max_out) return out;
    }
    while (static_cast<int>(out.size()) < max_out) {
      const unsigned mask = static_cast<unsigned>(rng() % (1ull << std::min(k, 30)));
      push_unique(patch_set(gens[rng() % n], gens[rng() % n], mask));
    }
  }
  return out;
}

UpdateRule rule_from_benchmark(const DynamicMeasure& phi, const BenchmarkFamily& y,
                               Direction dir) {
  if (phi.kind() != InputKind::Variable)
    throw ValidationError("benchmark rules are defined for variable measures");
  const std::string nm = "benchmark[" + y.name + "]";
  UpdateRule::Flags f;
  f.s_invariant = false;
  return UpdateRule::plain(nm, f, [phi, y, dir](const RandomVar& m, int t, int s) {
    const FilteredSpace& sp = m.space();
    RandomVar out(sp, dir == Direction::Acceptance ? XReal::neg_inf() : XReal::pos_inf());

    std::vector<RandomVar> phis_s, phis_t;
    phis_s.reserve(y.generators.size());
    phis_t.reserve(y.generators.size());
    for (const auto& c : y.generators) {
      phis_s.push_back(phi(c, s));
      phis_t.push_back(phi(c, t));
    }

    for (int a = 0; a < sp.n_atoms(t); ++a) {
      XReal best = dir == Direction::Acceptance ? XReal::neg_inf() : XReal::pos_inf();
      for (size_t i = 0; i < y.generators.size(); ++i) {
        bool ok = true;
        for (int idx : sp.atoms(t)[a]) {
          const bool dominated = dir == Direction::Acceptance ? phis_s[i][idx] <= m[idx]
                                                              : phis_s[i][idx] >= m[idx];
          if (!dominated) { ok = false; break; }
        }
        if (!ok) continue;
        XReal v = phis_t[i].at_atom(t, a);
        best = dir == Direction::Acceptance ? xmax(best, v) : xmin(best, v);
      }
      if (y.all_constants) {
        // the symbolic constants contribute sup{phi_t(c) : c below the
        // atom level} (resp. inf above), realized at the extreme level
        XReal lvl = m[sp.atoms(t)[a].front()];
        for (int idx : sp.atoms(t)[a])
          lvl = dir == Direction::Acceptance ? xmin(lvl, m[idx]) : xmax(lvl, m[idx]);
        XReal cv;
        if (!lvl.is_finite()) {
          cv = lvl;
        } else {
          cv = phi(RandomVar(sp, lvl), t).at_atom(t, a);
        }
        best = dir == Direction::Acceptance ? xmax(best, cv) : xmin(best, cv);
      }
      for (int idx : sp.atoms(t)[a]) out[idx] = best;
    }
    return out;
  });
}

// ---------------------------------------------------------------------------
// Rule axioms
// ---------------------------------------------------------------------------

PropertyVerdict check_rule_axioms(const UpdateRule& mu, const FilteredSpace& sp, long trials,
                                  unsigned long long seed) {
  PropertyVerdict v{"rule_axioms", true, trials, seed, ""};
  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
    auto [t, s] = sample_t_s(sp, rng);
    if (mu.flags().one_step_only) s = t + 1;
    const AdaptedProcess ctx = sample_process(sp, rng);
    RandomVar m = (rng() % 4 == 0) ? sample_rv_extended(sp, rng) : sample_rv(sp, rng);

    const RandomVar lhs = mu.apply(m, t, s, ctx);

    // locality over a random F_t atom
    const int a = uniform_int(rng, 0, sp.n_atoms(t) - 1);
    const RandomVar rhs = mu.apply(indicator(sp, t, a) * m, t, s, ctx);
    for (int k : sp.atoms(t)[a])
      if (abs_gap(lhs[k], rhs[k]) > 1e-9) {
        v.pass = false;
        v.detail = "locality violated at trial " + std::to_string(i);
        return v;
      }

    // monotonicity
    RandomVar bump = sample_rv(sp, rng).apply([](XReal b) { return xmax(b, XReal(0.0)); });
    const RandomVar up = mu.apply(m + bump, t, s, ctx);
    for (int k = 0; k < sp.n_terminal(); ++k)
      if (gap_below(up[k], lhs[k]) > 1e-9) {
        v.pass = false;
        v.detail = "monotonicity violated at trial " + std::to_string(i);
        return v;
      }
  }
  return v;
}

PropertyVerdict check_projective(const UpdateRule& mu, const FilteredSpace& sp, long trials,
                                 unsigned long long seed) {
  PropertyVerdict v{"projective", true, trials, seed, ""};
  for (long i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed ^ 0x517, static_cast<std::uint64_t>(i));
    const int t = uniform_int(rng, 0, sp.horizon() - 1);
    const int s = mu.flags().one_step_only ? t + 1 : uniform_int(rng, t + 1, sp.horizon());
    const AdaptedProcess ctx = AdaptedProcess::zero(sp);
    const RandomVar m = sample_rv_measurable(sp, t, rng);
    const RandomVar r = mu.apply(m, t, s, ctx);
    for (int k = 0; k < sp.n_terminal(); ++k)
      if (abs_gap(r[k], m[k]) > 1e-9) {
        v.pass = false;
        v.detail = "mu_t(m) != m at trial " + std::to_string(i) + ": " + r[k].str() +
                   " vs " + m[k].str();
        return v;
      }
  }
  return v;
}

} // namespace dlm
