#include <doctest.h>

#include <cmath>

#include "dlm/consistency.hpp"
#include "dlm/extensions.hpp"
#include "dlm/sampling.hpp"
#include "dlm/update_rules.hpp"

using namespace dlm;

TEST_CASE("rule constructors and flags") {
  CHECK(essinf_rule().flags().projective);
  CHECK(expectation_rule().flags().s_invariant);
  CHECK(density_rule(0.5).flags().projective);
  CHECK_FALSE(discount_rule(0.5).flags().projective);
  CHECK(discount_rule(0.5).flags().s_invariant);
  CHECK_THROWS_AS(density_rule(1.5), ValidationError);
  CHECK_THROWS_AS(discount_rule(0.0), ValidationError);
  CHECK_THROWS_AS(make_rule("nope", 0.5), ValidationError);
}

TEST_CASE("density rules reduce and evaluate as robust expectations") {
  const FilteredSpace sp = make_tree4();
  const RandomVar m(sp, {XReal(1), XReal(3), XReal(2), XReal(6)});

  // singleton density box reproduces the conditional expectation
  const UpdateRule one = density_rule(DensityFamily::singleton(sp));
  CHECK(one.apply(m, 1, 2) == cond_expectation(m, 1));

  const UpdateRule half = density_rule(0.5);
  const RandomVar r = half.apply(m, 1, 2);
  CHECK(r[0] == XReal(1.0));
  CHECK(r[2] == XReal(2.0));
}

TEST_CASE("discount rule weights preferences by the horizon gap") {
  const FilteredSpace sp = make_tree4();
  const UpdateRule d = discount_rule(0.5);
  const RandomVar four(sp, XReal(4.0));
  CHECK(d.apply(four, 0, 1)[0] == XReal(2.0));   // alpha^{s-t} E[m] on {E >= 0}
  CHECK(d.apply(four, 0, 2)[0] == XReal(1.0));
  const RandomVar negfour(sp, XReal(-4.0));
  CHECK(d.apply(negfour, 0, 1)[0] == XReal(-8.0));  // alpha^{t-s} E[m] on {E < 0}

  // not projective: mu_t(4) = 2 != 4
  const PropertyVerdict pv = check_projective(d, sp, 200, 3);
  CHECK_FALSE(pv.pass);
}

TEST_CASE("constructed rules satisfy locality and monotonicity") {
  const FilteredSpace sp = make_tree4();
  for (const UpdateRule& mu : {essinf_rule(), esssup_rule(), expectation_rule(),
                               density_rule(0.5), discount_rule(0.5), entropic_rule(1.0)})
    CHECK(check_rule_axioms(mu, sp, 10000, 5).pass);

  const FilteredSpace rt = random_tree(505, 3, 3);
  for (const UpdateRule& mu : {essinf_rule(), expectation_rule(), density_rule(0.25)})
    CHECK(check_rule_axioms(mu, rt, 3000, 5).pass);
}

TEST_CASE("projectivity of the catalog rules") {
  const FilteredSpace sp = make_tree4();
  CHECK(check_projective(essinf_rule(), sp, 2000, 7).pass);
  CHECK(check_projective(esssup_rule(), sp, 2000, 7).pass);
  CHECK(check_projective(expectation_rule(), sp, 2000, 7).pass);
  CHECK(check_projective(density_rule(0.5), sp, 2000, 7).pass);
  CHECK(check_projective(entropic_rule(1.0), sp, 2000, 7).pass);
}

TEST_CASE("benchmark localization") {
  const FilteredSpace sp = make_tree4();
  auto rng = trial_rng(11, 0);

  const BenchmarkFamily zero = BenchmarkFamily::zero(sp);
  CHECK(benchmark_localize(zero, sp, 1, 64, rng).size() == 1);

  const BenchmarkFamily two = BenchmarkFamily::finite(
      "01", {RandomVar(sp, XReal(0.0)), RandomVar(sp, XReal(1.0))});
  const auto loc = benchmark_localize(two, sp, 1, 64, rng);
  CHECK(loc.size() == 4);  // atom-wise assignments over the two F_1 atoms
  bool has_mixed = false;
  for (const auto& y : loc)
    if (y[0] == XReal(1.0) && y[2] == XReal(0.0)) has_mixed = true;
  CHECK(has_mixed);

  // localized constants are F_t-step functions
  const auto steps = benchmark_localize(BenchmarkFamily::constants(), sp, 1, 256, rng);
  for (const auto& y : steps) CHECK(y.is_measurable(1));
}

TEST_CASE("benchmark-induced update rule") {
  const FilteredSpace sp = make_tree4();
  const DynamicMeasure ent = entropic_measure(1.0);

  // constants benchmark: for a cash-additive measure the induced rule is
  // the conditional essential infimum on grid-valued levels
  const UpdateRule mu = rule_from_benchmark(ent, BenchmarkFamily::constants(),
                                            Direction::Acceptance);
  RandomVar m(sp, {XReal(-1), XReal(2), XReal(5), XReal(0.5)});
  const RandomVar r = mu.apply(m, 1, 2);
  CHECK(r[0] == XReal(-1.0));
  CHECK(r[2] == XReal(0.5));

  // with a finite generating list, a level below every benchmark leaves
  // an empty dominated set: -inf
  const UpdateRule mu01 = rule_from_benchmark(
      ent, BenchmarkFamily::finite("01", {RandomVar(sp, XReal(0.0)), RandomVar(sp, XReal(1.0))}),
      Direction::Acceptance);
  RandomVar low(sp, XReal(-1e6));
  CHECK(mu01.apply(low, 1, 2)[0] == XReal::neg_inf());

  // dense full-space benchmark squeezes the rule toward the extension
  const UpdateRule full = rule_from_benchmark(
      ent, BenchmarkFamily::full_space(sp, 512, 77), Direction::Acceptance);
  const UpdateRule ext = rule_from_extension(ent, ExtensionSide::Lower);
  auto rng = trial_rng(13, 1);
  for (int i = 0; i < 20; ++i) {
    RandomVar lvl(sp, XReal(0.0));
    for (int k = 0; k < sp.n_terminal(); ++k) lvl[k] = XReal(uniform(rng, -6.0, 6.0));
    const RandomVar a = full.apply(lvl, 0, 2);
    const RandomVar b = ext.apply(lvl, 0, 2);
    for (int k = 0; k < sp.n_terminal(); ++k) {
      REQUIRE(a[k] <= xreal_add(b[k], XReal(1e-9)));  // dominated side stays below
      REQUIRE(gap_below(a[k], b[k]) <= 1.5);          // and not far below
    }
  }
}

TEST_CASE("nested composition") {
  const FilteredSpace sp = make_tree4();
  auto rng = trial_rng(17, 0);
  const RandomVar m = sample_rv(sp, rng);

  const UpdateRule nexp = nested_compose(expectation_rule());
  CHECK(abs_gap(nexp.apply(m, 0, 2)[0], cond_expectation(m, 0)[0]) <= 1e-12);

  const UpdateRule ninf = nested_compose(essinf_rule());
  CHECK(ninf.apply(m, 0, 2) == cond_essinf(m, 0));

  // discount composed over two steps differs from the direct two-step
  // application on sign-mixed levels
  const UpdateRule disc = discount_rule(0.5);
  const UpdateRule ndisc = nested_compose(disc);
  const RandomVar mixed(sp, {XReal(10), XReal(10), XReal(-10), XReal(-10)});
  const RandomVar direct = disc.apply(mixed, 0, 2);
  const RandomVar composed = ndisc.apply(mixed, 0, 2);
  CHECK(abs_gap(direct[0], composed[0]) > 1e-9);
}

TEST_CASE("lifting variable rules to processes") {
  const FilteredSpace sp = make_tree4();
  auto id = [](XReal v) { return v; };
  const UpdateRule weak = process_rule_from_rv_rule(essinf_rule(), id, "id");

  auto rng = trial_rng(19, 0);
  const AdaptedProcess v = sample_process(sp, rng);
  const RandomVar m = sample_rv(sp, rng);
  const RandomVar got = weak.apply(m, 1, 2, v);
  const RandomVar want = cond_essinf(m, 1) + v[1];
  CHECK(got == want);

  // f = 0 ignores the dividend
  const UpdateRule flat = process_rule_from_rv_rule(essinf_rule(),
                                                    [](XReal) { return XReal(0.0); }, "0");
  CHECK(flat.apply(m, 1, 2, v) == cond_essinf(m, 1));

  // zero dividend reduces to the base rule
  CHECK(weak.apply(m, 1, 2, AdaptedProcess::zero(sp)) == cond_essinf(m, 1));

  CHECK_THROWS_AS(process_rule_from_rv_rule(essinf_rule(),
                                            [](XReal) { return XReal(1.0); }, "bad"),
                  ValidationError);
}

TEST_CASE("backward composition") {
  const FilteredSpace sp = make_tree4();
  auto rng = trial_rng(23, 0);

  const DynamicMeasure mexp = compose_measure_backward_variable(expectation_rule());
  const DynamicMeasure minf = compose_measure_backward_variable(essinf_rule());
  for (int i = 0; i < 50; ++i) {
    const RandomVar x = sample_rv(sp, rng);
    const int t = uniform_int(rng, 0, 2);
    const RandomVar a = mexp(x, t), b = cond_expectation(x, t);
    for (int k = 0; k < sp.n_terminal(); ++k) REQUIRE(abs_gap(a[k], b[k]) <= 1e-12);
    REQUIRE(minf(x, t) == cond_essinf(x, t));
  }

  // entropic one-step rule composes back to the entropic measure
  const DynamicMeasure from_rule = compose_measure_backward_variable(entropic_rule(1.0));
  const DynamicMeasure closed = entropic_measure(1.0);
  for (std::uint64_t i = 0; i < 100; ++i) {
    auto r2 = trial_rng(29, i);
    const RandomVar x = sample_rv(sp, r2);
    const int t = uniform_int(r2, 0, 2);
    const RandomVar a = from_rule(x, t), b = closed(x, t);
    for (int k = 0; k < sp.n_terminal(); ++k) REQUIRE(abs_gap(a[k], b[k]) <= 1e-9);
  }

  // the composed measure is strongly time consistent by construction
  CHECK(check_strong(from_rule, sp, 500, 31).pass);

  // process variant: terminal dividend plus recursion
  const DynamicMeasure pexp = compose_measure_backward_process(expectation_rule());
  const AdaptedProcess v = sample_process(sp, rng);
  const RandomVar direct = pexp(v, 0);
  const RandomVar manual = cond_expectation(v.tail_sum(0), 0);
  for (int k = 0; k < sp.n_terminal(); ++k) REQUIRE(abs_gap(direct[k], manual[k]) <= 1e-12);
  CHECK(check_strong_process(pexp, sp, 400, 31).pass);
}

TEST_CASE("concave transforms preserve density-rule acceptance consistency") {
  const FilteredSpace sp = make_tree4();
  const UpdateRule mu = density_rule(0.5);

  const DynamicMeasure ent = entropic_measure(1.0);
  const DynamicMeasure capped = DynamicMeasure::variable("cap[entropic]",
      [ent](const RandomVar& x, int t) {
        return ent(x, t).apply([](XReal v) { return xmin(v, XReal(2.0)); });
      });
  const DynamicMeasure exped = DynamicMeasure::variable("negexp[entropic]",
      [ent](const RandomVar& x, int t) {
        return ent(x, t).apply([](XReal v) {
          if (v.is_pos_inf()) return XReal(0.0);
          if (v.is_neg_inf()) return XReal::neg_inf();
          return XReal(-std::exp(-v.value()));
        });
      });

  const ConsistencyVerdict base_v = check_mu_tc(ent, mu, sp, Direction::Acceptance, 3000, 37);
  REQUIRE(base_v.pass);
  CHECK(check_mu_tc(capped, mu, sp, Direction::Acceptance, 3000, 37).pass);
  CHECK(check_mu_tc(exped, mu, sp, Direction::Acceptance, 3000, 37).pass);
}
