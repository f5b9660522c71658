#include <doctest.h>

#include "dlm/cond_ops.hpp"
#include "dlm/density.hpp"
#include "dlm/sampling.hpp"
#include "lp_oracle.hpp"

using namespace dlm;

TEST_CASE("density family validation") {
  const FilteredSpace sp = make_tree4();
  CHECK_NOTHROW(DensityFamily::box(sp, 2.0));
  CHECK_NOTHROW(DensityFamily::singleton(sp));
  // a box excluding Z = 1 leaves the family empty or degenerate
  CHECK_THROWS_AS(DensityFamily::box(sp, 0.5), ValidationError);
  CHECK_THROWS_AS(DensityFamily::bounds(sp, {1.5, 0, 0, 0}, {2, 2, 2, 2}), ValidationError);
  CHECK_THROWS_AS(DensityFamily::bounds(sp, {-0.5, 0, 0, 0}, {2, 2, 2, 2}), ValidationError);
}

TEST_CASE("robust expectation fixtures") {
  const FilteredSpace sp = make_tree4();
  const RandomVar x(sp, {XReal(1), XReal(3), XReal(2), XReal(6)});
  const DensityFamily d = DensityFamily::box(sp, 2.0);  // alpha = 0.5

  const RandomVar v1 = min_conditional_expectation(d, x, 1);
  CHECK(v1[0] == XReal(1.0));
  CHECK(v1[2] == XReal(2.0));

  const RandomVar v0 = min_conditional_expectation(d, x, 0);
  CHECK(v0[0].value() == doctest::Approx(1.5).epsilon(1e-12));

  // degenerate box [1,1] reduces to the conditional expectation
  const DensityFamily one = DensityFamily::singleton(sp);
  CHECK(min_conditional_expectation(one, x, 1) == cond_expectation(x, 1));
  CHECK(max_conditional_expectation(one, x, 0) == cond_expectation(x, 0));
}

TEST_CASE("greedy solution matches the vertex-enumeration oracle") {
  for (std::uint64_t si = 0; si < 6; ++si) {
    const FilteredSpace sp = random_tree(200 + si, 3, 3);
    auto rng = trial_rng(19, si);
    for (long i = 0; i < 120; ++i) {
      RandomVar x(sp, XReal(0.0));
      for (int k = 0; k < sp.n_terminal(); ++k) x[k] = XReal(uniform(rng, -10, 10));

      // boxes [0, c] and general [lo, hi] around 1
      DensityFamily d = (i % 2 == 0)
                            ? DensityFamily::box(sp, 1.0 + uniform(rng, 0.1, 4.0))
                            : [&] {
                                std::vector<double> lo(sp.n_terminal()), hi(sp.n_terminal());
                                for (int k = 0; k < sp.n_terminal(); ++k) {
                                  lo[k] = uniform(rng, 0.0, 1.0);
                                  hi[k] = 1.0 + uniform(rng, 0.0, 3.0);
                                }
                                return DensityFamily::bounds(sp, lo, hi);
                              }();
      const int t = uniform_int(rng, 0, sp.horizon());
      const RandomVar fast = min_conditional_expectation(d, x, t);
      const RandomVar slow = dlm_test::robust_oracle(d, x, t, true);
      for (int k = 0; k < sp.n_terminal(); ++k)
        REQUIRE(std::abs(fast[k].value() - slow[k].value()) <= 1e-10);

      const RandomVar fmax = max_conditional_expectation(d, x, t);
      const RandomVar smax = dlm_test::robust_oracle(d, x, t, false);
      for (int k = 0; k < sp.n_terminal(); ++k)
        REQUIRE(std::abs(fmax[k].value() - smax[k].value()) <= 1e-10);
    }
  }
}

TEST_CASE("essinf as the wide-box limit of robust expectations") {
  for (std::uint64_t si = 0; si < 4; ++si) {
    const FilteredSpace sp = random_tree(300 + si, 2, 3);
    auto rng = trial_rng(23, si);
    const RandomVar x = sample_rv(sp, rng);
    for (int t = 0; t <= sp.horizon(); ++t) {
      const RandomVar lo = cond_essinf(x, t);
      const RandomVar m3 = min_conditional_expectation(DensityFamily::box(sp, 1e3), x, t);
      const RandomVar m6 = min_conditional_expectation(DensityFamily::box(sp, 1e6), x, t);
      for (int k = 0; k < sp.n_terminal(); ++k) {
        REQUIRE(m3[k] >= lo[k]);             // convergence from above
        REQUIRE(m6[k] >= lo[k]);
        REQUIRE(m6[k] <= m3[k]);             // monotone in the box bound
        REQUIRE(abs_gap(m6[k], lo[k]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("clamped robust expectation on extended inputs") {
  const FilteredSpace sp = make_tree4();
  const DensityFamily d = DensityFamily::box(sp, 2.0);

  // a -inf coordinate drags the minimum down; flagged as divergent
  RandomVar x(sp, {XReal(1), XReal::neg_inf(), XReal(2), XReal(6)});
  const ClampedRobust r = min_conditional_expectation_extended(d, x, 1);
  CHECK(r.diverged);
  CHECK(r.value[0] == XReal::neg_inf());
  CHECK(r.value[2].value() == doctest::Approx(2.0));

  // +inf is avoided by the minimizing density when the box floor is 0
  RandomVar y(sp, {XReal(1), XReal::pos_inf(), XReal(2), XReal(6)});
  const ClampedRobust r2 = min_conditional_expectation_extended(d, y, 1);
  CHECK_FALSE(r2.value[0].is_pos_inf());
  CHECK(r2.value[2].value() == doctest::Approx(2.0));
}
