#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "lichnlab/n6.hpp"
#include "lichnlab/reduced.hpp"

using namespace lichnlab;

TEST_CASE("A_n Beta oracle, n = 7..12") {
  for (int n = 7; n <= 12; ++n) {
    const real closed = An_closed_form(n);
    const real quad = An_quadrature(n);
    CHECK(std::fabs(quad - closed) / closed < 1e-10L);
  }
  // the n=7 value quoted alongside (deft0)
  CHECK((double)An_closed_form(7) == doctest::Approx(3.15e6).epsilon(2e-3));
}

TEST_CASE("t0 closed form: positivity and root property") {
  for (int n = 7; n <= 12; ++n) {
    ReducedEnergySpec s;
    s.n = n;
    const real t0 = t0_closed_form(s);
    CHECK(t0 > 0);
    // (deft0): ((n-2)/2) alpha_n omega_{n-1} t0^{(n-6)/2} = (2/2*) A_n
    const DimensionConstants d = dimension_constants(n);
    const real lhs = (real)(n - 2) / 2 * d.alphaN * sphere_volume(n - 1) *
                     std::pow(t0, (real)(n - 6) / 2);
    const real rhs = 2 / d.twoStar * An_closed_form(n);
    CHECK(std::fabs(lhs - rhs) / rhs < 1e-14L);
  }
}

TEST_CASE("Hred gradient matches Richardson finite differences") {
  ReducedEnergySpec s;
  s.n = 7;
  s.bump.M = 20;
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(0.1, 1.2);
  for (int i = 0; i < 10; ++i) {
    const real t = U(rng);
    auto d = [&](real hh) {
      return (Hred_eval(s, t + hh, 0) - Hred_eval(s, t - hh, 0)) / (2 * hh);
    };
    const real h = 1e-4L * t;
    const real fd = (4 * d(h / 2) - d(h)) / 3;
    CHECK(std::fabs(Hred_dt(s, t) - fd) / std::fabs(fd) < 1e-6L);
  }
}

TEST_CASE("H is even in p (radial symmetry of Psi)") {
  ReducedEnergySpec s;
  s.n = 7;
  s.bump.M = 20;
  for (real p : {0.1L, 0.3L, 0.6L}) {
    const real plus = Hred_eval(s, 0.5L, p);
    const real minus = Hred_eval(s, 0.5L, -p);
    CHECK((double)plus == doctest::Approx((double)minus).epsilon(1e-12));
  }
}

TEST_CASE("critical point at M = 20: saddle signature") {
  ReducedEnergySpec s;
  s.n = 7;
  s.bump.M = 20;
  const CriticalPoint cp = find_critical(s);
  CHECK(cp.tM > 0);
  CHECK(cp.hessTT < 0);
  CHECK(cp.hessPP > 0);
  CHECK(cp.signatureOk);
  // gradient vanishes at scale
  CHECK(std::fabs(cp.gradAtRoot) / (std::fabs(cp.hessTT) * cp.tM) < 1e-10L);
}

TEST_CASE("t_M plateau consistency: M = 10, 20, 40 approaches t0") {
  ReducedEnergySpec s;
  s.n = 7;
  const real t0 = t0_closed_form(s);
  real prevGap = 1e300L;
  for (real M : {10.0L, 20.0L, 40.0L}) {
    s.bump.M = M;
    const CriticalPoint cp = find_critical(s);
    const real gap = std::fabs(cp.tM - t0);
    CHECK(gap < prevGap);
    prevGap = gap;
  }
}

TEST_CASE("p-block Hessian approaches (2/2*) Kn^{-n} for large M") {
  ReducedEnergySpec s;
  s.n = 7;
  const real KnInv = std::pow(dimension_constants(7).Kn, (real)-7);
  const real target = 2 / dimension_constants(7).twoStar * KnInv;
  real prevGap = 1e300L;
  for (real M : {50.0L, 200.0L, 800.0L}) {
    s.bump.M = M;
    const CriticalPoint cp = find_critical(s);
    const real gap = std::fabs(cp.hessPP - target);
    CHECK(gap < prevGap);
    prevGap = gap;
  }
  CHECK(prevGap / target < 0.15L);
}

TEST_CASE("n6 fit: structure, residual, cross-validation") {
  N6Config c;
  const N6Report rep = n6_fit_report(c, 1e-3L);
  CHECK(rep.fit.C0 > 0);
  CHECK(rep.fit.A < 0);
  // t^2 coefficient approaches -1152 pi^3 (that is -5 H(0) in paper units)
  const real a2 = -1152 * std::pow((real)M_PIl, (real)3);
  CHECK(std::fabs(rep.fit.A - a2) / std::fabs(a2) < 0.05L);
  CHECK(rep.fit.residRel < 0.05L);
  CHECK(rep.t0RelGap < 0.02L);
  CHECK((double)rep.fit.t0 ==
        doctest::Approx((double)(10 / (3 * c.a0 * rep.fit.C0)))
            .epsilon(1e-12));
  // bad data is rejected
  CHECK_THROWS(reduced_n6_fit(7, {0.1L, 0.2L, 0.3L}, {1.0L, 2.0L, 3.0L}));
}
