#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "lichnlab/constants.hpp"
#include "lichnlab/schedule.hpp"

using namespace lichnlab;

TEST_CASE("dimension constants n=7 closed forms") {
  const DimensionConstants d = dimension_constants(7);
  CHECK(d.twoStar == doctest::Approx((double)((real)14 / 5)).epsilon(1e-18));
  CHECK(d.cN == doctest::Approx((double)((real)5 / 24)).epsilon(1e-18));
  // omega_7 = pi^4/3; Kn from (defKn); alpha_7 = 5^{7/2} 7^{5/2}
  CHECK((double)d.omegaN ==
        doctest::Approx((double)(std::pow((real)M_PIl, (real)4) / 3))
            .epsilon(1e-15));
  const real kn = std::sqrt(4 / (35 * std::pow(d.omegaN, (real)2 / 7)));
  CHECK((double)d.Kn == doctest::Approx((double)kn).epsilon(1e-15));
  CHECK((double)d.Kn == doctest::Approx(0.2056).epsilon(5e-4));
  const real a7 = std::pow((real)5, 3.5L) * std::pow((real)7, 2.5L);
  CHECK((double)d.alphaN == doctest::Approx((double)a7).epsilon(1e-15));
  CHECK((double)d.alphaN == doctest::Approx(3.624e4).epsilon(1e-3));
}

TEST_CASE("dimension constants invariants n=6..12") {
  for (int n = 6; n <= 12; ++n) {
    const DimensionConstants d = dimension_constants(n);
    CHECK(d.twoStar > 2);
    CHECK((double)d.twoStar ==
          doctest::Approx((double)((real)(2 * n) / (n - 2))).epsilon(1e-18));
    CHECK(d.Kn > 0);
    CHECK(d.alphaN > 0);
    CHECK(d.cN > 0);
    CHECK(d.cN < 0.25L);
  }
}

TEST_CASE("dimension constants rejects n < 6") {
  CHECK_THROWS(dimension_constants(2));
  CHECK_THROWS(dimension_constants(5));
}

TEST_CASE("base data identities") {
  for (int n = 6; n <= 12; ++n) {
    const BaseData b = base_data(n);
    CHECK((double)b.cnSg ==
          doctest::Approx((double)(n * (real)(n - 2) / 4)).epsilon(1e-18));
    CHECK(b.cnSg > 2);
    // base residual is an identity of construction
    CHECK((double)std::fabs(b.cnSg - 1 - b.piZeroSq) == 0.0);
    CHECK(b.piZeroSq > 1);
    CHECK(b.u0 == 1);
  }
  CHECK((double)base_data(6).cnSg == 6.0);
  CHECK((double)base_data(7).cnSg == 8.75);
}

TEST_CASE("eta truncation branches and properties") {
  CHECK((double)eta_truncate(0.1L, 0.05L) == 0.1);
  CHECK((double)eta_truncate(0.1L, 0.5L) == 0.5);
  CHECK((double)eta_truncate(0.1L, 0.1L) == 0.1);
  CHECK_THROWS(eta_truncate(0, 1));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int i = 0; i < 200; ++i) {
    const real u = U(rng), v = U(rng);
    // 1-Lipschitz and idempotent above eps
    CHECK(std::fabs(eta_truncate(0.1L, u) - eta_truncate(0.1L, v)) <=
          std::fabs(u - v) + 1e-18L);
    CHECK((double)eta_truncate(0.1L, eta_truncate(0.1L, u)) ==
          (double)eta_truncate(0.1L, u));
  }
}

TEST_CASE("schedule paper example entries") {
  Schedule s;
  s.n = 7;
  const ScheduleEntry e = schedule_at(s, 2);
  CHECK((double)e.epsilon ==
        doctest::Approx((double)std::pow((real)2, (real)-20)).epsilon(1e-18));
  CHECK((double)e.r ==
        doctest::Approx((double)std::pow((real)2, (real)-7 / 3))
            .epsilon(1e-18));
  CHECK((double)e.mu ==
        doctest::Approx((double)std::pow(e.epsilon, (real)0.4)).epsilon(1e-15));
  CHECK((double)e.xi == 0.5);
  CHECK_THROWS(schedule_at(s, 1));  // k < k0
}

TEST_CASE("schedule monotonicity and validation") {
  Schedule s;
  s.n = 7;
  ScheduleEntry prev = schedule_at(s, s.k0);
  for (int k = s.k0 + 1; k <= 20; ++k) {
    const ScheduleEntry e = schedule_at(s, k);
    CHECK(e.epsilon < prev.epsilon);
    CHECK(e.mu < prev.mu);
    CHECK(e.r < prev.r);
    prev = e;
  }
  CHECK(validate_schedule(s, 50).pass);
  CHECK_THROWS(validate_schedule(s, s.k0));

  // r_k = 1/k violates r_k = o(k^{-2})
  Schedule bad1 = s;
  bad1.rRule = [](int k) { return (real)1 / k; };
  CHECK_FALSE(validate_schedule(bad1, 50).pass);

  // mu_k = r_k^2 makes mu_k/r_k^3 diverge
  Schedule bad2 = s;
  bad2.muRule = [&](int k) {
    const real r = std::pow((real)k, (real)-7 / 3);
    return r * r;
  };
  CHECK_FALSE(validate_schedule(bad2, 50).pass);
}

TEST_CASE("n=6 schedule branch validates (condrk6)") {
  Schedule s;
  s.n = 6;
  s.n6 = true;
  CHECK(validate_schedule(s, 50).pass);
}
