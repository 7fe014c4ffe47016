#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "lichnlab/fields.hpp"
#include "lichnlab/solver.hpp"

using namespace lichnlab;

TEST_CASE("beta cutoff: plateau, support, transition") {
  BumpSpec b;
  b.M = 10;
  CHECK((double)beta_eval(b, 3) == 1.0);
  CHECK((double)beta_eval(b, -10) == 1.0);
  CHECK((double)beta_eval(b, 12) == 0.0);
  const real mid = beta_eval(b, 10.5L);
  CHECK(mid > 0);
  CHECK(mid < 1);
  // chosen mollifier: exp(1 - 1/(1 - u^2)) at u = 0.5
  CHECK((double)mid ==
        doctest::Approx((double)std::exp(1 - 1 / (1 - 0.25L))).epsilon(1e-15));
}

TEST_CASE("chi cutoff: plateau and support") {
  BumpSpec b;
  CHECK((double)chi_eval(b, 0.5L) == 1.0);
  CHECK((double)chi_eval(b, 1) == 1.0);
  CHECK((double)chi_eval(b, 2) == 0.0);
  CHECK(chi_eval(b, 1.5L) > 0);
  CHECK(chi_eval(b, 1.5L) < 1);
  // monotone on [1,2]
  real prev = 1;
  for (real s = 1; s <= 2; s += 0.05L) {
    CHECK(chi_eval(b, s) <= prev + 1e-18L);
    prev = chi_eval(b, s);
  }
}

TEST_CASE("Psi radial profile") {
  BumpSpec b;
  b.M = 10;
  CHECK((double)psi_radial(b, 0) == 0.0);
  CHECK((double)psi_radial(b, 2) == -4.0);  // |x|^2 = 4 on the plateau
  CHECK((double)psi_radial(b, std::sqrt((real)11)) == 0.0);  // support edge
  // derivative consistency (Richardson central differences)
  for (real rho : {0.5L, 2.0L, 3.2L}) {
    const real h = 1e-5L;
    auto d = [&](real hh) {
      return (psi_radial(b, rho + hh) - psi_radial(b, rho - hh)) / (2 * hh);
    };
    const real fd = (4 * d(h / 2) - d(h)) / 3;
    CHECK((double)psi_radial_d1(b, rho) ==
          doctest::Approx((double)fd).epsilon(1e-9));
  }
}

TEST_CASE("chart exactness") {
  Chart ch{7};
  // rho = 2 tan(theta/2) round trip and endpoints
  for (real th : {0.1L, 0.7L, 1.5L, 2.9L}) {
    CHECK((double)Chart::theta_of_rho(Chart::rho_of_theta(th)) ==
          doctest::Approx((double)th).epsilon(1e-17));
  }
  CHECK((double)ch.lambda(0) == 1.0);
  // pullback metric is exactly Euclidean in the normalized chart
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.01, 3.0);
  for (int i = 0; i < 50; ++i) {
    const real rho = Chart::rho_of_theta(U(rng));
    CHECK(std::fabs(ch.pullback_metric_ratio(rho) - 1) < 1e-14L);
  }
  // Lambda formula and gradient at the center
  CHECK((double)ch.lambda(0.5L) ==
        doctest::Approx((double)std::pow(1.0625L, 2.5L)).epsilon(1e-17));
  CHECK((double)ch.lambda_drho(0) == 0.0);
}

TEST_CASE("psi0 window: disjointness and single-term evaluation") {
  ModelConfig c = make_config(7, 10, 1e-3L, 1e-2L);
  BumpWindow w;
  w.thetaC = {0.5L, 0.6L};
  w.epsJ = {1e-3L, 1e-4L};
  w.muJ = {1e-2L, 1e-2L};
  // far point: all bumps vanish
  CHECK((double)psi0_axis(c, w, 1.5L) == 0.0);
  // bump center: Psi(0) = 0
  CHECK((double)psi0_axis(c, w, 0.5L) == 0.0);
  // on the plateau of bump 0: -eps |z|^2, cross terms vanish
  const real z = 2;  // |z|^2 = 4 <= M
  const real thetaX = Chart::theta_of_rho(Chart::rho_of_theta(0.5L));
  const real x = thetaX + 0;  // move along axis by mu*z in chart distance
  (void)x;
  const real d = w.muJ[0] * z;
  const real probe = 0.5L + 2 * std::atan(d / 2);  // theta with chart dist d
  CHECK((double)psi0_axis(c, w, probe) ==
        doctest::Approx((double)(-w.epsJ[0] * z * z)).epsilon(1e-15));
  // overlapping supports must be rejected
  BumpWindow bad = w;
  bad.thetaC = {0.5L, 0.51L};
  CHECK_THROWS(psi0_axis(c, bad, 1.0L));
}

TEST_CASE("coefficients: base values and the algebraic identity") {
  ModelConfig c = make_config(7, 20, 1e-4L, 0.025L);
  // outside the bump support: unperturbed coefficients
  const real far = 3;  // rho far outside mu*sqrt(M+1)
  const Coefficients base = coefficients_radial(c, far);
  CHECK((double)base.h == doctest::Approx(8.75).epsilon(1e-18));
  CHECK((double)base.f == 1.0);
  CHECK((double)base.piSq == doctest::Approx(7.75).epsilon(1e-18));
  // at the bump center Psi0 and its gradient vanish
  const Coefficients ctr = coefficients_radial(c, 0);
  CHECK((double)ctr.h == 8.75);
  CHECK((double)ctr.f == 1.0);
  // identity h = f + piSq at every sample (u0 == 1 stays an exact solution)
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0, 0.2);
  for (int i = 0; i < 100; ++i) {
    const Coefficients k = coefficients_radial_raw(c, U(rng));
    CHECK(std::fabs(k.h - k.f - k.piSq) < 1e-15L);
  }
  // aggressive schedule trips the strict accessor
  ModelConfig hot = make_config(7, 20, 0.5L, 0.1L);
  CHECK_THROWS(coefficients_radial(hot, 0.12L));
}

TEST_CASE("bubble ansatz values") {
  ModelConfig c = make_config(7, 20, 1e-4L, 0.025L);
  BubbleParams bp = make_bubble(c, 0.5L, 1);
  const Bubble B(c, bp);
  const real delta = bp.delta();
  // W at the center: delta^{-(n-2)/2}
  CHECK((double)B.W(0) ==
        doctest::Approx((double)std::pow(delta, -2.5L)).epsilon(1e-15));
  // zero outside the cutoff
  CHECK((double)B.W(2 * bp.r) == 0.0);
  CHECK((double)B.W(1.5L) == 0.0);
  // V0(0) = -1 and Z0 center value
  CHECK((double)V0_eval(7, 1, 0) == -1.0);
  CHECK((double)B.Z0(0) ==
        doctest::Approx((double)-std::pow(delta, -2.5L)).epsilon(1e-15));
}

TEST_CASE("kernel identity dW/dt = ((n-2)/2t) Z0 (Richardson FD)") {
  ModelConfig c = make_config(7, 20, 1e-4L, 0.025L);
  const real r = 0.5L, t = 0.8L;
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> U(0, 1);
  real worst = 0;
  for (int i = 0; i < 20; ++i) {
    // bias sampling toward the bubble core where Z0 is largest
    const real rho = (i % 2 == 0) ? c.mu * t * 3 * U(rng)
                                  : 2 * r * U(rng);
    auto Wat = [&](real tt) {
      BubbleParams b = make_bubble(c, r, tt);
      return Bubble(c, b).W(rho);
    };
    const real h = 1e-4L * t;
    auto d = [&](real hh) { return (Wat(t + hh) - Wat(t - hh)) / (2 * hh); };
    const real fd = (4 * d(h / 2) - d(h)) / 3;
    BubbleParams b = make_bubble(c, r, t);
    const Bubble B(c, b);
    const real z0 = B.Z0(rho);
    if (z0 == 0) continue;
    worst = std::max(worst, std::fabs(fd - (real)2.5 / t * z0) /
                                std::fabs(z0));
    CHECK((double)B.dW_dt(rho) ==
          doctest::Approx((double)((real)2.5 / t * z0)).epsilon(1e-18));
  }
  CHECK(worst < 1e-7L);
}

TEST_CASE("graded grid resolves the bubble scale") {
  const real delta = 1e-4L;
  const Grid g = make_grid(7, delta);
  int below = 0;
  for (real th : g.theta)
    if (th <= delta) ++below;
  CHECK(below >= 12);
  for (size_t i = 1; i < g.theta.size(); ++i) CHECK(g.theta[i] > g.theta[i - 1]);
}
