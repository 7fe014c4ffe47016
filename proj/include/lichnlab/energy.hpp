#pragma once

// Energy functional J, the H^1 inner product <.,.>_h, the reduced energy
// I_k(t,p) = J(u0 + W) with its I1/I2/I3 decomposition, the residual R and
// the expansion checker against the limit map H(t,p).
//
// All sphere integrals are one-dimensional radial quadratures in the bubble
// chart (p = 0) or two-dimensional axisymmetric quadratures (p != 0 with the
// bubble center on the bump axis).  The quadratic-remainder integrands
//   g-(W) = (1+W)^{-2*} - 1 + 2* W      (enters I2)
//   g+(W) = (1+W)^{+2*} - 1 - 2* W      (enters I3)
// are evaluated by a binomial series for small W to avoid catastrophic
// cancellation on the deep rungs of the epsilon ladder.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fields.hpp"
#include "quad.hpp"

namespace lichnlab {

struct QuadratureSpec {
  real relTol = 1e-13L;
  real gradeFactor = 1e-3L;  // innermost panel scale = delta * gradeFactor
  real thetaInner = 1e-6L;   // panel grading scale for whole-sphere integrals
  int maxPanels = 4000;
};

// ---------------------------------------------------------------------------
// quadratic remainders of the two nonlinear terms
// ---------------------------------------------------------------------------

// (1+W)^a - 1 - a W  via series for small W (a any real), direct otherwise.
inline real pow_remainder(real a, real W) {
  if (std::fabs(W) < 1e-2L) {
    // sum_{k>=2} C(a,k) W^k, C(a,k) = a(a-1)...(a-k+1)/k!
    real coeff = a;        // C(a,1)
    real Wk = W;           // W^1
    real sum = 0;
    for (int k = 2; k <= 12; ++k) {
      coeff *= (a - (k - 1)) / k;
      Wk *= W;
      sum += coeff * Wk;
    }
    return sum;
  }
  return std::expm1(a * std::log1p(W)) - a * W;
}

// radial scalar field with analytic derivative, parametrized by theta
struct RadialFn {
  std::function<real(real)> val;  // u(theta)
  std::function<real(real)> d1;   // du/dtheta
};

// <u,v>_h = int (<grad u, grad v> + h u v) dv_g over the sphere, for radial
// fields about the bump center.
inline real inner_h(const ModelConfig& cfg, const RadialFn& u,
                    const RadialFn& v, const QuadratureSpec& q = {}) {
  const int n = cfg.dim.n;
  const real wn1 = sphere_volume(n - 1);
  auto integrand = [&](real th) {
    const real rho = Chart::rho_of_theta(th);
    const Coefficients k = coefficients_radial(cfg, rho);
    return (u.d1(th) * v.d1(th) + k.h * u.val(th) * v.val(th)) *
           std::pow(std::sin(th), (real)(n - 1));
  };
  return wn1 * integrate_graded(integrand, 0, (real)M_PIl, q.thetaInner,
                                q.relTol);
}

// J(u) for a radial field u (theta-parametrized) with derivative.
inline real energy_J(const ModelConfig& cfg, const RadialFn& u,
                     const QuadratureSpec& q = {}) {
  const int n = cfg.dim.n;
  const real ts = cfg.dim.twoStar;
  const real wn1 = sphere_volume(n - 1);
  const real eps = cfg.base.epsilonTrunc;
  auto integrand = [&](real th) {
    const real rho = Chart::rho_of_theta(th);
    const Coefficients k = coefficients_radial(cfg, rho);
    const real uv = u.val(th);
    const real up = uv > 0 ? uv : 0;
    const real du = u.d1(th);
    const real focus = k.f * std::pow(up, ts) / ts;
    const real defocus = k.piSq * std::pow(eta_truncate(eps, uv), -ts) / ts;
    return ((du * du + k.h * uv * uv) / 2 - focus + defocus) *
           std::pow(std::sin(th), (real)(n - 1));
  };
  return wn1 * integrate_graded(integrand, 0, (real)M_PIl, q.thetaInner,
                                q.relTol);
}

struct EnergyBreakdown {
  real J = 0;          // J(u0 + W) - J(u0), by the decomposition identity
  real I1 = 0, I2 = 0, I3 = 0;
  real residNorm = 0;    // ||R||_{L^{2n/(n+2)}}
  real residNormSq = 0;  // its square (the quantity with the o(eps) contract)
  real alphaBound = 0;   // (calcerr7) class: delta^{(n+2)/2} + alpha_{n,k}
                         // + eps^2 + (delta/r)^{n-2}, unit O-constants
  real minPiSq = 0;      // min pi^2 seen over the integration range;
                         // <= 0 marks a formally inadmissible rung
};

// I1/I2/I3 of (propener2) at p = 0 (bubble and bump share their center).
// I1 uses the exact conformal split: the c_n S_g part of the quadratic form
// equals the flat Dirichlet energy of the chart profile chi*U.
inline EnergyBreakdown reduced_energy_I123(const ModelConfig& cfg,
                                           const BubbleParams& bp,
                                           const QuadratureSpec& q = {}) {
  if (bp.p != 0)
    throw std::invalid_argument("reduced_energy_I123: use the p=0 entry point");
  const int n = cfg.dim.n;
  const real ts = cfg.dim.twoStar;
  const real wn1 = sphere_volume(n - 1);
  const Bubble B(cfg, bp);
  const real rhoMax = cfg.bump.chiOuter * bp.r;
  const real inner = bp.delta() * q.gradeFactor;

  EnergyBreakdown e;
  real minPiSq = cfg.base.piZeroSq;
  auto coeffs = [&](real rho) {
    const Coefficients k = coefficients_radial_raw(cfg, rho);
    if (k.piSq < minPiSq) minPiSq = k.piSq;
    return k;
  };
  // flat Dirichlet energy of chi*U
  e.I1 = 0.5L * wn1 *
         integrate_graded(
             [&](real rho) {
               const real d1 = B.flat_d1(rho);
               return d1 * d1 * std::pow(rho, (real)(n - 1));
             },
             0, rhoMax, inner, q.relTol);
  // + (1/2) int (h - c_n S_g) W^2 dv_g
  e.I1 += 0.5L * wn1 *
          integrate_graded(
              [&](real rho) {
                const Coefficients k = coeffs(rho);
                const real W = B.W(rho);
                return (k.h - cfg.base.cnSg) * W * W *
                       std::pow(rho, (real)(n - 1)) * cfg.chart().vol_weight(rho);
              },
              0, rhoMax, inner, q.relTol);
  e.I2 = wn1 / ts *
         integrate_graded(
             [&](real rho) {
               const Coefficients k = coeffs(rho);
               return k.piSq * pow_remainder(-ts, B.W(rho)) *
                      std::pow(rho, (real)(n - 1)) * cfg.chart().vol_weight(rho);
             },
             0, rhoMax, inner, q.relTol);
  e.I3 = wn1 / ts *
         integrate_graded(
             [&](real rho) {
               const Coefficients k = coeffs(rho);
               return k.f * pow_remainder(ts, B.W(rho)) *
                      std::pow(rho, (real)(n - 1)) * cfg.chart().vol_weight(rho);
             },
             0, rhoMax, inner, q.relTol);
  e.J = e.I1 + e.I2 - e.I3;
  e.minPiSq = minPiSq;

  // remainder-class bound (calcerr7), with unit constants; l.c.f.: alpha = 0
  const real dl = bp.delta();
  e.alphaBound = std::pow(dl, (real)(n + 2) / 2) + bp.epsilon * bp.epsilon +
                 std::pow(dl / bp.r, (real)(n - 2));
  return e;
}

// Axisymmetric 2-D reduction for p != 0: the bubble center y_k sits at
// geodesic distance aGeo = 2 atan(mu |p| / 2) from the bump center along a
// common axis; integration variables are (s, phi) around y_k.
inline EnergyBreakdown reduced_energy_I123_offset(const ModelConfig& cfg,
                                                  const BubbleParams& bp,
                                                  const QuadratureSpec& q = {}) {
  const int n = cfg.dim.n;
  const real ts = cfg.dim.twoStar;
  const real wn2 = sphere_volume(n - 2);
  const Bubble B(cfg, bp);
  const real aGeo = 2 * std::atan(bp.mu * std::fabs(bp.p) / 2);
  const real sMax = 2 * std::atan(cfg.bump.chiOuter * bp.r);  // theta(2r)
  const real inner = bp.delta() * q.gradeFactor;

  // angular average of a (s,phi)-integrand over the polar angle
  auto angular = [&](auto f, real s) {
    return integrate_adaptive(
        [&](real phi) {
          return f(s, std::cos(phi)) * std::pow(std::sin(phi), (real)(n - 2));
        },
        0, (real)M_PIl, 10 * q.relTol);
  };
  auto sphereInt = [&](auto f) {
    return wn2 * integrate_graded(
                     [&](real s) {
                       return angular(f, s) * std::pow(std::sin(s), (real)(n - 1));
                     },
                     0, sMax, inner, q.relTol);
  };

  EnergyBreakdown e;
  const real wn1 = sphere_volume(n - 1);
  e.I1 = 0.5L * wn1 *
         integrate_graded(
             [&](real rho) {
               const real d1 = B.flat_d1(rho);
               return d1 * d1 * std::pow(rho, (real)(n - 1));
             },
             0, cfg.bump.chiOuter * bp.r, inner, q.relTol);
  e.I1 += 0.5L * sphereInt([&](real s, real cphi) {
    const Coefficients k = coefficients_at_offset(cfg, aGeo, s, cphi);
    const real W = B.W(Chart::rho_of_theta(s));
    return (k.h - cfg.base.cnSg) * W * W;
  });
  e.I2 = 1 / ts * sphereInt([&](real s, real cphi) {
    const Coefficients k = coefficients_at_offset(cfg, aGeo, s, cphi);
    return k.piSq * pow_remainder(-ts, B.W(Chart::rho_of_theta(s)));
  });
  e.I3 = 1 / ts * sphereInt([&](real s, real cphi) {
    const Coefficients k = coefficients_at_offset(cfg, aGeo, s, cphi);
    return k.f * pow_remainder(ts, B.W(Chart::rho_of_theta(s)));
  });
  e.J = e.I1 + e.I2 - e.I3;
  const real dl = bp.delta();
  e.alphaBound = std::pow(dl, (real)(n + 2) / 2) + bp.epsilon * bp.epsilon +
                 std::pow(dl / bp.r, (real)(n - 2));
  return e;
}

inline EnergyBreakdown reduced_energy_Ik(const ModelConfig& cfg,
                                         const BubbleParams& bp,
                                         const QuadratureSpec& q = {}) {
  EnergyBreakdown e = (bp.p == 0) ? reduced_energy_I123(cfg, bp, q)
                                  : reduced_energy_I123_offset(cfg, bp, q);
  return e;
}

// ---------------------------------------------------------------------------
// residual R_{k,t,p} (p = 0) and its L^{2n/(n+2)} norm
// ---------------------------------------------------------------------------

// Pointwise residual at chart radius rho, using the exact conformal identity
// (Delta_g + c_n S_g)(Lambda v) = Lambda^{2*-1} Delta_e v and h = f + pi^2.
inline real residual_R(const ModelConfig& cfg, const BubbleParams& bp,
                       real rho) {
  const real ts = cfg.dim.twoStar;
  const Bubble B(cfg, bp);
  const Coefficients k = coefficients_radial_raw(cfg, rho);
  const real W = B.W(rho);
  if (1 + W <= cfg.base.epsilonTrunc)
    throw std::runtime_error("residual_R: eta truncation active");
  const real lam = cfg.chart().lambda(rho);
  const real conf = std::pow(lam, ts - 1) * B.flat_lap(rho);
  const real focus = k.f * (std::expm1((ts - 1) * std::log1p(W)));
  const real defocus = k.piSq * (std::expm1(-(ts + 1) * std::log1p(W)));
  return conf + (k.h - cfg.base.cnSg) * W - focus - defocus;
}

inline real residual_norm(const ModelConfig& cfg, const BubbleParams& bp,
                          const QuadratureSpec& q = {}) {
  const int n = cfg.dim.n;
  const real qexp = 2 * (real)n / (n + 2);
  const real wn1 = sphere_volume(n - 1);
  const real rhoMax = cfg.bump.chiOuter * bp.r;
  const real inner = bp.delta() * q.gradeFactor;
  const real integral =
      wn1 * integrate_graded(
                [&](real rho) {
                  const real R = residual_R(cfg, bp, rho);
                  return std::pow(std::fabs(R), qexp) *
                         std::pow(rho, (real)(n - 1)) *
                         cfg.chart().vol_weight(rho);
                },
                0, rhoMax, inner, q.relTol);
  return std::pow(integral, 1 / qexp);
}

// ---------------------------------------------------------------------------
// expansion checker
// ---------------------------------------------------------------------------

struct ExpansionReport {
  real epsilon = 0;
  real measured = 0;   // (I_k - J(u0) - K_n^{-n}/n)/eps
  real predicted = 0;  // H(t,p)
  real gap = 0;        // |measured - predicted|
  real I1 = 0, I2 = 0, I3 = 0;
  real residNormSq = 0;
  real minPiSq = 0;  // admissibility marker (see EnergyBreakdown)
};

// One ladder rung: build the config at (eps, mu = eps^muExp), measure.
inline ExpansionReport expansion_rung(int n, real M, real r, real t, real p,
                                      real eps, real muExp, real predicted,
                                      bool withResidual = false,
                                      const QuadratureSpec& q = {}) {
  ModelConfig cfg = make_config(n, M, eps, std::pow(eps, muExp));
  BubbleParams bp = make_bubble(cfg, r, t, p);
  EnergyBreakdown e = reduced_energy_Ik(cfg, bp, q);
  ExpansionReport rep;
  rep.epsilon = eps;
  const real KnInv = std::pow(cfg.dim.Kn, (real)-n);
  rep.measured = (e.J - KnInv / n) / eps;
  rep.predicted = predicted;
  rep.gap = std::fabs(rep.measured - predicted);
  rep.I1 = e.I1;
  rep.I2 = e.I2;
  rep.I3 = e.I3;
  rep.minPiSq = e.minPiSq;
  if (withResidual && p == 0) {
    const real rn = residual_norm(cfg, bp, q);
    rep.residNormSq = rn * rn;
  }
  return rep;
}

}  // namespace lichnlab
