#pragma once

// Gram structure of the kernel elements: <Z_i, Z_j>_h against the flat
// reference norms ||grad V_i||^2_{L^2(R^n)} in the delta/r -> 0 limit.
//
// By rotational symmetry the (n+1) x (n+1) Gram matrix has three distinct
// entries: <Z_0,Z_0>, <Z_i,Z_i> (common for i >= 1) and <Z_0,Z_i>; all
// i,j >= 1 cross terms carry the angular moment <Omega_i Omega_j> = 0.  The
// angular moments are evaluated by quadrature (not substituted analytically)
// so the off-diagonal cancellation is measured, not assumed.

#include <cmath>

#include "chart.hpp"
#include "energy.hpp"
#include "fields.hpp"
#include "quad.hpp"

namespace lichnlab {

namespace detail {

// Richardson-extrapolated central derivative with a positivity guard.
template <class F>
real fd_d1(const F& f, real x, real scale) {
  const real h = std::min(1e-4L * scale, x / 2);
  auto d = [&](real hh) { return (f(x + hh) - f(x - hh)) / (2 * hh); };
  return (4 * d(h / 2) - d(h)) / 3;
}

}  // namespace detail

struct GramReport {
  real g00 = 0, g11 = 0, g01 = 0;  // representative <Z_i,Z_j>_h entries
  real v0NormSq = 0, viNormSq = 0; // ||grad V_0||^2, ||grad V_i||^2 (flat)
  real relDiag00 = 0, relDiag11 = 0, relOff = 0;
  real deltaOverR = 0;
  bool pass = false;  // diag within 2%, off-diag within 1%
};

// Gram entries at parameters bp (p = 0 chart), compared against the flat
// limits of (claimreste24).
inline GramReport gram_report(const ModelConfig& cfg, const BubbleParams& bp,
                              const QuadratureSpec& q = {}) {
  const int n = cfg.dim.n;
  const real wn1 = sphere_volume(n - 1);
  const Bubble B(cfg, bp);
  const Chart ch = cfg.chart();
  const real delta = bp.delta();
  const real rhoMax = cfg.bump.chiOuter * bp.r;
  const real inner = delta * q.gradeFactor;

  // angular moments of Omega_1 = cos(phi) over S^{n-1}, by quadrature
  auto angular = [&](auto f) {
    return integrate_adaptive(
               [&](real ph) {
                 return f(ph) * std::pow(std::sin(ph), (real)(n - 2));
               },
               0, (real)M_PIl, q.relTol);
  };
  const real mTot = angular([](real) { return (real)1; });
  const real m1 = angular([](real ph) { return std::cos(ph); }) / mTot;
  const real m2 = angular([](real ph) {
                    return std::cos(ph) * std::cos(ph);
                  }) / mTot;
  const real mGrad = angular([](real ph) {
                       return std::sin(ph) * std::sin(ph);
                     }) / mTot;

  auto z0 = [&](real rho) { return B.Z0(rho); };
  auto zi = [&](real rho) { return B.Zi_profile(rho); };
  auto h_at = [&](real rho) { return coefficients_radial(cfg, rho).h; };

  // <Z_0,Z_0>_h
  GramReport rep;
  rep.deltaOverR = delta / bp.r;
  rep.g00 = wn1 * integrate_graded(
                      [&](real rho) {
                        const real st = Chart::metric_stretch(rho);
                        const real d1 = detail::fd_d1(z0, rho, delta + rho);
                        const real v = z0(rho);
                        return (st * st * d1 * d1 + h_at(rho) * v * v) *
                               std::pow(rho, (real)(n - 1)) *
                               ch.vol_weight(rho);
                      },
                      0, rhoMax, inner, q.relTol);
  // <Z_1,Z_1>_h: angular split (P' Omega)^2 + (P/rho)^2 |grad_S Omega|^2
  rep.g11 = wn1 * integrate_graded(
                      [&](real rho) {
                        const real st = Chart::metric_stretch(rho);
                        const real d1 = detail::fd_d1(zi, rho, delta + rho);
                        const real v = zi(rho);
                        const real grad =
                            m2 * d1 * d1 + mGrad * v * v / (rho * rho);
                        return (st * st * grad + h_at(rho) * m2 * v * v) *
                               std::pow(rho, (real)(n - 1)) *
                               ch.vol_weight(rho);
                      },
                      0, rhoMax, inner, q.relTol);
  // <Z_0,Z_1>_h: carries the first angular moment m1 (zero up to roundoff)
  rep.g01 =
      m1 * wn1 *
      integrate_graded(
          [&](real rho) {
            const real st = Chart::metric_stretch(rho);
            const real dz0 = detail::fd_d1(z0, rho, delta + rho);
            const real dzi = detail::fd_d1(zi, rho, delta + rho);
            return (st * st * dz0 * dzi + h_at(rho) * z0(rho) * zi(rho)) *
                   std::pow(rho, (real)(n - 1)) * ch.vol_weight(rho);
          },
          0, rhoMax, inner, q.relTol);

  // flat reference norms over R^n via z = s/(1-s)
  auto improper = [&](auto f) {
    return integrate_adaptive(
               [&](real s) {
                 const real z = s / (1 - s);
                 return f(z) / ((1 - s) * (1 - s));
               },
               0, 1, q.relTol);
  };
  auto v0 = [&](real z) { return V0_eval(n, bp.fCenter, z); };
  auto vi = [&](real z) { return Vi_profile(n, bp.fCenter, z); };
  rep.v0NormSq = wn1 * improper([&](real z) {
    const real d1 = detail::fd_d1(v0, z, 1 + z);
    return d1 * d1 * std::pow(z, (real)(n - 1));
  });
  rep.viNormSq = wn1 * improper([&](real z) {
    const real d1 = detail::fd_d1(vi, z, 1 + z);
    const real v = vi(z);
    return (m2 * d1 * d1 + mGrad * v * v / (z * z)) *
           std::pow(z, (real)(n - 1));
  });

  rep.relDiag00 = std::fabs(rep.g00 - rep.v0NormSq) / rep.v0NormSq;
  rep.relDiag11 = std::fabs(rep.g11 - rep.viNormSq) / rep.viNormSq;
  rep.relOff = std::fabs(rep.g01) /
               std::min(rep.v0NormSq, rep.viNormSq);
  rep.pass = rep.relDiag00 <= 0.02L && rep.relDiag11 <= 0.02L &&
             rep.relOff <= 0.01L;
  return rep;
}

}  // namespace lichnlab
