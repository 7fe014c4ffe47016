#pragma once

// Physical coefficients (h, f, pi^2) for the perturbed Einstein-Lichnerowicz
// equation, the bubble ansatz W_{k,t,p} and the kernel elements V_i / Z_i,
// all expressed through radial profiles in the exact chart of the active
// bump/bubble center.  Per the solver design, one bump is active per solve;
// multi-bump evaluation (for support-disjointness checks) sums over a window
// of axis-aligned centers.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bump.hpp"
#include "chart.hpp"
#include "constants.hpp"
#include "schedule.hpp"

namespace lichnlab {

struct ModelConfig {
  DimensionConstants dim;
  BaseData base;
  BumpSpec bump;
  real eps = 0;  // active bump amplitude epsilon_k (0: unperturbed)
  real mu = 1;   // active bump scale mu_k

  Chart chart() const { return Chart{dim.n}; }
};

inline ModelConfig make_config(int n, real M = 20, real eps = 0, real mu = 1,
                               real epsilonTrunc = 0.1L) {
  ModelConfig c;
  c.dim = dimension_constants(n);
  c.base = base_data(n, epsilonTrunc);
  c.bump.M = M;
  c.eps = eps;
  c.mu = mu;
  return c;
}

struct Coefficients {
  real h = 0, f = 0, piSq = 0;
};

// Psi_0 and |grad Psi_0|_g at chart radius rho from the active bump center.
inline real psi0_radial(const ModelConfig& c, real rho) {
  return c.eps * psi_radial(c.bump, rho / c.mu);
}
inline real psi0_grad_radial(const ModelConfig& c, real rho) {
  return c.eps * Chart::metric_stretch(rho) *
         psi_radial_d1(c.bump, rho / c.mu) / c.mu;
}

// Raw coefficient triple, no admissibility check: energy-expansion ladders
// evaluate it on rungs where the amplitude is still too large for pi^2 > 0
// (the asymptotic statement only concerns eps -> 0) and report admissibility
// separately.
inline Coefficients coefficients_radial_raw(const ModelConfig& c, real rho) {
  const real p0 = psi0_radial(c, rho);
  const real gp = psi0_grad_radial(c, rho);
  Coefficients k;
  k.h = c.base.cnSg - c.dim.cN * gp * gp;
  k.f = 1 + p0;
  k.piSq = c.base.piZeroSq - c.dim.cN * gp * gp - p0;
  return k;
}

// Strict variant for PDE-level work, where pi^2 > 0 and f > 0 are hypotheses.
inline Coefficients coefficients_radial(const ModelConfig& c, real rho) {
  const Coefficients k = coefficients_radial_raw(c, rho);
  if (k.piSq <= 0 || k.f <= 0)
    throw std::runtime_error(
        "coefficients_radial: pi^2 or f nonpositive (schedule too aggressive)");
  return k;
}

// Coefficients at a point specified relative to an offset center (the bubble
// center y_k = exp_{xi_k}(mu p)): the point sits at geodesic distance s from
// y_k with polar angle phi against the xi_k -> y_k axis; aGeo is the geodesic
// distance between xi_k and y_k.  Exact spherical law of cosines gives the
// geodesic (hence chart) distance to the bump center xi_k.
inline Coefficients coefficients_at_offset(const ModelConfig& c, real aGeo,
                                           real s, real cosPhi) {
  real cd = std::cos(aGeo) * std::cos(s) + std::sin(aGeo) * std::sin(s) * cosPhi;
  cd = std::min((real)1, std::max((real)-1, cd));
  const real d = std::acos(cd);
  return coefficients_radial_raw(c, 2 * std::tan(d / 2));
}

// Multi-bump Psi_0 along the common axis: centers at geodesic angles
// thetaC[j] with amplitudes epsJ[j], scales muJ[j]; x at geodesic angle
// thetaX on the axis.  Bump supports must be pairwise disjoint.
struct BumpWindow {
  std::vector<real> thetaC, epsJ, muJ;
};

inline void check_disjoint(const ModelConfig& c, const BumpWindow& w) {
  const real span = std::sqrt(c.bump.M + 1);
  for (size_t i = 0; i < w.thetaC.size(); ++i)
    for (size_t j = i + 1; j < w.thetaC.size(); ++j) {
      const real d =
          std::fabs(Chart::axis_chart_distance(w.thetaC[i], w.thetaC[j]));
      if (d <= span * (w.muJ[i] + w.muJ[j]))
        throw std::runtime_error("psi0: bump supports overlap");
    }
}

inline real psi0_axis(const ModelConfig& c, const BumpWindow& w, real thetaX) {
  check_disjoint(c, w);
  real sum = 0;
  for (size_t j = 0; j < w.thetaC.size(); ++j) {
    const real d = Chart::axis_chart_distance(thetaX, w.thetaC[j]);
    sum += w.epsJ[j] * psi_radial(c.bump, std::fabs(d) / w.muJ[j]);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Bubble ansatz and kernel elements (radial profiles, p = 0 chart)
// ---------------------------------------------------------------------------

struct BubbleParams {
  real epsilon = 0;  // eps_k
  real mu = 0;       // mu_k
  real r = 0;        // cutoff radius r_k
  real t = 1;        // scale parameter
  real p = 0;        // axis offset (|p| <= 1); y_k at chart position mu*p
  real fCenter = 1;  // f(y_k)
  real delta() const { return mu * t; }
};

inline BubbleParams make_bubble(const ModelConfig& c, real r, real t,
                                real p = 0) {
  BubbleParams b;
  b.epsilon = c.eps;
  b.mu = c.mu;
  b.r = r;
  b.t = t;
  b.p = p;
  // f(y_k) = 1 + eps*Psi(p): the bump plateau covers |p| <= 1 <= sqrt(M)
  b.fCenter = 1 - c.eps * p * p;
  return b;
}

struct Bubble {
  int n;
  BumpSpec bump;   // provides chi
  BubbleParams bp;
  real c;  // f(y_k)/(n(n-2))

  Bubble(const ModelConfig& cfg, const BubbleParams& b)
      : n(cfg.dim.n), bump(cfg.bump), bp(b),
        c(b.fCenter / (cfg.dim.n * (real)(cfg.dim.n - 2))) {}

  // Euclidean Aubin-Talenti profile and chart-radial derivatives
  real U(real rho) const {
    const real d = bp.delta();
    return std::pow(d, (real)(n - 2) / 2) *
           std::pow(d * d + c * rho * rho, 1 - (real)n / 2);
  }
  real U_d1(real rho) const {
    const real d = bp.delta();
    return std::pow(d, (real)(n - 2) / 2) * (2 - n) * c * rho *
           std::pow(d * d + c * rho * rho, -(real)n / 2);
  }
  real U_d2(real rho) const {
    const real d = bp.delta();
    const real q = d * d + c * rho * rho;
    return std::pow(d, (real)(n - 2) / 2) * (2 - n) * c *
           std::pow(q, -(real)n / 2 - 1) * (q - n * c * rho * rho);
  }

  // flat (chart) profile v = chi(rho/r) U(rho) and derivatives
  real flat(real rho) const { return chi_eval(bump, rho / bp.r) * U(rho); }
  real flat_d1(real rho) const {
    return chi_eval(bump, rho / bp.r) * U_d1(rho) +
           chi_d1(bump, rho / bp.r) / bp.r * U(rho);
  }
  real flat_d2(real rho) const {
    return chi_eval(bump, rho / bp.r) * U_d2(rho) +
           2 * chi_d1(bump, rho / bp.r) / bp.r * U_d1(rho) +
           chi_d2(bump, rho / bp.r) / (bp.r * bp.r) * U(rho);
  }
  // nonnegative flat Laplacian of the flat profile
  real flat_lap(real rho) const {
    return -flat_d2(rho) - (n - 1) * flat_d1(rho) / (rho > 0 ? rho : 1e-300L);
  }

  // W and Z profiles on the sphere (rho = chart distance from y_k)
  real W(real rho) const {
    return Chart{n}.lambda(rho) * flat(rho);
  }
  real Z0(real rho) const {
    const real d = bp.delta();
    return Chart{n}.lambda(rho) * chi_eval(bump, rho / bp.r) *
           std::pow(d, (real)(n - 2) / 2) *
           std::pow(d * d + c * rho * rho, -(real)n / 2) *
           (c * rho * rho - d * d);
  }
  // radial factor of Z_i (full Z_i = Zi_profile * Omega_i on the chart sphere)
  real Zi_profile(real rho) const {
    const real d = bp.delta();
    return Chart{n}.lambda(rho) * chi_eval(bump, rho / bp.r) *
           std::pow(d, (real)n / 2) *
           std::pow(d * d + c * rho * rho, -(real)n / 2) * bp.fCenter * rho;
  }
  // exact identity dW/dt = ((n-2)/(2t)) Z0
  real dW_dt(real rho) const { return (n - 2) / (2 * bp.t) * Z0(rho); }
};

// Euclidean kernel models V_i of (defVki), with c~ = f/(n(n-2)).
inline real V0_eval(int n, real f, real z) {
  const real ct = f / (n * (real)(n - 2));
  return (ct * z * z - 1) * std::pow(1 + ct * z * z, -(real)n / 2);
}
// radial factor of V_i, i >= 1 (full V_i = Vi_profile(|z|) * z_i/|z|)
inline real Vi_profile(int n, real f, real z) {
  const real ct = f / (n * (real)(n - 2));
  return f * z * std::pow(1 + ct * z * z, -(real)n / 2);
}

}  // namespace lichnlab
