#pragma once

// The limit reduced-energy map H(t,p) in all dimension branches, its
// gradient/Hessian, the closed-form critical scale t0, the cutoff-corrected
// root t_M, nondegeneracy certification, and the n = 6 coefficient fit.
//
// Normalization note: the delta^{(n-2)/2} coefficient carries the factor
// omega_{n-1} alpha_n, matching the explicit bubble integral (propener21);
// the statement of (defH)/(deft0) omits omega_{n-1}, which is inconsistent
// with its own derivation (and with direct quadrature of I_k).  The corrected
// form is used throughout; see the decisions ledger.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bump.hpp"
#include "constants.hpp"
#include "quad.hpp"

namespace lichnlab {

enum class ReducedBranch { Lcf, N10, N11Plus, N6 };

struct ReducedEnergySpec {
  int n = 7;
  ReducedBranch branch = ReducedBranch::Lcf;
  real fXi0 = 1;
  real weylSq = 0;  // |W(xi_0)|_g^2 parameter, non-l.c.f. branches
  real a0Xi0 = 7;   // n = 6 data
  real C0 = 0;      // n = 6 fitted constant
  BumpSpec bump;    // beta enters H through Psi
  real relTol = 1e-12L;

  real c() const { return fXi0 / (n * (real)(n - 2)); }
};

namespace detail {
// int_0^inf r^m (1+c r^2)^{-n} dr = c^{-(m+1)/2} B((m+1)/2, n-(m+1)/2) / 2
inline real radial_beta_moment(int n, real c, real m) {
  const real a = (m + 1) / 2;
  const real b = n - a;
  if (b <= 0) throw std::invalid_argument("radial_beta_moment: divergent");
  const real lnB = std::lgammal(a) + std::lgammal(b) - std::lgammal((real)n);
  return std::pow(c, -a) * std::exp(lnB) / 2;
}
}  // namespace detail

// A_n = int_{R^n} |y|^2 (1 + c|y|^2)^{-n} dy, closed Beta form.
inline real An_closed_form(int n, real fXi0 = 1) {
  const real c = fXi0 / (n * (real)(n - 2));
  return sphere_volume(n - 1) * detail::radial_beta_moment(n, c, n + 1);
}

// Independent oracle: adaptive quadrature of the same integral via the
// compactifying substitution r = s/(1-s).
inline real An_quadrature(int n, real fXi0 = 1, real relTol = 1e-12L) {
  const real c = fXi0 / (n * (real)(n - 2));
  auto f = [&](real s) {
    const real r = s / (1 - s);
    const real jac = 1 / ((1 - s) * (1 - s));
    return std::pow(r, (real)(n + 1)) * std::pow(1 + c * r * r, (real)-n) * jac;
  };
  return sphere_volume(n - 1) *
         integrate_adaptive(f, 0, 1 - 1e-9L, relTol, 0, 2000);
}

// ---------------------------------------------------------------------------
// H and its derivatives
// ---------------------------------------------------------------------------

namespace detail {
// 1-D moments of the beta cutoff against the bubble kernel:
//   S(j, g) = int_0^inf r^j g(t^2 r^2) (1 + c r^2)^{-n} dr
// with g one of beta, beta', beta''.  Support: t^2 r^2 <= M+1.
template <class G>
real beta_moment(const ReducedEnergySpec& s, real t, int j, const G& g) {
  const real rMax = std::sqrt(s.bump.M + 1) / t;
  const real c = s.c();
  auto f = [&](real r) {
    return std::pow(r, (real)j) * g(t * t * r * r) *
           std::pow(1 + c * r * r, (real)-s.n);
  };
  return integrate_adaptive(f, 0, rMax, s.relTol, 0, 2000);
}
}  // namespace detail

// The Psi integral int_{R^n} Psi(p + t y) (1+c|y|^2)^{-n} dy; 2-D reduction
// in (r, phi) for p != 0 using the radiality of Psi.
inline real psi_integral(const ReducedEnergySpec& s, real t, real p) {
  const real c = s.c();
  const int n = s.n;
  if (p == 0) {
    auto f = [&](real r) {
      return psi_radial(s.bump, t * r) * std::pow(r, (real)(n - 1)) *
             std::pow(1 + c * r * r, (real)-n);
    };
    const real rMax = (std::sqrt(s.bump.M + 1) + std::fabs(p)) / t;
    return sphere_volume(n - 1) * integrate_adaptive(f, 0, rMax, s.relTol);
  }
  const real rMax = (std::sqrt(s.bump.M + 1) + std::fabs(p)) / t;
  auto f = [&](real r) {
    const real angular = integrate_adaptive(
        [&](real phi) {
          const real rr = std::sqrt(p * p + t * t * r * r +
                                    2 * t * r * p * std::cos(phi));
          return psi_radial(s.bump, rr) *
                 std::pow(std::sin(phi), (real)(n - 2));
        },
        0, (real)M_PIl, 10 * s.relTol);
    return angular * std::pow(r, (real)(n - 1)) *
           std::pow(1 + c * r * r, (real)-n);
  };
  return sphere_volume(n - 2) * integrate_adaptive(f, 0, rMax, s.relTol);
}

inline real Hred_eval(const ReducedEnergySpec& s, real t, real p) {
  if (t <= 0) throw std::invalid_argument("Hred_eval: t <= 0");
  if (std::fabs(p) > 1) throw std::invalid_argument("Hred_eval: |p| > 1");
  const int n = s.n;
  const DimensionConstants d = dimension_constants(n);
  const real ts = d.twoStar;
  const real psiTerm = -psi_integral(s, t, p) / ts;
  const real omAlpha = sphere_volume(n - 1) * d.alphaN;
  const real KnInv = std::pow(d.Kn, (real)-n);
  const real weylCoeff =
      s.weylSq > 0 ? KnInv * n * (real)(n - 2) * (n - 2) /
                         (24 * (real)(n - 4) * (n - 6)) * s.weylSq
                   : 0;
  switch (s.branch) {
    case ReducedBranch::Lcf:
      return psiTerm - omAlpha * std::pow(t, (real)(n - 2) / 2);
    case ReducedBranch::N10:
      return psiTerm - (omAlpha + weylCoeff) * t * t * t * t;
    case ReducedBranch::N11Plus:
      return psiTerm - weylCoeff * t * t * t * t;
    case ReducedBranch::N6:
      // -5 H(p) t^2 + C0 a0 t^3 in the paper's normalized units
      return -5 * t * t + s.C0 * s.a0Xi0 * t * t * t;
  }
  return 0;
}

// dH/dt at p = 0, per (conclu2) including the beta' term.
inline real Hred_dt(const ReducedEnergySpec& s, real t) {
  const int n = s.n;
  const DimensionConstants d = dimension_constants(n);
  const real ts = d.twoStar;
  const real wn1 = sphere_volume(n - 1);
  auto b0 = [&](real u) { return beta_eval(s.bump, u); };
  auto b1 = [&](real u) { return beta_d1(s.bump, u); };
  const real termA =
      2 / ts * t * wn1 * detail::beta_moment(s, t, n + 1, b0);
  const real termB =
      2 / ts * t * t * t * wn1 * detail::beta_moment(s, t, n + 3, b1);
  const real omAlpha = wn1 * d.alphaN;
  real power;
  switch (s.branch) {
    case ReducedBranch::Lcf:
      power = (real)(n - 2) / 2 * omAlpha * std::pow(t, (real)(n - 4) / 2);
      break;
    case ReducedBranch::N10: {
      const real KnInv = std::pow(d.Kn, (real)-n);
      const real weylCoeff = KnInv * n * (real)(n - 2) * (n - 2) /
                             (24 * (real)(n - 4) * (n - 6)) * s.weylSq;
      power = 4 * (omAlpha + weylCoeff) * t * t * t;
      break;
    }
    case ReducedBranch::N11Plus: {
      const real KnInv = std::pow(d.Kn, (real)-n);
      const real weylCoeff = KnInv * n * (real)(n - 2) * (n - 2) /
                             (24 * (real)(n - 4) * (n - 6)) * s.weylSq;
      power = 4 * weylCoeff * t * t * t;
      break;
    }
    case ReducedBranch::N6:
      return -10 * t + 3 * s.C0 * s.a0Xi0 * t * t;
  }
  return termA + termB - power;
}

// d2H/dt2 at p = 0 (differentiates (conclu2); needs beta'').
inline real Hred_dtt(const ReducedEnergySpec& s, real t) {
  const int n = s.n;
  const DimensionConstants d = dimension_constants(n);
  const real ts = d.twoStar;
  const real wn1 = sphere_volume(n - 1);
  auto b0 = [&](real u) { return beta_eval(s.bump, u); };
  auto b1 = [&](real u) { return beta_d1(s.bump, u); };
  auto b2 = [&](real u) { return beta_d2(s.bump, u); };
  const real A = wn1 * detail::beta_moment(s, t, n + 1, b0);
  const real B = wn1 * detail::beta_moment(s, t, n + 3, b1);
  const real C = wn1 * detail::beta_moment(s, t, n + 5, b2);
  const real smooth = 2 / ts * (A + 5 * t * t * B + 2 * t * t * t * t * C);
  const real omAlpha = wn1 * d.alphaN;
  real power;
  switch (s.branch) {
    case ReducedBranch::Lcf:
      power = (real)(n - 2) / 2 * (real)(n - 4) / 2 * omAlpha *
              std::pow(t, (real)(n - 6) / 2);
      break;
    case ReducedBranch::N10:
    case ReducedBranch::N11Plus: {
      const real KnInv = std::pow(d.Kn, (real)-n);
      const real weylCoeff = KnInv * n * (real)(n - 2) * (n - 2) /
                             (24 * (real)(n - 4) * (n - 6)) * s.weylSq;
      const real om = s.branch == ReducedBranch::N10 ? omAlpha : 0;
      power = 12 * (om + weylCoeff) * t * t;
      break;
    }
    case ReducedBranch::N6:
      return -10 + 6 * s.C0 * s.a0Xi0 * t;
  }
  return smooth - power;
}

// p-block second derivative at (t,0): radial reduction of
// -(1/2*) int d_11 Psi(ty) K dy using the angular averages <Omega_1^2> = 1/n.
inline real Hred_dpp(const ReducedEnergySpec& s, real t) {
  const int n = s.n;
  const real ts = dimension_constants(n).twoStar;
  const real c = s.c();
  const real rMax = std::sqrt(s.bump.M + 1) / t;
  auto f = [&](real r) {
    const real u = t * r;
    const real P1 = psi_radial_d1(s.bump, u);
    const real P2 = psi_radial_d2(s.bump, u);
    const real lap11 = P2 / n + (u > 0 ? P1 / u : P2) * (1 - (real)1 / n);
    return lap11 * std::pow(r, (real)(n - 1)) *
           std::pow(1 + c * r * r, (real)-n);
  };
  return -sphere_volume(n - 1) / ts *
         integrate_adaptive(f, 0, rMax, s.relTol);
}

// Closed-form critical scale t0 (n >= 7 power-law branches).
inline real t0_closed_form(const ReducedEnergySpec& s) {
  if (s.branch == ReducedBranch::N6) {
    if (s.C0 <= 0) throw std::invalid_argument("t0: need fitted C0 > 0");
    return 10 / (3 * s.a0Xi0 * s.C0);
  }
  const int n = s.n;
  const DimensionConstants d = dimension_constants(n);
  const real An = An_closed_form(n, s.fXi0);
  const real lhsCoeff = (real)(n - 2) / 2 * sphere_volume(n - 1) * d.alphaN;
  const real rhs = 2 / d.twoStar * An;
  if (n == 6) throw std::invalid_argument("t0: power form needs n >= 7");
  return std::pow(rhs / lhsCoeff, (real)2 / (n - 6));
}

struct CriticalPoint {
  real tM = 0;
  real hessTT = 0;
  real hessPP = 0;  // common p-eigenvalue (radial symmetry)
  bool signatureOk = false;  // 1 negative (t), n positive (p)
  real bracketLo = 0, bracketHi = 0;
  real gradAtRoot = 0;
};

// Safeguarded root-finding for dH/dt(.,0) = 0 near t0: multiplicative scan
// for a sign change, then bisection.
inline CriticalPoint find_critical(const ReducedEnergySpec& s) {
  const real t0 = s.branch == ReducedBranch::N6
                      ? 10 / (3 * s.a0Xi0 * (s.C0 > 0 ? s.C0 : 1))
                      : t0_closed_form(s);
  real lo = 0, hi = 0, flo = 0;
  const int scanN = 240;
  real prevT = t0 / 100, prevF = Hred_dt(s, prevT);
  for (int i = 1; i <= scanN; ++i) {
    const real t = t0 / 100 * std::pow((real)1000, (real)i / scanN);
    const real ft = Hred_dt(s, t);
    if (prevF * ft <= 0) {
      lo = prevT;
      hi = t;
      flo = prevF;
      break;
    }
    prevT = t;
    prevF = ft;
  }
  if (hi == 0)
    throw std::runtime_error(
        "find_critical: no sign change of dH/dt in bracket (M too small)");
  CriticalPoint cp;
  cp.bracketLo = lo;
  cp.bracketHi = hi;
  for (int it = 0; it < 200 && (hi - lo) > 1e-17L * hi; ++it) {
    const real mid = (lo + hi) / 2;
    const real fm = Hred_dt(s, mid);
    if (flo * fm <= 0)
      hi = mid;
    else {
      lo = mid;
      flo = fm;
    }
  }
  cp.tM = (lo + hi) / 2;
  cp.gradAtRoot = Hred_dt(s, cp.tM);
  cp.hessTT = Hred_dtt(s, cp.tM);
  cp.hessPP = s.branch == ReducedBranch::N6 ? 0 : Hred_dpp(s, cp.tM);
  cp.signatureOk = cp.hessTT < 0 && (s.branch == ReducedBranch::N6 ||
                                     cp.hessPP > 0);
  return cp;
}

// ---------------------------------------------------------------------------
// n = 6 coefficient fit
// ---------------------------------------------------------------------------

struct N6Fit {
  real A = 0, B = 0;       // raw least-squares y ~ A t^2 + B t^3
  real C0 = 0;             // normalized so the model reads -5 t^2 + C0 a0 t^3
  real t0 = 0;             // 10/(3 a0 C0) = -2A/(3B)
  real residRel = 0;       // relative RMS fit residual
};

// Least-squares fit of measured reduced energies y_i at scales t_i to the
// model A t^2 + B t^3; C0 is normalized so that the t^2 coefficient reads -5
// in the paper's units (C0 is reported, never hard-coded downstream).
inline N6Fit reduced_n6_fit(real a0, const std::vector<real>& tGrid,
                            const std::vector<real>& y) {
  if (tGrid.size() != y.size() || tGrid.size() < 3)
    throw std::invalid_argument("reduced_n6_fit: bad data");
  real s44 = 0, s45 = 0, s55 = 0, b4 = 0, b5 = 0;
  for (size_t i = 0; i < tGrid.size(); ++i) {
    const real t2 = tGrid[i] * tGrid[i];
    const real t3 = t2 * tGrid[i];
    s44 += t2 * t2;
    s45 += t2 * t3;
    s55 += t3 * t3;
    b4 += t2 * y[i];
    b5 += t3 * y[i];
  }
  const real det = s44 * s55 - s45 * s45;
  N6Fit fit;
  fit.A = (b4 * s55 - b5 * s45) / det;
  fit.B = (s44 * b5 - s45 * b4) / det;
  if (!(fit.A < 0 && fit.B > 0))
    throw std::runtime_error("reduced_n6_fit: data inconsistent (need A<0<B)");
  const real lambda = -fit.A / 5;  // unit normalization
  fit.C0 = fit.B / (lambda * a0);
  fit.t0 = 10 / (3 * a0 * fit.C0);
  real ss = 0, yy = 0;
  for (size_t i = 0; i < tGrid.size(); ++i) {
    const real t2 = tGrid[i] * tGrid[i];
    const real model = fit.A * t2 + fit.B * t2 * tGrid[i];
    ss += (y[i] - model) * (y[i] - model);
    yy += y[i] * y[i];
  }
  fit.residRel = std::sqrt(ss / yy);
  return fit;
}

}  // namespace lichnlab
