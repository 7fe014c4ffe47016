#pragma once

// Smooth bump machinery: the plateau cutoff beta (== 1 on [-M,M], supported in
// [-M-1,M+1]) with the standard mollifier transition exp(1 - 1/(1-u^2)), the
// ball cutoff chi (== 1 on B(1), == 0 outside B(2)), and the scalar-field
// profile Psi(x) = -|x|^2 beta(|x|^2), all with analytic derivatives.

#include <cmath>
#include <stdexcept>

#include "quad.hpp"

namespace lichnlab {

namespace detail {
// mollifier m(u) = exp(1 - 1/(1-u^2)) on (0,1): m(0+)=1, m(1-)=0, C^infty.
inline real moll(real u) {
  if (u <= 0) return 1;
  if (u >= 1) return 0;
  return std::exp(1 - 1 / (1 - u * u));
}
inline real moll_d1(real u) {
  if (u <= 0 || u >= 1) return 0;
  const real q = 1 - u * u;
  return moll(u) * (-2 * u / (q * q));
}
inline real moll_d2(real u) {
  if (u <= 0 || u >= 1) return 0;
  const real q = 1 - u * u;
  const real e1 = -2 * u / (q * q);                 // (d/du)(1 - 1/q)
  const real e2 = -2 * (1 + 3 * u * u) / (q * q * q);
  return moll(u) * (e1 * e1 + e2);
}
}  // namespace detail

struct BumpSpec {
  real M = 20;          // plateau half-width of beta
  real chiInner = 1;    // chi == 1 on B(chiInner)
  real chiOuter = 2;    // chi == 0 outside B(chiOuter)
};

// beta(s): 1 on [-M,M], mollifier on M<|s|<M+1, 0 beyond.
inline real beta_eval(const BumpSpec& b, real s) {
  return detail::moll(std::fabs(s) - b.M);
}
inline real beta_d1(const BumpSpec& b, real s) {
  const real sign = s < 0 ? -1 : 1;
  return sign * detail::moll_d1(std::fabs(s) - b.M);
}
inline real beta_d2(const BumpSpec& b, real s) {
  return detail::moll_d2(std::fabs(s) - b.M);
}

// chi(s): 1 on [0, inner], mollifier rescaled on (inner, outer), 0 beyond.
inline real chi_eval(const BumpSpec& b, real s) {
  const real w = b.chiOuter - b.chiInner;
  return detail::moll((std::fabs(s) - b.chiInner) / w);
}
inline real chi_d1(const BumpSpec& b, real s) {
  const real w = b.chiOuter - b.chiInner;
  const real sign = s < 0 ? -1 : 1;
  return sign * detail::moll_d1((std::fabs(s) - b.chiInner) / w) / w;
}
inline real chi_d2(const BumpSpec& b, real s) {
  const real w = b.chiOuter - b.chiInner;
  return detail::moll_d2((std::fabs(s) - b.chiInner) / w) / (w * w);
}

// Psi(x) = -|x|^2 beta(|x|^2), as a function of the radius rho = |x|.
inline real psi_radial(const BumpSpec& b, real rho) {
  const real s = rho * rho;
  return -s * beta_eval(b, s);
}
// d/drho Psi
inline real psi_radial_d1(const BumpSpec& b, real rho) {
  const real s = rho * rho;
  return -2 * rho * beta_eval(b, s) - 2 * rho * s * beta_d1(b, s);
}
// d^2/drho^2 Psi
inline real psi_radial_d2(const BumpSpec& b, real rho) {
  const real s = rho * rho;
  return -2 * beta_eval(b, s) - 10 * s * beta_d1(b, s) -
         4 * s * s * beta_d2(b, s);
}

}  // namespace lichnlab
