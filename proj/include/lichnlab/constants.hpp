#pragma once

// Dimensional constants and base-solution data for the model problem on the
// unit round sphere S^n:  S_g = n(n-1),  c_n S_g = n(n-2)/4,  u0 == 1.

#include <cmath>
#include <stdexcept>

#include "quad.hpp"

namespace lichnlab {

// Surface volume of the unit m-sphere S^m in R^{m+1}.
inline real sphere_volume(int m) {
  return 2 * std::pow((real)M_PIl, (real)(m + 1) / 2) /
         std::tgammal((real)(m + 1) / 2);
}

struct DimensionConstants {
  int n = 0;
  real twoStar = 0;  // 2n/(n-2)
  real cN = 0;       // (n-2)/(4(n-1))
  real omegaN = 0;   // volume of the unit n-sphere
  real Kn = 0;       // sharp Sobolev constant
  real alphaN = 0;   // (n-2)^{n/2} n^{(n-2)/2}
};

inline DimensionConstants dimension_constants(int n) {
  if (n < 6) throw std::invalid_argument("dimension_constants: need n >= 6");
  DimensionConstants d;
  d.n = n;
  d.twoStar = (real)(2 * n) / (n - 2);
  d.cN = (real)(n - 2) / (4 * (n - 1));
  d.omegaN = sphere_volume(n);
  d.Kn = std::sqrt(4 / (n * (real)(n - 2) * std::pow(d.omegaN, (real)2 / n)));
  d.alphaN = std::pow((real)(n - 2), (real)n / 2) *
             std::pow((real)n, (real)(n - 2) / 2);
  return d;
}

struct BaseData {
  real cnSg = 0;         // c_n S_g on unit S^n: n(n-2)/4
  real piZeroSq = 0;     // pi_0^2 = c_n S_g - 1
  real epsilonTrunc = 0; // truncation level of eta_eps
  real u0 = 1;           // constant base solution
};

inline BaseData base_data(int n, real epsilonTrunc = 0.1L) {
  if (n < 6) throw std::invalid_argument("base_data: need n >= 6");
  if (epsilonTrunc <= 0) throw std::invalid_argument("base_data: eps <= 0");
  BaseData b;
  b.cnSg = n * (real)(n - 2) / 4;
  b.piZeroSq = b.cnSg - 1;
  b.epsilonTrunc = epsilonTrunc;
  b.u0 = 1;
  return b;
}

// eta_eps(u) = eps if u < eps, u otherwise.
inline real eta_truncate(real eps, real u) {
  if (eps <= 0) throw std::invalid_argument("eta_truncate: eps <= 0");
  return u < eps ? eps : u;
}

}  // namespace lichnlab
