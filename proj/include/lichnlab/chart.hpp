#pragma once

// Exact conformal (stereographic) chart of the unit round sphere S^n, centered
// at an arbitrary point xi.  In the normalized chart coordinate w the pulled
// back metric g_xi = Lambda_xi^{4/(n-2)} g is exactly Euclidean, so the
// conformal-normal-coordinates error of the general construction is zero.
//
// Conventions (theta = geodesic distance from the chart center):
//   |w|     = rho(theta) = 2 tan(theta/2)
//   Lambda  = cos(theta/2)^{-(n-2)} = (1 + rho^2/4)^{(n-2)/2}
//   dtheta  = drho / (1 + rho^2/4)
//   |grad phi(rho)|_g = (1 + rho^2/4) |phi'(rho)|   for radial chart functions
//   dv_g    = sin^{n-1}theta dtheta dOmega = rho^{n-1}(1+rho^2/4)^{-n} drho dOmega
// The flat chart distance d_{g_xi}(xi, x) equals |w|.

#include <cmath>

#include "quad.hpp"

namespace lichnlab {

struct Chart {
  int n = 7;

  static real rho_of_theta(real theta) { return 2 * std::tan(theta / 2); }
  static real theta_of_rho(real rho) { return 2 * std::atan(rho / 2); }

  // conformal factor and its chart-radial derivative
  real lambda(real rho) const {
    return std::pow(1 + rho * rho / 4, (real)(n - 2) / 2);
  }
  real lambda_drho(real rho) const {
    return (real)(n - 2) / 2 * (rho / 2) *
           std::pow(1 + rho * rho / 4, (real)(n - 4) / 2);
  }

  // conformal volume weight: dv_g = vol_weight(rho) rho^{n-1} drho dOmega
  real vol_weight(real rho) const {
    return std::pow(1 + rho * rho / 4, (real)-n);
  }

  // metric stretch: |grad u|_g = metric_stretch(rho) * |du/drho|
  static real metric_stretch(real rho) { return 1 + rho * rho / 4; }

  // Pullback metric of g_xi in w-coordinates: identity, by construction. The
  // checkable statement: the sphere line element ds = dtheta matches
  // Lambda^{-2/(n-2)} |dw| = dw/(1+rho^2/4); returned as the ratio.
  real pullback_metric_ratio(real rho) const {
    const real drho_dtheta = 1 + rho * rho / 4;  // d(2 tan(t/2))/dt
    const real conf = std::pow(lambda(rho), (real)-2 / (n - 2));
    return conf * drho_dtheta;  // == 1 exactly
  }

  // Chart coordinate of a point at geodesic distance thetaX from the pole, as
  // seen from a chart centered at geodesic distance thetaC on the same axis
  // (signed: both measured along the common geodesic).
  static real axis_chart_distance(real thetaX, real thetaC) {
    return 2 * std::tan((thetaX - thetaC) / 2);
  }
};

}  // namespace lichnlab
