#pragma once

// Radial finite-volume discretization of the truncated equation (EL_eps) on
// S^n, damped Newton with deflation, tridiagonal eigensolver (Sturm
// bisection), the projected correction (phi, lambda0) of the Lyapunov-Schmidt
// step, and the blowing-up family constructor.
//
// Discrete structure: cell-centered finite volumes on a graded theta-grid
// over [0, pi].  With face weights w = sin^{n-1}(psi) the stiffness matrix K
// is symmetric with K*1 = 0 exactly, and the boundary faces carry w = 0, so
// the pole closure (u'(0) = u'(pi) = 0) is natural.  The operator
// A = M^{-1} K is the nonnegative radial Laplace-Beltrami operator, exactly
// self-adjoint under the lumped sphere-volume mass M; for a constant
// potential the constant vector is an exact eigenvector, which anchors the
// strict-stability criterion without discretization error.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "energy.hpp"
#include "fields.hpp"
#include "quad.hpp"

namespace lichnlab {

struct SolverSpec {
  int nodesTarget = 10000;   // reference grid; refine jointly with gradeInner
  real gradeInner = 5e-3L;   // smallest cell = delta * gradeInner
  real tolNewton = 1e-9L;    // residSup tolerance (scaled)
  int maxIter = 60;
  real armijoSigma = 1e-4L;
  int maxBacktrack = 40;
};

// ---------------------------------------------------------------------------
// graded grid + discrete operator
// ---------------------------------------------------------------------------

struct Grid {
  std::vector<real> faces;   // psi_0 = 0 < ... < psi_N = pi
  std::vector<real> theta;   // cell centers, size N
  std::vector<real> mass;    // m_i = int_cell sin^{n-1}
  std::vector<real> faceCoef;  // interior faces j=1..N-1: w(psi_j)/dtheta_j
  int n = 7;

  size_t size() const { return theta.size(); }
};

// Graded clustering toward the bubble pole: uniform cells of size
// hmin = delta * gradeInner out to theta ~ hmin * Q, then geometric growth
// h = theta / Q up to pi.  The cell-size floor keeps the stiffness-to-mass
// ratio (hence the Newton systems' conditioning) within long-double range;
// Q is sized so the total node count lands near nodesTarget.
inline Grid make_grid(int n, real delta, const SolverSpec& s = {}) {
  if (delta <= 0 || delta >= 1) throw std::invalid_argument("make_grid: delta");
  Grid g;
  g.n = n;
  const real hmin = delta * s.gradeInner;
  const real Q = std::max((real)8, s.nodesTarget /
                                       (1 + std::log((real)M_PIl / hmin)));
  g.faces.push_back(0);
  real th = 0;
  while (th < (real)M_PIl) {
    th += std::max(hmin, th / Q);
    g.faces.push_back(std::min(th, (real)M_PIl));
  }
  g.faces.back() = (real)M_PIl;
  if (g.faces[g.faces.size() - 2] >= (real)M_PIl)
    g.faces.pop_back();
  const size_t N = g.faces.size() - 1;
  g.theta.resize(N);
  g.mass.resize(N);
  g.faceCoef.assign(N + 1, 0);  // boundary faces stay 0 (sin vanishes)
  for (size_t i = 0; i < N; ++i) {
    g.theta[i] = (g.faces[i] + g.faces[i + 1]) / 2;
    g.mass[i] = gk15(
                    [&](real th) {
                      return std::pow(std::sin(th), (real)(n - 1));
                    },
                    g.faces[i], g.faces[i + 1])
                    .value;
  }
  for (size_t j = 1; j < N; ++j)
    g.faceCoef[j] = std::pow(std::sin(g.faces[j]), (real)(n - 1)) /
                    (g.theta[j] - g.theta[j - 1]);
  // pole resolution check
  size_t below = 0;
  for (real th : g.theta)
    if (th < delta) ++below;
  if (below < 12)
    throw std::runtime_error("make_grid: fewer than 12 nodes below theta=delta");
  return g;
}

struct DiscretizedOperator {
  Grid grid;
  std::vector<real> h, f, piSq;  // coefficient samples at nodes
  real epsilonTrunc = 0.1L;
  real twoStar = 0;

  size_t size() const { return grid.size(); }
};

inline DiscretizedOperator assemble_operator(const ModelConfig& cfg,
                                             const Grid& grid) {
  DiscretizedOperator op;
  op.grid = grid;
  op.epsilonTrunc = cfg.base.epsilonTrunc;
  op.twoStar = cfg.dim.twoStar;
  const size_t N = grid.size();
  op.h.resize(N);
  op.f.resize(N);
  op.piSq.resize(N);
  for (size_t i = 0; i < N; ++i) {
    const Coefficients k =
        coefficients_radial(cfg, Chart::rho_of_theta(grid.theta[i]));
    op.h[i] = k.h;
    op.f[i] = k.f;
    op.piSq[i] = k.piSq;
  }
  return op;
}

// A u = M^{-1} K u (nonnegative Laplacian applied to nodal values)
inline std::vector<real> apply_laplacian(const Grid& g,
                                         const std::vector<real>& u) {
  const size_t N = g.size();
  std::vector<real> out(N);
  for (size_t i = 0; i < N; ++i) {
    real s = 0;
    if (i > 0) s += g.faceCoef[i] * (u[i] - u[i - 1]);
    if (i + 1 < N) s += g.faceCoef[i + 1] * (u[i] - u[i + 1]);
    out[i] = s / g.mass[i];
  }
  return out;
}

// Solve (K + M diag(V)) x = M b.  The matrix is symmetric tridiagonal but
// indefinite at peaked solutions (Morse index >= 1), so plain Thomas
// elimination can be unstable; use tridiagonal LU with partial pivoting
// (fill bandwidth 2 above the diagonal).
inline std::vector<real> solve_tridiag(const Grid& g,
                                       const std::vector<real>& V,
                                       const std::vector<real>& b) {
  const size_t N = g.size();
  std::vector<real> dl(N, 0), d(N), du(N, 0), du2(N, 0), x(N);
  for (size_t i = 0; i < N; ++i) {
    d[i] = g.faceCoef[i] + g.faceCoef[i + 1] + g.mass[i] * V[i];
    if (i > 0) dl[i] = -g.faceCoef[i];
    if (i + 1 < N) du[i] = -g.faceCoef[i + 1];
    x[i] = g.mass[i] * b[i];
  }
  // row equilibration: cell masses span many orders of magnitude, and the
  // pole equations would otherwise drown in the large rows' backward error
  for (size_t i = 0; i < N; ++i) {
    const real r =
        std::max({std::fabs(dl[i]), std::fabs(d[i]), std::fabs(du[i])});
    if (r > 0) {
      dl[i] /= r;
      d[i] /= r;
      du[i] /= r;
      x[i] /= r;
    }
  }
  for (size_t i = 0; i + 1 < N; ++i) {
    if (std::fabs(dl[i + 1]) > std::fabs(d[i])) {
      std::swap(d[i], dl[i + 1]);
      std::swap(du[i], d[i + 1]);
      if (i + 2 < N) {
        du2[i] = du[i + 1];
        du[i + 1] = 0;
      }
      std::swap(x[i], x[i + 1]);
    }
    if (d[i] == 0) d[i] = 1e-300L;
    const real m = dl[i + 1] / d[i];
    d[i + 1] -= m * du[i];
    if (i + 2 < N) du[i + 1] -= m * du2[i];
    x[i + 1] -= m * x[i];
  }
  if (d[N - 1] == 0) d[N - 1] = 1e-300L;
  for (size_t i = N; i-- > 0;) {
    real s = x[i];
    if (i + 1 < N) s -= du[i] * x[i + 1];
    if (i + 2 < N) s -= du2[i] * x[i + 2];
    x[i] = s / d[i];
  }
  return x;
}

// Bordered solve for the Lyapunov-Schmidt step: the (N+1) x (N+1) system
//   [ K + M diag(V),  -M spike ] [ x      ]   [ M rhs ]
//   [ (M border)^T,       0    ] [ xLast  ] = [ rhsBorder ]
// eliminated as one banded-plus-spike LU with adjacent-row partial pivoting.
// Block elimination through J = K + M diag(V) is unusable here: J is nearly
// singular along the Z0 mode, which is exactly what the border regularizes.
struct BorderedSolution {
  std::vector<real> x;
  real xLast = 0;
};

inline BorderedSolution solve_bordered(const Grid& g,
                                       const std::vector<real>& V,
                                       const std::vector<real>& spike,
                                       const std::vector<real>& border,
                                       const std::vector<real>& rhs,
                                       real rhsBorder) {
  const size_t N = g.size();
  std::vector<real> dl(N, 0), d(N), du(N, 0), du2(N, 0), sp(N), b(N);
  std::vector<real> bd(N + 2, 0);  // border row (padded for du2 fill)
  real bdSpike = 0, bdRhs = rhsBorder;
  for (size_t i = 0; i < N; ++i) {
    d[i] = g.faceCoef[i] + g.faceCoef[i + 1] + g.mass[i] * V[i];
    if (i > 0) dl[i] = -g.faceCoef[i];
    if (i + 1 < N) du[i] = -g.faceCoef[i + 1];
    sp[i] = -g.mass[i] * spike[i];
    b[i] = g.mass[i] * rhs[i];
    bd[i] = g.mass[i] * border[i];
  }
  // row equilibration: see solve_tridiag
  for (size_t i = 0; i < N; ++i) {
    const real r = std::max({std::fabs(dl[i]), std::fabs(d[i]),
                             std::fabs(du[i]), std::fabs(sp[i])});
    if (r > 0) {
      dl[i] /= r;
      d[i] /= r;
      du[i] /= r;
      sp[i] /= r;
      b[i] /= r;
    }
  }
  for (size_t i = 0; i < N; ++i) {
    if (i + 1 < N && std::fabs(dl[i + 1]) > std::fabs(d[i])) {
      std::swap(d[i], dl[i + 1]);
      std::swap(du[i], d[i + 1]);
      if (i + 2 < N) {
        du2[i] = du[i + 1];
        du[i + 1] = 0;
      }
      std::swap(sp[i], sp[i + 1]);
      std::swap(b[i], b[i + 1]);
    }
    if (d[i] == 0) d[i] = 1e-300L;
    if (i + 1 < N) {
      const real m = dl[i + 1] / d[i];
      d[i + 1] -= m * du[i];
      if (i + 2 < N) du[i + 1] -= m * du2[i];
      sp[i + 1] -= m * sp[i];
      b[i + 1] -= m * b[i];
    }
    const real mb = bd[i] / d[i];
    if (mb != 0) {
      bd[i] = 0;
      bd[i + 1] -= mb * du[i];
      bd[i + 2] -= mb * du2[i];
      bdSpike -= mb * sp[i];
      bdRhs -= mb * b[i];
    }
  }
  if (bdSpike == 0)
    throw std::runtime_error("solve_bordered: bordered system singular");
  BorderedSolution sol;
  sol.xLast = bdRhs / bdSpike;
  sol.x.assign(N, 0);
  for (size_t i = N; i-- > 0;) {
    real s = b[i] - sp[i] * sol.xLast;
    if (i + 1 < N) s -= du[i] * sol.x[i + 1];
    if (i + 2 < N) s -= du2[i] * sol.x[i + 2];
    sol.x[i] = s / d[i];
  }
  return sol;
}

// weighted norms and inner products under the lumped sphere-volume mass
inline real dot_mass(const Grid& g, const std::vector<real>& u,
                     const std::vector<real>& v) {
  real s = 0, c = 0;
  for (size_t i = 0; i < g.size(); ++i) {
    const real term = g.mass[i] * u[i] * v[i] - c;
    const real t = s + term;
    c = (t - s) - term;
    s = t;
  }
  return s * sphere_volume(g.n - 1);
}
inline real norm_mass(const Grid& g, const std::vector<real>& u) {
  return std::sqrt(dot_mass(g, u, u));
}

// ---------------------------------------------------------------------------
// nonlinear residual and Newton
// ---------------------------------------------------------------------------

// F(u)_i = (A u)_i + h u - f (u+)^{2*-1} - pi^2 eta(u)^{-(2*+1)}
inline std::vector<real> residual_F(const DiscretizedOperator& op,
                                    const std::vector<real>& u) {
  std::vector<real> F = apply_laplacian(op.grid, u);
  const real ts = op.twoStar;
  for (size_t i = 0; i < op.size(); ++i) {
    const real up = u[i] > 0 ? u[i] : 0;
    F[i] += op.h[i] * u[i] - op.f[i] * std::pow(up, ts - 1) -
            op.piSq[i] * std::pow(eta_truncate(op.epsilonTrunc, u[i]), -(ts + 1));
  }
  return F;
}

// diagonal of dF/du (the Laplacian block is handled by solve_tridiag)
inline std::vector<real> jacobian_potential(const DiscretizedOperator& op,
                                            const std::vector<real>& u) {
  const real ts = op.twoStar;
  std::vector<real> V(op.size());
  for (size_t i = 0; i < op.size(); ++i) {
    const real up = u[i] > 0 ? u[i] : 0;
    real v = op.h[i] - (ts - 1) * op.f[i] * (up > 0 ? std::pow(up, ts - 2) : 0);
    if (u[i] > op.epsilonTrunc)  // eta branch active iff u > eps
      v += (ts + 1) * op.piSq[i] * std::pow(u[i], -(ts + 2));
    V[i] = v;
  }
  return V;
}

struct SolveResult {
  std::vector<real> u;
  real residSup = 0;
  real uMin = 0, uMax = 0;
  int morseIndex = -1;   // filled by linearization_spectrum when requested
  real lambda0 = 0;      // filled by projected diagnostics when requested
  bool converged = false;
  int iterations = 0;
  bool etaActive = false;  // truncation branch was hit at some iterate
};

inline real resid_sup(const std::vector<real>& F) {
  real s = 0;
  for (real x : F) s = std::max(s, std::fabs(x));
  return s;
}

// Damped Newton with Armijo backtracking on ||F||_M^2.  deflated: list of
// previously found roots; the deflation operator (shifted inverse-distance,
// exponent 2, shift 1) only rescales the Newton step, computed via
// Sherman-Morrison on the rank-one Jacobian correction.
inline SolveResult newton_solve(const DiscretizedOperator& op,
                                std::vector<real> u, const SolverSpec& s = {},
                                const std::vector<std::vector<real>>* deflated =
                                    nullptr) {
  const Grid& g = op.grid;
  SolveResult res;
  for (real x : u)
    if (x <= 0) throw std::invalid_argument("newton_solve: initial not positive");

  auto scale = [&](const std::vector<real>& v) {
    real m = 1;
    for (real x : v) m = std::max(m, std::fabs(x));
    return std::max((real)1, std::pow(m, op.twoStar - 1));
  };
  // deflation factor m(u) = prod_j (1/||u - u_j||_M^2 + 1)
  auto deflFactor = [&](const std::vector<real>& v) {
    real defl = 1;
    if (deflated)
      for (const auto& root : *deflated) {
        std::vector<real> diff(v.size());
        for (size_t i = 0; i < v.size(); ++i) diff[i] = v[i] - root[i];
        defl *= 1 / dot_mass(g, diff, diff) + 1;
      }
    return defl;
  };

  std::vector<real> F = residual_F(op, u);
  real merit = dot_mass(g, F, F);
  {
    const real d0 = deflFactor(u);
    merit *= d0 * d0;
  }
  for (int it = 0; it < s.maxIter; ++it) {
    res.iterations = it;
    if (resid_sup(F) < s.tolNewton * scale(u)) {
      res.converged = true;
      break;
    }
    const std::vector<real> V = jacobian_potential(op, u);
    std::vector<real> step = solve_tridiag(g, V, F);  // J step = F
    if (deflated && !deflated->empty()) {
      // Sherman-Morrison on the rank-one Jacobian correction of G = m(u) F:
      // deflated step = plain step * m/(m + <grad m, step>)
      const real defl = deflFactor(u);
      real gs = 0;
      for (const auto& root : *deflated) {
        std::vector<real> diff(u.size());
        for (size_t i = 0; i < u.size(); ++i) diff[i] = u[i] - root[i];
        const real d2 = dot_mass(g, diff, diff);
        const real pj = 1 / d2 + 1;
        gs += (defl / pj) * (-2 / (d2 * d2)) * dot_mass(g, diff, step);
      }
      const real factor = defl / (defl + gs);
      if (std::isfinite(factor) && factor != 0)
        for (real& x : step) x *= factor;
    }
    real alpha = 1;
    bool accepted = false;
    for (int bt = 0; bt < s.maxBacktrack; ++bt) {
      std::vector<real> trial(u.size());
      bool positive = true;
      for (size_t i = 0; i < u.size(); ++i) {
        trial[i] = u[i] - alpha * step[i];
        positive = positive && trial[i] > 0;
      }
      if (positive) {
        std::vector<real> Ft = residual_F(op, trial);
        const real dt = deflFactor(trial);
        const real mt = dot_mass(g, Ft, Ft) * dt * dt;
        if (mt <= (1 - 2 * s.armijoSigma * alpha) * merit) {
          u = std::move(trial);
          F = std::move(Ft);
          merit = mt;
          accepted = true;
          break;
        }
      }
      alpha /= 2;
    }
    if (!accepted) break;  // stagnation: report last iterate
    for (real x : u)
      if (x <= op.epsilonTrunc) res.etaActive = true;
  }
  res.residSup = resid_sup(F);
  res.converged = res.residSup < s.tolNewton * scale(u);
  res.uMin = *std::min_element(u.begin(), u.end());
  res.uMax = *std::max_element(u.begin(), u.end());
  res.u = std::move(u);
  return res;
}

// relative L^2 (mass-weighted) distance between two profiles
inline real relative_distance(const Grid& g, const std::vector<real>& a,
                              const std::vector<real>& b) {
  std::vector<real> d(a.size());
  for (size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return norm_mass(g, d) / std::max(norm_mass(g, a), norm_mass(g, b));
}

// linear interpolation of a cell-centered profile onto another grid, used to
// carry a converged solution across refinement levels (grid continuation)
inline std::vector<real> interpolate_profile(const Grid& gc,
                                             const std::vector<real>& uc,
                                             const Grid& gf) {
  std::vector<real> uf(gf.size());
  size_t j = 0;
  for (size_t i = 0; i < gf.size(); ++i) {
    const real th = gf.theta[i];
    while (j + 1 < gc.size() && gc.theta[j + 1] < th) ++j;
    if (th <= gc.theta.front()) {
      uf[i] = uc.front();
    } else if (th >= gc.theta.back()) {
      uf[i] = uc.back();
    } else {
      const real w = (th - gc.theta[j]) / (gc.theta[j + 1] - gc.theta[j]);
      uf[i] = (1 - w) * uc[j] + w * uc[j + 1];
    }
  }
  return uf;
}

inline std::vector<SolveResult> deflated_search(
    const DiscretizedOperator& op, const std::vector<std::vector<real>>& seeds,
    const SolverSpec& s = {}) {
  std::vector<SolveResult> found;
  std::vector<std::vector<real>> roots;
  for (const auto& seed : seeds) {
    for (int attempt = 0; attempt < 3; ++attempt) {
      SolveResult r = newton_solve(op, seed, s, roots.empty() ? nullptr : &roots);
      if (!r.converged) break;
      bool fresh = true;
      for (const auto& known : roots)
        if (relative_distance(op.grid, r.u, known) <= 1e-2L) fresh = false;
      if (!fresh) break;
      roots.push_back(r.u);
      found.push_back(std::move(r));
    }
  }
  return found;
}

// ---------------------------------------------------------------------------
// linearization spectrum (Sturm bisection on the symmetrized tridiagonal)
// ---------------------------------------------------------------------------

// potential of the linearized operator at u
inline std::vector<real> linearization_potential(const DiscretizedOperator& op,
                                                 const std::vector<real>& u) {
  const real ts = op.twoStar;
  std::vector<real> V(op.size());
  for (size_t i = 0; i < op.size(); ++i)
    V[i] = op.h[i] - (ts - 1) * op.f[i] * std::pow(u[i], ts - 2) +
           (ts + 1) * op.piSq[i] * std::pow(u[i], -(ts + 2));
  return V;
}

namespace detail {
// count of eigenvalues < x of the symmetrized operator
// T = M^{-1/2}(K + M diag(V))M^{-1/2}
inline int sturm_count(const Grid& g, const std::vector<real>& V, real x) {
  const size_t N = g.size();
  int count = 0;
  real d = 0;
  for (size_t i = 0; i < N; ++i) {
    const real diag =
        (g.faceCoef[i] + g.faceCoef[i + 1]) / g.mass[i] + V[i] - x;
    const real off2 =
        i > 0 ? g.faceCoef[i] * g.faceCoef[i] / (g.mass[i] * g.mass[i - 1]) : 0;
    d = diag - (i > 0 ? off2 / d : 0);
    if (d == 0) d = -1e-300L;
    if (d < 0) ++count;
  }
  return count;
}
}  // namespace detail

// lowest m eigenvalues of Delta + V under the sphere-volume weight
inline std::vector<real> linearization_spectrum(const DiscretizedOperator& op,
                                                const std::vector<real>& u,
                                                int m = 4) {
  const Grid& g = op.grid;
  const std::vector<real> V = linearization_potential(op, u);
  // Gershgorin bounds of the symmetrized matrix
  real lo = 1e300L, hi = -1e300L;
  for (size_t i = 0; i < g.size(); ++i) {
    const real diag = (g.faceCoef[i] + g.faceCoef[i + 1]) / g.mass[i] + V[i];
    real r = 0;
    if (i > 0) r += g.faceCoef[i] / std::sqrt(g.mass[i] * g.mass[i - 1]);
    if (i + 1 < g.size())
      r += g.faceCoef[i + 1] / std::sqrt(g.mass[i] * g.mass[i + 1]);
    lo = std::min(lo, diag - r);
    hi = std::max(hi, diag + r);
  }
  std::vector<real> eig(m);
  for (int k = 0; k < m; ++k) {
    real a = lo, b = hi;
    for (int it = 0; it < 200 && (b - a) > 1e-14L * std::max((real)1, std::fabs(b));
         ++it) {
      const real mid = (a + b) / 2;
      if (detail::sturm_count(g, V, mid) >= k + 1)
        b = mid;
      else
        a = mid;
    }
    eig[k] = (a + b) / 2;
  }
  return eig;
}

inline int morse_index(const DiscretizedOperator& op,
                       const std::vector<real>& u) {
  return detail::sturm_count(op.grid, linearization_potential(op, u), 0);
}

// ---------------------------------------------------------------------------
// projected correction (phi, lambda0)
// ---------------------------------------------------------------------------

struct ReductionResult {
  std::vector<real> tGrid;
  std::vector<real> lambda0Curve;
  std::vector<real> phiH1Norms;
  std::vector<real> residNorms;  // ||R(t)||_{L^{2n/(n+2)}} for the contract
  real zeroCrossing = 0;
  bool crossingFound = false;
};

// One bordered solve: find (phi, lambda0) with
//   F(u0 + W + phi) = lambda0 * L_h z0hat   (strong form of the h-projection)
//   <phi, z0hat>_h = 0
// where L_h = Delta + h and z0hat is Z0 normalized in the h-inner product.
// Newton in phi with block elimination of the rank-one border.
struct ProjectedSolve {
  std::vector<real> phi;
  real lambda0 = 0;
  real phiH1 = 0;
  bool converged = false;
};

inline ProjectedSolve projected_solve_at(const DiscretizedOperator& op,
                                         const std::vector<real>& Wvec,
                                         const std::vector<real>& z0,
                                         const SolverSpec& s = {}) {
  const Grid& g = op.grid;
  const size_t N = g.size();
  // c = (K + M h) z0 in mass-scaled form: c_i = m_i * (L_h z0)_i
  std::vector<real> Lz = apply_laplacian(g, z0);
  for (size_t i = 0; i < N; ++i) Lz[i] += op.h[i] * z0[i];
  const real z0h = dot_mass(g, Lz, z0);  // <z0,z0>_h
  if (z0h <= 0) throw std::runtime_error("projected_solve: degenerate Z0");
  const real zn = std::sqrt(z0h);
  std::vector<real> z0hat(N), Lzhat(N);
  for (size_t i = 0; i < N; ++i) {
    z0hat[i] = z0[i] / zn;
    Lzhat[i] = Lz[i] / zn;
  }

  ProjectedSolve ps;
  ps.phi.assign(N, 0);
  real lambda = 0;
  std::vector<real> u(N);
  auto evalR = [&](const std::vector<real>& phi, real lam) {
    for (size_t i = 0; i < N; ++i) u[i] = 1 + Wvec[i] + phi[i];
    std::vector<real> R = residual_F(op, u);
    for (size_t i = 0; i < N; ++i) R[i] -= lam * Lzhat[i];
    return R;
  };
  std::vector<real> F = evalR(ps.phi, lambda);
  real merit = dot_mass(g, F, F);
  for (int it = 0; it < s.maxIter; ++it) {
    for (size_t i = 0; i < N; ++i) u[i] = 1 + Wvec[i] + ps.phi[i];
    const real con = dot_mass(g, ps.phi, Lzhat);  // <phi, z0hat>_h
    real uMax = 0;
    for (real x : u) uMax = std::max(uMax, std::fabs(x));
    const real sc = std::max((real)1, std::pow(uMax, op.twoStar - 1));
    if (resid_sup(F) < s.tolNewton * sc && std::fabs(con) < s.tolNewton) {
      ps.converged = true;
      break;
    }
    const std::vector<real> V = jacobian_potential(op, u);
    // bordered Newton system: [J, -Lzhat; c^T, 0][dphi; dlambda] = -[F; con]
    std::vector<real> negF(N);
    for (size_t i = 0; i < N; ++i) negF[i] = -F[i];
    const BorderedSolution sol = solve_bordered(
        g, V, Lzhat, Lzhat, negF, -con / sphere_volume(g.n - 1));
    const real dlambda = sol.xLast;
    // damped update on ||R||_M^2, restricted to the physical branch
    // u = 1 + W + phi > epsilonTrunc (Lemma 2.1 regime, eta inactive)
    real alpha = 1;
    bool accepted = false;
    for (int bt = 0; bt < s.maxBacktrack; ++bt) {
      std::vector<real> phiTrial(N);
      bool physical = true;
      for (size_t i = 0; i < N; ++i) {
        phiTrial[i] = ps.phi[i] + alpha * sol.x[i];
        physical =
            physical && 1 + Wvec[i] + phiTrial[i] > op.epsilonTrunc;
      }
      if (physical) {
        const real lamTrial = lambda + alpha * dlambda;
        std::vector<real> Ft = evalR(phiTrial, lamTrial);
        const real mt = dot_mass(g, Ft, Ft);
        if (mt < merit) {
          ps.phi = std::move(phiTrial);
          lambda = lamTrial;
          F = std::move(Ft);
          merit = mt;
          accepted = true;
          break;
        }
      }
      alpha /= 2;
    }
    if (!accepted) break;
  }
  ps.lambda0 = lambda;
  // discrete H1-h norm of phi
  std::vector<real> Lphi = apply_laplacian(g, ps.phi);
  for (size_t i = 0; i < N; ++i) Lphi[i] += op.h[i] * ps.phi[i];
  ps.phiH1 = std::sqrt(std::max((real)0, dot_mass(g, Lphi, ps.phi)));
  return ps;
}

inline ReductionResult projected_correction(const ModelConfig& cfg,
                                            real r, const std::vector<real>& tGrid,
                                            const SolverSpec& s = {},
                                            const QuadratureSpec& q = {}) {
  ReductionResult rr;
  rr.tGrid = tGrid;
  for (real t : tGrid) {
    BubbleParams bp = make_bubble(cfg, r, t);
    Grid g = make_grid(cfg.dim.n, bp.delta(), s);
    DiscretizedOperator op = assemble_operator(cfg, g);
    std::vector<real> Wvec(g.size()), z0(g.size());
    Bubble B(cfg, bp);
    for (size_t i = 0; i < g.size(); ++i) {
      const real rho = Chart::rho_of_theta(g.theta[i]);
      Wvec[i] = B.W(rho);
      z0[i] = B.Z0(rho);
    }
    ProjectedSolve ps = projected_solve_at(op, Wvec, z0, s);
    rr.lambda0Curve.push_back(ps.lambda0);
    rr.phiH1Norms.push_back(ps.phiH1);
    rr.residNorms.push_back(residual_norm(cfg, bp, q));
  }
  // bracketed zero crossing by local linear interpolation
  for (size_t i = 1; i < rr.tGrid.size(); ++i) {
    const real a = rr.lambda0Curve[i - 1], b = rr.lambda0Curve[i];
    if (a == 0 || a * b < 0) {
      rr.zeroCrossing =
          rr.tGrid[i - 1] + (rr.tGrid[i] - rr.tGrid[i - 1]) * a / (a - b);
      rr.crossingFound = true;
      break;
    }
  }
  return rr;
}

// ---------------------------------------------------------------------------
// family construction
// ---------------------------------------------------------------------------

struct FamilyMember {
  real epsilon = 0, mu = 0, delta = 0;
  SolveResult sol;
};

struct FamilyReport {
  std::vector<FamilyMember> members;
  bool supIncreasing = false;
  real minConsecutiveRatio = 0;
  real minPairwiseDistance = 0;
  bool allAboveTrunc = false;
  bool allConverged = false;
};

// One peaked solution per epsilon, seeded at u0 + W(tSeed, 0).
inline FamilyReport family_construct(int n, real M, real r, real tSeed,
                                     const std::vector<real>& epsList,
                                     real muExp, const SolverSpec& s = {},
                                     real epsilonTrunc = 0.1L) {
  FamilyReport rep;
  for (real eps : epsList) {
    FamilyMember fm;
    fm.epsilon = eps;
    fm.mu = std::pow(eps, muExp);
    ModelConfig cfg = make_config(n, M, eps, fm.mu, epsilonTrunc);
    BubbleParams bp = make_bubble(cfg, r, tSeed);
    fm.delta = bp.delta();
    Grid g = make_grid(n, fm.delta, s);
    DiscretizedOperator op = assemble_operator(cfg, g);
    Bubble B(cfg, bp);
    std::vector<real> seed(g.size());
    for (size_t i = 0; i < g.size(); ++i)
      seed[i] = 1 + B.W(Chart::rho_of_theta(g.theta[i]));
    fm.sol = newton_solve(op, seed, s);
    fm.sol.morseIndex = morse_index(op, fm.sol.u);
    rep.members.push_back(std::move(fm));
  }
  rep.allConverged = true;
  rep.allAboveTrunc = true;
  rep.supIncreasing = true;
  rep.minConsecutiveRatio = 1e300L;
  for (size_t i = 0; i < rep.members.size(); ++i) {
    const auto& m = rep.members[i];
    rep.allConverged = rep.allConverged && m.sol.converged;
    rep.allAboveTrunc =
        rep.allAboveTrunc && m.sol.uMin >= 0.999999L * epsilonTrunc;
    if (i > 0) {
      const real ratio = m.sol.uMax / rep.members[i - 1].sol.uMax;
      rep.supIncreasing = rep.supIncreasing && ratio > 1;
      rep.minConsecutiveRatio = std::min(rep.minConsecutiveRatio, ratio);
    }
  }
  // pairwise distances need a common grid: compare by resampling onto the
  // finest member grid via linear interpolation in theta
  rep.minPairwiseDistance = 1e300L;
  if (rep.members.size() > 1) {
    size_t finest = 0;
    for (size_t i = 1; i < rep.members.size(); ++i)
      if (rep.members[i].delta < rep.members[finest].delta) finest = i;
    Grid gf = make_grid(n, rep.members[finest].delta, s);
    auto resample = [&](const FamilyMember& m) {
      Grid gm = make_grid(n, m.delta, s);
      std::vector<real> out(gf.size());
      size_t j = 0;
      for (size_t i = 0; i < gf.size(); ++i) {
        const real th = gf.theta[i];
        while (j + 1 < gm.theta.size() && gm.theta[j + 1] < th) ++j;
        if (j + 1 >= gm.theta.size()) {
          out[i] = m.sol.u.back();
        } else {
          const real t0 = gm.theta[j], t1 = gm.theta[j + 1];
          const real w = (th - t0) / (t1 - t0);
          out[i] = (1 - w) * m.sol.u[j] + w * m.sol.u[j + 1];
        }
      }
      return out;
    };
    std::vector<std::vector<real>> resampled;
    for (const auto& m : rep.members) resampled.push_back(resample(m));
    for (size_t i = 0; i < resampled.size(); ++i)
      for (size_t j = i + 1; j < resampled.size(); ++j)
        rep.minPairwiseDistance =
            std::min(rep.minPairwiseDistance,
                     relative_distance(gf, resampled[i], resampled[j]));
  }
  return rep;
}

}  // namespace lichnlab
