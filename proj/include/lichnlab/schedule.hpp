#pragma once

// Perturbation schedules (eps_k, mu_k, r_k, xi_k) and their validity checks.
// Two modes:
//  - paper-sequence: eps_k = k^{-4(n-2)}, r_k = k^{-7/3}, mu_k per the
//    dimension branch, xi_k at chart position (1/k, 0, ..., 0).
//  - free-parameter: geometric ladders eps = 2^{-j} with mu tied to eps by the
//    same branch exponent and r fixed; used for convergence studies since the
//    paper sequence underflows double precision within a few indices.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "constants.hpp"

namespace lichnlab {

enum class ScheduleMode { PaperSequence, FreeParameter };
enum class GeometryBranch { Lcf, NonLcf };  // sphere is l.c.f.; NonLcf only
                                            // enters through the reduced map

struct ScheduleEntry {
  real epsilon = 0, mu = 0, r = 0;
  real xi = 0;  // chart coordinate of xi_k along the first axis
};

struct Schedule {
  int n = 7;
  GeometryBranch branch = GeometryBranch::Lcf;
  ScheduleMode mode = ScheduleMode::PaperSequence;
  int k0 = 2;
  // free-parameter mode:
  real freeR = 0.5L;      // fixed cutoff radius
  real freeEpsBase = 2;   // eps_k = freeEpsBase^{-k}
  // n = 6 branch: delta_k rule (delta_k = epsilon_k per the paper's choice)
  bool n6 = false;
  // optional rule overrides (k -> value); used to probe invalid schedules
  std::function<real(int)> epsRule, muRule, rRule;

  real muExponent() const {
    if (n6) return 0.5L;  // n=6: mu free; sqrt(eps) satisfies delta=o(mu)
    if (branch == GeometryBranch::NonLcf && n >= 10) return 0.25L;
    return (real)2 / (n - 2);
  }
};

inline ScheduleEntry schedule_at(const Schedule& s, int k) {
  if (k < s.k0) throw std::out_of_range("schedule_at: k < k0");
  ScheduleEntry e;
  if (s.mode == ScheduleMode::PaperSequence) {
    e.epsilon = std::pow((real)k, -(real)(4 * (s.n - 2)));
    e.r = std::pow((real)k, (real)-7 / 3);
  } else {
    e.epsilon = std::pow(s.freeEpsBase, (real)-k);
    e.r = s.freeR;
  }
  if (s.epsRule) e.epsilon = s.epsRule(k);
  if (s.rRule) e.r = s.rRule(k);
  e.mu = s.muRule ? s.muRule(k) : std::pow(e.epsilon, s.muExponent());
  e.xi = (real)1 / k;
  return e;
}

struct ValidityReport {
  bool pass = true;
  std::vector<std::string> failures;
  void fail(const std::string& why) {
    pass = false;
    failures.push_back(why);
  }
};

// Finite-range checks of (condrk): r_k k^2 -> 0 and mu_k/r_k^3 -> 0, realized
// as strict monotone decrease of the ratios over [k0, kmax].  For n = 6 the
// (condrk6) variants delta_k/mu_k and mu_k/r_k^2 are checked instead.
inline ValidityReport validate_schedule(const Schedule& s, int kmax) {
  if (kmax <= s.k0) throw std::invalid_argument("validate_schedule: kmax <= k0");
  ValidityReport rep;
  real prevRatio1 = -1, prevRatio2 = -1, prevRatio3 = -1;
  ScheduleEntry prev{};
  for (int k = s.k0; k <= kmax; ++k) {
    ScheduleEntry e = schedule_at(s, k);
    if (!(e.epsilon > 0 && e.mu > 0 && e.r > 0))
      rep.fail("nonpositive entry at k=" + std::to_string(k));
    if (k > s.k0) {
      if (!(e.epsilon < prev.epsilon))
        rep.fail("epsilon not decreasing at k=" + std::to_string(k));
      if (!(e.mu < prev.mu))
        rep.fail("mu not decreasing at k=" + std::to_string(k));
      if (s.mode == ScheduleMode::PaperSequence && !(e.r < prev.r))
        rep.fail("r not decreasing at k=" + std::to_string(k));
    }
    const real ratio1 = e.r * k * (real)k;  // r_k = o(k^-2)
    const real ratio2 = s.n6 ? e.mu / (e.r * e.r)        // mu = o(r^2)
                             : e.mu / (e.r * e.r * e.r); // mu = o(r^3)
    const real ratio3 = s.n6 ? e.epsilon / e.mu : 0;     // delta_k/mu_k -> 0
    if (s.mode == ScheduleMode::PaperSequence && k > s.k0) {
      if (!(ratio1 < prevRatio1))
        rep.fail("r_k k^2 not decreasing at k=" + std::to_string(k));
      if (!(ratio2 < prevRatio2))
        rep.fail(std::string(s.n6 ? "mu/r^2" : "mu/r^3") +
                 " not decreasing at k=" + std::to_string(k));
      if (s.n6 && !(ratio3 < prevRatio3))
        rep.fail("delta/mu not decreasing at k=" + std::to_string(k));
    }
    prev = e;
    prevRatio1 = ratio1;
    prevRatio2 = ratio2;
    prevRatio3 = ratio3;
  }
  return rep;
}

}  // namespace lichnlab
