#pragma once

// Subcommand pipelines behind the CLI: each consumes a RunConfig, runs the
// corresponding module workflow, and returns a ReportEnvelope whose pass flag
// carries the command's attached acceptance check (exit-code contract).

#include <sstream>
#include <string>
#include <vector>

#include "energy.hpp"
#include "gram.hpp"
#include "n6.hpp"
#include "reduced.hpp"
#include "report.hpp"
#include "solver.hpp"

namespace lichnlab {

inline std::vector<real> parse_ladder(const std::string& s) {
  std::vector<real> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    size_t pos = 0;
    const real v = std::stold(tok, &pos);
    if (pos != tok.size())
      throw std::runtime_error("eps ladder: malformed entry '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::runtime_error("eps ladder: empty");
  return out;
}

inline QuadratureSpec quad_spec(const RunConfig& cfg) {
  QuadratureSpec q;
  q.relTol = cfg.num("tolQuad", q.relTol);
  return q;
}

inline SolverSpec solver_spec(const RunConfig& cfg) {
  SolverSpec s;
  s.nodesTarget = cfg.integer("nodesTarget", s.nodesTarget);
  s.tolNewton = cfg.num("tolNewton", s.tolNewton);
  return s;
}

// expansion: Prop. 4.1 ladder.  Attached check: gap decrease along the
// ladder with at most one inversion.
inline ReportEnvelope run_expansion(const RunConfig& cfg) {
  const int n = cfg.integer("n", 7);
  const real M = cfg.num("M", 20);
  const real r = cfg.num("r", 2);
  const real t = cfg.num("t", 1);
  const real p = cfg.num("p", 0);
  const real muExp = cfg.num("muExp", (real)2 / (n - 2));
  std::vector<real> ladder;
  if (cfg.has("epsLadder")) {
    ladder = parse_ladder(cfg.str("epsLadder", ""));
  } else {
    const int jMin = cfg.integer("jMin", 6), jMax = cfg.integer("jMax", 12);
    const int jStep = cfg.integer("jStep", 1);
    for (int j = jMin; j <= jMax; j += jStep)
      ladder.push_back(std::pow((real)2, (real)-j));
  }
  const QuadratureSpec q = quad_spec(cfg);

  ReducedEnergySpec spec;
  spec.n = n;
  spec.bump.M = M;
  const real H = Hred_eval(spec, t, p);
  const real dtH = Hred_dt(spec, t);

  Payload pay;
  pay.add("n", n);
  pay.add("M", M);
  pay.add("r", r);
  pay.add("t", t);
  pay.add("p", p);
  pay.add("muExp", muExp);
  pay.add("predictedH", H);
  std::ostringstream csv;
  csv << "epsilon,measured,predicted,gap,dt_measured,dt_predicted,I2,"
         "residNormSq,minPiSq\n";
  std::vector<real> gaps;
  std::vector<real> epsCol, measCol, i2Col, rrCol, piCol;
  for (real eps : ladder) {
    const ExpansionReport rep =
        expansion_rung(n, M, r, t, p, eps, muExp, H, true, q);
    const real dt = 0.01L * t;
    const real mPlus =
        expansion_rung(n, M, r, t + dt, p, eps, muExp, H, false, q).measured;
    const real mMinus =
        expansion_rung(n, M, r, t - dt, p, eps, muExp, H, false, q).measured;
    const real dtMeasured = (mPlus - mMinus) / (2 * dt);
    gaps.push_back(rep.gap);
    epsCol.push_back(eps);
    measCol.push_back(rep.measured);
    i2Col.push_back(rep.I2);
    rrCol.push_back(rep.residNormSq);
    piCol.push_back(rep.minPiSq);
    csv << format_real(eps) << ',' << format_real(rep.measured) << ','
        << format_real(H) << ',' << format_real(rep.gap) << ','
        << format_real(dtMeasured) << ',' << format_real(dtH) << ','
        << format_real(rep.I2) << ',' << format_real(rep.residNormSq) << ','
        << format_real(rep.minPiSq) << '\n';
  }
  int inversions = 0;
  for (size_t i = 1; i < gaps.size(); ++i)
    if (gaps[i] >= gaps[i - 1]) ++inversions;
  pay.addArray("epsilon", epsCol);
  pay.addArray("measured", measCol);
  pay.addArray("gap", gaps);
  pay.addArray("I2", i2Col);
  pay.addArray("residNormSq", rrCol);
  pay.addArray("minPiSq", piCol);
  pay.add("inversions", inversions);
  pay.add("finalRelGap", gaps.back() / std::fabs(H));

  ReportEnvelope env;
  env.command = "expansion";
  env.configHash = config_hash(cfg);
  env.pass = inversions <= 1;
  env.payload = pay.render();
  env.csv = csv.str();
  return env;
}

// reduced: critical-point certificate for H.  Attached check: Hessian
// signature certified and the gradient at the root is zero at scale.
inline ReportEnvelope run_reduced(const RunConfig& cfg) {
  const int n = cfg.integer("n", 7);
  ReducedEnergySpec spec;
  spec.n = n;
  spec.bump.M = cfg.num("M", 20);
  const CriticalPoint cp = find_critical(spec);
  const real t0 = t0_closed_form(spec);
  const real gradScaled =
      std::fabs(cp.gradAtRoot) / (std::fabs(cp.hessTT) * cp.tM);

  Payload pay;
  pay.add("n", n);
  pay.add("M", spec.bump.M);
  pay.add("tM", cp.tM);
  pay.add("t0", t0);
  pay.add("relGapT0", std::fabs(cp.tM - t0) / t0);
  pay.add("hessTT", cp.hessTT);
  pay.add("hessPP", cp.hessPP);
  pay.add("signatureOk", cp.signatureOk);
  pay.add("bracketLo", cp.bracketLo);
  pay.add("bracketHi", cp.bracketHi);
  pay.add("gradAtRootScaled", gradScaled);

  ReportEnvelope env;
  env.command = "reduced";
  env.configHash = config_hash(cfg);
  env.pass = cp.signatureOk && gradScaled < 1e-10L;
  env.payload = pay.render();
  std::ostringstream csv;
  csv << "tM,t0,hessTT,hessPP,gradAtRootScaled\n"
      << format_real(cp.tM) << ',' << format_real(t0) << ','
      << format_real(cp.hessTT) << ',' << format_real(cp.hessPP) << ','
      << format_real(gradScaled) << '\n';
  env.csv = csv.str();
  return env;
}

// solve: one peaked solution.  Attached check: converged, scaled residual at
// tolerance, solution above the truncation level.
inline ReportEnvelope run_solve(const RunConfig& cfg) {
  const int n = cfg.integer("n", 7);
  const real M = cfg.num("M", 20);
  const real eps = cfg.num("eps", 3e-6L);
  const real muExp = cfg.num("muExp", 0.4L);
  const real r = cfg.num("r", 0.5L);
  const real t = cfg.num("t", 0.332L);
  const SolverSpec s = solver_spec(cfg);

  ModelConfig mc = make_config(n, M, eps, std::pow(eps, muExp));
  BubbleParams bp = make_bubble(mc, r, t);
  Grid g = make_grid(n, bp.delta(), s);
  DiscretizedOperator op = assemble_operator(mc, g);
  Bubble B(mc, bp);
  std::vector<real> seed(g.size());
  for (size_t i = 0; i < g.size(); ++i)
    seed[i] = 1 + B.W(Chart::rho_of_theta(g.theta[i]));
  SolveResult sol = newton_solve(op, seed, s);
  const int morse = morse_index(op, sol.u);
  const real scale = std::max((real)1, std::pow(sol.uMax, mc.dim.twoStar - 1));
  const real residScaled = sol.residSup / scale;

  Payload pay;
  pay.add("n", n);
  pay.add("eps", eps);
  pay.add("mu", bp.mu);
  pay.add("delta", bp.delta());
  pay.add("t", t);
  pay.add("converged", sol.converged);
  pay.add("iterations", sol.iterations);
  pay.add("uMax", sol.uMax);
  pay.add("uMin", sol.uMin);
  pay.add("residSupScaled", residScaled);
  pay.add("morseIndex", morse);
  pay.add("etaActive", sol.etaActive);

  ReportEnvelope env;
  env.command = "solve";
  env.configHash = config_hash(cfg);
  env.pass = sol.converged && residScaled < 10 * s.tolNewton &&
             sol.uMin >= mc.base.epsilonTrunc;
  env.payload = pay.render();
  std::ostringstream csv;
  csv << "theta,u\n";
  for (size_t i = 0; i < g.size(); ++i)
    csv << format_real(g.theta[i]) << ',' << format_real(sol.u[i]) << '\n';
  env.csv = csv.str();
  return env;
}

// family: non-compactness demo.  Attached check: the distinctness verdict.
inline ReportEnvelope run_family(const RunConfig& cfg) {
  const int n = cfg.integer("n", 7);
  const real M = cfg.num("M", 20);
  const real r = cfg.num("r", 0.5L);
  const real tSeed = cfg.num("t", 0.332L);
  const real muExp = cfg.num("muExp", 0.4L);
  const std::vector<real> ladder =
      parse_ladder(cfg.str("epsLadder", "3e-6,1e-6,3e-7"));
  const SolverSpec s = solver_spec(cfg);
  const FamilyReport fr = family_construct(n, M, r, tSeed, ladder, muExp, s);

  Payload pay;
  pay.add("n", n);
  pay.add("tSeed", tSeed);
  std::vector<real> epsCol, uMaxCol, uMinCol;
  std::ostringstream csv;
  csv << "epsilon,delta,converged,iterations,uMax,uMin,morseIndex\n";
  for (const auto& m : fr.members) {
    epsCol.push_back(m.epsilon);
    uMaxCol.push_back(m.sol.uMax);
    uMinCol.push_back(m.sol.uMin);
    csv << format_real(m.epsilon) << ',' << format_real(m.delta) << ','
        << (m.sol.converged ? 1 : 0) << ',' << m.sol.iterations << ','
        << format_real(m.sol.uMax) << ',' << format_real(m.sol.uMin) << ','
        << m.sol.morseIndex << '\n';
  }
  pay.addArray("epsilon", epsCol);
  pay.addArray("uMax", uMaxCol);
  pay.addArray("uMin", uMinCol);
  pay.add("allConverged", fr.allConverged);
  pay.add("allAboveTrunc", fr.allAboveTrunc);
  pay.add("supIncreasing", fr.supIncreasing);
  pay.add("minConsecutiveRatio", fr.minConsecutiveRatio);
  pay.add("minPairwiseDistance", fr.minPairwiseDistance);

  ReportEnvelope env;
  env.command = "family";
  env.configHash = config_hash(cfg);
  env.pass = fr.allConverged && fr.allAboveTrunc && fr.supIncreasing &&
             fr.minConsecutiveRatio >= 2 && fr.minPairwiseDistance > 1e-2L;
  env.payload = pay.render();
  env.csv = csv.str();
  return env;
}

// spectrum: linearization eigenvalues at u0.  Attached check: strict
// stability (lambda_min > 0); for unperturbed n = 7 also the closed form
// 4.8 pi0^2 - 0.8 = 36.4.
inline ReportEnvelope run_spectrum(const RunConfig& cfg) {
  const int n = cfg.integer("n", 7);
  const real M = cfg.num("M", 20);
  const real eps = cfg.num("eps", 0);
  const real mu = cfg.num("mu", eps > 0 ? std::pow(eps, 0.4L) : 1);
  const int m = cfg.integer("numEigs", 4);
  SolverSpec s = solver_spec(cfg);

  ModelConfig mc = make_config(n, M, eps, mu);
  Grid g = make_grid(n, 0.05L, s);
  DiscretizedOperator op = assemble_operator(mc, g);
  std::vector<real> u0(g.size(), 1);
  const std::vector<real> eig = linearization_spectrum(op, u0, m);

  const real b = mc.base.piZeroSq;
  const real ts = mc.dim.twoStar;
  // constant-in-kernel closed form: h - (2*-1) f - (-2*-1) pi^2 at u0 = 1
  const real closed = mc.base.cnSg - (ts - 1) + (ts + 1) * b;

  Payload pay;
  pay.add("n", n);
  pay.add("eps", eps);
  pay.addArray("eigenvalues", eig);
  pay.add("lambdaMin", eig[0]);
  pay.add("closedForm", closed);
  pay.add("relGapClosedForm", std::fabs(eig[0] - closed) / closed);

  ReportEnvelope env;
  env.command = "spectrum";
  env.configHash = config_hash(cfg);
  env.pass = eig[0] > 0 &&
             (eps > 0 || std::fabs(eig[0] - closed) / closed < 1e-6L);
  env.payload = pay.render();
  std::ostringstream csv;
  csv << "index,eigenvalue\n";
  for (int k = 0; k < m; ++k)
    csv << k << ',' << format_real(eig[k]) << '\n';
  env.csv = csv.str();
  return env;
}

// n6: coefficient fit of the n = 6 reduced energy.  Attached check: C0 > 0,
// fit residual < 5%, t0 formula vs measured minimizer within 2%.
inline ReportEnvelope run_n6(const RunConfig& cfg) {
  if (cfg.integer("n", 0) != 6)
    throw std::runtime_error("n6: requires n = 6");
  N6Config c;
  c.a0 = cfg.num("a0", c.a0);
  c.h0 = 1 + c.a0;
  c.mu = cfg.num("mu", c.mu);
  c.r = cfg.num("r", c.r);
  c.relTol = cfg.num("tolQuad", c.relTol);
  const real eps = cfg.num("eps", 1e-3L);
  const N6Report rep = n6_fit_report(c, eps);

  Payload pay;
  pay.add("eps", eps);
  pay.add("a0", c.a0);
  pay.add("A", rep.fit.A);
  pay.add("B", rep.fit.B);
  pay.add("C0", rep.fit.C0);
  pay.add("t0", rep.fit.t0);
  pay.add("residRel", rep.fit.residRel);
  pay.add("tMinMeasured", rep.tMinMeasured);
  pay.add("t0RelGap", rep.t0RelGap);

  ReportEnvelope env;
  env.command = "n6";
  env.configHash = config_hash(cfg);
  env.pass = rep.fit.C0 > 0 && rep.fit.residRel < 0.05L &&
             rep.t0RelGap < 0.02L;
  env.payload = pay.render();
  std::ostringstream csv;
  csv << "t,measuredOverEps3\n";
  for (size_t i = 0; i < rep.tGrid.size(); ++i)
    csv << format_real(rep.tGrid[i]) << ','
        << format_real(rep.yNormalized[i]) << '\n';
  env.csv = csv.str();
  return env;
}

inline ReportEnvelope run_command(const RunConfig& cfg,
                                  const std::string& name) {
  if (name == "expansion") return run_expansion(cfg);
  if (name == "reduced") return run_reduced(cfg);
  if (name == "solve") return run_solve(cfg);
  if (name == "family") return run_family(cfg);
  if (name == "spectrum") return run_spectrum(cfg);
  if (name == "n6") return run_n6(cfg);
  throw std::runtime_error("unknown command: " + name);
}

}  // namespace lichnlab
