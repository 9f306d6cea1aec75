#include "crossdiff/study.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace crossdiff {

namespace {

// One implicit step of the 2-unknown scheme v' = R_eps(v) - eps phi(v),
// damped Newton with positivity backtracking.
std::array<double, 2> scalar_implicit_step(const RegularizedCoefficients& reg,
                                           const EntropyMap& m1, const EntropyMap& m2,
                                           std::array<double, 2> prev, double tau, double eps) {
  Eigen::Vector2d v(prev[0], prev[1]);
  const Eigen::Vector2d p(prev[0], prev[1]);
  for (int it = 0; it < 120; ++it) {
    Eigen::Vector2d G;
    G[0] = v[0] - p[0] - tau * (reg.reaction(0, v[0], v[1]) - eps * m1.phi(v[0]));
    G[1] = v[1] - p[1] - tau * (reg.reaction(1, v[0], v[1]) - eps * m2.phi(v[1]));
    if (G.cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + v.cwiseAbs().maxCoeff())) return {v[0], v[1]};
    Eigen::Matrix2d J;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double d = reg.reaction_deriv(i, j, v[0], v[1]);
        if (i == j) d -= eps * (i == 0 ? m1.phi_deriv(v[0]) : m2.phi_deriv(v[1]));
        J(i, j) = double(i == j) - tau * d;
      }
    Eigen::Vector2d dv = J.partialPivLu().solve(G);
    double step = 1.0;
    while ((v - step * dv).minCoeff() <= 0 && step > 1e-12) step /= 2;
    v -= step * dv;
  }
  throw SolverError("scalar implicit step did not converge");
}

std::array<double, 2> base_reaction(const CoefficientSet& c, const std::array<double, 2>& v) {
  return {v[0] * (c.growth_rate(0) - c.competition(0, 0)(v[0]) - c.competition(0, 1)(v[1])),
          v[1] * (c.growth_rate(1) - c.competition(1, 0)(v[0]) - c.competition(1, 1)(v[1]))};
}

std::array<double, 2> rk4_step(const CoefficientSet& c, std::array<double, 2> v, double h) {
  auto add = [](std::array<double, 2> a, std::array<double, 2> b, double s) {
    return std::array<double, 2>{a[0] + s * b[0], a[1] + s * b[1]};
  };
  auto k1 = base_reaction(c, v);
  auto k2 = base_reaction(c, add(v, k1, h / 2));
  auto k3 = base_reaction(c, add(v, k2, h / 2));
  auto k4 = base_reaction(c, add(v, k3, h));
  for (int i = 0; i < 2; ++i) v[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return v;
}

}  // namespace

OdeCompareReport ode_compare(const RunConfig& cfg) {
  if (cfg.u0_kind != "constant")
    throw ConfigError("ode comparison needs u0_kind=constant");

  CoefficientSet coeffs = make_coefficients(cfg);
  SpatialSpace space = make_space(cfg);
  SolveConfig sc = make_solve_config(cfg);
  RegularizedCoefficients reg = regularize(coeffs, sc.eps);
  EntropyMap m1(reg, 0), m2(reg, 1);
  Stepper stepper(sc, space, reg, m1, m2);

  auto [u01, u02] = make_initial_data(cfg, space);
  Trajectory traj = stepper.run(u01, u02);

  OdeCompareReport rep;
  const double mu = space.measure();
  const int sub = 100;  // reference substeps per scheme step
  std::array<double, 2> ve{std::max(cfg.u0_c1, sc.u0_floor), std::max(cfg.u0_c2, sc.u0_floor)};
  std::array<double, 2> vr = ve;
  for (const auto& st : traj.steps) {
    std::array<double, 2> mean{space.integrate(st.u1) / mu, space.integrate(st.u2) / mu};
    rep.pde_means.push_back(mean);

    double var1 = (st.u1.maxCoeff() - st.u1.minCoeff()) / (1.0 + std::abs(st.u1.maxCoeff()));
    double var2 = (st.u2.maxCoeff() - st.u2.minCoeff()) / (1.0 + std::abs(st.u2.maxCoeff()));
    rep.max_spatial_variation = std::max({rep.max_spatial_variation, var1, var2});

    ve = scalar_implicit_step(reg, m1, m2, ve, traj.tau, traj.eps);
    rep.euler.push_back(ve);
    for (int s = 0; s < sub; ++s) vr = rk4_step(coeffs, vr, traj.tau / sub);
    rep.reference.push_back(vr);

    for (int i = 0; i < 2; ++i) {
      rep.max_scheme_dev = std::max(
          rep.max_scheme_dev, std::abs(mean[i] - ve[i]) / std::max(std::abs(ve[i]), 1e-12));
      rep.max_reference_dev = std::max(
          rep.max_reference_dev, std::abs(mean[i] - vr[i]) / std::max(std::abs(vr[i]), 1e-12));
    }
  }
  rep.final_pde = rep.pde_means.back();
  rep.final_reference = vr;
  return rep;
}

StudyReport convergence_study(const RunConfig& cfg) {
  StudyReport rep;
  for (int lev = 0; lev < cfg.levels; ++lev) {
    RunConfig c = cfg;
    c.N = cfg.N << lev;
    c.eps = cfg.eps / std::pow(4.0, lev);
    c.n = std::min(cfg.n << lev, 128);

    CoefficientSet coeffs = make_coefficients(c);
    SpatialSpace space = make_space(c);
    SolveConfig sc = make_solve_config(c);
    RegularizedCoefficients reg = regularize(coeffs, sc.eps);
    EntropyMap m1(reg, 0), m2(reg, 1);
    Stepper stepper(sc, space, reg, m1, m2);
    auto [u01, u02] = make_initial_data(c, space);
    Trajectory traj = stepper.run(u01, u02);

    DiagnosticsRecord rec = build_diagnostics(traj, space, reg, m1, m2, sc.newton.tol);
    StudyLevel s;
    s.level = lev;
    s.n = c.n;
    s.N = c.N;
    s.eps = c.eps;
    s.tau = traj.tau;
    const StepDiagnostics& last = rec.steps.back();
    s.entropy_total = last.entropy + last.cum_q + last.cum_w_h1;
    s.apriori_bound = rec.apriori_bound;
    s.duality = rec.duality;
    s.min_u = rec.min_u;
    s.invariants_pass = run_invariant_checks(rec).all_pass();
    for (const auto& theta : default_test_family(c.T)) {
      auto [d1, d2] = weak_residual(traj, space, coeffs, theta);
      s.weak_residual_max = std::max({s.weak_residual_max, std::abs(d1), std::abs(d2)});
    }
    rep.levels.push_back(s);
  }
  return rep;
}

}  // namespace crossdiff
