#include "crossdiff/cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crossdiff/config.hpp"
#include "crossdiff/duality.hpp"
#include "crossdiff/output.hpp"
#include "crossdiff/study.hpp"

namespace crossdiff {

namespace {

struct CommonArgs {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
};

int run_simulate(const CommonArgs& a) {
  RunConfig cfg = parse_config(a.config);
  CoefficientSet coeffs = make_coefficients(cfg);
  SpatialSpace space = make_space(cfg);
  SolveConfig sc = make_solve_config(cfg);
  RegularizedCoefficients reg = regularize(coeffs, sc.eps);
  EntropyMap m1(reg, 0), m2(reg, 1);
  Stepper stepper(sc, space, reg, m1, m2);
  auto [u01, u02] = make_initial_data(cfg, space);
  Trajectory traj = stepper.run(u01, u02);

  DiagnosticsRecord rec = build_diagnostics(traj, space, reg, m1, m2, sc.newton.tol);
  InvariantReport rep = run_invariant_checks(rec);
  const std::string report = report_text(rec, rep);
  write_output(a.out, "series.csv", series_csv(rec));
  write_output(a.out, "fields.csv", fields_csv(traj, space));
  write_output(a.out, "report.txt", report);
  write_output(a.out, "config.echo", echo_config(cfg));
  write_output(a.out, "trajectory.csv", trajectory_csv(traj));
  std::fputs(report.c_str(), stdout);
  return cfg.check_invariants && !rep.all_pass() ? 2 : 0;
}

int run_check_assumptions(const CommonArgs& a) {
  RunConfig cfg = parse_config(a.config);
  AssumptionReport rep = check_assumptions(make_coefficients(cfg));
  std::string text = rep.summary();
  text += std::string("overall: ") + (rep.all_pass() ? "PASS" : "FAIL") + "\n";
  write_output(a.out, "report.txt", text);
  write_output(a.out, "config.echo", echo_config(cfg));
  std::fputs(text.c_str(), stdout);
  return rep.all_pass() ? 0 : 2;
}

Trajectory load_run(const CommonArgs& a, const RunConfig& cfg, const SpatialSpace& space,
                    const SolveConfig& sc, const EntropyMap& m1, const EntropyMap& m2) {
  Trajectory traj = load_trajectory(a.out + "/trajectory.csv", space, m1, m2);
  if (std::abs(traj.tau - sc.tau()) > 1e-12 * sc.tau())
    throw ConfigError("trajectory step size does not match the configured time grid");
  if (int(traj.steps.size()) != cfg.N)
    throw ConfigError("trajectory step count does not match the configured N");
  return traj;
}

int run_verify_entropy(const CommonArgs& a) {
  RunConfig cfg = parse_config(a.config);
  SpatialSpace space = make_space(cfg);
  SolveConfig sc = make_solve_config(cfg);
  RegularizedCoefficients reg = regularize(make_coefficients(cfg), sc.eps);
  EntropyMap m1(reg, 0), m2(reg, 1);
  Trajectory traj = load_run(a, cfg, space, sc, m1, m2);

  DiagnosticsRecord rec = build_diagnostics(traj, space, reg, m1, m2, sc.newton.tol);
  InvariantReport rep = run_invariant_checks(rec);
  const std::string report = report_text(rec, rep);
  write_output(a.out, "report.txt", report);
  std::fputs(report.c_str(), stdout);
  return rep.all_pass() ? 0 : 2;
}

int run_verify_duality(const CommonArgs& a) {
  RunConfig cfg = parse_config(a.config);
  SpatialSpace space = make_space(cfg);
  FDGrid grid = make_grid(cfg);
  SolveConfig sc = make_solve_config(cfg);
  RegularizedCoefficients reg = regularize(make_coefficients(cfg), sc.eps);
  EntropyMap m1(reg, 0), m2(reg, 1);
  Trajectory traj = load_run(a, cfg, space, sc, m1, m2);

  const int N = int(traj.steps.size());
  if (1.0 - 2.0 * cfg.dual_r * traj.tau <= 0.0)
    throw ConfigError("dual_r too large for this time step: need 1 - 2 r tau > 0");

  std::mt19937_64 rng(a.seed);
  auto unit = [&rng] { return double(rng() >> 11) * 0x1.0p-53; };
  auto make_forcing = [&] {
    std::vector<Eigen::VectorXd> F(N, Eigen::VectorXd(grid.num_nodes()));
    for (auto& f : F)
      for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = -unit();
    return F;
  };

  std::ostringstream txt;
  std::string csv =
      "species,efac,c_omega,f_norm,sqrtb_norm,phi_min,max_grad,grad_bound,blap_norm,"
      "blap_bound,max_h1,h1_bound,phi_inf,lap_inf,implied_constant,pass\n";
  bool all_ok = true;
  for (int species = 0; species < 2; ++species) {
    DualChainInput input = chain_from_trajectory(traj, space, m1, m2, reg, grid, species,
                                                 cfg.dual_r, make_forcing());
    DualChain chain = solve_dual_chain(grid, std::move(input));
    DualBoundsReport b = check_dual_bounds(grid, chain);
    DualLinfReport li = check_dual_linf(grid, chain);
    all_ok = all_ok && b.all_ok();

    txt << "species " << species + 1 << ": efac=" << format_g17(b.efac)
        << " c_omega=" << format_g17(b.c_omega) << " f_norm=" << format_g17(b.f_norm)
        << " sqrtb_norm=" << format_g17(b.sqrtb_norm) << "\n";
    txt << "  nonneg " << (b.nonneg ? "PASS" : "FAIL") << " phi_min=" << format_g17(b.phi_min)
        << "\n";
    txt << "  gradient " << (b.grad_ok ? "PASS" : "FAIL") << " "
        << format_g17(b.max_grad) << " <= " << format_g17(b.grad_bound) << "\n";
    txt << "  weighted-laplacian " << (b.blap_ok ? "PASS" : "FAIL") << " "
        << format_g17(b.blap_norm) << " <= " << format_g17(b.blap_bound) << "\n";
    txt << "  h1 " << (b.h1_ok ? "PASS" : "FAIL") << " " << format_g17(b.max_h1)
        << " <= " << format_g17(b.h1_bound) << "\n";
    txt << "  linf: phi_inf=" << format_g17(li.phi_inf) << " lap_inf=" << format_g17(li.lap_inf)
        << " implied_constant=" << format_g17(li.implied_constant) << "\n";

    csv += std::to_string(species + 1) + ',' + format_g17(b.efac) + ',' +
           format_g17(b.c_omega) + ',' + format_g17(b.f_norm) + ',' +
           format_g17(b.sqrtb_norm) + ',' + format_g17(b.phi_min) + ',' +
           format_g17(b.max_grad) + ',' + format_g17(b.grad_bound) + ',' +
           format_g17(b.blap_norm) + ',' + format_g17(b.blap_bound) + ',' +
           format_g17(b.max_h1) + ',' + format_g17(b.h1_bound) + ',' +
           format_g17(li.phi_inf) + ',' + format_g17(li.lap_inf) + ',' +
           format_g17(li.implied_constant) + ',' + (b.all_ok() ? "1" : "0") + '\n';
  }
  txt << "overall: " << (all_ok ? "PASS" : "FAIL") << "\n";
  write_output(a.out, "duality.csv", csv);
  write_output(a.out, "report.txt", txt.str());
  std::fputs(txt.str().c_str(), stdout);
  return all_ok ? 0 : 2;
}

int run_convergence_study(const CommonArgs& a) {
  RunConfig cfg = parse_config(a.config);
  StudyReport rep = convergence_study(cfg);

  std::ostringstream txt;
  bool pass = true;
  for (const auto& s : rep.levels) {
    txt << "level " << s.level << ": n=" << s.n << " N=" << s.N
        << " eps=" << format_g17(s.eps) << " entropy_total=" << format_g17(s.entropy_total)
        << " duality=(" << format_g17(s.duality[0]) << "," << format_g17(s.duality[1])
        << ") weak_residual=" << format_g17(s.weak_residual_max) << " invariants "
        << (s.invariants_pass ? "PASS" : "FAIL") << "\n";
    pass = pass && s.invariants_pass;
  }
  for (size_t l = 1; l < rep.levels.size(); ++l) {
    double prev = rep.levels[l - 1].weak_residual_max;
    double cur = rep.levels[l].weak_residual_max;
    txt << "weak residual ratio level " << l - 1 << "/" << l << " = "
        << format_g17(cur > 0 ? prev / cur : 0.0) << "\n";
  }
  txt << "overall: " << (pass ? "PASS" : "FAIL") << "\n";
  write_output(a.out, "study.csv", study_csv(rep));
  write_output(a.out, "report.txt", txt.str());
  write_output(a.out, "config.echo", echo_config(cfg));
  std::fputs(txt.str().c_str(), stdout);
  return pass ? 0 : 2;
}

int run_ode_compare(const CommonArgs& a) {
  RunConfig cfg = parse_config(a.config);
  OdeCompareReport rep = ode_compare(cfg);
  const bool pass = rep.max_spatial_variation <= 1e-7 && rep.max_scheme_dev <= 1e-6;

  std::ostringstream txt;
  txt << "steps=" << rep.pde_means.size() << " tau=" << format_g17(cfg.T / cfg.N) << "\n";
  txt << "max_spatial_variation=" << format_g17(rep.max_spatial_variation) << "\n";
  txt << "max_scheme_dev=" << format_g17(rep.max_scheme_dev) << "\n";
  txt << "max_reference_dev=" << format_g17(rep.max_reference_dev) << "\n";
  txt << "final_pde=(" << format_g17(rep.final_pde[0]) << "," << format_g17(rep.final_pde[1])
      << ") final_reference=(" << format_g17(rep.final_reference[0]) << ","
      << format_g17(rep.final_reference[1]) << ")\n";
  txt << "overall: " << (pass ? "PASS" : "FAIL") << "\n";
  write_output(a.out, "ode.csv", ode_csv(rep, cfg.T / cfg.N));
  write_output(a.out, "report.txt", txt.str());
  write_output(a.out, "config.echo", echo_config(cfg));
  std::fputs(txt.str().c_str(), stdout);
  return pass ? 0 : 2;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"structure-preserving simulator for two-species cross-diffusion systems"};
  app.require_subcommand(1);

  CommonArgs a;
  auto common = [&a](CLI::App* sub) {
    sub->add_option("--config", a.config, "run configuration, key=value lines")->required();
    sub->add_option("--out", a.out, "output directory");
    sub->add_option("--seed", a.seed, "seed for generated forcing data");
  };
  CLI::App* sim =
      app.add_subcommand("simulate", "run the implicit scheme and check every invariant");
  CLI::App* chk =
      app.add_subcommand("check-assumptions", "validate the model against the admissibility rules");
  CLI::App* ven =
      app.add_subcommand("verify-entropy", "recheck a stored run's entropy and mass estimates");
  CLI::App* vdu =
      app.add_subcommand("verify-duality", "solve dual chains on a stored run and check their bounds");
  CLI::App* stu =
      app.add_subcommand("convergence-study", "rerun under joint (tau, eps, n) refinement");
  CLI::App* ode =
      app.add_subcommand("ode-compare", "compare a spatially constant run against scalar integrators");
  for (CLI::App* sub : {sim, chk, ven, vdu, stu, ode}) common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return run_simulate(a);
    if (chk->parsed()) return run_check_assumptions(a);
    if (ven->parsed()) return run_verify_entropy(a);
    if (vdu->parsed()) return run_verify_duality(a);
    if (stu->parsed()) return run_convergence_study(a);
    if (ode->parsed()) return run_ode_compare(a);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

}  // namespace crossdiff
