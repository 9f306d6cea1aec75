// Acceptance gate: one line per criterion, exit 0 only when every line is PASS.
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fcntl.h>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <unistd.h>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "crossdiff/cli.hpp"
#include "crossdiff/coefficients.hpp"
#include "crossdiff/config.hpp"
#include "crossdiff/diagnostics.hpp"
#include "crossdiff/duality.hpp"
#include "crossdiff/entropy.hpp"
#include "crossdiff/spatial.hpp"
#include "crossdiff/stepper.hpp"
#include "crossdiff/study.hpp"

using namespace crossdiff;
namespace fs = std::filesystem;

namespace {

char detail_buf[256];

template <class... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(detail_buf, sizeof detail_buf, f, args...);
  return detail_buf;
}

PowerLawCoefficients sqrt_cross() {
  PowerLawCoefficients p;
  p.D1 = p.D2 = 1;
  p.A12 = p.A21 = 1;
  p.alpha12 = p.alpha21 = 0.5;
  return p;
}

PowerLawCoefficients logistic_model() {
  auto p = sqrt_cross();
  p.r1 = 1;
  p.S11 = 1;
  p.sigma11 = 1;
  p.A11 = 0.5;
  p.alpha11 = 1.5;
  return p;
}

PowerLawCoefficients competing_model() {
  auto p = sqrt_cross();
  p.r1 = p.r2 = 1;
  p.S11 = p.S12 = p.S21 = p.S22 = 1;
  p.sigma11 = p.sigma12 = p.sigma21 = p.sigma22 = 1;
  p.A11 = p.A22 = 0.5;
  p.alpha11 = p.alpha22 = 1.5;
  return p;
}

Eigen::VectorXd bump(const SpatialSpace& space, double c, double amp) {
  Eigen::VectorXd u(space.num_nodes());
  for (int q = 0; q < space.num_nodes(); ++q)
    u[q] = c + amp * std::cos(std::numbers::pi * space.node_coord(q, 0));
  return u;
}

SolveConfig solve_config(int N, double T, double eps) {
  SolveConfig s;
  s.T = T;
  s.N = N;
  s.eps = eps;
  return s;
}

// one full solve on the unit interval plus its diagnostics and checks
struct Run {
  SpatialSpace space;
  RegularizedCoefficients reg;
  EntropyMap m1, m2;
  Stepper st;
  Trajectory traj;
  DiagnosticsRecord rec;
  InvariantReport rep;

  Run(const PowerLawCoefficients& p, int n, int N, double T, double eps, double c1, double amp1,
      double c2, double amp2)
      : space(SpatialSpace::interval(1.0, n)),
        reg(CoefficientSet::power_law(p), eps),
        m1(reg, 0),
        m2(reg, 1),
        st(solve_config(N, T, eps), space, reg, m1, m2),
        traj(st.run(bump(space, c1, amp1), bump(space, c2, amp2))),
        rec(build_diagnostics(traj, space, reg, m1, m2, st.config().newton.tol)),
        rep(run_invariant_checks(rec)) {}

  bool passes(const char* name) const {
    const CheckResult* c = rep.find(name);
    return c && c->pass;
  }
  double final_mean(int species) const {
    const auto& u = species == 0 ? traj.steps.back().u1 : traj.steps.back().u2;
    return space.integrate(u) / space.measure();
  }
};

// total defect of the stepwise balance  dm = tau int R - eps tau int w
double mass_defect_sum(const Run& r) {
  double prev = r.rec.mass1_0 + r.rec.mass2_0, sum = 0;
  for (const auto& s : r.rec.steps) {
    double dm = s.mass1 + s.mass2 - prev;
    double reac = r.rec.tau * (s.l1_reaction_plus - s.l1_reaction_neg);
    sum += std::abs(dm - reac + r.rec.eps * r.rec.tau * s.w_integral);
    prev = s.mass1 + s.mass2;
  }
  return sum;
}

int quiet_cli(const std::vector<std::string>& args) {
  std::vector<std::string> owned = args;
  owned.insert(owned.begin(), "crossdiff");
  std::vector<char*> argv;
  for (auto& s : owned) argv.push_back(s.data());

  std::fflush(stdout);
  int saved = dup(STDOUT_FILENO);
  int nul = open("/dev/null", O_WRONLY);
  dup2(nul, STDOUT_FILENO);
  int rc = cli_main(int(argv.size()), argv.data());
  std::fflush(stdout);
  dup2(saved, STDOUT_FILENO);
  close(nul);
  close(saved);
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using Verdict = std::pair<bool, std::string>;

struct Recorder {
  bool all = true;
  template <class F>
  void criterion(int id, const char* what, F f) {
    bool ok = false;
    std::string detail;
    try {
      std::tie(ok, detail) = f();
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion-%02d: %s (%s)\n", ok ? "PASS" : "FAIL", id, what, detail.c_str());
    all = all && ok;
  }
};

}  // namespace

int main() {
  Recorder rec;

  // shared solves; criteria report the construction error if one fails
  std::optional<Run> decay, logA, logB;
  std::optional<StudyReport> study;
  std::string decay_err, log_err, study_err;
  try {
    decay.emplace(sqrt_cross(), 16, 100, 1.0, 1e-4, 1.0, 0.4, 1.0, -0.3);
  } catch (const std::exception& e) {
    decay_err = e.what();
  }
  try {
    logA.emplace(logistic_model(), 4, 200, 1.0, 1e-6, 0.5, 0.0, 1.0, 0.0);
    logB.emplace(logistic_model(), 4, 400, 1.0, 2.5e-7, 0.5, 0.0, 1.0, 0.0);
  } catch (const std::exception& e) {
    log_err = e.what();
  }
  try {
    RunConfig cfg;
    cfg.model = competing_model();
    cfg.n = 8;
    cfg.N = 40;
    cfg.T = 0.5;
    cfg.eps = 1e-2;
    cfg.levels = 3;
    cfg.u0_kind = "cosine-bump";
    cfg.u0_amp1 = 0.4;
    cfg.u0_amp2 = -0.3;
    study = convergence_study(cfg);
  } catch (const std::exception& e) {
    study_err = e.what();
  }

  rec.criterion(1, "quadratic form dominates both dissipation lower bounds", []() -> Verdict {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> U(0, 1);
    std::vector<RegularizedCoefficients> regs;
    for (double a12 : {0.3, 0.5, 0.9})
      for (double a21 : {0.3, 0.5, 0.9})
        for (double eps : {0.0, 1e-3})
          for (int self = 0; self < 2; ++self) {
            PowerLawCoefficients p;
            p.D1 = 1;
            p.D2 = 1.25;
            p.A12 = 1.3;
            p.A21 = 0.8;
            p.alpha12 = a12;
            p.alpha21 = a21;
            if (self) {
              p.A11 = 0.4;
              p.alpha11 = 1.5;
              p.A22 = 0.3;
              p.alpha22 = 1.2;
            }
            regs.push_back(regularize(CoefficientSet::power_law(p), eps));
          }
    const int samples = 100000;
    double worst = 1e300;
    for (int s = 0; s < samples; ++s) {
      const auto& reg = regs[s % regs.size()];
      double u1 = std::pow(10.0, -8 + 12 * U(rng));
      double u2 = std::pow(10.0, -8 + 12 * U(rng));
      std::array<double, 2> g1{20 * U(rng) - 10, 20 * U(rng) - 10};
      std::array<double, 2> g2{20 * U(rng) - 10, 20 * U(rng) - 10};
      auto ev = quadratic_form(reg, u1, u2, g1, g2, 2);
      double slack = 1e-9 * (1 + std::abs(ev.q));
      double margin = (ev.q - std::max(ev.bound1, ev.bound2)) / (1 + std::abs(ev.q));
      worst = std::min(worst, margin);
      if (!std::isfinite(ev.q) || ev.bound1 < 0 || ev.bound2 < 0 ||
          ev.q < ev.bound1 - slack || ev.q < ev.bound2 - slack)
        return {false, fmt("sample %d: q=%.3e b1=%.3e b2=%.3e", s, ev.q, ev.bound1, ev.bound2)};
    }
    return {true, fmt("%d samples, worst relative margin %.2e", samples, worst)};
  });

  rec.criterion(2, "entropy maps: density at zero, inversion, convexity", []() -> Verdict {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> U(0, 1);
    int trips = 0;
    for (int k = 0; k < 20; ++k) {
      PowerLawCoefficients p;
      p.D1 = 0.5 + 1.5 * U(rng);
      p.D2 = 0.5 + 1.5 * U(rng);
      p.A12 = std::exp(std::log(0.1) + U(rng) * std::log(30.0));
      p.A21 = std::exp(std::log(0.1) + U(rng) * std::log(30.0));
      p.alpha12 = 0.05 + 0.9 * U(rng);
      p.alpha21 = 0.05 + 0.9 * U(rng);
      double eps = k % 2 == 0 ? 1e-3 : 1e-5;
      RegularizedCoefficients reg(CoefficientSet::power_law(p), eps);
      for (int sp = 0; sp < 2; ++sp) {
        EntropyMap m(reg, sp);
        double cross_at_one = sp == 0 ? p.A21 : p.A12;
        if (std::abs(m.psi_base(0) - cross_at_one) > 1e-12 * (1 + cross_at_one) ||
            std::abs(m.psi(0) - (cross_at_one + eps)) > 1e-12 * (1 + cross_at_one + eps))
          return {false, fmt("set %d species %d: psi(0)=%.17g expected %.17g", k, sp + 1,
                             m.psi(0), cross_at_one + eps)};
        for (int t = 0; t < 250; ++t) {
          double x = std::pow(10.0, -8 + 14 * U(rng));
          double y = m.phi(x);
          double cold = m.phi_inverse(y);
          double warm = m.phi_inverse(y, x * 1.7, 1e-12);
          double tol = 1e-12 * (1 + std::abs(y));
          if (std::abs(m.phi(cold) - y) > tol || std::abs(m.phi(warm) - y) > tol)
            return {false, fmt("set %d species %d: inversion residual at y=%.3e", k, sp + 1, y)};
          trips += 2;
        }
        for (int t = 0; t < 250; ++t) {
          double x = std::pow(10.0, -6 + 10 * U(rng));
          double y = std::pow(10.0, -6 + 10 * U(rng));
          double lhs = m.psi(0.5 * (x + y));
          double rhs = 0.5 * (m.psi(x) + m.psi(y));
          if (lhs > rhs + 1e-9 * (1 + std::abs(m.psi(x)) + std::abs(m.psi(y))))
            return {false, fmt("set %d species %d: midpoint convexity at x=%.3e y=%.3e", k,
                               sp + 1, x, y)};
        }
      }
    }
    return {true, fmt("20 coefficient sets, %d inversion round trips", trips)};
  });

  rec.criterion(3, "discrete Gronwall bound dominates its recursion", []() -> Verdict {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> U(0, 1);
    for (int k = 0; k < 10000; ++k) {
      int len = 1 + int(U(rng) * 40);
      double v0 = 3 * U(rng);
      double theta = 0.02 + 0.83 * U(rng);
      std::vector<double> w(len);
      for (auto& x : w) x = -0.5 * std::log(U(rng) + 1e-300);
      auto bound = discrete_gronwall_bound(v0, theta, w);
      double v = v0;
      for (int i = 0; i < len; ++i) {
        v = (v + w[i]) / (1 - theta);
        if (!(v <= bound[i] * (1 + 1e-12) + 1e-300))
          return {false, fmt("recursion %d escapes at step %d: v=%.17g bound=%.17g", k, i + 1,
                             v, bound[i])};
      }
    }
    double v0 = 2, theta = 0.3, wc = 0.7;
    double lam = theta / (1 - theta);
    auto bound = discrete_gronwall_bound(v0, theta, std::vector<double>(25, wc));
    for (int k = 1; k <= 25; ++k) {
      double closed =
          std::exp(k * lam) * v0 + wc * (std::exp(k * lam) - 1) / (1 - std::exp(-lam));
      if (std::abs(bound[k - 1] - closed) > 1e-12 * closed)
        return {false, fmt("constant-w closed form off at k=%d", k)};
    }
    return {true, "10000 recursions dominated, constant-w closed form matches"};
  });

  rec.criterion(4, "entropy decays along a reaction-free solve", [&]() -> Verdict {
    if (!decay) return {false, "solve failed: " + decay_err};
    if (decay->st.reaction_constant() != 0.0)
      return {false, fmt("expected K=0, got %.3e", decay->st.reaction_constant())};
    for (const char* name :
         {"entropy-monotone-decay", "entropy-dissipation-step", "entropy-apriori-cumulative"})
      if (!decay->passes(name)) return {false, std::string("check failed: ") + name};
    if (!decay->rep.all_pass()) return {false, "a non-entropy check failed"};
    double e0 = decay->rec.entropy0, eT = decay->rec.steps.back().entropy;
    return {true, fmt("E: %.6g -> %.6g over %d steps", e0, eT, int(decay->rec.steps.size()))};
  });

  rec.criterion(5, "stepwise mass balance holds on every solve", [&]() -> Verdict {
    if (!decay || !logA || !logB) return {false, "solve failed: " + decay_err + log_err};
    if (!study) return {false, "study failed: " + study_err};
    for (const Run* r : {&*decay, &*logA, &*logB})
      if (!r->passes("mass-identity-step")) return {false, "mass-identity-step check failed"};
    for (const auto& l : study->levels)
      if (!l.invariants_pass) return {false, fmt("study level %d checks failed", l.level)};
    double d1 = mass_defect_sum(*decay), d2 = mass_defect_sum(*logA);
    if (d1 > 1e-9 || d2 > 1e-9)
      return {false, fmt("accumulated defect %.3e / %.3e exceeds 1e-9", d1, d2)};
    return {true, fmt("accumulated defects %.2e (reaction-free) and %.2e (logistic)", d1, d2)};
  });

  rec.criterion(6, "spatially constant logistic run hits the exact value", [&]() -> Verdict {
    if (!logA || !logB) return {false, "solve failed: " + log_err};
    double exact = 1.0 / (1.0 + std::exp(-1.0));
    double ea = std::abs(logA->final_mean(0) - exact) / exact;
    double eb = std::abs(logB->final_mean(0) - exact) / exact;
    if (ea > 1e-3) return {false, fmt("relative error %.3e exceeds 1e-3", ea)};
    if (!(ea / eb >= 1.8))
      return {false, fmt("halving tau improved error only %.2fx (%.3e -> %.3e)", ea / eb, ea, eb)};
    return {true, fmt("errors %.2e -> %.2e, improvement %.2fx", ea, eb, ea / eb)};
  });

  rec.criterion(7, "dual chains stay nonnegative and inside their bounds", []() -> Verdict {
    FDGrid grid = FDGrid::interval(1.0, 64);
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> U(0, 1);
    std::normal_distribution<double> G(0, 1);
    const int nn = grid.num_nodes();
    for (int k = 0; k < 1000; ++k) {
      DualChainInput in;
      in.tau = 0.005 + 0.04 * U(rng);
      in.r = 0.2 + 3.3 * U(rng);
      int N = 1 + int(U(rng) * 8);
      bool zero_f = k % 100 == 0;
      for (int j = 0; j < N; ++j) {
        Eigen::VectorXd b(nn), F(nn);
        for (int q = 0; q < nn; ++q) {
          double g = G(rng);
          b[q] = 1 + 25 * U(rng) * U(rng);
          F[q] = zero_f ? 0.0 : -std::abs(g);
        }
        in.b.push_back(b);
        in.F.push_back(F);
      }
      auto chain = solve_dual_chain(grid, in);
      auto rep = check_dual_bounds(grid, chain);
      if (!rep.all_ok() || rep.phi_min < -1e-12)
        return {false, fmt("chain %d: phi_min=%.3e grad %d blap %d h1 %d", k, rep.phi_min,
                           int(rep.grad_ok), int(rep.blap_ok), int(rep.h1_ok))};
      if (zero_f)
        for (const auto& phi : chain.phi)
          if (phi.cwiseAbs().maxCoeff() != 0.0)
            return {false, fmt("chain %d: zero forcing but phi != 0", k)};
    }
    return {true, "1000 random chains on a 64-cell grid"};
  });

  rec.criterion(8, "duality norms stay bounded under joint refinement", [&]() -> Verdict {
    if (!study) return {false, "study failed: " + study_err};
    const auto& ls = study->levels;
    for (int sp = 0; sp < 2; ++sp) {
      double lo = 1e300, hi = 0;
      for (const auto& l : ls) {
        lo = std::min(lo, l.duality[sp]);
        hi = std::max(hi, l.duality[sp]);
      }
      if (!(hi <= 1.2 * lo))
        return {false, fmt("species %d norms spread beyond 20%%: [%.6g, %.6g]", sp + 1, lo, hi)};
      if (!(ls.back().duality[sp] <= 1.2 * ls.front().duality[sp]))
        return {false, fmt("species %d norm trends up: %.6g -> %.6g", sp + 1,
                           ls.front().duality[sp], ls.back().duality[sp])};
    }
    return {true, fmt("levels: (%.4g, %.4g) (%.4g, %.4g) (%.4g, %.4g)", ls[0].duality[0],
                      ls[0].duality[1], ls[1].duality[0], ls[1].duality[1], ls[2].duality[0],
                      ls[2].duality[1])};
  });

  rec.criterion(9, "weak residual shrinks under joint refinement", [&]() -> Verdict {
    if (!study) return {false, "study failed: " + study_err};
    const auto& ls = study->levels;
    double r01 = ls[0].weak_residual_max / ls[1].weak_residual_max;
    double r12 = ls[1].weak_residual_max / ls[2].weak_residual_max;
    if (!(r01 >= 1.5 && r12 >= 1.5))
      return {false, fmt("ratios %.2f, %.2f below 1.5 (%.3e %.3e %.3e)", r01, r12,
                         ls[0].weak_residual_max, ls[1].weak_residual_max,
                         ls[2].weak_residual_max)};
    return {true, fmt("defect %.3e -> %.3e -> %.3e", ls[0].weak_residual_max,
                      ls[1].weak_residual_max, ls[2].weak_residual_max)};
  });

  rec.criterion(10, "positivity everywhere, admissibility verdicts exact", [&]() -> Verdict {
    if (!decay || !logA || !logB) return {false, "solve failed: " + decay_err + log_err};
    if (!study) return {false, "study failed: " + study_err};
    for (const Run* r : {&*decay, &*logA, &*logB})
      if (!(r->rec.min_u > 0) || !r->passes("positivity"))
        return {false, fmt("nodal minimum %.3e not positive", r->rec.min_u)};
    for (const auto& l : study->levels)
      if (!(l.min_u > 0)) return {false, fmt("study level %d minimum %.3e", l.level, l.min_u)};

    if (!check_assumptions(CoefficientSet::power_law(competing_model())).all_pass())
      return {false, "admissible model rejected"};
    auto fails_clause = [](PowerLawCoefficients p, const char* clause) {
      auto rep = check_assumptions(CoefficientSet::power_law(p));
      const AssumptionClause* c = rep.find(clause);
      return c && !c->pass && !rep.all_pass();
    };
    auto a = competing_model();
    a.alpha12 = 1.0;
    auto b = competing_model();
    b.sigma11 = 2.0;
    auto c = competing_model();
    c.A21 = 0;
    if (!fails_clause(a, "0 < alpha12 < 1")) return {false, "alpha12=1 not rejected"};
    if (!fails_clause(b, "sigma11 < sup(1, alpha11)")) return {false, "sigma11=2 not rejected"};
    if (!fails_clause(c, "cross derivative floor: A21 > 0")) return {false, "A21=0 not rejected"};
    return {true, fmt("min density %.3e across solves", std::min({decay->rec.min_u,
                      logA->rec.min_u, logB->rec.min_u}))};
  });

  rec.criterion(11, "simulate reruns are byte-identical", []() -> Verdict {
    fs::path dir = "acceptance-scratch";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
      std::ofstream cfg(dir / "run.cfg");
      cfg << "D1 = 1\nD2 = 1\nA12 = 1\nA21 = 1\nalpha12 = 0.5\nalpha21 = 0.5\n"
             "n = 8\nT = 0.25\nN = 12\neps = 1e-3\n"
             "u0_kind = cosine-bump\nu0_amp1 = 0.4\nu0_amp2 = -0.3\n";
    }
    auto cfg_path = (dir / "run.cfg").string();
    int rc1 = quiet_cli({"simulate", "--config", cfg_path, "--out", (dir / "a").string()});
    int rc2 = quiet_cli({"simulate", "--config", cfg_path, "--out", (dir / "b").string()});
    if (rc1 != 0 || rc2 != 0) {
      fs::remove_all(dir);
      return {false, fmt("exit codes %d, %d", rc1, rc2)};
    }
    bool same = true;
    for (const char* name : {"series.csv", "trajectory.csv", "fields.csv"})
      same = same && slurp(dir / "a" / name) == slurp(dir / "b" / name);
    std::uintmax_t bytes = fs::file_size(dir / "a" / "series.csv");
    fs::remove_all(dir);
    if (!same) return {false, "outputs differ between reruns"};
    return {true, fmt("series.csv identical across reruns (%ju bytes)", std::uintmax_t(bytes))};
  });

  return rec.all ? 0 : 1;
}
