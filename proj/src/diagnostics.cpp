#include "crossdiff/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "crossdiff/duality.hpp"

namespace crossdiff {

namespace {

double entropy_of(const SpatialSpace& space, const EntropyMap& m1, const EntropyMap& m2,
                  const Eigen::VectorXd& u1, const Eigen::VectorXd& u2) {
  Eigen::VectorXd h(u1.size());
  for (Eigen::Index q = 0; q < u1.size(); ++q) h[q] = m1.psi(u1[q]) + m2.psi(u2[q]);
  return space.integrate(h);
}

}  // namespace

DiagnosticsRecord build_diagnostics(const Trajectory& traj, const SpatialSpace& space,
                                    const RegularizedCoefficients& reg, const EntropyMap& m1,
                                    const EntropyMap& m2, double newton_tol) {
  DiagnosticsRecord rec;
  const int N = int(traj.steps.size());
  rec.tau = traj.tau;
  rec.eps = traj.eps;
  rec.T = traj.tau * N;
  rec.measure = space.measure();
  rec.newton_tol = newton_tol;
  rec.entropy0 = entropy_of(space, m1, m2, traj.u1_0, traj.u2_0);
  rec.mass1_0 = space.integrate(traj.u1_0);
  rec.mass2_0 = space.integrate(traj.u2_0);
  rec.reaction_growth = compute_reaction_constant(reg, m1, m2, space.measure());
  rec.rmax = std::max({reg.base().r1(), reg.base().r2(), 0.0});
  const double K = rec.reaction_growth;
  rec.apriori_bound =
      rec.entropy0 + rec.T * K * (1.0 + std::exp(2.0 * rec.T * K) * (rec.entropy0 + 1.0));

  const auto& pl = reg.base().power_law_data();
  rec.power_law = pl.has_value();
  if (rec.power_law) {
    rec.beta_expo = {pl->alpha21 / 2.0, pl->alpha12 / 2.0};
    rec.beta_factor = {pl->alpha21 / (4.0 * pl->A21), pl->alpha12 / (4.0 * pl->A12)};
  }

  rec.min_u = std::min(traj.u1_0.minCoeff(), traj.u2_0.minCoeff());
  const int dim = space.dimension();
  const Eigen::VectorXd& wq = space.weights();

  StepDiagnostics prev;  // zero-initialized running sums
  rec.steps.reserve(N);
  for (int j = 0; j < N; ++j) {
    const TrajectoryStep& st = traj.steps[j];
    StepDiagnostics d;
    d.t = rec.tau * (j + 1);
    d.entropy = entropy_of(space, m1, m2, st.u1, st.u2);

    Eigen::VectorXd w1 = space.evaluate(st.c1);
    Eigen::VectorXd w2 = space.evaluate(st.c2);
    Eigen::MatrixXd gw1 = space.evaluate_grad(st.c1);
    Eigen::MatrixXd gw2 = space.evaluate_grad(st.c2);

    double q_sum = 0;
    std::array<double, 2> b1{};
    std::array<double, 3> gs{};
    std::array<double, 2> beta_sum{};
    std::array<double, 2> sqrtu_sum{};
    Eigen::VectorXd rplus(wq.size()), rminus(wq.size());
    for (Eigen::Index q = 0; q < wq.size(); ++q) {
      const double a1 = st.u1[q], a2 = st.u2[q];
      std::array<double, 2> g1{gw1(q, 0), dim > 1 ? gw1(q, 1) : 0.0};
      std::array<double, 2> g2{gw2(q, 0), dim > 1 ? gw2(q, 1) : 0.0};
      QuadraticFormEval ev = quadratic_form(reg, a1, a2, g1, g2, dim);
      const double w = wq[q];
      q_sum += w * ev.q;
      for (int i = 0; i < 2; ++i) b1[i] += w * ev.bound1_parts[i];
      for (int m = 0; m < 3; ++m) gs[m] += w * ev.grad_sqrt_parts[m];
      const std::array<double, 2> uval{a1, a2};
      for (int i = 0; i < 2; ++i) {
        const double gu_sq =
            ev.grad_u[i][0] * ev.grad_u[i][0] + ev.grad_u[i][1] * ev.grad_u[i][1];
        sqrtu_sum[i] += w * gu_sq / (4.0 * uval[i]);
        if (rec.power_law) {
          const double e = rec.beta_expo[i];
          const double db = e * std::pow(uval[i], e - 1.0);
          beta_sum[i] += w * db * db * gu_sq;
        }
      }
      rplus[q] = reg.reaction_plus(0, a1, a2) + reg.reaction_plus(1, a1, a2);
      rminus[q] = reg.reaction_minus(0, a1, a2) + reg.reaction_minus(1, a1, a2);
    }

    d.q_integral = q_sum;
    d.w_h1_sq = space.inner_products(st.c1, st.c1).second +
                space.inner_products(st.c2, st.c2).second;
    d.mass1 = space.integrate(st.u1);
    d.mass2 = space.integrate(st.u2);
    d.l1_reaction_plus = space.integrate(rplus);
    d.l1_reaction_neg = space.integrate(rminus);
    d.l1_w = space.integrate(w1.cwiseAbs()) + space.integrate(w2.cwiseAbs());
    d.w_integral = space.integrate(w1) + space.integrate(w2);
    d.newton_iterations = st.report.newton_iterations;
    d.final_residual = st.report.final_residual;
    d.coef_l1 = st.c1.lpNorm<1>() + st.c2.lpNorm<1>();
    d.min_u = std::min(st.u1.minCoeff(), st.u2.minCoeff());
    rec.min_u = std::min(rec.min_u, d.min_u);

    d.cum_q = prev.cum_q + rec.tau * d.q_integral;
    d.cum_w_h1 = prev.cum_w_h1 + rec.eps * rec.tau * d.w_h1_sq;
    d.cum_l1_w = prev.cum_l1_w + rec.eps * rec.tau * d.l1_w;
    d.cum_reaction_neg = prev.cum_reaction_neg + rec.tau * d.l1_reaction_neg;
    for (int m = 0; m < 3; ++m) d.cum_grad_sqrt[m] = prev.cum_grad_sqrt[m] + rec.tau * gs[m];
    for (int i = 0; i < 2; ++i) {
      d.cum_bound1[i] = prev.cum_bound1[i] + rec.tau * b1[i];
      d.cum_beta[i] = prev.cum_beta[i] + rec.tau * beta_sum[i];
      d.cum_sqrt_u[i] = prev.cum_sqrt_u[i] + rec.tau * sqrtu_sum[i];
    }
    d.cum_slack = prev.cum_slack + 10.0 * newton_tol * (1.0 + d.coef_l1);

    rec.steps.push_back(d);
    prev = d;
  }

  auto dn = duality_norm(traj, space, reg);
  rec.duality = {dn.first, dn.second};
  return rec;
}

bool InvariantReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

const CheckResult* InvariantReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string InvariantReport::summary() const {
  std::string out;
  char buf[320];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%s %s lhs=%.17g rhs=%.17g", c.pass ? "PASS" : "FAIL",
                  c.name.c_str(), c.lhs, c.rhs);
    out += buf;
    if (c.step >= 0) {
      std::snprintf(buf, sizeof buf, " step=%d", c.step);
      out += buf;
    }
    if (!c.detail.empty()) {
      out += "  (";
      out += c.detail;
      out += ")";
    }
    out += "\n";
  }
  return out;
}

InvariantReport run_invariant_checks(const DiagnosticsRecord& rec) {
  InvariantReport rep;
  const double tau = rec.tau, eps = rec.eps, T = rec.T, tol = rec.newton_tol;
  const double K = rec.reaction_growth;
  const double e2tk = std::exp(2.0 * T * K);
  const double sqrt_mu = std::sqrt(rec.measure);
  const int N = int(rec.steps.size());

  // scans for the worst step of a (lhs <= rhs) family
  struct Scan {
    CheckResult c;
    double worst = -std::numeric_limits<double>::infinity();
    void see(double lhs, double rhs, int step, const std::string& detail = "") {
      if (lhs - rhs > worst) {
        worst = lhs - rhs;
        c.lhs = lhs;
        c.rhs = rhs;
        c.step = step;
        if (!detail.empty()) c.detail = detail;
      }
    }
    CheckResult done() {
      c.pass = worst <= 0 || c.step < 0;
      return c;
    }
  };

  {
    Scan s;
    s.c.name = "entropy-dissipation-step";
    s.c.detail = "rate form against K(1+E) with Newton testing slack";
    for (int j = 0; j < N; ++j) {
      const StepDiagnostics& d = rec.steps[j];
      const double eprev = j == 0 ? rec.entropy0 : rec.steps[j - 1].entropy;
      const double lhs = (d.entropy - eprev) / tau + d.q_integral + eps * d.w_h1_sq;
      const double slack = 10.0 * tol * (1.0 + d.coef_l1) +
                           1e-12 * ((std::abs(d.entropy) + std::abs(eprev)) / tau +
                                    d.q_integral + eps * d.w_h1_sq + K * (1.0 + d.entropy) + 1.0);
      s.see(lhs, K * (1.0 + d.entropy) + slack, j + 1);
    }
    rep.checks.push_back(s.done());
  }

  if (K == 0.0) {
    Scan s;
    s.c.name = "entropy-monotone-decay";
    s.c.detail = "no reactions: entropy may only fall";
    for (int j = 0; j < N; ++j) {
      const StepDiagnostics& d = rec.steps[j];
      const double eprev = j == 0 ? rec.entropy0 : rec.steps[j - 1].entropy;
      const double slack =
          tau * 10.0 * tol * (1.0 + d.coef_l1) + 1e-12 * (1.0 + std::abs(eprev));
      s.see(d.entropy, eprev + slack, j + 1);
    }
    rep.checks.push_back(s.done());
  }

  {
    Scan s;
    s.c.name = "entropy-apriori-cumulative";
    s.c.detail = "E + dissipation + regularization against the a-priori constant";
    for (int j = 0; j < N; ++j) {
      const StepDiagnostics& d = rec.steps[j];
      const double lhs = d.entropy + d.cum_q + d.cum_w_h1;
      const double slack = 2.0 * tau * d.cum_slack * (1.0 + T * K * e2tk) +
                           1e-9 * (1.0 + std::abs(rec.apriori_bound));
      s.see(lhs, rec.apriori_bound + slack, j + 1);
    }
    rep.checks.push_back(s.done());
  }

  {
    Scan s;
    s.c.name = "mass-identity-step";
    s.c.detail = "stepwise L1 balance of growth, competition and regularization";
    double mprev = rec.mass1_0 + rec.mass2_0;
    for (int j = 0; j < N; ++j) {
      const StepDiagnostics& d = rec.steps[j];
      const double m = d.mass1 + d.mass2;
      const double lhs = std::abs(m - mprev + eps * tau * d.w_integral +
                                  tau * d.l1_reaction_neg - tau * d.l1_reaction_plus);
      const double rhs = 10.0 * tol * 2.0 * sqrt_mu * tau +
                         1e-12 * (m + mprev +
                                  tau * (d.l1_reaction_neg + d.l1_reaction_plus +
                                         eps * std::abs(d.w_integral)) +
                                  1.0);
      s.see(lhs, rhs, j + 1);
      mprev = m;
    }
    rep.checks.push_back(s.done());
  }

  const double mass0 = rec.mass1_0 + rec.mass2_0;
  const bool growth_ok = 1.0 - tau * rec.rmax > 0.0;
  const double rtau = growth_ok ? rec.rmax / (1.0 - tau * rec.rmax) : 0.0;

  {
    Scan s;
    s.c.name = "mass-upper-bound";
    if (!growth_ok) {
      s.c.detail = "time step too large for the growth factor";
      s.see(1.0, 0.0, 0);
    } else {
      s.c.detail = "total mass under the discrete growth envelope";
      const double base = mass0 + std::sqrt(eps) * (T * rec.measure + rec.apriori_bound);
      const double amp = std::exp(T * rtau);
      const double cum_slack_n = N > 0 ? rec.steps[N - 1].cum_slack : 0.0;
      const double slack = (2.0 * sqrt_mu * 10.0 * tol * T +
                            2.0 * std::sqrt(eps) * tau * cum_slack_n * (1.0 + T * K * e2tk)) *
                               amp +
                           1e-12 * (1.0 + base);
      for (int j = 0; j < N; ++j) {
        const StepDiagnostics& d = rec.steps[j];
        const double rhs = base * std::exp((j + 1) * tau * rtau) + slack;
        s.see(d.mass1 + d.mass2, rhs, j + 1);
      }
    }
    rep.checks.push_back(s.done());
  }

  {
    Scan s;
    s.c.name = "reaction-l1-cumulative";
    if (!growth_ok) {
      s.c.detail = "time step too large for the growth factor";
      s.see(1.0, 0.0, 0);
    } else if (N > 0) {
      s.c.detail = "summed regularization and competition L1 norms";
      const StepDiagnostics& last = rec.steps[N - 1];
      const double lhs = last.cum_l1_w + last.cum_reaction_neg;
      const double envelope = 1.0 + T * rec.rmax * std::exp(T * rtau);
      const double main =
          (mass0 + 2.0 * std::sqrt(eps) * (T * rec.measure + rec.apriori_bound)) * envelope;
      const double slack = 2.0 * sqrt_mu * 10.0 * tol * T * envelope +
                           4.0 * std::sqrt(eps) * tau * last.cum_slack * (1.0 + T * K * e2tk) +
                           1e-9 * (1.0 + main);
      s.see(lhs, main + slack, N);
    }
    rep.checks.push_back(s.done());
  }

  {
    Scan s;
    s.c.name = "dissipation-bound2-gradients";
    s.c.detail = "";
    static const char* names[3] = {"sqrt(a21(u1))", "sqrt(a12(u2))", "sqrt(a21 a12)"};
    for (int j = 0; j < N; ++j) {
      const StepDiagnostics& d = rec.steps[j];
      for (int m = 0; m < 3; ++m)
        s.see(d.cum_grad_sqrt[m], d.cum_q / 4.0 + 1e-9 * (1.0 + d.cum_q), j + 1, names[m]);
    }
    rep.checks.push_back(s.done());
  }

  {
    Scan s;
    s.c.name = "dissipation-bound1";
    s.c.detail = "summed per-species quadratic-form lower bound";
    for (int j = 0; j < N; ++j) {
      const StepDiagnostics& d = rec.steps[j];
      s.see(d.cum_bound1[0] + d.cum_bound1[1], d.cum_q + 1e-9 * (1.0 + d.cum_q), j + 1);
    }
    rep.checks.push_back(s.done());
  }

  if (rec.power_law) {
    {
      Scan s;
      s.c.name = "beta-dissipation-identity";
      s.c.detail = "";
      for (int j = 0; j < N; ++j) {
        const StepDiagnostics& d = rec.steps[j];
        for (int i = 0; i < 2; ++i) {
          const double inv = std::isfinite(rec.beta_factor[i]) && rec.beta_factor[i] > 0
                                 ? 1.0 / rec.beta_factor[i]
                                 : 0.0;
          const double lhs =
              std::abs(inv * d.cum_beta[i] + 4.0 * eps * d.cum_sqrt_u[i] - d.cum_bound1[i]);
          s.see(lhs, 1e-9 * (1.0 + d.cum_bound1[i]), j + 1,
                i == 0 ? "species 1" : "species 2");
        }
      }
      rep.checks.push_back(s.done());
    }
    {
      Scan s;
      s.c.name = "beta-gradient-bound";
      s.c.detail = "";
      for (int j = 0; j < N; ++j) {
        const StepDiagnostics& d = rec.steps[j];
        for (int i = 0; i < 2; ++i) {
          if (!std::isfinite(rec.beta_factor[i])) continue;
          const double rhs =
              rec.beta_factor[i] *
                  (rec.apriori_bound + 2.0 * tau * d.cum_slack * (1.0 + T * K * e2tk)) +
              1e-9 * (1.0 + rec.beta_factor[i] * rec.apriori_bound);
          s.see(d.cum_beta[i], rhs, j + 1, i == 0 ? "species 1" : "species 2");
        }
      }
      rep.checks.push_back(s.done());
    }
  }

  {
    CheckResult c;
    c.name = "positivity";
    c.lhs = rec.min_u;
    c.rhs = 0.0;
    c.pass = rec.min_u > 0.0;
    c.detail = "smallest nodal density over the trajectory";
    rep.checks.push_back(c);
  }

  return rep;
}

double TestFunction::value(double t) const {
  double v = 0, tp = 1;
  for (Eigen::Index i = 0; i < p.size(); ++i, tp *= t) v += p[i] * tp;
  return v;
}

double TestFunction::deriv(double t) const {
  double v = 0, tp = 1;
  for (Eigen::Index i = 1; i < p.size(); ++i, tp *= t) v += i * p[i] * tp;
  return v;
}

double TestFunction::integral(double a, double b) const {
  double v = 0, ap = a, bp = b;
  for (Eigen::Index i = 0; i < p.size(); ++i, ap *= a, bp *= b) v += p[i] * (bp - ap) / (i + 1);
  return v;
}

std::vector<TestFunction> default_test_family(double T) {
  Eigen::VectorXd lin(2), quad(3);
  lin << 1.0, -1.0 / T;
  quad << 1.0, -2.0 / T, 1.0 / (T * T);
  std::vector<TestFunction> fam;
  for (int mode = 0; mode < 3; ++mode) fam.push_back({lin, mode});
  for (int mode = 0; mode < 3; ++mode) fam.push_back({quad, mode});
  return fam;
}

std::pair<double, double> weak_residual(const Trajectory& traj, const SpatialSpace& space,
                                        const CoefficientSet& coeffs,
                                        const TestFunction& theta) {
  if (theta.mode < 0 || theta.mode >= space.basis().rows())
    throw std::invalid_argument("test function mode outside the basis");
  const int N = int(traj.steps.size());
  const double T = traj.tau * N;
  double scale = theta.p.cwiseAbs().sum() * std::max(1.0, std::pow(T, double(theta.p.size() - 1)));
  if (std::abs(theta.value(T)) > 1e-10 * (scale + 1.0))
    throw std::invalid_argument("test function must vanish at the final time");

  const Eigen::VectorXd chiW =
      space.weights().cwiseProduct(space.basis().row(theta.mode).transpose());
  auto inner = [&](const Eigen::VectorXd& f) { return chiW.dot(f); };
  const double lam = space.eigenvalue(theta.mode);

  double defect1 = -inner(traj.u1_0) * theta.value(0.0);
  double defect2 = -inner(traj.u2_0) * theta.value(0.0);
  Eigen::VectorXd flux1(chiW.size()), flux2(chiW.size()), r1(chiW.size()), r2(chiW.size());
  for (int j = 0; j < N; ++j) {
    const TrajectoryStep& st = traj.steps[j];
    const double t0 = traj.tau * j, t1 = traj.tau * (j + 1);
    const double dp = theta.value(t1) - theta.value(t0);
    const double ip = theta.integral(t0, t1);
    for (Eigen::Index q = 0; q < chiW.size(); ++q) {
      const double a = st.u1[q], b = st.u2[q];
      flux1[q] = a * (coeffs.self_rate(0)(a) + coeffs.cross_of(0)(b));
      flux2[q] = b * (coeffs.self_rate(1)(b) + coeffs.cross_of(1)(a));
      r1[q] = a * (coeffs.growth_rate(0) - coeffs.competition(0, 0)(a) -
                   coeffs.competition(0, 1)(b));
      r2[q] = b * (coeffs.growth_rate(1) - coeffs.competition(1, 0)(a) -
                   coeffs.competition(1, 1)(b));
    }
    defect1 += -inner(st.u1) * dp + lam * ip * inner(flux1) - ip * inner(r1);
    defect2 += -inner(st.u2) * dp + lam * ip * inner(flux2) - ip * inner(r2);
  }
  return {defect1, defect2};
}

}  // namespace crossdiff
