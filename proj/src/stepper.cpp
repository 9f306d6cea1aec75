#include "crossdiff/stepper.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace crossdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sup of s(x)/(1+x) on a log grid over (0, 1e6]; exact for power laws with
// exponent <= 1, conservative for faster growth on that range
double linear_domination(const ScalarFn& s) {
  double best = 0;
  for (int k = 0; k <= 400; ++k) {
    double x = std::pow(10.0, -8.0 + 14.0 * k / 400);
    best = std::max(best, s(x) / (1 + x));
  }
  return best;
}

}  // namespace

double compute_reaction_constant(const RegularizedCoefficients& reg, const EntropyMap& m1,
                                 const EntropyMap& m2, double measure) {
  const CoefficientSet& base = reg.base();
  double ks = 0;
  if (const auto& p = base.power_law_data();
      p && p->sigma11 <= 1 && p->sigma12 <= 1 && p->sigma21 <= 1 && p->sigma22 <= 1) {
    // S x^sigma <= S (1 + x) exactly for sigma in [0,1]
    ks = std::max({p->S11, p->S12, p->S21, p->S22});
  } else {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) ks = std::max(ks, linear_domination(base.competition(i, j)));
    ks *= 1.001;  // sampled sup, keep it an upper bound
  }
  double rmax_d = std::max(base.r1() * m1.D(), base.r2() * m2.D());
  if (base.r1() + base.r2() == 0) rmax_d = 0;  // avoid 0 * inf for degenerate maps
  if (rmax_d == 0 && ks == 0) return 0;

  double eps = reg.eps();
  double dmax = std::max(m1.D(), m2.D());
  double bmin = std::min(m1.B(), m2.B());
  double weight = 1.0 / std::exp(1.0) - bmin;  // >= 0 since B <= 0
  double coef_e = rmax_d * (1 + eps) + 2 * weight * ks * dmax * (1 + eps);
  double coef_1 = 2 * measure * rmax_d * (1 + eps) +
                  weight * ks * (4 * measure + 4 * measure * dmax * (1 + eps));
  return std::max(coef_e, coef_1);
}

std::vector<double> discrete_gronwall_bound(double v0, double theta,
                                            const std::vector<double>& w_seq) {
  if (!(theta > 0 && theta < 1)) throw std::invalid_argument("theta must be in (0,1)");
  if (!(v0 >= 0)) throw std::invalid_argument("v0 must be >= 0");
  double lambda = theta / (1 - theta);
  std::vector<double> out(w_seq.size());
  double weighted = 0;  // sum of e^{(1-k) lambda} w_k
  for (size_t k = 1; k <= w_seq.size(); ++k) {
    double wk = w_seq[k - 1];
    if (!(wk >= 0)) throw std::invalid_argument("w_k must be >= 0");
    weighted += std::exp((1.0 - double(k)) * lambda) * wk;
    out[k - 1] = std::exp(double(k) * lambda) * (v0 + weighted);
  }
  return out;
}

struct Stepper::Workspace {
  Eigen::VectorXd c1, c2;          // current iterate
  Eigen::VectorXd w1, w2;          // nodal entropy variables
  Eigen::MatrixXd gw1, gw2;        // nodal gradients
  Eigen::VectorXd u1, u2;          // nodal densities
  Eigen::VectorXd F;               // residual
  Eigen::MatrixXd J;               // Jacobian (when requested)
  double q_integral = 0;
  std::vector<double> warm1, warm2;
};

Stepper::Stepper(SolveConfig cfg, const SpatialSpace& space, const RegularizedCoefficients& reg,
                 const EntropyMap& map1, const EntropyMap& map2)
    : cfg_(std::move(cfg)), space_(space), reg_(reg), map1_(map1), map2_(map2) {
  if (cfg_.T <= 0 || cfg_.N < 1) throw std::invalid_argument("need T > 0 and N >= 1");
  if (!(cfg_.eps > 0)) throw std::invalid_argument("need eps > 0");
  if (cfg_.eps != reg_.eps()) throw std::invalid_argument("eps mismatch with coefficients");
  if (cfg_.sigma_schedule.empty())
    for (int k = 0; k <= 10; ++k) cfg_.sigma_schedule.push_back(k / 10.0);
  if (cfg_.sigma_schedule.front() != 0 || cfg_.sigma_schedule.back() != 1)
    throw std::invalid_argument("sigma schedule must run from 0 to 1");
  for (size_t k = 1; k < cfg_.sigma_schedule.size(); ++k)
    if (cfg_.sigma_schedule[k] <= cfg_.sigma_schedule[k - 1])
      throw std::invalid_argument("sigma schedule must increase");

  K_ = compute_reaction_constant(reg_, map1_, map2_, space_.measure());
  if (!(1 - cfg_.tau() * K_ >= 0.5)) {
    std::ostringstream os;
    os << "time step too large: tau * K = " << cfg_.tau() * K_ << " with K = " << K_
       << "; need tau K <= 1/2";
    throw std::invalid_argument(os.str());
  }
}

void Stepper::eval(const Eigen::VectorXd& up1, const Eigen::VectorXd& up2, double sigma,
                   const Eigen::VectorXd& c1, const Eigen::VectorXd& c2, Workspace& ws,
                   bool with_jac, bool picard) const {
  const int n = space_.n();
  const int nq = space_.num_nodes();
  const int dim = space_.dimension();
  const double tau = cfg_.tau();
  const double eps = cfg_.eps;
  const Eigen::VectorXd& wq = space_.weights();
  const Eigen::MatrixXd& B = space_.basis();

  ws.c1 = c1;
  ws.c2 = c2;
  ws.w1 = space_.evaluate(c1);
  ws.w2 = space_.evaluate(c2);
  ws.gw1 = space_.evaluate_grad(c1);
  ws.gw2 = space_.evaluate_grad(c2);
  ws.u1.resize(nq);
  ws.u2.resize(nq);
  if (int(ws.warm1.size()) != nq) ws.warm1.assign(nq, 1.0);
  if (int(ws.warm2.size()) != nq) ws.warm2.assign(nq, 1.0);
  for (int q = 0; q < nq; ++q) {
    ws.u1[q] = map1_.phi_inverse(ws.w1[q], ws.warm1[q], cfg_.newton.tol * 1e-2);
    ws.u2[q] = map2_.phi_inverse(ws.w2[q], ws.warm2[q], cfg_.newton.tol * 1e-2);
    ws.warm1[q] = ws.u1[q];
    ws.warm2[q] = ws.u2[q];
  }

  // nodal diffusion matrix, fluxes and the quadratic form integral
  Eigen::MatrixXd flux1(nq, dim), flux2(nq, dim);
  Eigen::VectorXd m11(nq), m12(nq), m22(nq);
  ws.q_integral = 0;
  for (int q = 0; q < nq; ++q) {
    MatrixA A = matrix_A(reg_, ws.u1[q], ws.u2[q]);
    m11[q] = A.m11;
    m12[q] = A.m12;
    m22[q] = A.m22;
    double qf = 0;
    for (int d = 0; d < dim; ++d) {
      double g1 = ws.gw1(q, d), g2 = ws.gw2(q, d);
      flux1(q, d) = A.m11 * g1 + A.m12 * g2;
      flux2(q, d) = A.m21 * g1 + A.m22 * g2;
      qf += g1 * flux1(q, d) + g2 * flux2(q, d);
    }
    ws.q_integral += wq[q] * qf;
  }

  Eigen::VectorXd r1(nq), r2(nq);
  for (int q = 0; q < nq; ++q) {
    r1[q] = reg_.reaction(0, ws.u1[q], ws.u2[q]);
    r2[q] = reg_.reaction(1, ws.u1[q], ws.u2[q]);
  }

  ws.F.resize(2 * n);
  Eigen::VectorXd t1 = (ws.u1 - up1) / tau - r1;
  Eigen::VectorXd t2 = (ws.u2 - up2) / tau - r2;
  ws.F.head(n) = sigma * (B * wq.cwiseProduct(t1) + space_.project_flux(flux1));
  ws.F.tail(n) = sigma * (B * wq.cwiseProduct(t2) + space_.project_flux(flux2));
  for (int m = 0; m < n; ++m) {
    double h1w = eps * (1 + space_.eigenvalue(m));
    ws.F[m] += h1w * c1[m];
    ws.F[n + m] += h1w * c2[m];
  }

  if (!with_jac) return;

  // du/dw and reaction partials
  Eigen::VectorXd s1(nq), s2(nq), dr11(nq), dr12(nq), dr21(nq), dr22(nq);
  for (int q = 0; q < nq; ++q) {
    s1[q] = map1_.inverse_slope(ws.u1[q]);
    s2[q] = map2_.inverse_slope(ws.u2[q]);
    dr11[q] = reg_.reaction_deriv(0, 0, ws.u1[q], ws.u2[q]);
    dr12[q] = reg_.reaction_deriv(0, 1, ws.u1[q], ws.u2[q]);
    dr21[q] = reg_.reaction_deriv(1, 0, ws.u1[q], ws.u2[q]);
    dr22[q] = reg_.reaction_deriv(1, 1, ws.u1[q], ws.u2[q]);
  }

  // partials of the matrix entries, unless the Picard variant froze A
  Eigen::VectorXd dA11_1, dA11_2, dA22_1, dA22_2;
  if (!picard) {
    dA11_1.resize(nq);
    dA11_2.resize(nq);
    dA22_1.resize(nq);
    dA22_2.resize(nq);
    const ScalarFn &a11 = reg_.self(0), &a22 = reg_.self(1);
    const ScalarFn &a12 = reg_.cross_into(1), &a21 = reg_.cross_into(0);
    for (int q = 0; q < nq; ++q) {
      double u1 = ws.u1[q], u2 = ws.u2[q];
      double d21 = a21.d(u1), d12 = a12.d(u2);
      double p1 = a11.d(u1) + reg_.cross_of(0)(u2);
      double p2 = a22.d(u2) + reg_.cross_of(1)(u1);
      double q1 = u1 / d21, q2 = u2 / d12;
      double q1p = (d21 - u1 * a21.d2(u1)) / (d21 * d21);
      double q2p = (d12 - u2 * a12.d2(u2)) / (d12 * d12);
      dA11_1[q] = a11.d2(u1) * q1 + p1 * q1p;
      dA11_2[q] = a12.d(u2) * q1;
      dA22_2[q] = a22.d2(u2) * q2 + p2 * q2p;
      dA22_1[q] = a21.d(u1) * q2;
    }
  }

  ws.J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  auto add_mass = [&](int bi, int bj, const Eigen::VectorXd& scale) {
    ws.J.block(bi * n, bj * n, n, n).noalias() +=
        B * scale.cwiseProduct(wq).asDiagonal() * B.transpose();
  };
  auto add_stiff = [&](int bi, int bj, const Eigen::VectorXd& scale) {
    for (int d = 0; d < dim; ++d) {
      const Eigen::MatrixXd& G = space_.basis_grad(d);
      ws.J.block(bi * n, bj * n, n, n).noalias() +=
          G * scale.cwiseProduct(wq).asDiagonal() * G.transpose();
    }
  };
  // <grad chi_m, scale * grad-axis-d * chi_k> coupling terms
  auto add_mixed = [&](int bi, int bj, int d, const Eigen::VectorXd& scale) {
    ws.J.block(bi * n, bj * n, n, n).noalias() +=
        space_.basis_grad(d) * scale.cwiseProduct(wq).asDiagonal() * B.transpose();
  };

  double st = sigma / cfg_.tau();
  add_mass(0, 0, (st - sigma * dr11.array()).matrix().cwiseProduct(s1));
  add_mass(0, 1, (-sigma * dr12.array()).matrix().cwiseProduct(s2));
  add_mass(1, 0, (-sigma * dr21.array()).matrix().cwiseProduct(s1));
  add_mass(1, 1, (st - sigma * dr22.array()).matrix().cwiseProduct(s2));

  add_stiff(0, 0, sigma * m11);
  add_stiff(0, 1, sigma * m12);
  add_stiff(1, 0, sigma * m12);
  add_stiff(1, 1, sigma * m22);

  if (!picard) {
    for (int d = 0; d < dim; ++d) {
      Eigen::VectorXd g1 = ws.gw1.col(d), g2 = ws.gw2.col(d);
      // dA12 = dA21: d/du1 = u2, d/du2 = u1
      add_mixed(0, 0, d, sigma * s1.cwiseProduct(dA11_1.cwiseProduct(g1) + ws.u2.cwiseProduct(g2)));
      add_mixed(0, 1, d, sigma * s2.cwiseProduct(dA11_2.cwiseProduct(g1) + ws.u1.cwiseProduct(g2)));
      add_mixed(1, 0, d, sigma * s1.cwiseProduct(ws.u2.cwiseProduct(g1) + dA22_1.cwiseProduct(g2)));
      add_mixed(1, 1, d, sigma * s2.cwiseProduct(ws.u1.cwiseProduct(g1) + dA22_2.cwiseProduct(g2)));
    }
  }

  for (int m = 0; m < n; ++m) {
    double h1w = eps * (1 + space_.eigenvalue(m));
    ws.J(m, m) += h1w;
    ws.J(n + m, n + m) += h1w;
  }
}

ResidualEval Stepper::residual(const Eigen::VectorXd& uprev1, const Eigen::VectorXd& uprev2,
                               double sigma, const Eigen::VectorXd& c1,
                               const Eigen::VectorXd& c2) const {
  Workspace ws;
  ws.warm1.assign(uprev1.data(), uprev1.data() + uprev1.size());
  ws.warm2.assign(uprev2.data(), uprev2.data() + uprev2.size());
  eval(uprev1, uprev2, sigma, c1, c2, ws, false, false);
  return {ws.F, ws.u1, ws.u2, ws.q_integral};
}

bool Stepper::newton_solve(const Eigen::VectorXd& up1, const Eigen::VectorXd& up2, double sigma,
                           bool picard, Workspace& ws, StepReport& rep) const {
  const int n = space_.n();
  Eigen::VectorXd c1 = ws.c1, c2 = ws.c2;
  auto res_norm = [&]() { return ws.F.lpNorm<Eigen::Infinity>(); };

  try {
    eval(up1, up2, sigma, c1, c2, ws, true, picard);
  } catch (const std::exception&) {
    return false;
  }
  double fn = res_norm();
  for (int it = 0; it < cfg_.newton.max_iter; ++it) {
    if (fn <= cfg_.newton.tol) {
      rep.final_residual = fn;
      return true;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(ws.J);
    Eigen::VectorXd delta = lu.solve(-ws.F);
    if (!delta.allFinite()) return false;

    bool accepted = false;
    double t = 1;
    for (int bt = 0; bt <= cfg_.newton.max_backtrack; ++bt, t /= 2) {
      Eigen::VectorXd t1 = c1 + t * delta.head(n);
      Eigen::VectorXd t2 = c2 + t * delta.tail(n);
      Workspace trial = ws;
      try {
        eval(up1, up2, sigma, t1, t2, trial, true, picard);
      } catch (const std::exception&) {
        continue;  // step left the representable range; shrink
      }
      double tn = trial.F.lpNorm<Eigen::Infinity>();
      if (tn < fn * (1 - 0.25 * t) || tn <= cfg_.newton.tol) {
        ws = std::move(trial);
        c1 = t1;
        c2 = t2;
        fn = tn;
        accepted = true;
        break;
      }
    }
    ++rep.newton_iterations;
    if (!accepted) return false;
  }
  rep.final_residual = fn;
  return fn <= cfg_.newton.tol;
}

TrajectoryStep Stepper::solve_step(const Eigen::VectorXd& uprev1,
                                   const Eigen::VectorXd& uprev2) const {
  const int n = space_.n();
  Workspace ws;
  ws.c1 = Eigen::VectorXd::Zero(n);
  ws.c2 = Eigen::VectorXd::Zero(n);
  ws.warm1.assign(uprev1.data(), uprev1.data() + uprev1.size());
  ws.warm2.assign(uprev2.data(), uprev2.data() + uprev2.size());
  StepReport rep;

  double sigma_cur = 0;
  std::vector<double> pending(cfg_.sigma_schedule.rbegin(), cfg_.sigma_schedule.rend());
  pending.pop_back();  // sigma = 0 holds with w = 0
  int splits = 0;
  while (!pending.empty()) {
    double target = pending.back();
    Workspace attempt = ws;
    StepReport arep = rep;
    bool ok = newton_solve(uprev1, uprev2, target, false, attempt, arep);
    if (!ok) {
      // retry the same increment with the frozen-A Jacobian
      attempt = ws;
      arep = rep;
      arep.used_picard = true;
      ok = newton_solve(uprev1, uprev2, target, true, attempt, arep);
    }
    if (ok) {
      ws = std::move(attempt);
      rep = arep;
      rep.sigma_path.push_back(target);
      sigma_cur = target;
      pending.pop_back();
      continue;
    }
    if (++splits > (1 << cfg_.sigma_bisect_depth)) {
      std::ostringstream os;
      os << "continuation failed near sigma = " << target << " after " << splits
         << " increment splits";
      throw SolverError(os.str());
    }
    pending.push_back(0.5 * (sigma_cur + target));
  }

  // final residual bookkeeping at sigma = 1
  eval(uprev1, uprev2, 1.0, ws.c1, ws.c2, ws, false, false);
  rep.final_residual = ws.F.lpNorm<Eigen::Infinity>();

  TrajectoryStep out;
  out.c1 = ws.c1;
  out.c2 = ws.c2;
  out.u1 = ws.u1;
  out.u2 = ws.u2;
  out.report = std::move(rep);
  return out;
}

Trajectory Stepper::run(const Eigen::VectorXd& u01, const Eigen::VectorXd& u02) const {
  const int nq = space_.num_nodes();
  if (u01.size() != nq || u02.size() != nq)
    throw std::invalid_argument("initial data must be nodal on the quadrature grid");
  Trajectory traj;
  traj.tau = cfg_.tau();
  traj.eps = cfg_.eps;
  traj.u1_0 = u01.cwiseMax(cfg_.u0_floor);
  traj.u2_0 = u02.cwiseMax(cfg_.u0_floor);

  const Eigen::VectorXd* p1 = &traj.u1_0;
  const Eigen::VectorXd* p2 = &traj.u2_0;
  traj.steps.reserve(cfg_.N);
  for (int k = 1; k <= cfg_.N; ++k) {
    try {
      traj.steps.push_back(solve_step(*p1, *p2));
    } catch (const SolverError& e) {
      throw SolverError("step " + std::to_string(k) + ": " + e.what());
    }
    p1 = &traj.steps.back().u1;
    p2 = &traj.steps.back().u2;
  }
  return traj;
}

}  // namespace crossdiff
