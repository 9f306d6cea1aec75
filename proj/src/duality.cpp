#include "crossdiff/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crossdiff {

double StepEmbedding::norm_lp(const Eigen::VectorXd& h, double p) const {
  if (!(p >= 1)) throw std::invalid_argument("norm_lp: p must be >= 1");
  if (std::isinf(p)) return h.size() ? h.cwiseAbs().maxCoeff() : 0.0;
  double s = 0;
  for (Eigen::Index i = 0; i < h.size(); ++i) s += std::pow(std::abs(h[i]), p);
  return std::pow(cell_volume * s, 1.0 / p);
}

double StepEmbedding::norm_lq_lp(const std::vector<Eigen::VectorXd>& h, double q,
                                 double p) const {
  if (!(q >= 1)) throw std::invalid_argument("norm_lq_lp: q must be >= 1");
  if (std::isinf(q)) {
    double m = 0;
    for (const auto& hk : h) m = std::max(m, norm_lp(hk, p));
    return m;
  }
  double s = 0;
  for (const auto& hk : h) s += tau * std::pow(norm_lp(hk, p), q);
  return std::pow(s, 1.0 / q);
}

namespace {

void validate_chain_input(const FDGrid& grid, const DualChainInput& in) {
  const auto nodes = Eigen::Index(grid.num_nodes());
  if (in.b.empty() || in.b.size() != in.F.size())
    throw std::invalid_argument("dual chain: b and F must be nonempty families of equal length");
  if (!(in.tau > 0)) throw std::invalid_argument("dual chain: tau must be positive");
  if (!(in.r > 0)) throw std::invalid_argument("dual chain: r must be positive");
  if (!(1.0 - 2.0 * in.r * in.tau > 0))
    throw std::invalid_argument("dual chain: requires 1 - 2 r tau > 0");
  for (std::size_t k = 0; k < in.b.size(); ++k) {
    if (in.b[k].size() != nodes || in.F[k].size() != nodes)
      throw std::invalid_argument("dual chain: field size does not match the grid");
    if (in.b[k].minCoeff() < 1.0)
      throw std::invalid_argument("dual chain: diffusion field must be >= 1 nodewise");
    if (in.F[k].maxCoeff() > 0.0)
      throw std::invalid_argument("dual chain: source field must be <= 0 nodewise");
  }
}

double h1_norm(const FDGrid& grid, const Eigen::VectorXd& f) {
  const double l2 = grid.norm_l2(f);
  return std::sqrt(l2 * l2 + grid.grad_norm_sq(f));
}

}  // namespace

DualChain solve_dual_chain(const FDGrid& grid, DualChainInput in) {
  validate_chain_input(grid, in);
  const int N = int(in.b.size());
  const double tau = in.tau;

  DualChain chain;
  chain.phi.assign(std::size_t(N), Eigen::VectorXd());
  Eigen::VectorXd next = Eigen::VectorXd::Zero(grid.num_nodes());  // phi^{N+1} = 0
  for (int k = N - 1; k >= 0; --k) {
    const Eigen::VectorXd rhs =
        next / tau - (in.b[std::size_t(k)].array().sqrt() * in.F[std::size_t(k)].array()).matrix();
    chain.phi[std::size_t(k)] = grid.solve_elliptic(1.0 / tau + in.r, in.b[std::size_t(k)], rhs);
    next = chain.phi[std::size_t(k)];
  }
  chain.in = std::move(in);
  return chain;
}

DualBoundsReport check_dual_bounds(const FDGrid& grid, const DualChain& chain,
                                   double rel_slack) {
  const int N = int(chain.phi.size());
  const double tau = chain.in.tau, r = chain.in.r;
  const double cellvol = grid.cell_volume();
  const StepEmbedding emb{tau, cellvol};

  DualBoundsReport rep;
  rep.efac = std::exp((N + 1) * r * tau / (1.0 - 2.0 * r * tau));
  rep.c_omega = grid.poincare_constant() + 1.0 + 2.0 / std::sqrt(grid.measure());
  rep.f_norm = emb.norm_l2_l2(chain.in.F);

  double sqrtb_sq = 0, blap_sq = 0;
  rep.phi_min = 0;
  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd& phi = chain.phi[std::size_t(k)];
    const Eigen::VectorXd& b = chain.in.b[std::size_t(k)];
    rep.phi_min = std::min(rep.phi_min, phi.minCoeff());
    rep.max_grad = std::max(rep.max_grad, std::sqrt(grid.grad_norm_sq(phi)));
    rep.max_h1 = std::max(rep.max_h1, h1_norm(grid, phi));
    const Eigen::VectorXd lap = grid.laplacian(phi);
    blap_sq += tau * cellvol * (b.array() * lap.array().square()).sum();
    sqrtb_sq += tau * cellvol * b.sum();
  }
  rep.blap_norm = std::sqrt(blap_sq);
  rep.sqrtb_norm = std::sqrt(sqrtb_sq);

  rep.grad_bound = rep.efac * rep.f_norm;
  rep.blap_bound = rep.efac * rep.f_norm;
  rep.h1_bound =
      rep.efac * rep.efac * rep.c_omega * (1.0 + rep.sqrtb_norm) * rep.f_norm;

  const auto holds = [rel_slack](double lhs, double rhs) {
    return lhs <= rhs * (1.0 + rel_slack) + 1e-300;
  };
  rep.nonneg = rep.phi_min >= -1e-12;
  rep.grad_ok = holds(rep.max_grad, rep.grad_bound);
  rep.blap_ok = holds(rep.blap_norm, rep.blap_bound);
  rep.h1_ok = holds(rep.max_h1, rep.h1_bound);
  return rep;
}

DualLinfReport check_dual_linf(const FDGrid& grid, const DualChain& chain) {
  const StepEmbedding emb{chain.in.tau, grid.cell_volume()};
  DualLinfReport rep;
  for (std::size_t k = 0; k < chain.phi.size(); ++k) {
    rep.phi_inf = std::max(rep.phi_inf, chain.phi[k].cwiseAbs().maxCoeff());
    rep.lap_inf = std::max(rep.lap_inf, grid.laplacian(chain.phi[k]).cwiseAbs().maxCoeff());
    rep.f_inf = std::max(rep.f_inf, chain.in.F[k].cwiseAbs().maxCoeff());
  }
  std::vector<Eigen::VectorXd> sqrtb(chain.in.b.size());
  for (std::size_t k = 0; k < chain.in.b.size(); ++k)
    sqrtb[k] = chain.in.b[k].array().sqrt().matrix();
  const double denom = (1.0 + emb.norm_l2_l2(sqrtb)) * rep.f_inf;
  rep.implied_constant = denom > 0 ? (rep.phi_inf + rep.lap_inf) / denom : 0.0;
  rep.finite = std::isfinite(rep.phi_inf) && std::isfinite(rep.lap_inf) &&
               std::isfinite(rep.implied_constant);
  return rep;
}

std::pair<double, double> duality_norm(const Trajectory& traj, const SpatialSpace& space,
                                       const RegularizedCoefficients& reg) {
  double sq1 = 0, sq2 = 0;
  for (const TrajectoryStep& step : traj.steps) {
    Eigen::VectorXd f1(step.u1.size()), f2(step.u2.size());
    for (Eigen::Index q = 0; q < step.u1.size(); ++q) {
      const double u1 = step.u1[q], u2 = step.u2[q];
      f1[q] = u1 * u1 * (reg.d11e()(u1) + reg.a12e()(u2));
      f2[q] = u2 * u2 * (reg.d22e()(u2) + reg.a21e()(u1));
    }
    sq1 += traj.tau * space.integrate(f1);
    sq2 += traj.tau * space.integrate(f2);
  }
  return {std::sqrt(sq1), std::sqrt(sq2)};
}

DualChainInput chain_from_trajectory(const Trajectory& traj, const SpatialSpace& space,
                                     const EntropyMap& m1, const EntropyMap& m2,
                                     const RegularizedCoefficients& reg, const FDGrid& grid,
                                     int species, double r,
                                     const std::vector<Eigen::VectorXd>& F) {
  if (species != 0 && species != 1)
    throw std::invalid_argument("chain_from_trajectory: species must be 0 or 1");
  const int nodes = grid.num_nodes();
  const int dim = grid.dimension();

  DualChainInput in;
  in.r = r;
  in.tau = traj.tau;
  in.F = F;
  in.b.reserve(traj.steps.size());
  double g1 = 1, g2 = 1;  // warm starts for the inversions, cells are adjacent
  for (const TrajectoryStep& step : traj.steps) {
    Eigen::VectorXd b(nodes);
    for (int i = 0; i < nodes; ++i) {
      const double x = grid.coord(i, 0);
      const double y = dim == 2 ? grid.coord(i, 1) : 0.0;
      g1 = m1.phi_inverse(space.evaluate_at(step.c1, x, y), g1, 1e-12);
      g2 = m2.phi_inverse(space.evaluate_at(step.c2, x, y), g2, 1e-12);
      const double ui = species == 0 ? g1 : g2;
      const double uj = species == 0 ? g2 : g1;
      b[i] = std::max(1.0, reg.self_rate(species)(ui) + reg.cross_of(species)(uj));
    }
    in.b.push_back(std::move(b));
  }
  return in;
}

}  // namespace crossdiff
