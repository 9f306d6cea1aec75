#ifndef CROSSDIFF_DUALITY_HPP
#define CROSSDIFF_DUALITY_HPP

#include <Eigen/Dense>
#include <vector>

#include "crossdiff/coefficients.hpp"
#include "crossdiff/spatial.hpp"
#include "crossdiff/stepper.hpp"

namespace crossdiff {

/** Piecewise-constant-in-time embedding of grid fields h^1..h^N with step
 *  tau:  ||h||_{L^q(L^p)}^q = sum_k tau ||h^k||_p^q  (exact, no interpolation).
 */
struct StepEmbedding {
  double tau = 0;
  double cell_volume = 0;

  double norm_lp(const Eigen::VectorXd& h, double p) const;
  /** L^q in time of L^p in space over all steps. */
  double norm_lq_lp(const std::vector<Eigen::VectorXd>& h, double q, double p) const;
  double norm_l2_l2(const std::vector<Eigen::VectorXd>& h) const { return norm_lq_lp(h, 2, 2); }
};

/** Data for one backward dual chain on the grid:
 *  diffusion fields b^k >= 1, sources F^k <= 0, rate r > 0 with 1 - 2 r tau > 0.
 */
struct DualChainInput {
  std::vector<Eigen::VectorXd> b, F;  // k = 1..N
  double r = 0;
  double tau = 0;
};

struct DualChain {
  DualChainInput in;
  std::vector<Eigen::VectorXd> phi;  // k = 1..N (phi^{N+1} = 0 implicit)
};

/** Solve the chain backward from phi^{N+1} = 0:
 *    (1/tau + r) phi^k - b^k Lap phi^k = phi^{k+1}/tau - sqrt(b^k) F^k.
 *  The system matrix is an M-matrix, so nonnegative right-hand sides
 *  propagate phi >= 0 down the chain.
 */
DualChain solve_dual_chain(const FDGrid& grid, DualChainInput in);

/** The three certified chain estimates, with
 *  Efac = exp((N+1) r tau / (1 - 2 r tau)) playing the e^{rT} role:
 *    max_j ||grad phi^j||_2        <= Efac ||F||_{L2L2}
 *    ||sqrt(b) Lap phi||_{L2L2}    <= Efac ||F||_{L2L2}
 *    max_j ||phi^j||_{H1}          <= Efac^2 C_Omega (1 + ||sqrt b||_{L2L2}) ||F||_{L2L2}
 *  with C_Omega = C_PW + 1 + 2 measure^{-1/2} composed from the grid
 *  Poincare constant.  Gradient norms are the discrete Dirichlet forms
 *  <-Lap f, f>, which makes the first two exact consequences of the scheme
 *  (test the k-th equation with Lap phi^k, tilt by (1-2r tau)^{k/2},
 *  telescope); the third follows from the first two via the mean bound
 *  |int phi^j| <= Efac (1 + Efac) ||sqrt b|| ||F||.
 */
struct DualBoundsReport {
  double efac = 0, c_omega = 0;
  double f_norm = 0, sqrtb_norm = 0;
  double phi_min = 0;
  double max_grad = 0, grad_bound = 0;
  double blap_norm = 0, blap_bound = 0;
  double max_h1 = 0, h1_bound = 0;
  bool nonneg = false, grad_ok = false, blap_ok = false, h1_ok = false;
  bool all_ok() const { return nonneg && grad_ok && blap_ok && h1_ok; }
};

DualBoundsReport check_dual_bounds(const FDGrid& grid, const DualChain& chain,
                                   double rel_slack = 1e-9);

/** Max-norm monitor: no explicit constant is certified for this chain, so
 *  it only reports the implied ratio  max_k(||phi^k||_inf + ||Lap phi^k||_inf)
 *  / ((1 + ||sqrt b||_{L2L2}) ||F||_inf)  and basic sanity.
 */
struct DualLinfReport {
  double phi_inf = 0, lap_inf = 0, f_inf = 0;
  double implied_constant = 0;
  bool finite = false;
};

DualLinfReport check_dual_linf(const FDGrid& grid, const DualChain& chain);

/** The duality norms  ||u_i sqrt(d_ii(u_i) + a_ij(u_j))||_{L2(L2)}  of a
 *  trajectory (regularized coefficients), one value per species, integrated
 *  on the Galerkin quadrature.
 */
std::pair<double, double> duality_norm(const Trajectory& traj, const SpatialSpace& space,
                                       const RegularizedCoefficients& reg);

/** Build admissible chain data from a trajectory: b^k is the species-i
 *  diffusion monitor d_ii(u_i^k) + a_ij(u_j^k) evaluated at the grid
 *  cells (floored at 1, so b >= 1 holds), the densities recovered by
 *  inverting the entropy variables at the cell centers, with a
 *  caller-chosen source field F <= 0.
 */
DualChainInput chain_from_trajectory(const Trajectory& traj, const SpatialSpace& space,
                                     const EntropyMap& m1, const EntropyMap& m2,
                                     const RegularizedCoefficients& reg, const FDGrid& grid,
                                     int species, double r,
                                     const std::vector<Eigen::VectorXd>& F);

}  // namespace crossdiff

#endif
