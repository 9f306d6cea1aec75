#ifndef CROSSDIFF_STEPPER_HPP
#define CROSSDIFF_STEPPER_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "crossdiff/coefficients.hpp"
#include "crossdiff/entropy.hpp"
#include "crossdiff/spatial.hpp"

namespace crossdiff {

struct NewtonOptions {
  double tol = 1e-11;     // infinity norm of the residual
  int max_iter = 60;
  int max_backtrack = 10; // halvings in the line search
};

struct SolveConfig {
  double T = 1;
  int N = 100;
  double eps = 1e-4;
  std::vector<double> sigma_schedule;  // default {0, 0.1, ..., 1}
  NewtonOptions newton;
  int sigma_bisect_depth = 6;
  double u0_floor = 1e-8;
  double tau() const { return T / N; }
};

struct StepReport {
  std::vector<double> sigma_path;  // accepted continuation targets
  int newton_iterations = 0;
  double final_residual = 0;
  bool used_picard = false;
};

struct TrajectoryStep {
  Eigen::VectorXd c1, c2;  // entropy-variable coefficients, n each
  Eigen::VectorXd u1, u2;  // nodal densities at quadrature nodes
  StepReport report;
};

/** A full discrete trajectory: floored initial nodal data plus N steps. */
struct Trajectory {
  Eigen::VectorXd u1_0, u2_0;
  std::vector<TrajectoryStep> steps;
  double tau = 0;
  double eps = 0;
};

struct ResidualEval {
  Eigen::VectorXd F;       // stacked residual, species-major, size 2n
  Eigen::VectorXd u1, u2;  // nodal densities recovered from w
  double q_integral = 0;   // int grad(w)^T A grad(w)
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/** One implicit step in entropy variables.
 *
 *  For test functions chi in the Galerkin span and sigma in [0,1]:
 *    sigma [ <chi, (u - u_prev)/tau> + <grad chi, A(u) grad w> - <chi, R(u)> ]
 *      + eps <chi, w>_H1 = 0,        u = phi^{-1}(w) nodewise.
 *  sigma = 0 has the exact root w = 0; the solver walks the sigma schedule
 *  with damped Newton (analytic Jacobian through phi^{-1}), bisecting the
 *  continuation increment on failure and falling back to a frozen-A
 *  (Picard) Jacobian before giving up.
 *
 *  Construction computes the reaction-growth constant K of the entropy
 *  inequality  <w, R(u)> <= K (1 + E(u))  from the derived map constants
 *  (D, B), the growth rates and the linear domination of the competition
 *  terms, and rejects time steps with 1 - tau K < 1/2.
 */
class Stepper {
 public:
  Stepper(SolveConfig cfg, const SpatialSpace& space, const RegularizedCoefficients& reg,
          const EntropyMap& map1, const EntropyMap& map2);

  const SolveConfig& config() const { return cfg_; }
  double reaction_constant() const { return K_; }

  ResidualEval residual(const Eigen::VectorXd& uprev1, const Eigen::VectorXd& uprev2, double sigma,
                        const Eigen::VectorXd& c1, const Eigen::VectorXd& c2) const;

  TrajectoryStep solve_step(const Eigen::VectorXd& uprev1, const Eigen::VectorXd& uprev2) const;

  /** March N steps from nodal initial data (floored at cfg.u0_floor). */
  Trajectory run(const Eigen::VectorXd& u01, const Eigen::VectorXd& u02) const;

 private:
  struct Workspace;
  bool newton_solve(const Eigen::VectorXd& up1, const Eigen::VectorXd& up2, double sigma,
                    bool picard, Workspace& ws, StepReport& rep) const;
  void eval(const Eigen::VectorXd& up1, const Eigen::VectorXd& up2, double sigma,
            const Eigen::VectorXd& c1, const Eigen::VectorXd& c2, Workspace& ws, bool with_jac,
            bool picard) const;

  SolveConfig cfg_;
  const SpatialSpace& space_;
  const RegularizedCoefficients& reg_;
  const EntropyMap& map1_;
  const EntropyMap& map2_;
  double K_ = 0;
};

/** K with  <w, R(u)> <= K (1 + E(u))  assembled from the map constants and
 *  the coefficient growth; 0 when all rates and competition terms vanish.
 */
double compute_reaction_constant(const RegularizedCoefficients& reg, const EntropyMap& m1,
                                 const EntropyMap& m2, double measure);

/** Bounds for sequences with  v_n <= v_{n-1} + theta v_n + w_n,
 *  0 < theta < 1:  returns  e^{n lambda} (v_0 + sum_{k<=n} e^{(1-k) lambda} w_k)
 *  for n = 1..len(w), lambda = theta/(1-theta).
 */
std::vector<double> discrete_gronwall_bound(double v0, double theta,
                                            const std::vector<double>& w_seq);

}  // namespace crossdiff

#endif
