#ifndef CROSSDIFF_DIAGNOSTICS_HPP
#define CROSSDIFF_DIAGNOSTICS_HPP

#include <array>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "crossdiff/coefficients.hpp"
#include "crossdiff/entropy.hpp"
#include "crossdiff/spatial.hpp"
#include "crossdiff/stepper.hpp"

namespace crossdiff {

/** Scalars of one trajectory step, plus running sums over steps 1..k.
 *  All integrals use the Galerkin quadrature, so they satisfy the same
 *  identities the solver enforced (to the Newton tolerance).
 */
struct StepDiagnostics {
  double t = 0;
  double entropy = 0;           // E_eps(u^k)
  double q_integral = 0;        // int grad(w)^T A grad(w)
  double w_h1_sq = 0;           // ||w^k||_H1^2, both species summed
  double mass1 = 0, mass2 = 0;  // ||u_i^k||_1
  double l1_reaction_neg = 0;   // ||R^{-,eps}(u^k)||_1, both species
  double l1_reaction_plus = 0;  // ||R^+(u^k)||_1
  double l1_w = 0;              // ||w_1||_1 + ||w_2||_1
  double w_integral = 0;        // int (w_1 + w_2)
  int newton_iterations = 0;
  double final_residual = 0;
  double coef_l1 = 0;           // ||c_1||_1 + ||c_2||_1 (testing-slack bookkeeping)
  double min_u = std::numeric_limits<double>::infinity();

  double cum_q = 0;     // tau sum int Q
  double cum_w_h1 = 0;  // eps tau sum ||w||_H1^2
  double cum_l1_w = 0;  // eps tau sum ||w||_1
  double cum_reaction_neg = 0;             // tau sum ||R^{-,eps}||_1
  std::array<double, 3> cum_grad_sqrt{};   // tau sum int |grad sqrt(.)|^2: a21, a12, product
  std::array<double, 2> cum_bound1{};      // tau sum int (1/u_i) (a_ji^eps)' |grad u_i|^2
  std::array<double, 2> cum_beta{};        // tau sum int |grad u_i^{alpha_ji/2}|^2
  std::array<double, 2> cum_sqrt_u{};      // tau sum int |grad sqrt(u_i)|^2
  double cum_slack = 0;                    // sum of per-step testing slacks
};

/** Everything the invariant checks consume, derived from one trajectory. */
struct DiagnosticsRecord {
  double tau = 0, eps = 0, T = 0, measure = 0;
  double newton_tol = 0;
  double entropy0 = 0;
  double mass1_0 = 0, mass2_0 = 0;

  double reaction_growth = 0;  // K of <w, R(u)> <= K (1 + E(u))
  double rmax = 0;             // max(r_1, r_2)
  double apriori_bound = 0;    // E0 + T K (1 + e^{2TK} (E0 + 1))

  bool power_law = false;
  std::array<double, 2> beta_expo{};    // alpha_ji / 2 (exponent of the monitored power)
  std::array<double, 2> beta_factor{};  // alpha_ji / (4 A_ji)

  std::array<double, 2> duality{};  // ||u_i sqrt(d_ii + a_ij(u_j))||_{L2(L2)}
  double min_u = std::numeric_limits<double>::infinity();

  std::vector<StepDiagnostics> steps;
};

DiagnosticsRecord build_diagnostics(const Trajectory& traj, const SpatialSpace& space,
                                    const RegularizedCoefficients& reg, const EntropyMap& m1,
                                    const EntropyMap& m2, double newton_tol);

struct CheckResult {
  std::string name;
  bool pass = false;
  double lhs = 0, rhs = 0, slack = 0;
  int step = -1;  // worst step, -1 when global
  std::string detail;
};

struct InvariantReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
  const CheckResult* find(const std::string& name) const;
  std::string summary() const;
};

/** Every estimate the trajectory is supposed to satisfy, with computed
 *  constants: per-step entropy dissipation against K(1+E), monotone decay
 *  when K = 0, the cumulative a-priori bound, the stepwise L1 balance
 *  identity, the mass and cumulative-reaction growth bounds, the
 *  dissipation lower bounds (both quadratic-form estimates integrated in
 *  time), the power-gradient chain, and structural positivity.
 */
InvariantReport run_invariant_checks(const DiagnosticsRecord& rec);

/** Separable space-time test function p(t) chi_m(x); p is a polynomial in
 *  monomial coefficients (ascending degree) and must vanish at t = T.
 */
struct TestFunction {
  Eigen::VectorXd p;
  int mode = 0;

  double value(double t) const;
  double deriv(double t) const;
  double integral(double a, double b) const;
};

/** p in {1 - t/T, (1 - t/T)^2} times the first three modes. */
std::vector<TestFunction> default_test_family(double T);

/** Defect of the limit weak formulation for theta = p(t) chi_m(x), using
 *  the unregularized coefficients (the epsilon stabilization is part of
 *  the defect):
 *    - <u_i^0, chi> p(0) - sum_k <u_i^k, chi> [p(t_k) - p(t_{k-1})]
 *    + lambda_m sum_k (int_slab p) <a_ii(u_i^k) + u_i^k a_ij(u_j^k), chi>
 *    - sum_k (int_slab p) <u_i^k (r_i - s_i1(u_1^k) - s_i2(u_2^k)), chi>
 *  per species, exact in time (p polynomial, fields piecewise constant).
 */
std::pair<double, double> weak_residual(const Trajectory& traj, const SpatialSpace& space,
                                        const CoefficientSet& coeffs, const TestFunction& theta);

}  // namespace crossdiff

#endif
