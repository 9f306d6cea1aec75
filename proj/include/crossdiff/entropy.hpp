#ifndef CROSSDIFF_ENTROPY_HPP
#define CROSSDIFF_ENTROPY_HPP

#include <array>

#include "crossdiff/coefficients.hpp"

namespace crossdiff {

/** Entropy variables for one species.
 *
 *  Species i is driven by the cross coefficient it appears under in the
 *  other equation, so species 1 uses a_21 and species 2 uses a_12:
 *      phi(x)  = int_1^x a'(t)/t dt + eps ln x,
 *      psi(x)  = int_1^x phi_0(t) dt + eps (x ln x - x + 1),
 *  with phi_0 the eps = 0 map.  psi is convex, nonnegative, psi(1) = 0,
 *  and psi(0) = a(1) + eps.  For power-law coefficients both maps are
 *  closed-form; otherwise they are evaluated by adaptive quadrature.
 *
 *  Two constants are derived at construction:
 *    B = min of x phi_0(x) on (0,1]   (so x psi'(x) >= B, and the
 *        regularized map obeys x psi'(x) >= B - eps/e), and
 *    D with  x^a + a(x) <= D (1 + psi_0(x)) for all a in [0,1]  and
 *        x psi_0'(x) <= D (1 + psi_0(x)); the regularized forms hold
 *        with D (1 + eps) against 1 + psi.
 */
class EntropyMap {
 public:
  EntropyMap(const RegularizedCoefficients& reg, int species);

  int species() const { return species_; }
  double eps() const { return eps_; }
  double B() const { return B_; }
  double D() const { return D_; }

  double phi(double x) const;
  double phi_deriv(double x) const;  // a_eps'(x)/x
  double psi(double x) const;        // x = 0 returns the limit a(1) + eps

  /** Inverse of phi; requires eps > 0 (phi is bounded above otherwise).
   *  Bracketed bisection plus Newton polish to |phi(x) - y| <= tol(1+|y|).
   *  Throws std::range_error when the preimage exceeds ~1e300.
   */
  double phi_inverse(double y, double tol = 1e-12) const;
  /** Same, warm-started from a previous preimage guess. */
  double phi_inverse(double y, double guess, double tol) const;

  // du/dw along u = phi^{-1}(w): u / a_eps'(u)
  double inverse_slope(double u) const;

  // the eps = 0 base maps (used by the derived constants and diagnostics)
  double phi_base(double x) const;
  double psi_base(double x) const;

  const ScalarFn& cross() const { return cross_eps_; }

 private:
  void derive_constants();

  int species_;
  double eps_;
  ScalarFn cross_eps_;   // a_ji + eps x
  ScalarFn cross_base_;  // a_ji
  bool closed_form_ = false;
  double amp_ = 0, expo_ = 0;  // a_ji(x) = amp x^expo when closed_form_
  double B_ = 0, D_ = 0;
};

/** The 2x2 diffusion matrix in entropy variables at a point (u1, u2):
 *      A11 = (a_11'(u1) + a_12(u2)) u1 / a_21'(u1)
 *      A12 = A21 = u1 u2
 *      A22 = (a_22'(u2) + a_21(u1)) u2 / a_12'(u2)
 *  (all coefficients in their regularized form).  Symmetric, and positive
 *  semidefinite for admissible coefficients.
 */
struct MatrixA {
  double m11 = 0, m12 = 0, m21 = 0, m22 = 0;
  double det() const { return m11 * m22 - m12 * m21; }
};

MatrixA matrix_A(const RegularizedCoefficients& reg, double u1, double u2);

/** Pointwise value of grad(w)^T A grad(w) together with its two certified
 *  lower bounds:
 *    bound1 = sum_i (1/u_i) a_ji'(u_i) |grad u_i|^2
 *    bound2 = 4 (|grad sqrt(a_21(u1))|^2 + |grad sqrt(a_12(u2))|^2
 *               + |grad sqrt(a_21(u1) a_12(u2))|^2)
 *  where grad u_i is recovered from grad w_i via
 *  grad u_i = grad w_i * u_i / a_ji'(u_i).  Both bounds are certified under
 *  the normalization d_ii >= 1, which a density rescaling always achieves;
 *  for smaller self-diffusion rates the form is still returned but the
 *  bounds may cross it.  The per-species / per-term components are exposed
 *  for the cumulative diagnostics.
 */
struct QuadraticFormEval {
  double q = 0;
  double bound1 = 0, bound2 = 0;
  std::array<double, 2> bound1_parts{};          // per species
  std::array<double, 3> grad_sqrt_parts{};       // a21, a12, product terms
  std::array<std::array<double, 2>, 2> grad_u{}; // recovered grad u_i per axis
};

QuadraticFormEval quadratic_form(const RegularizedCoefficients& reg, double u1, double u2,
                                 const std::array<double, 2>& gw1,
                                 const std::array<double, 2>& gw2, int dim);

// x^{(1-alpha)/2}, the power whose gradient the dissipation controls
double beta_alpha(double x, double alpha);

}  // namespace crossdiff

#endif
