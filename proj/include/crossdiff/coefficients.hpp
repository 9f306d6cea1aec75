#ifndef CROSSDIFF_COEFFICIENTS_HPP
#define CROSSDIFF_COEFFICIENTS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace crossdiff {

/** A scalar coefficient x >= 0 -> f(x) with derivatives.
 *
 *  second() falls back to a central difference of deriv() when no
 *  analytic second derivative was supplied.
 */
struct ScalarFn {
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  std::function<double(double)> second_deriv;  // optional

  double operator()(double x) const { return value(x); }
  double d(double x) const { return deriv(x); }
  double d2(double x) const;
};

/** Power-law model data.
 *
 *  Self-diffusion     a_ii(x) = D_i x + A_ii x^alpha_ii, so the rate is
 *                     d_ii(x) = D_i + A_ii x^(alpha_ii - 1).
 *  Cross-diffusion    a_ij(x) = A_ij x^alpha_ij          (i != j)
 *  Competition        s_ij(x) = S_ij x^sigma_ij
 *  Growth rates       r_1, r_2 >= 0.
 */
struct PowerLawCoefficients {
  double r1 = 0, r2 = 0;
  double D1 = 1, D2 = 1;
  double A11 = 0, A12 = 0, A21 = 0, A22 = 0;
  double alpha11 = 1, alpha12 = 0.5, alpha21 = 0.5, alpha22 = 1;
  double S11 = 0, S12 = 0, S21 = 0, S22 = 0;
  double sigma11 = 0, sigma12 = 0, sigma21 = 0, sigma22 = 0;
};

enum class Coefficient { a11, a12, a21, a22, d11, d22, s11, s12, s21, s22 };

/** The full model: growth rates plus the ten scalar coefficient functions.
 *
 *  Either built from power-law data (closed-form derivatives, and the
 *  entropy module can use closed-form integrals) or from user-supplied
 *  evaluators for general coefficient families.
 */
class CoefficientSet {
 public:
  static CoefficientSet power_law(const PowerLawCoefficients& p);

  struct General {
    double r1 = 0, r2 = 0;
    ScalarFn a12, a21;            // must vanish at 0
    ScalarFn d11, d22;            // self-diffusion rates
    ScalarFn s11, s12, s21, s22;  // competition terms
  };
  static CoefficientSet general(General g);

  double r1() const { return r1_; }
  double r2() const { return r2_; }
  const ScalarFn& a12() const { return a12_; }
  const ScalarFn& a21() const { return a21_; }
  const ScalarFn& d11() const { return d11_; }
  const ScalarFn& d22() const { return d22_; }
  const ScalarFn& s11() const { return s11_; }
  const ScalarFn& s12() const { return s12_; }
  const ScalarFn& s21() const { return s21_; }
  const ScalarFn& s22() const { return s22_; }

  // a_ii(x) = x d_ii(x)
  double a11(double x) const { return x * d11_(x); }
  double a22(double x) const { return x * d22_(x); }
  double a11_deriv(double x) const { return d11_(x) + x * d11_.d(x); }
  double a22_deriv(double x) const { return d22_(x) + x * d22_.d(x); }

  const std::optional<PowerLawCoefficients>& power_law_data() const { return power_; }

  // species-indexed access (i in {0,1} for species 1,2)
  double growth_rate(int i) const { return i == 0 ? r1_ : r2_; }
  const ScalarFn& cross_into(int i) const { return i == 0 ? a21_ : a12_; }  // a_ji
  const ScalarFn& cross_of(int i) const { return i == 0 ? a12_ : a21_; }    // a_ij
  const ScalarFn& self_rate(int i) const { return i == 0 ? d11_ : d22_; }
  const ScalarFn& competition(int i, int j) const;  // s_{i+1,j+1}

 private:
  CoefficientSet() = default;
  double r1_ = 0, r2_ = 0;
  ScalarFn a12_, a21_, d11_, d22_, s11_, s12_, s21_, s22_;
  std::optional<PowerLawCoefficients> power_;
};

/** Evaluate one named coefficient (or its derivative).
 *  Throws std::invalid_argument for x < 0. Derivatives of x^alpha with
 *  alpha < 1 return +infinity at x = 0.
 */
double eval_coefficient(const CoefficientSet& c, Coefficient which, double x,
                        bool derivative = false);

/** One admissibility clause with its verdict.  `heuristic` marks clauses
 *  decided by sampled trends rather than exponent arithmetic.
 */
struct AssumptionClause {
  std::string name;
  bool pass = false;
  bool heuristic = false;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionClause> clauses;
  bool all_pass() const;
  const AssumptionClause* find(const std::string& name) const;
  std::string summary() const;
};

/** Check the structural assumptions on the model:
 *  - growth/competition sublinearity relative to the diffusion
 *    (for power laws: sigma_ii < sup(1, alpha_ii) and
 *     sigma_ij < sup((alpha_jj+1)/2, 1 + alpha_ij/2), all sigma >= 0),
 *  - cross-diffusion exponents strictly inside (0,1); alpha_ij = 1 is
 *    reported as the excluded linear (SKT) limiting case,
 *  - cross coefficients concave, nondecreasing, vanishing at 0, with a
 *    positive derivative floor x^(1-alpha) a'(x) >= C,
 *  - self-diffusion rates positive at 0 and nondecreasing.
 *  Power-law input is decided exactly from the exponents; general input
 *  falls back to sampled trends and marks those clauses heuristic.
 */
AssumptionReport check_assumptions(const CoefficientSet& c);

/** Bounded saturation map used by the regularization:
 *    gamma_eps(x) = x                                  for x <= 1,
 *    gamma_eps(x) = 1 + (1 - exp(-eps (x-1))) / eps    for x > 1.
 *  C^1, nondecreasing, gamma_eps(x) <= min(x, 1 + 1/eps), identity below 1,
 *  and pointwise increasing to the identity as eps -> 0.
 *  eps = 0 gives the identity map.
 */
class GammaEps {
 public:
  explicit GammaEps(double eps);
  double eps() const { return eps_; }
  double operator()(double x) const;
  double deriv(double x) const;

 private:
  double eps_;
};

GammaEps make_gamma_eps(double eps);

/** Coefficients after entropy regularization at level eps >= 0:
 *    a_ij^eps = a_ij + eps x        (cross terms, i != j)
 *    d_ii^eps = gamma_eps o d_ii    (bounded self-diffusion rates)
 *    a_ii^eps(x) = x d_ii^eps(x)
 *  Reactions split as R_i^+ = r_i u_i and
 *    R_i^{-,eps} = u_i gamma_eps(s_i1(u_1) + s_i2(u_2)),
 *  with the saturation applied to the competition sum.
 */
class RegularizedCoefficients {
 public:
  RegularizedCoefficients(CoefficientSet base, double eps);

  double eps() const { return eps_; }
  const CoefficientSet& base() const { return base_; }
  const GammaEps& gamma() const { return gamma_; }

  const ScalarFn& a12e() const { return a12e_; }
  const ScalarFn& a21e() const { return a21e_; }
  const ScalarFn& a11e() const { return a11e_; }
  const ScalarFn& a22e() const { return a22e_; }
  const ScalarFn& d11e() const { return d11e_; }
  const ScalarFn& d22e() const { return d22e_; }

  const ScalarFn& cross_into(int i) const { return i == 0 ? a21e_ : a12e_; }
  const ScalarFn& cross_of(int i) const { return i == 0 ? a12e_ : a21e_; }
  const ScalarFn& self(int i) const { return i == 0 ? a11e_ : a22e_; }
  const ScalarFn& self_rate(int i) const { return i == 0 ? d11e_ : d22e_; }

  // reaction split at a point (u1, u2) >= 0
  double reaction_plus(int i, double u1, double u2) const;
  double reaction_minus(int i, double u1, double u2) const;
  double reaction(int i, double u1, double u2) const;
  // partial derivatives d R_i / d u_j
  double reaction_deriv(int i, int j, double u1, double u2) const;

 private:
  CoefficientSet base_;
  double eps_;
  GammaEps gamma_;
  ScalarFn a12e_, a21e_, a11e_, a22e_, d11e_, d22e_;
};

RegularizedCoefficients regularize(const CoefficientSet& c, double eps);

}  // namespace crossdiff

#endif
