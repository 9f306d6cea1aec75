#ifndef CROSSDIFF_STUDY_HPP
#define CROSSDIFF_STUDY_HPP

#include <array>
#include <vector>

#include "crossdiff/config.hpp"
#include "crossdiff/diagnostics.hpp"

namespace crossdiff {

/** Comparison of a spatially constant run against two scalar integrations:
 *  the same implicit scheme reduced to 2 unknowns (u' = R_eps(u) - eps phi(u)),
 *  and a fine RK4 reference for the unregularized reaction ODE.
 */
struct OdeCompareReport {
  std::vector<std::array<double, 2>> pde_means;
  std::vector<std::array<double, 2>> euler;
  std::vector<std::array<double, 2>> reference;
  double max_spatial_variation = 0;  // solution should stay constant in space
  double max_scheme_dev = 0;         // field means against the scalar scheme
  double max_reference_dev = 0;      // field means against RK4, relative
  std::array<double, 2> final_pde{};
  std::array<double, 2> final_reference{};
};

OdeCompareReport ode_compare(const RunConfig& cfg);

/** One refinement level of the simultaneous (tau, eps, n) study:
 *  tau halves, eps quarters, n doubles (capped) per level.
 */
struct StudyLevel {
  int level = 0;
  int n = 0, N = 0;
  double eps = 0, tau = 0;
  double entropy_total = 0;  // E + dissipation + regularization at T
  double apriori_bound = 0;
  std::array<double, 2> duality{};
  double weak_residual_max = 0;  // over the default space-time test family
  double min_u = 0;
  bool invariants_pass = true;
};

struct StudyReport {
  std::vector<StudyLevel> levels;
};

StudyReport convergence_study(const RunConfig& cfg);

}  // namespace crossdiff

#endif
