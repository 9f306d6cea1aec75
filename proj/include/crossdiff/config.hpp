#ifndef CROSSDIFF_CONFIG_HPP
#define CROSSDIFF_CONFIG_HPP

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "crossdiff/coefficients.hpp"
#include "crossdiff/spatial.hpp"
#include "crossdiff/stepper.hpp"

namespace crossdiff {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/** Flat key=value run description.  Defaults give a small admissible
 *  power-law model on the unit interval.
 */
struct RunConfig {
  PowerLawCoefficients model;

  int dim = 1;
  double L1 = 1.0, L2 = 1.0;
  int n = 16;        // Galerkin modes per run
  int fd_points = 64;  // finite-difference nodes per axis for dual chains

  double T = 1.0;
  int N = 100;
  double eps = 1e-4;
  int sigma_steps = 10;
  double newton_tol = 1e-11;
  int newton_max_iter = 60;
  int sigma_bisect_depth = 6;
  double u0_floor = 1e-8;

  std::string u0_kind = "constant";  // constant | cosine-bump | file
  double u0_c1 = 1.0, u0_c2 = 1.0;
  double u0_amp1 = 0.0, u0_amp2 = 0.0;
  std::string u0_file;

  int levels = 3;      // refinement levels for the convergence study
  double dual_r = 1.0;  // decay rate of the duality chains
  bool check_invariants = true;
};

/** Parse a config file.  Lines are `key=value`, `#` starts a comment,
 *  blank lines are skipped, unknown keys are errors.
 */
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/** Canonical echo: every key in a fixed order, doubles at full precision. */
std::string echo_config(const RunConfig& c);

CoefficientSet make_coefficients(const RunConfig& c);
SpatialSpace make_space(const RunConfig& c);
FDGrid make_grid(const RunConfig& c);
SolveConfig make_solve_config(const RunConfig& c);

/** Nodal initial data on the quadrature nodes of `space`. */
std::pair<Eigen::VectorXd, Eigen::VectorXd> make_initial_data(const RunConfig& c,
                                                              const SpatialSpace& space);

}  // namespace crossdiff

#endif
