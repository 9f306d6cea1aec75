#ifndef CROSSDIFF_QUADRATURE_HPP
#define CROSSDIFF_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace crossdiff {

/** Adaptive Gauss-Kronrod (G7,K15) integration of f over [a, b].
 *  Bisects until the embedded error estimate meets
 *  rel_tol * |integral| + abs_tol on every panel.  Handles integrable
 *  endpoint singularities by depth-limited bisection.
 */
double adaptive_gk15(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-12, double abs_tol = 1e-300);

/** Composite 16-point Gauss-Legendre rule on [0, L] with `panels` equal
 *  panels; fills nodes and weights (size 16 * panels).
 */
void composite_gauss16(double L, int panels, std::vector<double>& nodes,
                       std::vector<double>& weights);

}  // namespace crossdiff

#endif
