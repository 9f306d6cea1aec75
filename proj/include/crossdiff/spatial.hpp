#ifndef CROSSDIFF_SPATIAL_HPP
#define CROSSDIFF_SPATIAL_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

namespace crossdiff {

/** Galerkin space spanned by the first n Neumann eigenfunctions of the
 *  Laplacian on an interval [0,L] or rectangle [0,L1]x[0,L2]:
 *  normalized cosines, ordered by nondecreasing eigenvalue with
 *  lexicographic tie-break, so truncations are nested.  Quadrature is
 *  composite 16-point Gauss-Legendre with ceil(n/4) panels per dimension
 *  (at least 4n nodes per dimension), which integrates all basis products
 *  to machine accuracy.
 */
class SpatialSpace {
 public:
  static SpatialSpace interval(double L, int n);
  static SpatialSpace rectangle(double L1, double L2, int n);

  int dimension() const { return dim_; }
  int n() const { return n_; }
  int num_nodes() const { return int(weights_.size()); }
  double measure() const { return measure_; }
  double extent(int axis) const { return axis == 0 ? L1_ : L2_; }

  const Eigen::VectorXd& weights() const { return wq_; }
  double node_coord(int node, int axis) const;
  double eigenvalue(int m) const { return eigenvalues_[m]; }

  // basis value / gradient tables, modes x nodes
  const Eigen::MatrixXd& basis() const { return B_; }
  const Eigen::MatrixXd& basis_grad(int axis) const { return axis == 0 ? Bx_ : By_; }

  /** L2 projection onto the span: coefficients of the nodal field. */
  Eigen::VectorXd project(const Eigen::VectorXd& nodal) const;
  /** Nodal values of a coefficient vector. */
  Eigen::VectorXd evaluate(const Eigen::VectorXd& coeffs) const;
  /** Nodal gradient (nodes x dim) of a coefficient vector. */
  Eigen::MatrixXd evaluate_grad(const Eigen::VectorXd& coeffs) const;
  /** Point value of a coefficient vector at arbitrary coordinates. */
  double evaluate_at(const Eigen::VectorXd& coeffs, double x, double y = 0) const;

  double integrate(const Eigen::VectorXd& nodal) const { return wq_.dot(nodal); }
  double inner_l2(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;

  /** (L2, H1) inner products of two members given by coefficients.
   *  Diagonal in this basis: sum c_m d_m and sum c_m d_m (1 + lambda_m).
   */
  std::pair<double, double> inner_products(const Eigen::VectorXd& cf,
                                           const Eigen::VectorXd& cg) const;

  /** Per-mode loads <grad chi_m, flux> for a nodal flux field (nodes x dim). */
  Eigen::VectorXd project_flux(const Eigen::MatrixXd& flux) const;

 private:
  SpatialSpace() = default;
  void build(double L1, double L2, int n, int dim);

  int dim_ = 1, n_ = 0;
  double L1_ = 1, L2_ = 1, measure_ = 1;
  std::vector<double> weights_;  // duplicate of wq_ for size bookkeeping
  Eigen::VectorXd wq_;
  std::vector<std::pair<int, int>> modes_;
  std::vector<double> eigenvalues_;
  std::vector<double> nodes1_, nodes2_;  // per-axis 1D nodes
  Eigen::MatrixXd B_, Bx_, By_;          // modes x quadrature nodes
};

/** Uniform cell-centered grid with reflection (Neumann) closure.
 *  The five-point (three-point in 1D) Laplacian has zero row sums, and
 *  c I - diag(b) Lap is an M-matrix for c > 0, b >= 0, which the dual
 *  chains rely on for their maximum principle.
 */
class FDGrid {
 public:
  static FDGrid interval(double L, int m);
  static FDGrid rectangle(double L1, double L2, int m1, int m2);

  int dimension() const { return dim_; }
  int num_nodes() const { return dim_ == 1 ? m1_ : m1_ * m2_; }
  double measure() const { return L1_ * (dim_ == 2 ? L2_ : 1.0); }
  double cell_volume() const { return h1_ * (dim_ == 2 ? h2_ : 1.0); }
  double coord(int node, int axis) const;

  Eigen::VectorXd laplacian(const Eigen::VectorXd& f) const;

  /** Solve  coeff * phi - diag(b) * Lap(phi) = rhs;  coeff > 0, b >= 0.
   *  Direct sparse factorization; throws if the factorization fails or the
   *  residual exceeds 1e-11 * ||rhs||.
   */
  Eigen::VectorXd solve_elliptic(double coeff, const Eigen::VectorXd& b,
                                 const Eigen::VectorXd& rhs) const;

  double integrate(const Eigen::VectorXd& f) const { return cell_volume() * f.sum(); }
  double norm_l2(const Eigen::VectorXd& f) const;
  /** Discrete H1 seminorm squared, <-Lap f, f> with the cell weighting. */
  double grad_norm_sq(const Eigen::VectorXd& f) const;

  /** Smallest nonzero eigenvalue of -Lap (closed form for this stencil). */
  double laplacian_gap() const;
  /** Poincare-Wirtinger constant 1/sqrt(gap). */
  double poincare_constant() const { return 1.0 / std::sqrt(laplacian_gap()); }

 private:
  FDGrid() = default;
  int dim_ = 1, m1_ = 0, m2_ = 1;
  double L1_ = 1, L2_ = 1, h1_ = 1, h2_ = 1;
};

}  // namespace crossdiff

#endif
