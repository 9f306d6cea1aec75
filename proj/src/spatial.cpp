#include "crossdiff/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "crossdiff/quadrature.hpp"

namespace crossdiff {

namespace {

constexpr double kPi = std::numbers::pi;

// normalized Neumann cosine on [0,L]: m = 0 constant, else sqrt(2/L) cos(m pi x / L)
double cos_mode(int m, double L, double x) {
  if (m == 0) return 1.0 / std::sqrt(L);
  return std::sqrt(2.0 / L) * std::cos(m * kPi * x / L);
}

double cos_mode_deriv(int m, double L, double x) {
  if (m == 0) return 0.0;
  double k = m * kPi / L;
  return -std::sqrt(2.0 / L) * k * std::sin(k * x);
}

}  // namespace

SpatialSpace SpatialSpace::interval(double L, int n) {
  if (L <= 0 || n < 1) throw std::invalid_argument("interval needs L > 0, n >= 1");
  SpatialSpace s;
  s.build(L, 1.0, n, 1);
  return s;
}

SpatialSpace SpatialSpace::rectangle(double L1, double L2, int n) {
  if (L1 <= 0 || L2 <= 0 || n < 1) throw std::invalid_argument("rectangle needs L > 0, n >= 1");
  SpatialSpace s;
  s.build(L1, L2, n, 2);
  return s;
}

void SpatialSpace::build(double L1, double L2, int n, int dim) {
  dim_ = dim;
  n_ = n;
  L1_ = L1;
  L2_ = L2;
  measure_ = dim == 1 ? L1 : L1 * L2;

  // mode list ordered by eigenvalue, lexicographic tie-break => nested spans
  modes_.clear();
  if (dim == 1) {
    for (int m = 0; m < n; ++m) modes_.push_back({m, 0});
  } else {
    std::vector<std::pair<int, int>> cand;
    for (int m1 = 0; m1 < n; ++m1)
      for (int m2 = 0; m2 < n; ++m2) cand.push_back({m1, m2});
    auto lam = [&](const std::pair<int, int>& m) {
      double k1 = m.first * kPi / L1, k2 = m.second * kPi / L2;
      return k1 * k1 + k2 * k2;
    };
    std::stable_sort(cand.begin(), cand.end(),
                     [&](const auto& a, const auto& b) {
                       double la = lam(a), lb = lam(b);
                       if (la != lb) return la < lb;
                       return a < b;
                     });
    cand.resize(n);
    modes_ = std::move(cand);
  }
  eigenvalues_.clear();
  for (auto [m1, m2] : modes_) {
    double k1 = m1 * kPi / L1, k2 = m2 * kPi / L2;
    eigenvalues_.push_back(k1 * k1 + k2 * k2);
  }

  int panels = std::max(1, (n + 3) / 4);
  std::vector<double> w1, w2;
  composite_gauss16(L1, panels, nodes1_, w1);
  if (dim == 2) composite_gauss16(L2, panels, nodes2_, w2);

  int q1 = int(nodes1_.size());
  int q2 = dim == 2 ? int(nodes2_.size()) : 1;
  int nq = q1 * q2;
  weights_.assign(nq, 0.0);
  wq_.resize(nq);
  for (int j2 = 0; j2 < q2; ++j2)
    for (int j1 = 0; j1 < q1; ++j1) {
      double w = w1[j1] * (dim == 2 ? w2[j2] : 1.0);
      weights_[j2 * q1 + j1] = w;
      wq_[j2 * q1 + j1] = w;
    }

  B_.resize(n, nq);
  Bx_.resize(n, nq);
  By_ = Eigen::MatrixXd::Zero(dim == 2 ? n : 0, dim == 2 ? nq : 0);
  for (int m = 0; m < n; ++m) {
    auto [m1, m2] = modes_[m];
    for (int j2 = 0; j2 < q2; ++j2)
      for (int j1 = 0; j1 < q1; ++j1) {
        int node = j2 * q1 + j1;
        double v1 = cos_mode(m1, L1, nodes1_[j1]);
        double g1 = cos_mode_deriv(m1, L1, nodes1_[j1]);
        if (dim == 1) {
          B_(m, node) = v1;
          Bx_(m, node) = g1;
        } else {
          double v2 = cos_mode(m2, L2, nodes2_[j2]);
          double g2 = cos_mode_deriv(m2, L2, nodes2_[j2]);
          B_(m, node) = v1 * v2;
          Bx_(m, node) = g1 * v2;
          By_(m, node) = v1 * g2;
        }
      }
  }
}

double SpatialSpace::node_coord(int node, int axis) const {
  int q1 = int(nodes1_.size());
  if (axis == 0) return nodes1_[node % q1];
  return nodes2_[node / q1];
}

Eigen::VectorXd SpatialSpace::project(const Eigen::VectorXd& nodal) const {
  return B_ * wq_.cwiseProduct(nodal);
}

Eigen::VectorXd SpatialSpace::evaluate(const Eigen::VectorXd& coeffs) const {
  return B_.transpose() * coeffs;
}

Eigen::MatrixXd SpatialSpace::evaluate_grad(const Eigen::VectorXd& coeffs) const {
  Eigen::MatrixXd g(num_nodes(), dim_);
  g.col(0) = Bx_.transpose() * coeffs;
  if (dim_ == 2) g.col(1) = By_.transpose() * coeffs;
  return g;
}

double SpatialSpace::evaluate_at(const Eigen::VectorXd& coeffs, double x, double y) const {
  double v = 0;
  for (int m = 0; m < n_; ++m) {
    auto [m1, m2] = modes_[m];
    double b = cos_mode(m1, L1_, x);
    if (dim_ == 2) b *= cos_mode(m2, L2_, y);
    v += coeffs[m] * b;
  }
  return v;
}

double SpatialSpace::inner_l2(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
  return wq_.cwiseProduct(f).dot(g);
}

std::pair<double, double> SpatialSpace::inner_products(const Eigen::VectorXd& cf,
                                                       const Eigen::VectorXd& cg) const {
  double l2 = 0, h1 = 0;
  for (int m = 0; m < n_; ++m) {
    double p = cf[m] * cg[m];
    l2 += p;
    h1 += p * (1 + eigenvalues_[m]);
  }
  return {l2, h1};
}

Eigen::VectorXd SpatialSpace::project_flux(const Eigen::MatrixXd& flux) const {
  Eigen::VectorXd out = Bx_ * wq_.cwiseProduct(flux.col(0));
  if (dim_ == 2) out += By_ * wq_.cwiseProduct(flux.col(1));
  return out;
}

FDGrid FDGrid::interval(double L, int m) {
  if (L <= 0 || m < 2) throw std::invalid_argument("grid needs L > 0, m >= 2");
  FDGrid g;
  g.dim_ = 1;
  g.m1_ = m;
  g.L1_ = L;
  g.h1_ = L / m;
  return g;
}

FDGrid FDGrid::rectangle(double L1, double L2, int m1, int m2) {
  if (L1 <= 0 || L2 <= 0 || m1 < 2 || m2 < 2)
    throw std::invalid_argument("grid needs L > 0, m >= 2");
  FDGrid g;
  g.dim_ = 2;
  g.m1_ = m1;
  g.m2_ = m2;
  g.L1_ = L1;
  g.L2_ = L2;
  g.h1_ = L1 / m1;
  g.h2_ = L2 / m2;
  return g;
}

double FDGrid::coord(int node, int axis) const {
  if (axis == 0) return (node % m1_ + 0.5) * h1_;
  return (node / m1_ + 0.5) * h2_;
}

Eigen::VectorXd FDGrid::laplacian(const Eigen::VectorXd& f) const {
  Eigen::VectorXd out(f.size());
  double ih1 = 1.0 / (h1_ * h1_), ih2 = 1.0 / (h2_ * h2_);
  if (dim_ == 1) {
    for (int i = 0; i < m1_; ++i) {
      double left = f[i > 0 ? i - 1 : 0];            // reflected ghost
      double right = f[i < m1_ - 1 ? i + 1 : m1_ - 1];
      out[i] = (left - 2 * f[i] + right) * ih1;
    }
    return out;
  }
  for (int j = 0; j < m2_; ++j)
    for (int i = 0; i < m1_; ++i) {
      int c = j * m1_ + i;
      double l = f[j * m1_ + (i > 0 ? i - 1 : 0)];
      double r = f[j * m1_ + (i < m1_ - 1 ? i + 1 : m1_ - 1)];
      double d = f[(j > 0 ? j - 1 : 0) * m1_ + i];
      double u = f[(j < m2_ - 1 ? j + 1 : m2_ - 1) * m1_ + i];
      out[c] = (l - 2 * f[c] + r) * ih1 + (d - 2 * f[c] + u) * ih2;
    }
  return out;
}

Eigen::VectorXd FDGrid::solve_elliptic(double coeff, const Eigen::VectorXd& b,
                                       const Eigen::VectorXd& rhs) const {
  if (!(coeff > 0)) throw std::invalid_argument("elliptic solve needs coeff > 0");
  int nn = num_nodes();
  if (b.size() != nn || rhs.size() != nn) throw std::invalid_argument("size mismatch");
  for (int i = 0; i < nn; ++i)
    if (!(b[i] >= 0)) throw std::invalid_argument("elliptic solve needs b >= 0");

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(size_t(nn) * (dim_ == 1 ? 3 : 5));
  double ih1 = 1.0 / (h1_ * h1_), ih2 = 1.0 / (h2_ * h2_);
  for (int j = 0; j < m2_; ++j)
    for (int i = 0; i < m1_; ++i) {
      int c = j * m1_ + i;
      double diag = coeff;
      auto neighbor = [&](int col, double ih) {
        if (col == c) return;  // reflected ghost cancels the coupling
        diag += b[c] * ih;
        trips.emplace_back(c, col, -b[c] * ih);
      };
      neighbor(j * m1_ + (i > 0 ? i - 1 : 0), ih1);
      neighbor(j * m1_ + (i < m1_ - 1 ? i + 1 : m1_ - 1), ih1);
      if (dim_ == 2) {
        neighbor((j > 0 ? j - 1 : 0) * m1_ + i, ih2);
        neighbor((j < m2_ - 1 ? j + 1 : m2_ - 1) * m1_ + i, ih2);
      }
      trips.emplace_back(c, c, diag);
    }

  Eigen::SparseMatrix<double> M(nn, nn);
  M.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success) throw std::runtime_error("elliptic factorization failed");
  Eigen::VectorXd phi = lu.solve(rhs);
  double res = (M * phi - rhs).norm();
  if (res > 1e-11 * (1 + rhs.norm())) throw std::runtime_error("elliptic solve residual too large");
  return phi;
}

double FDGrid::norm_l2(const Eigen::VectorXd& f) const {
  return std::sqrt(cell_volume() * f.squaredNorm());
}

double FDGrid::grad_norm_sq(const Eigen::VectorXd& f) const {
  return -cell_volume() * laplacian(f).dot(f);
}

double FDGrid::laplacian_gap() const {
  double g1 = 4.0 / (h1_ * h1_) * std::pow(std::sin(kPi / (2 * m1_)), 2);
  if (dim_ == 1) return g1;
  double g2 = 4.0 / (h2_ * h2_) * std::pow(std::sin(kPi / (2 * m2_)), 2);
  return std::min(g1, g2);
}

}  // namespace crossdiff
