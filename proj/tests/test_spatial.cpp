#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "crossdiff/spatial.hpp"

using namespace crossdiff;

namespace {
constexpr double pi = std::numbers::pi;

Eigen::MatrixXd dense_neg_laplacian(const FDGrid& grid) {
  int m = grid.num_nodes();
  Eigen::MatrixXd A(m, m);
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e[j] = 1.0;
    A.col(j) = -grid.laplacian(e);
  }
  return A;
}
}  // namespace

TEST_CASE("interval basis is orthonormal under the quadrature") {
  for (int n : {3, 8, 16, 33}) {
    auto sp = SpatialSpace::interval(2.0, n);
    CHECK(sp.dimension() == 1);
    CHECK(sp.n() == n);
    CHECK(sp.measure() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(sp.num_nodes() >= 4 * n);

    const auto& B = sp.basis();
    Eigen::MatrixXd gram = B * sp.weights().asDiagonal() * B.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("interval modes are normalized cosines with the right eigenvalues") {
  double L = 1.5;
  auto sp = SpatialSpace::interval(L, 6);
  CHECK(sp.eigenvalue(0) == 0.0);
  for (int m = 0; m < 6; ++m) {
    CHECK(sp.eigenvalue(m) == doctest::Approx(m * m * pi * pi / (L * L)).epsilon(1e-14));
    if (m > 0) CHECK(sp.eigenvalue(m) > sp.eigenvalue(m - 1));
    for (int q : {0, 17, sp.num_nodes() - 1}) {
      double x = sp.node_coord(q, 0);
      double ref = m == 0 ? 1.0 / std::sqrt(L) : std::sqrt(2.0 / L) * std::cos(m * pi * x / L);
      CHECK(sp.basis()(m, q) == doctest::Approx(ref).epsilon(1e-13));
      double gref = m == 0 ? 0.0
                           : -std::sqrt(2.0 / L) * (m * pi / L) * std::sin(m * pi * x / L);
      CHECK(sp.basis_grad(0)(m, q) == doctest::Approx(gref).epsilon(1e-12).scale(1 + std::abs(gref)));
    }
  }
  // quadrature nodes are strictly ascending cell coordinates inside (0, L)
  double prev = -1;
  for (int q = 0; q < sp.num_nodes(); ++q) {
    double x = sp.node_coord(q, 0);
    CHECK(x > prev);
    CHECK(x > 0);
    CHECK(x < L);
    prev = x;
  }
}

TEST_CASE("projection, evaluation, and inner products agree with quadrature oracles") {
  double L = 2.0;
  auto sp = SpatialSpace::interval(L, 10);
  int nq = sp.num_nodes();

  Eigen::VectorXd f(nq);
  for (int q = 0; q < nq; ++q) {
    double x = sp.node_coord(q, 0);
    f[q] = 2.0 + std::cos(pi * x / L) - 0.25 * std::cos(3 * pi * x / L);
  }

  SUBCASE("coefficients of a field already in the span") {
    Eigen::VectorXd c = sp.project(f);
    CHECK(c[0] == doctest::Approx(2.0 * std::sqrt(L)).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(std::sqrt(L / 2.0)).epsilon(1e-12));
    CHECK(c[3] == doctest::Approx(-0.25 * std::sqrt(L / 2.0)).epsilon(1e-12));
    for (int m : {2, 4, 5, 6, 7, 8, 9}) CHECK(std::abs(c[m]) < 1e-10);

    // round trip back to nodal values
    Eigen::VectorXd back = sp.evaluate(c);
    CHECK((back - f).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("inner products are diagonal in the mode basis") {
    Eigen::VectorXd c = sp.project(f);
    auto [l2, h1] = sp.inner_products(c, c);
    double l2_ref = 0, h1_ref = 0;
    for (int m = 0; m < sp.n(); ++m) {
      l2_ref += c[m] * c[m];
      h1_ref += c[m] * c[m] * (1 + sp.eigenvalue(m));
    }
    CHECK(l2 == doctest::Approx(l2_ref).epsilon(1e-14));
    CHECK(h1 == doctest::Approx(h1_ref).epsilon(1e-14));

    // and they match direct quadrature of f^2 + |f'|^2
    Eigen::MatrixXd gf = sp.evaluate_grad(c);
    double q_l2 = sp.inner_l2(f, f);
    double q_h1 = q_l2 + sp.inner_l2(gf.col(0), gf.col(0));
    CHECK(l2 == doctest::Approx(q_l2).epsilon(1e-10));
    CHECK(h1 == doctest::Approx(q_h1).epsilon(1e-10));
  }

  SUBCASE("point evaluation matches the nodal table") {
    Eigen::VectorXd c = sp.project(f);
    for (int q : {0, nq / 3, nq - 1})
      CHECK(sp.evaluate_at(c, sp.node_coord(q, 0)) == doctest::Approx(f[q]).epsilon(1e-11));
    CHECK(sp.evaluate_at(c, 0.0) ==
          doctest::Approx(2.0 + 1.0 - 0.25).epsilon(1e-11));  // cos(0) endpoint
  }

  SUBCASE("flux projection reproduces the stiffness action") {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(sp.n());
    c[1] = 0.7;
    c[4] = -1.3;
    Eigen::MatrixXd flux = sp.evaluate_grad(c);
    Eigen::VectorXd load = sp.project_flux(flux);
    for (int m = 0; m < sp.n(); ++m)
      CHECK(load[m] ==
            doctest::Approx(sp.eigenvalue(m) * c[m]).epsilon(1e-9).scale(1 + sp.eigenvalue(m)));
  }
}

TEST_CASE("rectangle space") {
  auto sp = SpatialSpace::rectangle(1.0, 2.0, 12);
  CHECK(sp.dimension() == 2);
  CHECK(sp.measure() == doctest::Approx(2.0).epsilon(1e-15));

  SUBCASE("eigenvalues are sorted and the constant mode leads") {
    CHECK(sp.eigenvalue(0) == 0.0);
    for (int m = 1; m < sp.n(); ++m) CHECK(sp.eigenvalue(m) >= sp.eigenvalue(m - 1));
    // lowest nonzero eigenvalue comes from the long axis
    CHECK(sp.eigenvalue(1) == doctest::Approx(pi * pi / 4.0).epsilon(1e-13));
  }

  SUBCASE("orthonormality and constants integrate to the measure") {
    const auto& B = sp.basis();
    Eigen::MatrixXd gram = B * sp.weights().asDiagonal() * B.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(sp.n(), sp.n())).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(sp.integrate(Eigen::VectorXd::Ones(sp.num_nodes())) ==
          doctest::Approx(2.0).epsilon(1e-13));
  }

  SUBCASE("gradients carry both axes") {
    // find a mode varying in y: eigenvalue pi^2/4 with zero x-gradient
    Eigen::VectorXd c = Eigen::VectorXd::Zero(sp.n());
    c[1] = 1.0;
    Eigen::MatrixXd g = sp.evaluate_grad(c);
    CHECK(g.cols() == 2);
    double gx = g.col(0).cwiseAbs().maxCoeff();
    double gy = g.col(1).cwiseAbs().maxCoeff();
    CHECK(gx < 1e-12);
    CHECK(gy > 0.1);
    Eigen::VectorXd load = sp.project_flux(g);
    CHECK(load[1] == doctest::Approx(sp.eigenvalue(1)).epsilon(1e-10));
  }
}

TEST_CASE("finite-difference grid Laplacian") {
  double L = 1.25;
  int m = 24;
  auto grid = FDGrid::interval(L, m);
  double h = L / m;

  SUBCASE("cell centers and measure") {
    CHECK(grid.num_nodes() == m);
    CHECK(grid.cell_volume() == doctest::Approx(h).epsilon(1e-15));
    CHECK(grid.measure() == doctest::Approx(L).epsilon(1e-15));
    CHECK(grid.coord(0, 0) == doctest::Approx(0.5 * h).epsilon(1e-14));
    CHECK(grid.coord(m - 1, 0) == doctest::Approx(L - 0.5 * h).epsilon(1e-14));
  }

  SUBCASE("constants are in the kernel") {
    Eigen::VectorXd ones = Eigen::VectorXd::Constant(m, 3.7);
    CHECK(grid.laplacian(ones).cwiseAbs().maxCoeff() == 0.0);
    CHECK(grid.grad_norm_sq(ones) == doctest::Approx(0.0));
  }

  SUBCASE("discrete cosine eigenvectors") {
    for (int k : {1, 2, 5}) {
      Eigen::VectorXd v(m);
      for (int i = 0; i < m; ++i) v[i] = std::cos(k * pi * grid.coord(i, 0) / L);
      double lam = 4.0 / (h * h) * std::pow(std::sin(k * pi * h / (2 * L)), 2);
      Eigen::VectorXd lap = grid.laplacian(v);
      CHECK((lap + lam * v).cwiseAbs().maxCoeff() < 1e-10 * lam);
      CHECK(grid.grad_norm_sq(v) ==
            doctest::Approx(lam * grid.norm_l2(v) * grid.norm_l2(v)).epsilon(1e-12));
    }
  }

  SUBCASE("spectral gap against a dense eigensolve") {
    Eigen::MatrixXd A = dense_neg_laplacian(grid);
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    CHECK(std::abs(es.eigenvalues()[0]) < 1e-10);
    CHECK(es.eigenvalues()[1] == doctest::Approx(grid.laplacian_gap()).epsilon(1e-12));
    CHECK(grid.poincare_constant() ==
          doctest::Approx(1.0 / std::sqrt(grid.laplacian_gap())).epsilon(1e-15));
  }

  SUBCASE("Poincare inequality for the discrete seminorm") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd f(m);
      for (int i = 0; i < m; ++i) f[i] = N(rng);
      double mean = grid.integrate(f) / grid.measure();
      Eigen::VectorXd g = f.array() - mean;
      double lhs = grid.laplacian_gap() * grid.norm_l2(g) * grid.norm_l2(g);
      CHECK(grid.grad_norm_sq(f) >= lhs * (1 - 1e-12));
    }
  }
}

TEST_CASE("elliptic solves") {
  auto grid = FDGrid::interval(1.0, 48);
  int m = grid.num_nodes();
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> U(0.0, 1.0);

  SUBCASE("round trip through the operator") {
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd phi(m), b(m);
      for (int i = 0; i < m; ++i) {
        phi[i] = 2 * U(rng) - 1;
        b[i] = 1.0 + 10.0 * U(rng);
      }
      double coeff = 0.5 + 5 * U(rng);
      Eigen::VectorXd rhs = coeff * phi - b.cwiseProduct(grid.laplacian(phi));
      Eigen::VectorXd back = grid.solve_elliptic(coeff, b, rhs);
      CHECK((back - phi).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  SUBCASE("M-matrix positivity: nonnegative data give nonnegative solutions") {
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd b(m), rhs(m);
      for (int i = 0; i < m; ++i) {
        b[i] = 50.0 * U(rng);
        rhs[i] = U(rng) < 0.3 ? 0.0 : U(rng);
      }
      Eigen::VectorXd phi = grid.solve_elliptic(2.0, b, rhs);
      CHECK(phi.minCoeff() >= -1e-13);
    }
  }

  SUBCASE("b = 0 reduces to scaling") {
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) rhs[i] = U(rng);
    Eigen::VectorXd phi = grid.solve_elliptic(4.0, Eigen::VectorXd::Zero(m), rhs);
    CHECK((4.0 * phi - rhs).cwiseAbs().maxCoeff() < 1e-13);
  }

  SUBCASE("input validation") {
    Eigen::VectorXd ok = Eigen::VectorXd::Ones(m);
    CHECK_THROWS_AS(grid.solve_elliptic(0.0, ok, ok), std::invalid_argument);
    Eigen::VectorXd bad = ok;
    bad[3] = -1.0;
    CHECK_THROWS_AS(grid.solve_elliptic(1.0, bad, ok), std::invalid_argument);
    CHECK_THROWS_AS(grid.solve_elliptic(1.0, Eigen::VectorXd::Ones(m - 1), ok),
                    std::invalid_argument);
  }
}

TEST_CASE("two-dimensional grid") {
  auto grid = FDGrid::rectangle(1.0, 0.75, 6, 5);
  int m = grid.num_nodes();
  CHECK(m == 30);
  CHECK(grid.measure() == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(grid.cell_volume() == doctest::Approx((1.0 / 6) * (0.75 / 5)).epsilon(1e-15));

  SUBCASE("kernel and symmetry") {
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
    CHECK(grid.laplacian(ones).cwiseAbs().maxCoeff() == 0.0);
    Eigen::MatrixXd A = dense_neg_laplacian(grid);
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() < 1e-11);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    CHECK(std::abs(es.eigenvalues()[0]) < 1e-9);
    CHECK(es.eigenvalues()[1] == doctest::Approx(grid.laplacian_gap()).epsilon(1e-11));
  }

  SUBCASE("elliptic round trip") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Eigen::VectorXd phi(m), b(m);
    for (int i = 0; i < m; ++i) {
      phi[i] = U(rng);
      b[i] = 1.0 + U(rng);
    }
    Eigen::VectorXd rhs = 3.0 * phi - b.cwiseProduct(grid.laplacian(phi));
    CHECK((grid.solve_elliptic(3.0, b, rhs) - phi).cwiseAbs().maxCoeff() < 1e-9);
  }
}
