#include "crossdiff/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace crossdiff {

namespace {

// Kronrod-15 abscissae on [0,1] side (symmetric) and weights; Gauss-7 weights
// live on the odd Kronrod nodes.
const double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
const double kWk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
const double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult { double integral, error; };

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fc = f(c);
  double result_k = kWk[7] * fc;
  double result_g = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    double x = h * kXgk[j];
    double v = f(c - x) + f(c + x);
    result_k += kWk[j] * v;
    if (j % 2 == 1) result_g += kWg[j / 2] * v;
  }
  result_k *= h;
  result_g *= h;
  return {result_k, std::abs(result_k - result_g)};
}

double adaptive_rec(const std::function<double(double)>& f, double a, double b, double tol,
                    const PanelResult& whole, int depth) {
  if (whole.error <= tol || depth > 52) return whole.integral;
  double c = 0.5 * (a + b);
  PanelResult left = gk15(f, a, c), right = gk15(f, c, b);
  return adaptive_rec(f, a, c, tol / 2, left, depth + 1) +
         adaptive_rec(f, c, b, tol / 2, right, depth + 1);
}

// 16-point Gauss-Legendre on [-1,1], positive abscissae with weights
const double kXgl16[8] = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
const double kWgl16[8] = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

}  // namespace

double adaptive_gk15(const std::function<double(double)>& f, double a, double b, double rel_tol,
                     double abs_tol) {
  if (a == b) return 0;
  double sign = 1;
  if (a > b) {
    std::swap(a, b);
    sign = -1;
  }
  PanelResult whole = gk15(f, a, b);
  double tol = std::max(abs_tol, rel_tol * std::abs(whole.integral));
  // two refinement sweeps so the tolerance tracks the improving integral
  double value = adaptive_rec(f, a, b, tol, whole, 0);
  tol = std::max(abs_tol, rel_tol * std::abs(value));
  value = adaptive_rec(f, a, b, tol, whole, 0);
  if (!std::isfinite(value)) throw std::runtime_error("quadrature diverged");
  return sign * value;
}

void composite_gauss16(double L, int panels, std::vector<double>& nodes,
                       std::vector<double>& weights) {
  if (L <= 0 || panels < 1) throw std::invalid_argument("bad quadrature request");
  nodes.clear();
  weights.clear();
  nodes.reserve(16 * panels);
  weights.reserve(16 * panels);
  double h = L / panels;
  for (int p = 0; p < panels; ++p) {
    double c = (p + 0.5) * h, half = 0.5 * h;
    // ascending order inside each panel keeps node layout deterministic
    for (int j = 7; j >= 0; --j) {
      nodes.push_back(c - half * kXgl16[j]);
      weights.push_back(half * kWgl16[j]);
    }
    for (int j = 0; j < 8; ++j) {
      nodes.push_back(c + half * kXgl16[j]);
      weights.push_back(half * kWgl16[j]);
    }
  }
}

}  // namespace crossdiff
