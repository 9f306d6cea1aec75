#include "crossdiff/coefficients.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace crossdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_nonnegative_arg(double x) {
  if (!(x >= 0))
    throw std::invalid_argument("coefficient argument must be >= 0, got " + std::to_string(x));
}

// amplitude * x^exponent with the x = 0 limits handled explicitly
double power_value(double A, double p, double x) {
  require_nonnegative_arg(x);
  if (A == 0) return 0;
  if (x == 0) return p == 0 ? A : (p > 0 ? 0.0 : kInf);
  return A * std::pow(x, p);
}

double power_deriv(double A, double p, double x) {
  require_nonnegative_arg(x);
  if (A == 0 || p == 0) return 0;
  if (x == 0) {
    if (p > 1) return 0;
    if (p == 1) return A;
    return A * p > 0 ? kInf : -kInf;  // one-sided, unbounded slope at 0
  }
  return A * p * std::pow(x, p - 1);
}

double power_second(double A, double p, double x) {
  require_nonnegative_arg(x);
  if (A == 0 || p == 0 || p == 1) return 0;
  if (x == 0) {
    if (p > 2) return 0;
    if (p == 2) return 2 * A;
    return A * p * (p - 1) > 0 ? kInf : -kInf;
  }
  return A * p * (p - 1) * std::pow(x, p - 2);
}

ScalarFn power_fn(double A, double p) {
  ScalarFn f;
  f.value = [A, p](double x) { return power_value(A, p, x); };
  f.deriv = [A, p](double x) { return power_deriv(A, p, x); };
  f.second_deriv = [A, p](double x) { return power_second(A, p, x); };
  return f;
}

// D + A x^(q-1): the self-diffusion rate of a_ii(x) = D x + A x^q
ScalarFn self_rate_fn(double D, double A, double q) {
  ScalarFn f;
  f.value = [D, A, q](double x) { return D + power_value(A, q - 1, x); };
  f.deriv = [A, q](double x) { return power_deriv(A, q - 1, x); };
  f.second_deriv = [A, q](double x) { return power_second(A, q - 1, x); };
  return f;
}

void require_valid_fields(const PowerLawCoefficients& p) {
  auto bad = [](double v) { return !std::isfinite(v); };
  for (double v : {p.r1, p.r2, p.D1, p.D2, p.A11, p.A12, p.A21, p.A22, p.alpha11, p.alpha12,
                   p.alpha21, p.alpha22, p.S11, p.S12, p.S21, p.S22, p.sigma11, p.sigma12,
                   p.sigma21, p.sigma22})
    if (bad(v)) throw std::invalid_argument("non-finite power-law coefficient");
  if (p.r1 < 0 || p.r2 < 0) throw std::invalid_argument("growth rates must be >= 0");
  if (p.S11 < 0 || p.S12 < 0 || p.S21 < 0 || p.S22 < 0)
    throw std::invalid_argument("competition amplitudes must be >= 0");
  if (p.A11 < 0 || p.A12 < 0 || p.A21 < 0 || p.A22 < 0)
    throw std::invalid_argument("diffusion amplitudes must be >= 0");
  if (p.D1 <= 0 || p.D2 <= 0) throw std::invalid_argument("D1, D2 must be > 0");
}

}  // namespace

double ScalarFn::d2(double x) const {
  if (second_deriv) return second_deriv(x);
  double h = 1e-6 * (1.0 + std::abs(x));
  if (x - h < 0) h = x / 2;
  if (h == 0) return deriv(1e-12) / 1e-12;  // crude one-sided limit
  return (deriv(x + h) - deriv(x - h)) / (2 * h);
}

CoefficientSet CoefficientSet::power_law(const PowerLawCoefficients& p) {
  require_valid_fields(p);
  CoefficientSet c;
  c.r1_ = p.r1;
  c.r2_ = p.r2;
  c.a12_ = power_fn(p.A12, p.alpha12);
  c.a21_ = power_fn(p.A21, p.alpha21);
  c.d11_ = self_rate_fn(p.D1, p.A11, p.alpha11);
  c.d22_ = self_rate_fn(p.D2, p.A22, p.alpha22);
  c.s11_ = power_fn(p.S11, p.sigma11);
  c.s12_ = power_fn(p.S12, p.sigma12);
  c.s21_ = power_fn(p.S21, p.sigma21);
  c.s22_ = power_fn(p.S22, p.sigma22);
  c.power_ = p;
  return c;
}

CoefficientSet CoefficientSet::general(General g) {
  if (g.r1 < 0 || g.r2 < 0) throw std::invalid_argument("growth rates must be >= 0");
  for (const ScalarFn* f : {&g.a12, &g.a21, &g.d11, &g.d22, &g.s11, &g.s12, &g.s21, &g.s22})
    if (!f->value || !f->deriv) throw std::invalid_argument("general coefficient missing evaluator");
  CoefficientSet c;
  c.r1_ = g.r1;
  c.r2_ = g.r2;
  c.a12_ = std::move(g.a12);
  c.a21_ = std::move(g.a21);
  c.d11_ = std::move(g.d11);
  c.d22_ = std::move(g.d22);
  c.s11_ = std::move(g.s11);
  c.s12_ = std::move(g.s12);
  c.s21_ = std::move(g.s21);
  c.s22_ = std::move(g.s22);
  return c;
}

const ScalarFn& CoefficientSet::competition(int i, int j) const {
  if (i == 0) return j == 0 ? s11_ : s12_;
  return j == 0 ? s21_ : s22_;
}

double eval_coefficient(const CoefficientSet& c, Coefficient which, double x, bool derivative) {
  require_nonnegative_arg(x);
  switch (which) {
    case Coefficient::a11: return derivative ? c.a11_deriv(x) : c.a11(x);
    case Coefficient::a22: return derivative ? c.a22_deriv(x) : c.a22(x);
    case Coefficient::a12: return derivative ? c.a12().d(x) : c.a12()(x);
    case Coefficient::a21: return derivative ? c.a21().d(x) : c.a21()(x);
    case Coefficient::d11: return derivative ? c.d11().d(x) : c.d11()(x);
    case Coefficient::d22: return derivative ? c.d22().d(x) : c.d22()(x);
    case Coefficient::s11: return derivative ? c.s11().d(x) : c.s11()(x);
    case Coefficient::s12: return derivative ? c.s12().d(x) : c.s12()(x);
    case Coefficient::s21: return derivative ? c.s21().d(x) : c.s21()(x);
    case Coefficient::s22: return derivative ? c.s22().d(x) : c.s22()(x);
  }
  throw std::invalid_argument("unknown coefficient id");
}

bool AssumptionReport::all_pass() const {
  for (const auto& cl : clauses)
    if (!cl.pass) return false;
  return true;
}

const AssumptionClause* AssumptionReport::find(const std::string& name) const {
  for (const auto& cl : clauses)
    if (cl.name == name) return &cl;
  return nullptr;
}

std::string AssumptionReport::summary() const {
  std::ostringstream os;
  for (const auto& cl : clauses) {
    os << (cl.pass ? "pass" : "FAIL") << "  " << cl.name;
    if (cl.heuristic) os << "  [sampled]";
    if (!cl.detail.empty()) os << "  (" << cl.detail << ")";
    os << '\n';
  }
  return os.str();
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void check_power_law(const PowerLawCoefficients& p, AssumptionReport& rep) {
  auto add = [&rep](std::string name, bool pass, std::string detail) {
    rep.clauses.push_back({std::move(name), pass, false, std::move(detail)});
  };

  struct SelfClause { const char* name; double sigma, alpha; };
  for (auto [name, sigma, alpha] : {SelfClause{"sigma11 < sup(1, alpha11)", p.sigma11, p.alpha11},
                                    SelfClause{"sigma22 < sup(1, alpha22)", p.sigma22, p.alpha22}}) {
    double cap = std::max(1.0, alpha);
    add(name, sigma >= 0 && sigma < cap, "sigma=" + fmt(sigma) + " cap=" + fmt(cap));
  }

  struct CrossClause { const char* name; double sigma, alpha_jj, alpha_ij; };
  for (auto [name, sigma, ajj, aij] :
       {CrossClause{"sigma12 < sup((alpha22+1)/2, 1+alpha12/2)", p.sigma12, p.alpha22, p.alpha12},
        CrossClause{"sigma21 < sup((alpha11+1)/2, 1+alpha21/2)", p.sigma21, p.alpha11, p.alpha21}}) {
    double cap = std::max((ajj + 1) / 2, 1 + aij / 2);
    add(name, sigma >= 0 && sigma < cap, "sigma=" + fmt(sigma) + " cap=" + fmt(cap));
  }

  struct ExpClause { const char* name; double alpha; };
  for (auto [name, alpha] : {ExpClause{"0 < alpha12 < 1", p.alpha12},
                             ExpClause{"0 < alpha21 < 1", p.alpha21}}) {
    bool ok = alpha > 0 && alpha < 1;
    std::string detail = "alpha=" + fmt(alpha);
    if (alpha == 1) detail += ", linear cross-diffusion (SKT) limiting case, excluded";
    add(name, ok, detail);
  }

  struct FloorClause { const char* name; double A; };
  for (auto [name, A] : {FloorClause{"cross derivative floor: A12 > 0", p.A12},
                         FloorClause{"cross derivative floor: A21 > 0", p.A21}})
    add(name, A > 0, "x^(1-alpha) a'(x) = A*alpha, needs A > 0");

  // self-diffusion rate positive at 0 and nondecreasing
  struct RateClause { const char* name; double D, A, q; };
  for (auto [name, D, A, q] : {RateClause{"d11(0) > 0 and d11 nondecreasing", p.D1, p.A11, p.alpha11},
                               RateClause{"d22(0) > 0 and d22 nondecreasing", p.D2, p.A22, p.alpha22}}) {
    double at0 = q > 1 ? D : (q == 1 ? D + A : (A > 0 ? kInf : D));
    bool nondecreasing = A == 0 || q >= 1;
    add(name, at0 > 0 && nondecreasing,
        "d(0)=" + fmt(at0) + (nondecreasing ? "" : ", decreasing rate (alpha_ii < 1)"));
  }
}

// sampled trend checks for general coefficient families
void check_general(const CoefficientSet& c, AssumptionReport& rep) {
  auto add = [&rep](std::string name, bool pass, std::string detail) {
    rep.clauses.push_back({std::move(name), pass, true, std::move(detail)});
  };
  auto gridpt = [](int k, int count, double lo, double hi) {
    return lo * std::pow(hi / lo, double(k) / (count - 1));
  };

  struct Named { const char* tag; const ScalarFn* f; };
  for (auto [tag, f] : {Named{"a12", &c.a12()}, Named{"a21", &c.a21()}}) {
    bool vanish = (*f)(0.0) == 0;
    bool nondec = true, concave = true, floor_ok = true;
    double prev = (*f)(0.0);
    for (int k = 0; k < 200; ++k) {
      double x = gridpt(k, 200, 1e-6, 1e6);
      double v = (*f)(x);
      if (v < prev - 1e-12 * (1 + std::abs(prev))) nondec = false;
      prev = v;
      if (f->d2(x) > 1e-9 * (1 + std::abs(v) / (x * x))) concave = false;
      if (f->d(x) <= 0) floor_ok = false;
    }
    add(std::string(tag) + " vanishes at 0", vanish, "");
    add(std::string(tag) + " nondecreasing", nondec, "");
    add(std::string(tag) + " concave", concave, "");
    add(std::string(tag) + " derivative positive", floor_ok, "");
  }

  for (auto [tag, f] : {Named{"d11", &c.d11()}, Named{"d22", &c.d22()}}) {
    bool pos0 = (*f)(0.0) > 0;
    bool nondec = true;
    double prev = (*f)(0.0);
    for (int k = 0; k < 200; ++k) {
      double x = gridpt(k, 200, 1e-6, 1e6);
      double v = (*f)(x);
      if (v < prev - 1e-12 * (1 + std::abs(prev))) nondec = false;
      prev = v;
    }
    add(std::string(tag) + "(0) > 0", pos0, "");
    add(std::string(tag) + " nondecreasing", nondec, "");
  }

  // growth/competition limits: s_ii(x)/(x d_ii(x)) and
  // s_ij(x)/(x sqrt(d_jj(x) + a_ij(x))) should trend to 0 at large x
  struct Lim { const char* name; const ScalarFn* s; std::function<double(double)> denom; };
  std::vector<Lim> lims;
  lims.push_back({"s11 dominated by self-diffusion", &c.s11(),
                  [&c](double x) { return x * c.d11()(x); }});
  lims.push_back({"s22 dominated by self-diffusion", &c.s22(),
                  [&c](double x) { return x * c.d22()(x); }});
  lims.push_back({"s12 dominated by cross/self mix", &c.s12(),
                  [&c](double x) { return x * std::sqrt(c.d22()(x) + c.a12()(x)); }});
  lims.push_back({"s21 dominated by cross/self mix", &c.s21(),
                  [&c](double x) { return x * std::sqrt(c.d11()(x) + c.a21()(x)); }});
  for (auto& lim : lims) {
    double at4 = (*lim.s)(1e4) / lim.denom(1e4);
    double at8 = (*lim.s)(1e8) / lim.denom(1e8);
    bool ok = at8 <= at4 * 0.9 + 1e-30 || at8 < 1e-12;
    add(lim.name, ok, "ratio(1e4)=" + fmt(at4) + " ratio(1e8)=" + fmt(at8));
  }
}

}  // namespace

AssumptionReport check_assumptions(const CoefficientSet& c) {
  AssumptionReport rep;
  if (c.power_law_data())
    check_power_law(*c.power_law_data(), rep);
  else
    check_general(c, rep);
  return rep;
}

GammaEps::GammaEps(double eps) : eps_(eps) {
  if (!(eps >= 0)) throw std::invalid_argument("gamma_eps needs eps >= 0");
}

double GammaEps::operator()(double x) const {
  require_nonnegative_arg(x);
  if (eps_ == 0 || x <= 1) return x;
  return 1 + (-std::expm1(-eps_ * (x - 1))) / eps_;
}

double GammaEps::deriv(double x) const {
  require_nonnegative_arg(x);
  if (eps_ == 0 || x <= 1) return 1;
  return std::exp(-eps_ * (x - 1));
}

GammaEps make_gamma_eps(double eps) { return GammaEps(eps); }

namespace {

ScalarFn shifted_cross(const ScalarFn& a, double eps) {
  ScalarFn f;
  f.value = [a, eps](double x) { return a(x) + eps * x; };
  f.deriv = [a, eps](double x) { return a.d(x) + eps; };
  if (a.second_deriv) f.second_deriv = a.second_deriv;
  return f;
}

ScalarFn saturated_rate(const ScalarFn& d, GammaEps g) {
  ScalarFn f;
  f.value = [d, g](double x) { return g(d(x)); };
  f.deriv = [d, g](double x) { return g.deriv(d(x)) * d.d(x); };
  return f;
}

ScalarFn self_from_rate(const ScalarFn& rate) {
  ScalarFn f;
  f.value = [rate](double x) { return x * rate(x); };
  f.deriv = [rate](double x) { return rate(x) + x * rate.d(x); };
  return f;
}

}  // namespace

RegularizedCoefficients::RegularizedCoefficients(CoefficientSet base, double eps)
    : base_(std::move(base)), eps_(eps), gamma_(eps) {
  if (!(eps >= 0)) throw std::invalid_argument("regularization needs eps >= 0");
  a12e_ = shifted_cross(base_.a12(), eps_);
  a21e_ = shifted_cross(base_.a21(), eps_);
  d11e_ = saturated_rate(base_.d11(), gamma_);
  d22e_ = saturated_rate(base_.d22(), gamma_);
  a11e_ = self_from_rate(d11e_);
  a22e_ = self_from_rate(d22e_);
}

double RegularizedCoefficients::reaction_plus(int i, double u1, double u2) const {
  return base_.growth_rate(i) * (i == 0 ? u1 : u2);
}

double RegularizedCoefficients::reaction_minus(int i, double u1, double u2) const {
  double s = base_.competition(i, 0)(u1) + base_.competition(i, 1)(u2);
  return (i == 0 ? u1 : u2) * gamma_(s);
}

double RegularizedCoefficients::reaction(int i, double u1, double u2) const {
  return reaction_plus(i, u1, u2) - reaction_minus(i, u1, u2);
}

double RegularizedCoefficients::reaction_deriv(int i, int j, double u1, double u2) const {
  double ui = i == 0 ? u1 : u2;
  double uj = j == 0 ? u1 : u2;
  double s = base_.competition(i, 0)(u1) + base_.competition(i, 1)(u2);
  double gs = gamma_(s), dgs = gamma_.deriv(s);
  double dsj = base_.competition(i, j).d(uj);
  double out = -ui * dgs * dsj;
  if (i == j) out += base_.growth_rate(i) - gs;
  return out;
}

RegularizedCoefficients regularize(const CoefficientSet& c, double eps) {
  return RegularizedCoefficients(c, eps);
}

}  // namespace crossdiff
