#include "crossdiff/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <variant>
#include <vector>

namespace crossdiff {

namespace {

struct Field {
  const char* key;
  std::variant<double*, int*, std::string*, bool*> ref;
};

std::vector<Field> field_table(RunConfig& c) {
  PowerLawCoefficients& m = c.model;
  return {
      {"r1", &m.r1},           {"r2", &m.r2},
      {"D1", &m.D1},           {"D2", &m.D2},
      {"A11", &m.A11},         {"A12", &m.A12},
      {"A21", &m.A21},         {"A22", &m.A22},
      {"alpha11", &m.alpha11}, {"alpha12", &m.alpha12},
      {"alpha21", &m.alpha21}, {"alpha22", &m.alpha22},
      {"S11", &m.S11},         {"S12", &m.S12},
      {"S21", &m.S21},         {"S22", &m.S22},
      {"sigma11", &m.sigma11}, {"sigma12", &m.sigma12},
      {"sigma21", &m.sigma21}, {"sigma22", &m.sigma22},
      {"dim", &c.dim},         {"L1", &c.L1},
      {"L2", &c.L2},           {"n", &c.n},
      {"fd_points", &c.fd_points},
      {"T", &c.T},             {"N", &c.N},
      {"eps", &c.eps},         {"sigma_steps", &c.sigma_steps},
      {"newton_tol", &c.newton_tol},
      {"newton_max_iter", &c.newton_max_iter},
      {"sigma_bisect_depth", &c.sigma_bisect_depth},
      {"u0_floor", &c.u0_floor},
      {"u0_kind", &c.u0_kind}, {"u0_c1", &c.u0_c1},
      {"u0_c2", &c.u0_c2},     {"u0_amp1", &c.u0_amp1},
      {"u0_amp2", &c.u0_amp2}, {"u0_file", &c.u0_file},
      {"levels", &c.levels},   {"dual_r", &c.dual_r},
      {"check_invariants", &c.check_invariants},
  };
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
  if (!std::isfinite(x)) throw ConfigError("non-finite value for " + key);
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  size_t pos = 0;
  int x;
  try {
    x = std::stoi(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for " + key + ": '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("bad integer value for " + key + ": '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "0" || v == "false") return false;
  if (v == "1" || v == "true") return true;
  throw ConfigError("bad boolean value for " + key + ": '" + v + "'");
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid config: ") + what);
  };
  require(c.dim == 1 || c.dim == 2, "dim must be 1 or 2");
  require(c.L1 > 0 && c.L2 > 0, "domain lengths must be positive");
  require(c.n >= 3, "n must be at least 3");
  require(c.fd_points >= 2, "fd_points must be at least 2");
  require(c.T > 0, "T must be positive");
  require(c.N >= 1, "N must be at least 1");
  require(c.eps > 0, "eps must be positive");
  require(c.sigma_steps >= 1, "sigma_steps must be at least 1");
  require(c.newton_tol > 0, "newton_tol must be positive");
  require(c.newton_max_iter >= 1, "newton_max_iter must be at least 1");
  require(c.sigma_bisect_depth >= 0, "sigma_bisect_depth must be nonnegative");
  require(c.u0_floor > 0, "u0_floor must be positive");
  require(c.u0_kind == "constant" || c.u0_kind == "cosine-bump" || c.u0_kind == "file",
          "u0_kind must be constant, cosine-bump or file");
  require(c.u0_kind != "file" || !c.u0_file.empty(), "u0_kind=file needs u0_file");
  require(c.u0_c1 >= 0 && c.u0_c2 >= 0, "u0 constants must be nonnegative");
  require(c.levels >= 1, "levels must be at least 1");
  require(c.dual_r > 0, "dual_r must be positive");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig c;
  auto fields = field_table(c);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key == "L") {  // shorthand for a square domain
      c.L1 = c.L2 = parse_double(key, val);
      continue;
    }
    const Field* f = nullptr;
    for (const auto& g : fields)
      if (key == g.key) {
        f = &g;
        break;
      }
    if (!f) throw ConfigError("unknown config key: " + key);
    if (auto* d = std::get_if<double*>(&f->ref))
      **d = parse_double(key, val);
    else if (auto* i = std::get_if<int*>(&f->ref))
      **i = parse_int(key, val);
    else if (auto* s = std::get_if<std::string*>(&f->ref))
      **s = val;
    else
      *std::get<bool*>(f->ref) = parse_bool(key, val);
  }
  validate(c);
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string echo_config(const RunConfig& c) {
  RunConfig copy = c;
  auto fields = field_table(copy);
  std::string out;
  char buf[64];
  for (const auto& f : fields) {
    out += f.key;
    out += '=';
    if (auto* d = std::get_if<double*>(&f.ref)) {
      std::snprintf(buf, sizeof buf, "%.17g", **d);
      out += buf;
    } else if (auto* i = std::get_if<int*>(&f.ref)) {
      std::snprintf(buf, sizeof buf, "%d", **i);
      out += buf;
    } else if (auto* s = std::get_if<std::string*>(&f.ref)) {
      out += **s;
    } else {
      out += *std::get<bool*>(f.ref) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

CoefficientSet make_coefficients(const RunConfig& c) {
  return CoefficientSet::power_law(c.model);
}

SpatialSpace make_space(const RunConfig& c) {
  return c.dim == 1 ? SpatialSpace::interval(c.L1, c.n)
                    : SpatialSpace::rectangle(c.L1, c.L2, c.n);
}

FDGrid make_grid(const RunConfig& c) {
  return c.dim == 1 ? FDGrid::interval(c.L1, c.fd_points)
                    : FDGrid::rectangle(c.L1, c.L2, c.fd_points, c.fd_points);
}

SolveConfig make_solve_config(const RunConfig& c) {
  SolveConfig s;
  s.T = c.T;
  s.N = c.N;
  s.eps = c.eps;
  s.sigma_schedule.clear();
  for (int i = 0; i <= c.sigma_steps; ++i)
    s.sigma_schedule.push_back(i == c.sigma_steps ? 1.0 : double(i) / c.sigma_steps);
  s.newton.tol = c.newton_tol;
  s.newton.max_iter = c.newton_max_iter;
  s.sigma_bisect_depth = c.sigma_bisect_depth;
  s.u0_floor = c.u0_floor;
  return s;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> make_initial_data(const RunConfig& c,
                                                              const SpatialSpace& space) {
  const int nq = space.num_nodes();
  Eigen::VectorXd u1(nq), u2(nq);
  if (c.u0_kind == "constant") {
    u1.setConstant(c.u0_c1);
    u2.setConstant(c.u0_c2);
  } else if (c.u0_kind == "cosine-bump") {
    const double pi = 3.14159265358979323846;
    for (int q = 0; q < nq; ++q) {
      double f = std::cos(pi * space.node_coord(q, 0) / c.L1);
      if (space.dimension() == 2) f *= std::cos(pi * space.node_coord(q, 1) / c.L2);
      u1[q] = c.u0_c1 + c.u0_amp1 * f;
      u2[q] = c.u0_c2 + c.u0_amp2 * f;
    }
  } else {
    std::ifstream in(c.u0_file);
    if (!in) throw ConfigError("cannot open u0_file: " + c.u0_file);
    std::string line;
    int q = 0;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      if (q >= nq) throw ConfigError("u0_file has more rows than quadrature nodes");
      size_t comma = line.find(',');
      if (comma == std::string::npos) throw ConfigError("u0_file rows must be v1,v2");
      u1[q] = parse_double("u0_file v1", trim(line.substr(0, comma)));
      u2[q] = parse_double("u0_file v2", trim(line.substr(comma + 1)));
      if (u1[q] < 0 || u2[q] < 0) throw ConfigError("u0_file values must be nonnegative");
      ++q;
    }
    if (q != nq)
      throw ConfigError("u0_file has " + std::to_string(q) + " rows, expected " +
                        std::to_string(nq));
  }
  return {u1, u2};
}

}  // namespace crossdiff
