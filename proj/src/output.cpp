#include "crossdiff/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace crossdiff {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_output(const std::string& dir, const std::string& name,
                  const std::string& content) {
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/" + name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string series_csv(const DiagnosticsRecord& rec) {
  std::string out = "k,t,entropy,dissipation,mass1,mass2,l1_reaction_neg,w_h1_sq,newton_iters\n";
  auto row = [&](int k, double t, double e, double q, double m1, double m2, double rn,
                 double wh, int it) {
    out += std::to_string(k) + ',' + format_g17(t) + ',' + format_g17(e) + ',' +
           format_g17(q) + ',' + format_g17(m1) + ',' + format_g17(m2) + ',' +
           format_g17(rn) + ',' + format_g17(wh) + ',' + std::to_string(it) + '\n';
  };
  row(0, 0.0, rec.entropy0, 0.0, rec.mass1_0, rec.mass2_0, 0.0, 0.0, 0);
  for (size_t j = 0; j < rec.steps.size(); ++j) {
    const StepDiagnostics& d = rec.steps[j];
    row(int(j + 1), d.t, d.entropy, d.q_integral, d.mass1, d.mass2, d.l1_reaction_neg,
        d.w_h1_sq, d.newton_iterations);
  }
  return out;
}

std::string fields_csv(const Trajectory& traj, const SpatialSpace& space) {
  const int N = int(traj.steps.size());
  std::vector<int> snaps{0, N / 4, N / 2, 3 * N / 4, N};
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());

  std::string out = "k,idx,x,y,u1,u2\n";
  auto block = [&](int k, const Eigen::VectorXd& u1, const Eigen::VectorXd& u2) {
    for (int q = 0; q < space.num_nodes(); ++q) {
      double y = space.dimension() == 2 ? space.node_coord(q, 1) : 0.0;
      out += std::to_string(k) + ',' + std::to_string(q) + ',' +
             format_g17(space.node_coord(q, 0)) + ',' + format_g17(y) + ',' +
             format_g17(u1[q]) + ',' + format_g17(u2[q]) + '\n';
    }
  };
  for (int k : snaps) {
    if (k == 0)
      block(0, traj.u1_0, traj.u2_0);
    else
      block(k, traj.steps[k - 1].u1, traj.steps[k - 1].u2);
  }
  return out;
}

std::string report_text(const DiagnosticsRecord& rec, const InvariantReport& rep) {
  std::ostringstream out;
  const int N = int(rec.steps.size());
  out << "steps=" << N << " tau=" << format_g17(rec.tau) << " eps=" << format_g17(rec.eps)
      << " T=" << format_g17(rec.T) << "\n";
  out << "reaction_growth=" << format_g17(rec.reaction_growth)
      << " rmax=" << format_g17(rec.rmax)
      << " apriori_bound=" << format_g17(rec.apriori_bound) << "\n";
  const double eT = N > 0 ? rec.steps.back().entropy : rec.entropy0;
  const double qT = N > 0 ? rec.steps.back().cum_q : 0.0;
  out << "entropy0=" << format_g17(rec.entropy0) << " entropy_T=" << format_g17(eT)
      << " dissipation_total=" << format_g17(qT) << "\n";
  const double m1T = N > 0 ? rec.steps.back().mass1 : rec.mass1_0;
  const double m2T = N > 0 ? rec.steps.back().mass2 : rec.mass2_0;
  out << "mass0=" << format_g17(rec.mass1_0 + rec.mass2_0)
      << " mass_T=" << format_g17(m1T + m2T) << "\n";
  out << "duality_norm_1=" << format_g17(rec.duality[0])
      << " duality_norm_2=" << format_g17(rec.duality[1]) << "\n";
  out << "min_u=" << format_g17(rec.min_u) << "\n";
  out << "---- invariant checks ----\n";
  out << rep.summary();
  out << "overall: " << (rep.all_pass() ? "PASS" : "FAIL") << "\n";
  return out.str();
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "record,k,idx,v1,v2\n";
  out += "meta,0,0," + format_g17(traj.tau) + ',' + format_g17(traj.eps) + '\n';
  for (Eigen::Index q = 0; q < traj.u1_0.size(); ++q)
    out += "u0,0," + std::to_string(q) + ',' + format_g17(traj.u1_0[q]) + ',' +
           format_g17(traj.u2_0[q]) + '\n';
  for (size_t k = 0; k < traj.steps.size(); ++k)
    for (Eigen::Index m = 0; m < traj.steps[k].c1.size(); ++m)
      out += "w," + std::to_string(k + 1) + ',' + std::to_string(m) + ',' +
             format_g17(traj.steps[k].c1[m]) + ',' + format_g17(traj.steps[k].c2[m]) + '\n';
  return out;
}

Trajectory load_trajectory(const std::string& path, const SpatialSpace& space,
                           const EntropyMap& m1, const EntropyMap& m2) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("record,", 0) != 0)
    throw std::runtime_error("trajectory file has no header: " + path);

  Trajectory traj;
  traj.u1_0.resize(space.num_nodes());
  traj.u2_0.resize(space.num_nodes());
  bool have_meta = false;
  int u0_rows = 0;
  std::map<int, std::pair<Eigen::VectorXd, Eigen::VectorXd>> coeffs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string rec, kf, idxf, v1f, v2f;
    if (!std::getline(row, rec, ',') || !std::getline(row, kf, ',') ||
        !std::getline(row, idxf, ',') || !std::getline(row, v1f, ',') ||
        !std::getline(row, v2f))
      throw std::runtime_error("bad trajectory row at line " + std::to_string(lineno));
    int k = std::stoi(kf), idx = std::stoi(idxf);
    double v1 = std::stod(v1f), v2 = std::stod(v2f);
    if (rec == "meta") {
      traj.tau = v1;
      traj.eps = v2;
      have_meta = true;
    } else if (rec == "u0") {
      if (idx < 0 || idx >= space.num_nodes())
        throw std::runtime_error("u0 node index out of range at line " + std::to_string(lineno));
      traj.u1_0[idx] = v1;
      traj.u2_0[idx] = v2;
      ++u0_rows;
    } else if (rec == "w") {
      if (k < 1 || idx < 0 || idx >= space.n())
        throw std::runtime_error("coefficient index out of range at line " +
                                 std::to_string(lineno));
      auto& c = coeffs[k];
      if (c.first.size() == 0) {
        c.first = Eigen::VectorXd::Zero(space.n());
        c.second = Eigen::VectorXd::Zero(space.n());
      }
      c.first[idx] = v1;
      c.second[idx] = v2;
    } else {
      throw std::runtime_error("unknown record '" + rec + "' at line " + std::to_string(lineno));
    }
  }
  if (!have_meta || traj.tau <= 0) throw std::runtime_error("trajectory missing meta row");
  if (u0_rows != space.num_nodes())
    throw std::runtime_error("trajectory has incomplete initial data");
  if (std::abs(traj.eps - m1.eps()) > 1e-15 * (1.0 + traj.eps))
    throw std::runtime_error("trajectory eps does not match the configured eps");

  int expect = 1;
  for (const auto& [k, c] : coeffs) {
    if (k != expect)
      throw std::runtime_error("trajectory steps are not contiguous at k=" + std::to_string(k));
    ++expect;
    TrajectoryStep st;
    st.c1 = c.first;
    st.c2 = c.second;
    Eigen::VectorXd w1 = space.evaluate(st.c1), w2 = space.evaluate(st.c2);
    st.u1.resize(w1.size());
    st.u2.resize(w2.size());
    double g1 = 1.0, g2 = 1.0;
    for (Eigen::Index q = 0; q < w1.size(); ++q) {
      g1 = m1.phi_inverse(w1[q], g1, 1e-12);
      g2 = m2.phi_inverse(w2[q], g2, 1e-12);
      st.u1[q] = g1;
      st.u2[q] = g2;
    }
    traj.steps.push_back(std::move(st));
  }
  return traj;
}

std::string study_csv(const StudyReport& rep) {
  std::string out =
      "level,n,N,eps,tau,entropy_total,apriori_bound,duality1,duality2,"
      "weak_residual_max,min_u,invariants_pass\n";
  for (const auto& s : rep.levels)
    out += std::to_string(s.level) + ',' + std::to_string(s.n) + ',' + std::to_string(s.N) +
           ',' + format_g17(s.eps) + ',' + format_g17(s.tau) + ',' +
           format_g17(s.entropy_total) + ',' + format_g17(s.apriori_bound) + ',' +
           format_g17(s.duality[0]) + ',' + format_g17(s.duality[1]) + ',' +
           format_g17(s.weak_residual_max) + ',' + format_g17(s.min_u) + ',' +
           (s.invariants_pass ? "1" : "0") + '\n';
  return out;
}

std::string ode_csv(const OdeCompareReport& rep, double tau) {
  std::string out = "k,t,pde1,pde2,euler1,euler2,ref1,ref2\n";
  for (size_t k = 0; k < rep.pde_means.size(); ++k)
    out += std::to_string(k + 1) + ',' + format_g17(tau * double(k + 1)) + ',' +
           format_g17(rep.pde_means[k][0]) + ',' + format_g17(rep.pde_means[k][1]) + ',' +
           format_g17(rep.euler[k][0]) + ',' + format_g17(rep.euler[k][1]) + ',' +
           format_g17(rep.reference[k][0]) + ',' + format_g17(rep.reference[k][1]) + '\n';
  return out;
}

}  // namespace crossdiff
