#ifndef CROSSDIFF_OUTPUT_HPP
#define CROSSDIFF_OUTPUT_HPP

#include <string>

#include "crossdiff/diagnostics.hpp"
#include "crossdiff/entropy.hpp"
#include "crossdiff/spatial.hpp"
#include "crossdiff/stepper.hpp"
#include "crossdiff/study.hpp"

namespace crossdiff {

/** Shortest round-trip decimal form (17 significant digits). */
std::string format_g17(double x);

/** Write `content` to `dir/name`, creating `dir` first.  LF newlines,
 *  no locale formatting anywhere in the emitters.
 */
void write_output(const std::string& dir, const std::string& name, const std::string& content);

/** Per-step scalar series, one row per time step plus the k=0 state. */
std::string series_csv(const DiagnosticsRecord& rec);

/** Nodal snapshots of both densities at five evenly spaced steps. */
std::string fields_csv(const Trajectory& traj, const SpatialSpace& space);

/** Human-readable run summary plus the invariant verdicts. */
std::string report_text(const DiagnosticsRecord& rec, const InvariantReport& rep);

/** Full discrete state: initial nodal densities and the entropy-variable
 *  coefficients of every step, enough to reload a run exactly.
 */
std::string trajectory_csv(const Trajectory& traj);

Trajectory load_trajectory(const std::string& path, const SpatialSpace& space,
                           const EntropyMap& m1, const EntropyMap& m2);

std::string study_csv(const StudyReport& rep);
std::string ode_csv(const OdeCompareReport& rep, double tau);

}  // namespace crossdiff

#endif
