#pragma once

// Workflows behind the command-line tool. Each command returns a report struct
// so tests can check results without parsing files; output files are written
// only when RunConfig::out is non-empty.

#include "swimopt/constraints.hpp"
#include "swimopt/scbo.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace swimopt::app {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum ExitCode : int { kSuccess = 0, kUsage = 1, kValidationFailed = 2, kNoFeasible = 3, kSolverFailure = 4 };

enum class Objective { J1, J2, InverseEfficiency };
Objective parse_objective(const std::string& s);
const char* objective_name(Objective o);

struct FieldGrid {
  bool enabled = false;
  int n = 61;          // points per side
  double span = 4.0;   // side length in swimmer body lengths
};

struct RunConfig {
  std::string command;
  SwimmerSpec spec;  // preset, spec file or inline block, already resolved
  int mesh_level = MeshResolution::kDefaultLevel;
  MeshResolution mesh;
  int n_phases = 4;
  BemOptions bem;
  ConstraintOptions constraints;
  Objective objective = Objective::J1;
  int n_flagella = 1;
  std::vector<FlagellumSlot> slots = ParameterEncoding::all_slots();
  bool optimize_head = true;
  bool warm_start = true;
  std::string resume;  // history.csv of an earlier run with the same configuration
  ScboOptions scbo;
  TrajectoryOptions trajectory;
  FieldGrid field;
  std::vector<int> sphere_levels{2, 3, 4};
  std::vector<double> mono_lengths{5, 10};
  int mono_waves = 10;
  std::vector<double> bi_alphas{0, 0.1, 0.2, 0.3, 0.4, 0.5};  // multiples of pi
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;

  Config resolved;  // every parameter after defaults, file, environment and flags

  StrokeOptions stroke() const;
};

/// Default parameter tree for a command; the mesh level default is coarse for
/// the sweeps and the optimizer and finer for single evaluations.
Config default_config(const std::string& command);

/// Layer `overrides` on top of `base`. Unknown keys raise ConfigError, except
/// inside the free-form "swimmer" block.
void merge_config(Config& base, const Config& overrides);

/// Resolve a parameter tree into a RunConfig. Derived defaults such as the
/// initial design size are written back into `resolved`.
RunConfig resolve(const std::string& command, Config tree);

/// Write manifest.txt: a config file that reproduces the run when passed back
/// with --config, plus a run block with version, seed and config hash.
void write_manifest(const RunConfig& rc, const std::vector<std::string>& notes = {});

struct SphereRow {
  int level = 0;
  int head_refine = 0;
  long triangles = 0, nodes = 0;
  double drag_error = 0, torque_error = 0;  // relative to 6 pi mu and 8 pi mu
  double rcond = 0;
  double seconds = 0;
};

struct SphereReport {
  std::vector<SphereRow> rows;
  bool drag_ok = false, torque_ok = false, decreasing = false;
  bool passed() const { return drag_ok && torque_ok && decreasing; }
};

SphereReport validate_sphere(const RunConfig& rc, std::ostream& log);

struct MonoRow {
  double length = 0;
  int n_waves = 0;
  double wavelength = 0;
  double U1 = 0, Omega1 = 0, P = 0;
  double U_over_V = 0;  // |U1| k_E / |omega|
  double inv_efficiency = 0;
};

struct MonoReport {
  std::vector<MonoRow> rows;
  bool interior_max = false;  // for the first length
  bool below_one = false;
  bool curves_differ = false;
  bool passed() const { return interior_max && below_one && curves_differ; }
};

MonoReport validate_mono(const RunConfig& rc, std::ostream& log);

struct BiRow {
  double alpha_over_pi = 0;
  bool feasible = false;
  std::string error;
  StrokeAverages avg;
  double U1_ratio = 0, Omega1_ratio = 0, P_ratio = 0;
  double efficiency = 0;  // |U1| / |P| normalized by the monoflagellate value
};

struct BiReport {
  StrokeAverages mono;
  std::vector<BiRow> rows;
  double argmax = -1;  // alpha / pi of the most efficient feasible row
  double max_lateral = 0;  // largest |U2|, |U3| over all phases of feasible rows
  bool passed() const { return std::abs(argmax - 0.4) < 1e-9; }
};

BiReport validate_bi(const RunConfig& rc, std::ostream& log);

struct EvaluateReport {
  bool solved = false;  // false when the geometry is invalid (overlap, bad parameters)
  std::string error;
  StrokeAverages avg;
  StrokeAverages reference;
  double J1 = 0, J2 = 0, inv_efficiency = 0;
  ConstraintVector constraints;
  bool feasible = false;
  Trajectory trajectory;
  double lateral_per_period = 0;  // largest displacement across e1 of the lab frame over one period
};

EvaluateReport evaluate(const RunConfig& rc, std::ostream& log);

struct OptimizeReport {
  int dim = 0;
  ScboResult result;
  StrokeAverages reference;
  SwimmerSpec best;
  std::vector<double> best_trace;
  double seconds = 0;
};

OptimizeReport optimize(const RunConfig& rc, std::ostream& log);

/// Objective value of a swimmer given the reference averages.
double objective_value(Objective o, const StrokeAverages& avg, const StrokeAverages& reference);

/// Run a command end to end and map the outcome to an exit code.
int run_command(const RunConfig& rc, std::ostream& log);

}  // namespace swimopt::app
