#include "swimopt/app.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace swimopt::app {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::string num(double x) { return fmt("%.17g", x); }

std::ofstream open_output(const RunConfig& rc, const std::string& name) {
  std::filesystem::create_directories(rc.out);
  const auto path = std::filesystem::path(rc.out) / name;
  std::ofstream os(path);
  if (!os) throw Error("cannot write '" + path.string() + "'");
  return os;
}

void write_meshes(const RunConfig& rc, const SwimmerGeometry& g, const std::string& prefix) {
  auto both = [&](const SurfaceMesh& m, const std::string& name) {
    auto obj = open_output(rc, prefix + name + ".obj");
    write_obj(obj, m);
    auto vtk = open_output(rc, prefix + name + ".vtk");
    write_vtk(vtk, m, prefix + name);
  };
  both(g.head, "head");
  for (std::size_t i = 0; i < g.flagella.size(); ++i) both(g.flagella[i], "flagellum" + std::to_string(i + 1));
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

FlagellumSlot parse_slot(const std::string& s) {
  for (FlagellumSlot f : ParameterEncoding::all_slots())
    if (s == slot_name(f)) return f;
  throw ConfigError("unknown flagellum slot '" + s + "'");
}

bool is_auto(const Config& c, const std::string& path) { return c.get_string(path, "auto") == "auto"; }

int positive_int(const Config& c, const std::string& path, long long lo = 1) {
  const long long v = c.get_int(path, 0);
  if (v < lo || v > std::numeric_limits<int>::max())
    throw ConfigError("'" + path + "' must be an integer >= " + std::to_string(lo));
  return static_cast<int>(v);
}

double positive_double(const Config& c, const std::string& path) {
  const double v = c.get_double(path, 0);
  if (!(v > 0)) throw ConfigError("'" + path + "' must be positive");
  return v;
}

void merge_into(Config& base, const Config& over, const std::string& prefix) {
  for (const auto& [k, v] : over.values()) {
    const std::string path = prefix + k;
    if (!base.has(path)) throw ConfigError("unknown configuration key '" + path + "'");
    base.set(path, v);
  }
  for (const auto& [name, block] : over.children()) {
    if (prefix.empty() && name == "run") continue;  // manifest metadata
    if (prefix.empty() && name == "swimmer") {
      base.replace_blocks("swimmer", *block);
      continue;
    }
    merge_into(base, *block, prefix + name + ".");
  }
}

// Paths whose value differs from the command default; "auto" defaults are derived, not overridden.
void collect_overrides(const Config& defaults, const Config& resolved, const std::string& prefix,
                       std::vector<std::string>& out) {
  for (const auto& [k, v] : defaults.values()) {
    const std::string path = prefix + k;
    if (v != "auto" && resolved.get_string(path, v) != v) out.push_back(path);
  }
  for (const auto& [name, block] : defaults.children()) collect_overrides(*block, resolved, prefix + name + ".", out);
}

SwimmerSpec resolve_spec(const Config& tree) {
  if (const Config* s = tree.block("swimmer")) return spec_from_config(*s);
  const std::string file = tree.get_string("spec", "");
  if (!file.empty()) return spec_from_config(Config::load(file));
  return presets::by_name(tree.get_string("preset", "reference"));
}

bool same_spec(const SwimmerSpec& a, const SwimmerSpec& b) {
  return spec_to_config(a).dump() == spec_to_config(b).dump();
}

struct CachedEvaluation {
  Eigen::VectorXd x;
  double J = 0;
  std::vector<double> c;
};

// Rows of a previous history.csv; used to replay evaluations when resuming.
std::vector<CachedEvaluation> load_history(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open history file '" + path + "'");
  std::string line;
  std::getline(in, line);
  std::vector<CachedEvaluation> out;
  const std::size_t m = ConstraintVector::kSize;
  for (int row = 2; std::getline(in, line); ++row) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::strtod(cell.c_str(), nullptr));
    if (v.size() != 2 + static_cast<std::size_t>(d) + 1 + m + 4)
      throw ConfigError(path + ":" + std::to_string(row) + ": column count does not match the design dimension");
    CachedEvaluation e;
    e.x = Eigen::Map<const Eigen::VectorXd>(v.data() + 2, d);
    e.J = v[2 + static_cast<std::size_t>(d)];
    e.c.assign(v.begin() + 3 + d, v.begin() + 3 + d + static_cast<long>(m));
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

Objective parse_objective(const std::string& s) {
  if (s == "J1") return Objective::J1;
  if (s == "J2") return Objective::J2;
  if (s == "inv_eff") return Objective::InverseEfficiency;
  throw ConfigError("objective must be J1, J2 or inv_eff, got '" + s + "'");
}

const char* objective_name(Objective o) {
  switch (o) {
    case Objective::J1: return "J1";
    case Objective::J2: return "J2";
    case Objective::InverseEfficiency: return "inv_eff";
  }
  return "?";
}

StrokeOptions RunConfig::stroke() const {
  StrokeOptions s;
  s.n_phases = n_phases;
  s.mesh = mesh;
  s.bem = bem;
  return s;
}

Config default_config(const std::string& command) {
  const bool coarse = command == "validate-mono" || command == "validate-bi" || command == "optimize";
  const int level = coarse ? 1 : MeshResolution::kDefaultLevel;
  std::ostringstream t;
  t << "preset = reference\n"
       "spec =\n"
       "seed = 0\n"
       "out = out\n"
       "threads = 0\n"
       "mesh {\n  level = "
    << level
    << "\n  head_refine = auto\n  n_axial = auto\n  n_circ = auto\n}\n"
       "stroke {\n  phases = 4\n}\n"
       "bem {\n  viscosity = 1\n  duffy_order = 5\n  grading = 4\n  near_ratio = 1.5\n  medium_ratio = 3\n"
       "  mid_ratio = 6\n  max_condition = 1e14\n}\n"
       "constraints {\n  volume_tolerance = 0.01\n  trajectory_tolerance = 0.001\n  mc_samples = 1000000\n"
       "  sweep_phases = 4\n}\n"
       "optimize {\n  objective = J1\n  n_flagella = 1\n  budget = 150\n  batch = 15\n  n_init = auto\n"
       "  candidates = auto\n  perturb = auto\n  tau_success = 3\n  tau_failure = auto\n  length_init = 0.8\n"
       "  length_min = 0.0078125\n  length_max = 1.6\n  max_restarts = 3\n  head = true\n"
       "  slots = wavelength amplitude alpha beta gamma delta\n  warm_start = true\n  resume =\n}\n"
       "trajectory {\n  periods = 2\n  steps = 64\n}\n"
       "field {\n  enabled = false\n  n = 61\n  span = 4\n}\n"
       "validate {\n  sphere_levels = 2 3 4\n  mono_lengths = 5 10\n  mono_waves = 10\n"
       "  bi_alphas = 0 0.1 0.2 0.3 0.4 0.5\n}\n";
  return Config::parse_string(t.str());
}

void merge_config(Config& base, const Config& overrides) { merge_into(base, overrides, ""); }

RunConfig resolve(const std::string& command, Config tree) {
  RunConfig rc;
  rc.command = command;
  const long long seed = tree.get_int("seed", 0);
  if (seed < 0) throw ConfigError("seed must be non-negative");
  rc.seed = static_cast<std::uint64_t>(seed);
  rc.out = tree.get_string("out", "out");
  rc.threads = positive_int(tree, "threads", 0);

  rc.mesh_level = positive_int(tree, "mesh.level", 0);
  if (rc.mesh_level > MeshResolution::kMaxLevel)
    throw ConfigError("mesh.level must be at most " + std::to_string(MeshResolution::kMaxLevel));
  rc.mesh = MeshResolution::level(rc.mesh_level);
  if (!is_auto(tree, "mesh.head_refine")) rc.mesh.head_refine = positive_int(tree, "mesh.head_refine", 0);
  if (!is_auto(tree, "mesh.n_axial")) rc.mesh.n_axial = positive_int(tree, "mesh.n_axial", 4);
  if (!is_auto(tree, "mesh.n_circ")) rc.mesh.n_circ = positive_int(tree, "mesh.n_circ", 3);
  tree.set("mesh.head_refine", std::to_string(rc.mesh.head_refine));
  tree.set("mesh.n_axial", std::to_string(rc.mesh.n_axial));
  tree.set("mesh.n_circ", std::to_string(rc.mesh.n_circ));

  rc.n_phases = positive_int(tree, "stroke.phases", 2);
  rc.bem.viscosity = positive_double(tree, "bem.viscosity");
  rc.bem.quadrature.duffy_order = positive_int(tree, "bem.duffy_order");
  rc.bem.quadrature.grading = positive_double(tree, "bem.grading");
  rc.bem.quadrature.near_ratio = positive_double(tree, "bem.near_ratio");
  rc.bem.quadrature.medium_ratio = positive_double(tree, "bem.medium_ratio");
  rc.bem.quadrature.mid_ratio = positive_double(tree, "bem.mid_ratio");
  rc.bem.max_condition = positive_double(tree, "bem.max_condition");

  rc.constraints.volume_tolerance = positive_double(tree, "constraints.volume_tolerance");
  rc.constraints.trajectory_tolerance = positive_double(tree, "constraints.trajectory_tolerance");
  rc.constraints.mc_samples = positive_int(tree, "constraints.mc_samples");
  rc.constraints.sweep_phases = positive_int(tree, "constraints.sweep_phases");
  rc.constraints.seed = rc.seed;

  rc.trajectory.n_periods = positive_int(tree, "trajectory.periods");
  rc.trajectory.steps_per_period = positive_int(tree, "trajectory.steps", 32);
  rc.field.enabled = tree.get_bool("field.enabled", false);
  rc.field.n = positive_int(tree, "field.n", 2);
  rc.field.span = positive_double(tree, "field.span");

  rc.sphere_levels.clear();
  for (double v : tree.get_doubles("validate.sphere_levels")) {
    if (v != std::floor(v) || v < 0 || v > MeshResolution::kMaxLevel)
      throw ConfigError("validate.sphere_levels must be mesh levels 0.." + std::to_string(MeshResolution::kMaxLevel));
    rc.sphere_levels.push_back(static_cast<int>(v));
  }
  rc.mono_lengths = tree.get_doubles("validate.mono_lengths");
  rc.mono_waves = positive_int(tree, "validate.mono_waves", 3);
  rc.bi_alphas = tree.get_doubles("validate.bi_alphas");
  if (command == "validate-sphere" && rc.sphere_levels.size() < 2)
    throw ConfigError("validate.sphere_levels needs at least two levels");
  if (command == "validate-mono" && rc.mono_lengths.empty()) throw ConfigError("validate.mono_lengths is empty");
  if (command == "validate-bi" && rc.bi_alphas.empty()) throw ConfigError("validate.bi_alphas is empty");

  rc.objective = parse_objective(tree.get_string("optimize.objective", "J1"));
  rc.n_flagella = positive_int(tree, "optimize.n_flagella");
  if (rc.n_flagella > 2) throw ConfigError("optimize.n_flagella must be 1 or 2");
  rc.optimize_head = tree.get_bool("optimize.head", true);
  rc.slots.clear();
  for (const auto& w : words(tree.get_string("optimize.slots", ""))) rc.slots.push_back(parse_slot(w));
  rc.warm_start = tree.get_bool("optimize.warm_start", true);
  rc.resume = tree.get_string("optimize.resume", "");

  rc.spec = resolve_spec(tree);
  if (command == "optimize") {
    if (rc.n_flagella == 2 && !rc.spec.mirror) {
      // two flagella are optimized as a mirror pair starting from the most efficient junction angle
      rc.spec.mirror = true;
      rc.spec.flagella.resize(1);
      if (rc.spec.flagella.front().alpha == 0) rc.spec.flagella.front().alpha = 0.4 * kPi;
    }
    if (rc.spec.num_flagella() != rc.n_flagella)
      throw ConfigError("swimmer has " + std::to_string(rc.spec.num_flagella()) +
                        " flagella but optimize.n_flagella = " + std::to_string(rc.n_flagella));
    if (rc.spec.flagella.size() != 1) throw ConfigError("optimization supports one independent flagellum");
  }
  if (command == "evaluate" || command == "optimize") tree.replace_blocks("swimmer", spec_to_config(rc.spec));

  auto& s = rc.scbo;
  s.seed = rc.seed;
  s.budget = positive_int(tree, "optimize.budget");
  s.batch = positive_int(tree, "optimize.batch");
  s.tau_success = positive_int(tree, "optimize.tau_success");
  s.length_init = positive_double(tree, "optimize.length_init");
  s.length_min = positive_double(tree, "optimize.length_min");
  s.length_max = positive_double(tree, "optimize.length_max");
  s.max_restarts = positive_int(tree, "optimize.max_restarts", 0);
  const int d = (rc.optimize_head ? FFDLattice::kFreeDim : 0) + static_cast<int>(rc.slots.size());
  if (command == "optimize" && d == 0) throw ConfigError("nothing to optimize: no head and no flagellum slots");
  if (d > 0) {
    s.n_init = is_auto(tree, "optimize.n_init") ? 3 * d : positive_int(tree, "optimize.n_init");
    s.candidates = is_auto(tree, "optimize.candidates") ? default_candidates(d) : positive_int(tree, "optimize.candidates");
    s.perturb = is_auto(tree, "optimize.perturb") ? std::min(1.0, 20.0 / d) : positive_double(tree, "optimize.perturb");
    s.tau_failure = is_auto(tree, "optimize.tau_failure") ? std::max((d + s.batch - 1) / s.batch, 2)
                                                           : positive_int(tree, "optimize.tau_failure");
    tree.set("optimize.n_init", std::to_string(s.n_init));
    tree.set("optimize.candidates", std::to_string(s.candidates));
    tree.set("optimize.perturb", num(s.perturb));
    tree.set("optimize.tau_failure", std::to_string(s.tau_failure));
  }
  if (command == "optimize" && s.budget < s.n_init)
    throw ConfigError("optimize.budget (" + std::to_string(s.budget) + ") is smaller than the initial design (" +
                      std::to_string(s.n_init) + ")");
  rc.resolved = std::move(tree);
  return rc;
}

void write_manifest(const RunConfig& rc, const std::vector<std::string>& notes) {
  auto os = open_output(rc, "manifest.txt");
  const std::string body = rc.resolved.dump();
  std::vector<std::string> overrides;
  collect_overrides(default_config(rc.command), rc.resolved, "", overrides);
  std::string ov;
  for (const auto& o : overrides) ov += (ov.empty() ? "" : " ") + o;
  os << "# swimopt run manifest; pass this file back with --config to repeat the run\n";
  for (const auto& n : notes) os << "# " << n << '\n';
  os << "run {\n"
     << "  command = " << rc.command << '\n'
     << "  version = " << kVersion << '\n'
     << "  config_hash = " << fmt("%016" PRIx64, fnv1a64(body)) << '\n'
     << "  threads_used = " << num_threads() << '\n'
     << "  overrides = " << ov << '\n'
     << "}\n"
     << body;
}

double objective_value(Objective o, const StrokeAverages& avg, const StrokeAverages& reference) {
  switch (o) {
    case Objective::J1: return cost_J1(avg, reference);
    case Objective::J2: return cost_J2(avg, reference);
    // the signed value is negative for omega < 0; minimizing its magnitude favors low power at high speed
    case Objective::InverseEfficiency: return std::abs(inverse_efficiency(avg, mean_radius(avg.head_volume)));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

SphereReport validate_sphere(const RunConfig& rc, std::ostream& log) {
  SphereReport rep;
  const double drag = 6 * kPi * rc.bem.viscosity, torque = 8 * kPi * rc.bem.viscosity;
  for (int level : rc.sphere_levels) {
    const auto t0 = Clock::now();
    SphereRow row;
    row.level = level;
    row.head_refine = MeshResolution::level(level).head_refine;
    MeshResolution res;
    res.head_refine = row.head_refine;
    const SurfaceMesh mesh = reference_head(presets::reference(), res);
    const ResistanceMatrix R = resistance_matrix(mesh, Vec3::Zero(), rc.bem);
    row.triangles = static_cast<long>(mesh.num_triangles());
    row.nodes = static_cast<long>(mesh.num_vertices());
    row.drag_error = (R.matrix.col(0).head<3>() + drag * Vec3::UnitX()).norm() / drag;
    row.torque_error = (R.matrix.col(3).tail<3>() + torque * Vec3::UnitX()).norm() / torque;
    row.rcond = R.rcond;
    row.seconds = seconds_since(t0);
    log << fmt("level %d  triangles %5ld  drag error %.3e  torque error %.3e  rcond %.2e  %.1f s\n", row.level,
               row.triangles, row.drag_error, row.torque_error, row.rcond, row.seconds);
    rep.rows.push_back(row);
  }
  const SphereRow& last = rep.rows.back();
  rep.drag_ok = last.drag_error < 0.02;
  rep.torque_ok = last.torque_error < 0.03;
  rep.decreasing = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    rep.decreasing = rep.decreasing && rep.rows[i].drag_error < rep.rows[i - 1].drag_error &&
                     rep.rows[i].torque_error < rep.rows[i - 1].torque_error;
  if (!rc.out.empty()) {
    auto os = open_output(rc, "sphere.csv");
    os << "level,head_refine,triangles,nodes,drag_error,torque_error,rcond,seconds\n";
    for (const auto& r : rep.rows)
      os << fmt("%d,%d,%ld,%ld,%.10g,%.10g,%.6g,%.3f\n", r.level, r.head_refine, r.triangles, r.nodes, r.drag_error,
                r.torque_error, r.rcond, r.seconds);
  }
  log << fmt("finest drag error < 2%%: %s, torque error < 3%%: %s, strictly decreasing: %s\n",
             rep.drag_ok ? "yes" : "NO", rep.torque_ok ? "yes" : "NO", rep.decreasing ? "yes" : "NO");
  return rep;
}

MonoReport validate_mono(const RunConfig& rc, std::ostream& log) {
  MonoReport rep;
  const StrokeOptions st = rc.stroke();
  for (double L : rc.mono_lengths) {
    for (int n = 1; n <= rc.mono_waves; ++n) {
      const SwimmerSpec spec = presets::slender_mono(L, n);
      MonoRow row;
      row.length = L;
      row.n_waves = n;
      row.wavelength = spec.flagella.front().wavelength;
      StrokeAverages avg;
      try {
        avg = stroke_average(spec, st);
      } catch (const Error& e) {
        throw SolverError(fmt("L/A = %g, N = %d: ", L, n) + e.what());
      }
      row.U1 = avg.U(0);
      row.Omega1 = avg.Omega(0);
      row.P = avg.P;
      row.U_over_V = std::abs(avg.U(0)) * spec.flagella.front().shrink / std::abs(spec.omega);
      row.inv_efficiency = inverse_efficiency(avg, mean_radius(avg.head_volume), rc.bem.viscosity);
      log << fmt("L/A %4g  N %2d  lambda %.4f  U1 %+.6f  U/V %.5f  1/eta %.4g\n", L, n, row.wavelength, row.U1,
                 row.U_over_V, row.inv_efficiency);
      rep.rows.push_back(row);
    }
  }
  std::vector<double> first, second;
  for (const auto& r : rep.rows) {
    if (r.length == rc.mono_lengths.front()) first.push_back(r.U_over_V);
    if (rc.mono_lengths.size() > 1 && r.length == rc.mono_lengths[1]) second.push_back(r.U_over_V);
  }
  const auto imax = std::max_element(first.begin(), first.end()) - first.begin();
  rep.interior_max = imax > 0 && imax + 1 < static_cast<long>(first.size());
  rep.below_one = std::all_of(rep.rows.begin(), rep.rows.end(), [](const MonoRow& r) { return r.U_over_V < 1; });
  rep.curves_differ = rc.mono_lengths.size() < 2;
  for (std::size_t i = 0; i < std::min(first.size(), second.size()); ++i)
    rep.curves_differ = rep.curves_differ || std::abs(first[i] - second[i]) > 1e-6;
  if (!rc.out.empty()) {
    auto os = open_output(rc, "mono.csv");
    os << "length,n_waves,wavelength,U1,Omega1,P,U_over_V,inv_efficiency\n";
    for (const auto& r : rep.rows)
      os << fmt("%g,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", r.length, r.n_waves, r.wavelength, r.U1, r.Omega1, r.P,
                r.U_over_V, r.inv_efficiency);
  }
  log << fmt("interior maximum of U/V for L/A = %g: %s (N = %ld), U/V < 1: %s, curves differ: %s\n",
             rc.mono_lengths.front(), rep.interior_max ? "yes" : "NO", imax + 1, rep.below_one ? "yes" : "NO",
             rep.curves_differ ? "yes" : "NO");
  return rep;
}

BiReport validate_bi(const RunConfig& rc, std::ostream& log) {
  BiReport rep;
  const StrokeOptions st = rc.stroke();
  rep.mono = stroke_average(presets::ellipsoid_bi(0, false), st);
  log << fmt("mono  U1 %+.6f  Omega1 %+.6f  P %.5f\n", rep.mono.U(0), rep.mono.Omega(0), rep.mono.P);
  double best = -std::numeric_limits<double>::infinity();
  for (double a : rc.bi_alphas) {
    BiRow row;
    row.alpha_over_pi = a;
    try {
      row.avg = stroke_average(presets::ellipsoid_bi(a * kPi), st);
      row.feasible = true;
    } catch (const GeometryError& e) {
      // the two flagella intersect at small junction angles; such swimmers are excluded
      row.error = e.what();
    }
    if (row.feasible) {
      row.U1_ratio = row.avg.U(0) / rep.mono.U(0);
      row.Omega1_ratio = row.avg.Omega(0) / rep.mono.Omega(0);
      row.P_ratio = row.avg.P / rep.mono.P;
      row.efficiency = row.U1_ratio / row.P_ratio;
      for (std::size_t k = 0; k < row.avg.phase_U.size(); ++k)
        rep.max_lateral =
            std::max({rep.max_lateral, std::abs(row.avg.phase_U[k](1)), std::abs(row.avg.phase_U[k](2))});
      if (row.efficiency > best) best = row.efficiency, rep.argmax = a;
      log << fmt("alpha %.2f pi  U1 %.4f  Omega1 %.4f  P %.4f  efficiency %.5f\n", a, row.U1_ratio,
                 row.Omega1_ratio, row.P_ratio, row.efficiency);
    } else {
      log << fmt("alpha %.2f pi  excluded: %s\n", a, row.error.c_str());
    }
    rep.rows.push_back(std::move(row));
  }
  if (!rc.out.empty()) {
    auto os = open_output(rc, "bi.csv");
    os << "alpha_over_pi,feasible,U1,Omega1,P,U1_ratio,Omega1_ratio,P_ratio,efficiency\n";
    os << fmt("mono,1,%.10g,%.10g,%.10g,1,1,1,1\n", rep.mono.U(0), rep.mono.Omega(0), rep.mono.P);
    for (const auto& r : rep.rows) {
      if (r.feasible)
        os << fmt("%g,1,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", r.alpha_over_pi, r.avg.U(0), r.avg.Omega(0),
                  r.avg.P, r.U1_ratio, r.Omega1_ratio, r.P_ratio, r.efficiency);
      else
        os << fmt("%g,0,,,,,,,\n", r.alpha_over_pi);
    }
  }
  log << fmt("efficiency maximum at alpha = %.2f pi (expected 0.4 pi); largest lateral phase velocity %.2e\n",
             rep.argmax, rep.max_lateral);
  return rep;
}

EvaluateReport evaluate(const RunConfig& rc, std::ostream& log) {
  EvaluateReport rep;
  const StrokeOptions st = rc.stroke();
  const SwimmerSpec& spec = rc.spec;
  std::vector<PhaseResult> phases;
  try {
    for (int t = 0; t < st.n_phases; ++t) {
      phases.push_back(solve_phase(spec, 2 * kPi * t / st.n_phases, st));
      if (t > 0) phases.back().geometry = {};
      log << fmt("phase %d/%d  U1 %+.6f  Omega1 %+.6f  P %.5f\n", t + 1, st.n_phases,
                 phases.back().solution.U(0), phases.back().solution.Omega(0), phases.back().solution.power);
    }
    rep.avg = average_phases(phases, spec.omega);
    rep.solved = true;
  } catch (const GeometryError& e) {
    rep.error = e.what();
  } catch (const ParameterError& e) {
    rep.error = e.what();
  }

  if (rep.solved) {
    const SwimmerSpec ref = presets::reference();
    rep.reference = same_spec(spec, ref) ? rep.avg : stroke_average(ref, st);
    rep.J1 = cost_J1(rep.avg, rep.reference);
    rep.J2 = cost_J2(rep.avg, rep.reference);
    rep.inv_efficiency = inverse_efficiency(rep.avg, mean_radius(rep.avg.head_volume), rc.bem.viscosity);
    rep.constraints = evaluate_all(spec, rep.avg, st.mesh, rc.constraints);
    rep.feasible = rep.constraints.feasible();
    rep.trajectory = integrate_trajectory(rep.avg, rc.trajectory);
    const auto steps = static_cast<std::size_t>(rc.trajectory.steps_per_period);
    for (std::size_t k = steps; k < rep.trajectory.x.size(); k += steps) {
      const Vec3 d = rep.trajectory.x[k] - rep.trajectory.x[k - steps];
      rep.lateral_per_period = std::max(rep.lateral_per_period, std::hypot(d(1), d(2)));
    }
  } else {
    log << "swimmer cannot be evaluated: " << rep.error << '\n';
    rep.constraints.values = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN(), 1.0};
    try {
      const SwimmerGeometry g = build_swimmer(spec, st.mesh);
      rep.constraints.values[0] =
          volume_constraint(g.head_volume, g.reference_head_volume, rc.constraints.volume_tolerance);
      rep.constraints.values[3] = collision_constraint(spec, st.mesh, rc.constraints);
    } catch (const Error&) {
    }
  }

  if (!rc.out.empty()) {
    if (rep.solved) {
      write_meshes(rc, phases.front().geometry, "");
      auto ph = open_output(rc, "phases.csv");
      ph << "phase,U1,U2,U3,Omega1,Omega2,Omega3,P,residual\n";
      for (const auto& p : phases) {
        const auto& s = p.solution;
        ph << fmt("%.10g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.3g\n", p.phase, s.U(0), s.U(1), s.U(2),
                  s.Omega(0), s.Omega(1), s.Omega(2), s.power, s.residual);
      }
      auto tr = open_output(rc, "trajectory.csv");
      rep.trajectory.write_csv(tr);
    }
    auto os = open_output(rc, "report.txt");
    os << "solved = " << (rep.solved ? "true" : "false") << '\n';
    if (!rep.solved) os << "error = " << rep.error << '\n';
    if (rep.solved) {
      os << "U = " << num(rep.avg.U(0)) << ' ' << num(rep.avg.U(1)) << ' ' << num(rep.avg.U(2)) << '\n'
         << "Omega = " << num(rep.avg.Omega(0)) << ' ' << num(rep.avg.Omega(1)) << ' ' << num(rep.avg.Omega(2))
         << '\n'
         << "P = " << num(rep.avg.P) << '\n'
         << "reference_U1 = " << num(rep.reference.U(0)) << '\n'
         << "reference_P = " << num(rep.reference.P) << '\n'
         << "J1 = " << num(rep.J1) << '\n'
         << "J2 = " << num(rep.J2) << '\n'
         << "inv_efficiency = " << num(rep.inv_efficiency) << '\n'
         << "head_volume = " << num(rep.avg.head_volume) << '\n'
         << "lateral_per_period = " << num(rep.lateral_per_period) << '\n'
         << "max_residual = " << num(rep.avg.max_residual) << '\n'
         << "max_propulsion_residual = " << num(rep.avg.max_propulsion) << '\n';
    }
    const auto& labels = ConstraintVector::labels();
    for (int k = 0; k < ConstraintVector::kSize; ++k)
      os << "c_" << labels[static_cast<std::size_t>(k)] << " = " << num(rep.constraints.values[static_cast<std::size_t>(k)])
         << '\n';
    os << "feasible = " << (rep.feasible ? "true" : "false") << '\n';
  }

  if (rep.solved && rc.field.enabled) {
    const PhaseResult& p0 = phases.front();
    const Discretization disc(p0.geometry.bodies());
    const Vec3 lo = disc.nodes.colwise().minCoeff().transpose(), hi = disc.nodes.colwise().maxCoeff().transpose();
    const Vec3 c = (lo + hi) / 2;
    const double half = rc.field.span * (hi(0) - lo(0)) / 2;
    std::vector<Vec3> pts;
    for (int i = 0; i < rc.field.n; ++i)
      for (int j = 0; j < rc.field.n; ++j)
        pts.emplace_back(c(0) - half + 2 * half * j / (rc.field.n - 1), 0.0,
                         c(2) - half + 2 * half * i / (rc.field.n - 1));
    const auto field = velocity_field(disc, p0.solution.traction, pts, rc.bem.viscosity);
    if (!rc.out.empty()) {
      auto os = open_output(rc, "field.csv");
      os << "x,y,z,ux,uy,uz,near\n";
      for (std::size_t k = 0; k < pts.size(); ++k)
        os << fmt("%.8g,%.8g,%.8g,%.10g,%.10g,%.10g,%d\n", pts[k](0), pts[k](1), pts[k](2), field[k].velocity(0),
                  field[k].velocity(1), field[k].velocity(2), field[k].near_surface ? 1 : 0);
    }
    log << "velocity field: " << pts.size() << " points in the plane y = 0\n";
  }

  if (rep.solved)
    log << fmt("U1 %+.6f  Omega1 %+.6f  P %.5f  J1 %.6f  J2 %.6f  inv_eff %.5g\n", rep.avg.U(0), rep.avg.Omega(0),
               rep.avg.P, rep.J1, rep.J2, rep.inv_efficiency);
  log << fmt("constraints  volume %.3g  drift %.3g %.3g  collision %.3g  -> %s\n", rep.constraints.values[0],
             rep.constraints.values[1], rep.constraints.values[2], rep.constraints.values[3],
             rep.feasible ? "feasible" : "infeasible");
  return rep;
}

OptimizeReport optimize(const RunConfig& rc, std::ostream& log) {
  OptimizeReport rep;
  const auto t0 = Clock::now();
  const StrokeOptions st = rc.stroke();
  const ParameterEncoding enc(rc.spec, rc.slots, rc.optimize_head);
  rep.dim = enc.dim();
  log << "reference swimmer ...\n";
  rep.reference = stroke_average(presets::reference(), st);
  log << fmt("reference U1 %+.6f  P %.5f\n", rep.reference.U(0), rep.reference.P);

  ScboOptions opt = rc.scbo;
  if (rc.warm_start) {
    try {
      opt.warm_start.push_back(enc.encode(rc.spec));
    } catch (const EncodingError& e) {
      throw ConfigError(std::string("starting swimmer lies outside the design box: ") + e.what());
    }
  }

  const std::vector<CachedEvaluation> cache = rc.resume.empty() ? std::vector<CachedEvaluation>{}
                                                                 : load_history(rc.resume, enc.dim());
  if (!cache.empty()) log << "replaying " << cache.size() << " evaluations from " << rc.resume << '\n';

  std::ofstream hist;
  if (!rc.out.empty()) {
    auto par = open_output(rc, "parameters.csv");
    par << "index,label,lower,upper\n";
    for (int k = 0; k < enc.dim(); ++k)
      par << fmt("%d,%s,%.17g,%.17g\n", k, enc.labels()[static_cast<std::size_t>(k)].c_str(), enc.lower()(k),
                 enc.upper()(k));
    hist = open_output(rc, "history.csv");
    hist << "eval_index,batch";
    for (int k = 0; k < enc.dim(); ++k) hist << ",x" << k;
    hist << ",J";
    for (const char* l : ConstraintVector::labels()) hist << ",c_" << l;
    hist << ",feasible,L,center_index,elapsed_s\n";
  }
  opt.on_evaluation = [&](const Observation& o) {
    if (hist.is_open()) {
      hist << o.index << ',' << o.batch;
      for (Eigen::Index k = 0; k < o.x.size(); ++k) hist << ',' << num(o.x(k));
      hist << ',' << num(o.J);
      for (int k = 0; k < ConstraintVector::kSize; ++k)
        hist << ',' << (static_cast<std::size_t>(k) < o.c.size() ? num(o.c[static_cast<std::size_t>(k)]) : "1");
      hist << ',' << (o.feasible ? 1 : 0) << ',' << num(o.length) << ',' << o.center
           << ',' << fmt("%.3f", o.elapsed) << '\n';
      hist.flush();
    }
    log << fmt("eval %4d  batch %3d  J %+.6f  violation %.3g  %s%s\n", o.index, o.batch, o.J, o.violation(),
               o.feasible ? "feasible" : "infeasible", o.failed ? (" (failed: " + o.error + ")").c_str() : "");
  };

  std::size_t calls = 0;
  const Evaluator f = [&](const Eigen::VectorXd& x) {
    // the loop is deterministic, so a resumed run proposes the same points in the same order
    const std::size_t i = calls++;
    if (i < cache.size() && cache[i].x.size() == x.size() && (cache[i].x - x).cwiseAbs().maxCoeff() == 0) {
      if (std::isnan(cache[i].J)) throw EvaluationError("evaluation failed in the resumed run");
      return Evaluation{cache[i].J, cache[i].c};
    }
    const SwimmerSpec spec = enc.decode(x);
    const StrokeAverages avg = stroke_average(spec, st);
    Evaluation e;
    e.J = objective_value(rc.objective, avg, rep.reference);
    const ConstraintVector c = evaluate_all(spec, avg, st.mesh, rc.constraints);
    e.c.assign(c.values.begin(), c.values.end());
    return e;
  };

  rep.result = scbo_run(f, enc.dim(), opt);
  rep.best_trace = best_feasible_trace(rep.result.history);
  const Observation& best = rep.result.history[static_cast<std::size_t>(rep.result.best)];
  rep.best = enc.decode(best.x);
  rep.seconds = seconds_since(t0);

  if (!rc.out.empty()) {
    auto conv = open_output(rc, "convergence.csv");
    conv << "eval_index,J,best_feasible_J\n";
    for (std::size_t i = 0; i < rep.best_trace.size(); ++i)
      conv << i << ',' << num(rep.result.history[i].J) << ',' << num(rep.best_trace[i]) << '\n';
    auto bs = open_output(rc, "best_spec.txt");
    write_spec(bs, rep.best);
    try {
      write_meshes(rc, build_swimmer(rep.best, st.mesh), "best_");
    } catch (const Error& e) {
      log << "best swimmer meshes not written: " << e.what() << '\n';
    }
    auto os = open_output(rc, "report.txt");
    os << "objective = " << objective_name(rc.objective) << '\n'
       << "dimension = " << rep.dim << '\n'
       << "evaluations = " << rep.result.history.size() << '\n'
       << "restarts = " << rep.result.restarts << '\n'
       << "best_index = " << best.index << '\n'
       << "best_J = " << num(best.J) << '\n'
       << "best_feasible = " << (rep.result.feasible ? "true" : "false") << '\n'
       << "best_violation = " << num(best.violation()) << '\n'
       << "reference_U1 = " << num(rep.reference.U(0)) << '\n'
       << "reference_P = " << num(rep.reference.P) << '\n'
       << "seconds = " << fmt("%.1f", rep.seconds) << '\n';
  }
  log << fmt("best %s point: eval %d  J %+.6f  violation %.3g  (%zu evaluations, %d restarts, %.0f s)\n",
             rep.result.feasible ? "feasible" : "least violating", best.index, best.J, best.violation(),
             rep.result.history.size(), rep.result.restarts, rep.seconds);
  return rep;
}

int run_command(const RunConfig& rc, std::ostream& log) {
  set_num_threads(rc.threads);
  if (!rc.out.empty()) write_manifest(rc);
  const auto& c = rc.command;
  if (c == "validate-sphere") return validate_sphere(rc, log).passed() ? kSuccess : kValidationFailed;
  if (c == "validate-mono") return validate_mono(rc, log).passed() ? kSuccess : kValidationFailed;
  if (c == "validate-bi") return validate_bi(rc, log).passed() ? kSuccess : kValidationFailed;
  if (c == "evaluate") {
    evaluate(rc, log);
    return kSuccess;
  }
  if (c == "optimize") return optimize(rc, log).result.feasible ? kSuccess : kNoFeasible;
  throw ConfigError("unknown command '" + c + "'");
}

}  // namespace swimopt::app
