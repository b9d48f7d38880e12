#include "swimopt/app.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

using namespace swimopt;
namespace fs = std::filesystem;

namespace {

fs::path scratch_root() { return fs::temp_directory_path() / ("swimopt_cli_test_" + std::to_string(::getpid())); }

struct RemoveScratch {
  ~RemoveScratch() {
    std::error_code ec;
    fs::remove_all(scratch_root(), ec);
  }
} remove_scratch;

fs::path scratch(const std::string& name) {
  const fs::path p = scratch_root() / name;
  fs::remove_all(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(SWIMOPT_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::string l;
  std::getline(in, l);
  return l;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

app::RunConfig resolved(const std::string& command, const std::string& overrides = "") {
  Config tree = app::default_config(command);
  if (!overrides.empty()) app::merge_config(tree, Config::parse_string(overrides));
  return app::resolve(command, tree);
}

// Small, fast settings shared by the end-to-end runs.
const std::string kQuick =
    "--mesh-level 0 --set stroke.phases=2 --set constraints.mc_samples=20000 --set trajectory.steps=32";
const std::string kTinyOptimize = kQuick + " --budget 3 --set optimize.head=false --set optimize.slots=wavelength";

}  // namespace

TEST_CASE("configuration defaults and derived values") {
  const app::RunConfig rc = resolved("optimize");
  CHECK(rc.mesh_level == 1);
  CHECK(rc.scbo.budget == 150);
  CHECK(rc.scbo.batch == 15);
  CHECK(rc.scbo.n_init == 144);
  CHECK(rc.scbo.candidates == 5000);
  CHECK(rc.scbo.perturb == doctest::Approx(20.0 / 48));
  CHECK(rc.scbo.tau_failure == 4);
  CHECK(rc.scbo.tau_success == 3);
  CHECK(rc.scbo.length_init == 0.8);
  CHECK(rc.scbo.length_min == std::pow(0.5, 7));
  CHECK(rc.scbo.length_max == 1.6);
  CHECK(rc.constraints.volume_tolerance == 0.01);
  CHECK(rc.constraints.trajectory_tolerance == 0.001);
  CHECK(rc.constraints.mc_samples == 1000000);
  CHECK(rc.trajectory.n_periods == 2);
  CHECK(rc.field.n == 61);
  CHECK(rc.resolved.get_string("optimize.n_init", "") == "144");
  CHECK(resolved("evaluate").mesh_level == MeshResolution::kDefaultLevel);

  SUBCASE("small designs") {
    const app::RunConfig r = resolved("optimize", "optimize {\n head = false\n slots = wavelength alpha\n}\n");
    CHECK(r.scbo.n_init == 6);
    CHECK(r.scbo.candidates == 2000);
    CHECK(r.scbo.perturb == 1.0);
    CHECK(r.scbo.tau_failure == 2);
  }
  SUBCASE("two flagella start from a mirror pair") {
    const app::RunConfig r = resolved("optimize", "optimize {\n n_flagella = 2\n}\n");
    CHECK(r.spec.mirror);
    CHECK(r.spec.num_flagella() == 2);
    CHECK(r.spec.flagella.front().alpha == doctest::Approx(0.4 * kPi));
  }
  SUBCASE("explicit values override the derived ones") {
    const app::RunConfig r = resolved("optimize", "optimize {\n n_init = 150\n tau_failure = 7\n}\n");
    CHECK(r.scbo.n_init == 150);
    CHECK(r.scbo.tau_failure == 7);
  }
}

TEST_CASE("configuration errors") {
  Config tree = app::default_config("evaluate");
  CHECK_THROWS_AS(app::merge_config(tree, Config::parse_string("bem {\n duffy = 3\n}\n")), ConfigError);
  CHECK_THROWS_AS(app::merge_config(tree, Config::parse_string("budget = 3\n")), ConfigError);
  CHECK_THROWS_AS(resolved("evaluate", "mesh {\n level = 9\n}\n"), ConfigError);
  CHECK_THROWS_AS(resolved("optimize", "optimize {\n objective = J3\n}\n"), ConfigError);
  CHECK_THROWS_AS(resolved("optimize", "optimize {\n budget = 100\n}\n"), ConfigError);
  CHECK_THROWS_AS(resolved("optimize", "optimize {\n slots = radius\n}\n"), ConfigError);
  CHECK_THROWS_AS(resolved("evaluate", "preset = nothing\n"), Error);
  CHECK_THROWS_AS(resolved("evaluate", "bem {\n viscosity = -1\n}\n"), ConfigError);
}

TEST_CASE("a swimmer block replaces the preset") {
  Config tree = app::default_config("evaluate");
  Config over;
  over.replace_blocks("swimmer", spec_to_config(presets::ellipsoid_bi(0.3 * kPi)));
  app::merge_config(tree, over);
  const app::RunConfig rc = app::resolve("evaluate", tree);
  CHECK(rc.spec.num_flagella() == 2);
  CHECK(rc.spec.flagella.front().alpha == doctest::Approx(0.3 * kPi));
}

TEST_CASE("objective selector") {
  StrokeAverages ref, a;
  ref.U = Vec3(-0.03, 0, 0);
  ref.P = -25;
  a.U = Vec3(-0.06, 0, 0);
  a.P = -40;
  a.head_volume = 4 * kPi / 3;
  CHECK(app::objective_value(app::Objective::J1, a, ref) == doctest::Approx(-2));
  CHECK(app::objective_value(app::Objective::J2, a, ref) == doctest::Approx(-1.25));
  CHECK(app::objective_value(app::Objective::InverseEfficiency, a, ref) ==
        doctest::Approx(40 / (6 * kPi * 0.0036)));
  for (auto o : {app::Objective::J1, app::Objective::J2, app::Objective::InverseEfficiency})
    CHECK(app::parse_objective(app::objective_name(o)) == o);
}

TEST_CASE("evaluate the reference swimmer in process") {
  app::RunConfig rc = resolved("evaluate", "mesh {\n level = 0\n}\nconstraints {\n mc_samples = 20000\n}\n");
  rc.out.clear();
  std::ostringstream log;
  const app::EvaluateReport r = app::evaluate(rc, log);
  REQUIRE(r.solved);
  CHECK(r.J1 == -1.0);
  CHECK(r.J2 == -1.0);
  CHECK(r.feasible);
  CHECK(r.avg.U(0) < 0);
  CHECK(r.trajectory.x.size() == 2 * 64 + 1);
}

TEST_CASE("mirror biflagellate trajectory has no lateral excursion") {
  Config tree = app::default_config("evaluate");
  app::merge_config(tree, Config::parse_string("preset = ellipsoid-bi\nmesh {\n level = 0\n}\n"
                                               "constraints {\n mc_samples = 20000\n}\n"));
  app::RunConfig rc = app::resolve("evaluate", tree);
  rc.out.clear();
  std::ostringstream log;
  const app::EvaluateReport r = app::evaluate(rc, log);
  REQUIRE(r.solved);
  CHECK(r.lateral_per_period < rc.constraints.trajectory_tolerance * r.avg.period());
}

TEST_CASE("exit codes") {
  CHECK(run("") == app::kUsage);
  CHECK(run("frobnicate") == app::kUsage);
  CHECK(run("evaluate --set bem.nothing=1") == app::kUsage);
  CHECK(run("evaluate --mesh-level 9") == app::kUsage);
  CHECK(run("optimize --objective J3") == app::kUsage);
  CHECK(run("optimize --n-flagella 3") == app::kUsage);
  CHECK(run("evaluate --preset nothing") == app::kUsage);
  CHECK(run("--version") == 0);
  const fs::path d = scratch("exit_solver");
  CHECK(run("evaluate " + kQuick + " --set bem.max_condition=1 --out " + d.string()) == app::kSolverFailure);
  const fs::path none = scratch("exit_infeasible");
  CHECK(run("optimize " + kTinyOptimize + " --set constraints.trajectory_tolerance=1e-300 --out " + none.string()) ==
        app::kNoFeasible);
  // the least violating point is still exported
  CHECK(fs::exists(none / "best_spec.txt"));
}

TEST_CASE("environment overrides sit between the config file and the flags") {
  ::setenv("SWIMOPT_OPTIMIZE__BUDGET", "2", 1);
  CHECK(run("optimize " + kTinyOptimize.substr(0, kTinyOptimize.find(" --budget")) +
            " --set optimize.head=false --set optimize.slots=wavelength --out " + scratch("env").string()) ==
        app::kUsage);
  CHECK(run("optimize " + kTinyOptimize + " --out " + scratch("env_flag").string()) == app::kSuccess);
  ::unsetenv("SWIMOPT_OPTIMIZE__BUDGET");
}

TEST_CASE("validate-sphere output and tolerance failure") {
  const fs::path d = scratch("sphere");
  CHECK(run("validate-sphere --set \"validate.sphere_levels=0 1\" --out " + d.string()) == app::kValidationFailed);
  CHECK(first_line(d / "sphere.csv") == "level,head_refine,triangles,nodes,drag_error,torque_error,rcond,seconds");
  CHECK(fs::exists(d / "manifest.txt"));
}

TEST_CASE("evaluate outputs and manifest round trip") {
  const fs::path d = scratch("evaluate");
  REQUIRE(run("evaluate " + kQuick + " --field-grid --set field.n=5 --out " + d.string()) == app::kSuccess);
  CHECK(first_line(d / "phases.csv") == "phase,U1,U2,U3,Omega1,Omega2,Omega3,P,residual");
  CHECK(first_line(d / "trajectory.csv") == "t,x,y,z,r00,r01,r02,r10,r11,r12,r20,r21,r22");
  CHECK(first_line(d / "field.csv") == "x,y,z,ux,uy,uz,near");
  CHECK(first_line(d / "report.txt") == "solved = true");
  for (const char* f : {"head.obj", "head.vtk", "flagellum1.obj", "flagellum1.vtk"}) CHECK(fs::exists(d / f));

  const Config report = Config::load((d / "report.txt").string());
  CHECK(report.get_double("J1", 0) == -1.0);
  CHECK(report.get_double("J2", 0) == -1.0);
  CHECK(report.get_string("feasible", "") == "true");

  const Config manifest = Config::load((d / "manifest.txt").string());
  CHECK(manifest.get_string("run.command", "") == "evaluate");
  CHECK(manifest.get_string("run.version", "") == app::kVersion);
  CHECK(manifest.get_string("run.config_hash", "").size() == 16);
  CHECK(manifest.get_string("mesh.level", "") == "0");
  CHECK(manifest.get_string("run.overrides", "").find("stroke.phases") != std::string::npos);

  const fs::path again = scratch("evaluate_again");
  REQUIRE(run("evaluate --config " + (d / "manifest.txt").string() + " --out " + again.string()) == app::kSuccess);
  CHECK(slurp(again / "report.txt") == slurp(d / "report.txt"));
  CHECK(slurp(again / "phases.csv") == slurp(d / "phases.csv"));
  const Config m2 = Config::load((again / "manifest.txt").string());
  CHECK(m2.get_string("run.config_hash", "") != "");
}

TEST_CASE("optimize outputs, resume and determinism") {
  const fs::path d = scratch("optimize");
  REQUIRE(run("optimize " + kTinyOptimize + " --seed 4 --out " + d.string()) == app::kSuccess);
  CHECK(first_line(d / "history.csv") ==
        "eval_index,batch,x0,J,c_volume,c_drift_u2,c_drift_u3,c_collision,feasible,L,center_index,elapsed_s");
  CHECK(first_line(d / "convergence.csv") == "eval_index,J,best_feasible_J");
  CHECK(first_line(d / "parameters.csv") == "index,label,lower,upper");
  CHECK(fs::exists(d / "best_spec.txt"));
  CHECK(fs::exists(d / "best_head.obj"));
  CHECK(fs::exists(d / "report.txt"));

  // the reference swimmer is evaluated first and references itself
  std::ifstream h(d / "history.csv");
  std::string line;
  std::getline(h, line);
  std::getline(h, line);
  CHECK(line.rfind("0,0,", 0) == 0);
  CHECK(line.find(",-1,") != std::string::npos);

  // the best spec is a valid swimmer file
  CHECK_NOTHROW(spec_from_config(Config::load((d / "best_spec.txt").string())));

  // convergence column is non-increasing
  std::ifstream cv(d / "convergence.csv");
  std::getline(cv, line);
  double prev = std::numeric_limits<double>::infinity();
  while (std::getline(cv, line)) {
    const double b = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(b <= prev);
    prev = b;
  }

  const fs::path again = scratch("optimize_again");
  REQUIRE(run("optimize " + kTinyOptimize + " --seed 4 --out " + again.string()) == app::kSuccess);
  auto strip_time = [](const std::string& csv) {
    std::stringstream in(csv), out;
    for (std::string l; std::getline(in, l);) out << l.substr(0, l.rfind(',')) << '\n';
    return out.str();
  };
  CHECK(strip_time(slurp(again / "history.csv")) == strip_time(slurp(d / "history.csv")));

  const fs::path resumed = scratch("optimize_resumed");
  REQUIRE(run("optimize " + kTinyOptimize + " --seed 4 --resume " + (d / "history.csv").string() + " --out " +
              resumed.string()) == app::kSuccess);
  CHECK(strip_time(slurp(resumed / "history.csv")) == strip_time(slurp(d / "history.csv")));
}
