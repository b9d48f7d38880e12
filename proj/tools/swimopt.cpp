// swimopt: validation, evaluation and shape optimization of flagellated swimmers.

#include "swimopt/app.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Flags {
  std::string config;
  std::optional<long long> seed, budget, mesh_level, threads;
  std::optional<std::string> out, preset, spec, objective, resume;
  std::optional<int> n_flagella;
  bool field = false;
  std::vector<std::string> set;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Configuration file (a run manifest works too)");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--mesh-level", f.mesh_level, "Mesh ladder level 0-4");
  cmd->add_option("--threads", f.threads, "Worker threads (0: all)");
  cmd->add_option("--set", f.set, "Override any parameter, e.g. --set bem.duffy_order=6")->type_name("PATH=VALUE");
}

swimopt::Config overrides(const Flags& f) {
  swimopt::Config c;
  if (f.seed) c.set("seed", std::to_string(*f.seed));
  if (f.budget) c.set("optimize.budget", std::to_string(*f.budget));
  if (f.mesh_level) c.set("mesh.level", std::to_string(*f.mesh_level));
  if (f.threads) c.set("threads", std::to_string(*f.threads));
  if (f.out) c.set("out", *f.out);
  if (f.preset) c.set("preset", *f.preset);
  if (f.spec) c.set("spec", *f.spec);
  if (f.resume) c.set("optimize.resume", *f.resume);
  if (f.objective) c.set("optimize.objective", *f.objective);
  if (f.n_flagella) c.set("optimize.n_flagella", std::to_string(*f.n_flagella));
  if (f.field) c.set("field.enabled", "true");
  for (const auto& kv : f.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw swimopt::ConfigError("--set expects PATH=VALUE, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  namespace app = swimopt::app;
  std::cout.setf(std::ios::unitbuf);
  CLI::App cli{"Boundary-element evaluation and Bayesian shape optimization of flagellated micro-swimmers"};
  cli.set_version_flag("--version", app::kVersion);
  cli.require_subcommand(1);
  Flags f;

  auto* sphere = cli.add_subcommand("validate-sphere", "Resistance of the unit sphere at several mesh levels");
  auto* mono = cli.add_subcommand("validate-mono", "Slender-flagellum sweep over the number of wavelengths");
  auto* bi = cli.add_subcommand("validate-bi", "Junction-angle sweep of the mirror biflagellate");
  auto* eval = cli.add_subcommand("evaluate", "Stroke averages, costs, constraints and trajectory of one swimmer");
  auto* opt = cli.add_subcommand("optimize", "Constrained trust-region Bayesian optimization of the shape");
  for (auto* c : {sphere, mono, bi, eval, opt}) add_common(c, f);
  for (auto* c : {eval, opt}) {
    c->add_option("--preset", f.preset, "Swimmer preset")
        ->check(CLI::IsMember(swimopt::presets::names()));
    c->add_option("--spec", f.spec, "Swimmer spec file");
  }
  eval->add_flag("--field-grid", f.field, "Also export the velocity field in the plane y = 0");
  opt->add_option("--budget", f.budget, "Number of evaluations");
  opt->add_option("--objective", f.objective, "J1, J2 or inv_eff")->check(CLI::IsMember({"J1", "J2", "inv_eff"}));
  opt->add_option("--resume", f.resume, "Replay the evaluations of an earlier history.csv before continuing");
  opt->add_option("--n-flagella", f.n_flagella, "1 or 2 (mirror pair)")->check(CLI::Range(1, 2));

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::kUsage;
  }
  const std::string command = cli.get_subcommands().front()->get_name();

  app::RunConfig rc;
  try {
    swimopt::Config tree = app::default_config(command);
    if (!f.config.empty()) app::merge_config(tree, swimopt::Config::load(f.config));
    swimopt::Config env;
    env.apply_env("SWIMOPT_");
    app::merge_config(tree, env);
    app::merge_config(tree, overrides(f));
    rc = app::resolve(command, std::move(tree));
  } catch (const swimopt::Error& e) {
    std::cerr << "swimopt: " << e.what() << '\n';
    return app::kUsage;
  }

  try {
    const int code = app::run_command(rc, std::cout);
    if (!rc.out.empty()) std::cout << "outputs in " << rc.out << '\n';
    return code;
  } catch (const swimopt::ConfigError& e) {
    std::cerr << "swimopt: configuration error: " << e.what() << '\n';
    return app::kUsage;
  } catch (const swimopt::ParameterError& e) {
    std::cerr << "swimopt: invalid parameter: " << e.what() << '\n';
    return app::kUsage;
  } catch (const swimopt::EncodingError& e) {
    std::cerr << "swimopt: invalid parameter: " << e.what() << '\n';
    return app::kUsage;
  } catch (const swimopt::Error& e) {
    std::cerr << "swimopt: solver failure: " << e.what() << '\n';
    return app::kSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "swimopt: " << e.what() << '\n';
    return app::kSolverFailure;
  }
}
