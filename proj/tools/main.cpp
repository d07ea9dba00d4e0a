#include <string>
#include <vector>

#include "CLI11.hpp"
#include "squall/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"singular quasilinear elliptic systems: solves, barriers, "
               "invariant-box fixed-point runs, estimate validation, sweeps"};
  app.require_subcommand(1);

  squall::RunConfig cfg;
  std::vector<double> singular_args;

  auto add_common = [&](CLI::App* cmd, bool needs_spec) {
    cmd->add_option("--mesh-n", cfg.mesh_n, "nodes per axis")
        ->capture_default_str();
    cmd->add_option("--dim", cfg.dim, "domain dimension (1 or 2)")
        ->capture_default_str();
    cmd->add_option("--extent", cfg.extent,
                    "domain bounds: a b (1D) or ax bx ay by (2D)")
        ->expected(2, 4);
    cmd->add_option("--tol", cfg.tol, "outer iteration tolerance")
        ->capture_default_str();
    cmd->add_option("--max-iter", cfg.max_iter, "outer iteration cap")
        ->capture_default_str();
    cmd->add_option("--damping", cfg.damping, "fixed-point damping in (0, 1]")
        ->capture_default_str();
    cmd->add_option("--solver-tol", cfg.solver_tol,
                    "inner stationarity tolerance")
        ->capture_default_str();
    cmd->add_option("--out", cfg.out_dir, "output directory")
        ->capture_default_str();
    cmd->add_flag("--plots", cfg.plots, "emit SVG plots");
    cmd->add_option("--workers", cfg.workers, "concurrent sweep cells")
        ->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "calibration sampling seed")
        ->capture_default_str();
    cmd->add_option("--samples", cfg.samples,
                    "calibration sample count (validate)")
        ->capture_default_str();
    if (needs_spec)
      cmd->add_option("--spec", cfg.spec_path, "problem config file")
          ->required();
  };

  CLI::App* solve = app.add_subcommand(
      "solve", "one frozen-coefficient solve with a chosen load");
  add_common(solve, false);
  solve->add_option("--p", cfg.p, "exponent of the operator")
      ->capture_default_str();
  auto* load_const = solve->add_option("--load-const", cfg.load_value,
                                       "constant load value");
  auto* load_singular = solve->add_option(
      "--load-singular", singular_args,
      "singular load c0 c1 mu: c0 + c1 * dist^mu at cell centers");
  load_singular->expected(3);
  auto* load_csv = solve->add_option("--load-csv", cfg.load_csv,
                                     "nodal load from a field CSV");
  load_singular->excludes(load_const)->excludes(load_csv);
  load_const->excludes(load_csv);

  CLI::App* barriers = app.add_subcommand(
      "barriers", "build and verify the comparison fields");
  add_common(barriers, true);

  CLI::App* fixpoint = app.add_subcommand(
      "fixpoint", "damped invariant-box iteration for the full system");
  add_common(fixpoint, true);

  CLI::App* validate = app.add_subcommand(
      "validate", "admissibility report plus gradient-bound calibration");
  add_common(validate, true);

  CLI::App* sweep =
      app.add_subcommand("sweep", "grid of fixpoint runs over parameters");
  add_common(sweep, true);
  sweep->add_option("--param", cfg.sweep_params,
                    "swept parameter as name=lo:hi:count (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return squall::exit_parse;
  }

  CLI::App* active = app.get_subcommands().front();
  cfg.command = active->get_name();
  if (active == solve) {
    if (load_singular->count() > 0) {
      cfg.load_kind = squall::LoadKind::singular;
      cfg.load_c0 = singular_args[0];
      cfg.load_c1 = singular_args[1];
      cfg.load_mu = singular_args[2];
    } else if (load_csv->count() > 0) {
      cfg.load_kind = squall::LoadKind::csv;
    } else {
      cfg.load_kind = squall::LoadKind::constant;
    }
  }
  return squall::run(cfg);
}
