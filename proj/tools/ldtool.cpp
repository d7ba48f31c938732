#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "presets.hpp"

namespace {

using namespace ldtool;

void add_system(CLI::App* app, SystemOpts& o) {
  app->add_option("--system", o.system, "builtin system id")->required();
  app->add_option("--param", o.params, "system parameter key=value (repeatable)");
}

void add_config(CLI::App* app, ConfigOpts& o) {
  app->add_option("--kind", o.kind, "descriptor: mp, arclength or lavd")->capture_default_str();
  app->add_option("--p", o.p, "exponent of M_p, in (0, 1]")->capture_default_str();
  app->add_flag("--auto-p", o.auto_p, "choose p = 1/(tau |lambda - mu|), clamped to 1");
  app->add_option("--lambda", o.lambda, "lambda for --auto-p (default: system parameter)");
  app->add_option("--mu", o.mu, "mu for --auto-p (default: system parameter)");
  app->add_option("--tau", o.tau, "integration horizon")->capture_default_str();
  app->add_option("--t0", o.t0, "base time")->capture_default_str();
  app->add_option("--step", o.step, "RK4 step h")->capture_default_str();
  app->add_option("--max-steps", o.max_steps, "step budget per leg")->capture_default_str();
  app->add_option("--box", o.box, "safety box half-width")->capture_default_str();
}

void add_run(CLI::App* app, RunOpts& o) {
  app->add_option("--threads", o.threads, "worker threads (0: machine parallelism)")->capture_default_str();
  app->add_option("--created", o.created, "timestamp written to field headers (default: SOURCE_DATE_EPOCH or epoch)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian descriptor fields, transects, convergence studies and figure data"};
  app.require_subcommand(1);
  app.allow_windows_style_options(false);

  FieldOpts field;
  auto* f = app.add_subcommand("field", "compute a descriptor field on a grid");
  add_system(f, field.sys);
  add_config(f, field.cfg);
  add_run(f, field.run);
  f->add_option("--grid", field.grid, "lo..hi:n for each free axis, in axis order (repeatable)")
      ->allow_extra_args(false);
  f->add_option("--slice", field.slice, "hold an axis fixed, axis=value (repeatable)")->allow_extra_args(false);
  f->add_flag("--average", field.average, "divide by the averaging time (2 tau, or tau for lavd)");
  f->add_option("--derivative", field.derivative, "write the finite-difference derivative along this axis");
  f->add_option("--out", field.out, "field CSV path")->capture_default_str();
  f->add_option("--matrix-out", field.matrix_out, "also write a gnuplot nonuniform matrix (2D fields)");

  TransectOpts tr;
  auto* t = app.add_subcommand("transect", "sample the descriptor along a line and flag singular features");
  add_system(t, tr.sys);
  add_config(t, tr.cfg);
  add_run(t, tr.run);
  t->add_option("--anchor", tr.anchor, "line centre, comma separated")->required();
  t->add_option("--direction", tr.direction, "line direction, comma separated")->capture_default_str();
  t->add_option("--half-width", tr.half_width, "offsets run over [-w, w]")->capture_default_str();
  t->add_option("--samples", tr.samples, "odd number of samples")->capture_default_str();
  t->add_option("--kappa", tr.kappa, "jump-ratio threshold")->capture_default_str();
  t->add_option("--out", tr.out, "transect CSV path")->capture_default_str();

  ConvergeOpts cv;
  auto* c = app.add_subcommand("converge", "time averages against tau with a convergence verdict");
  add_system(c, cv.sys);
  add_config(c, cv.cfg);
  add_run(c, cv.run);
  c->add_option("--x0", cv.x0, "initial condition (base point for --line)")->required();
  c->add_option("--line", cv.line, "from..to:n, varied along --along");
  c->add_option("--along", cv.along, "axis varied by --line");
  c->add_option("--tau-max", cv.tau_max, "largest horizon")->capture_default_str();
  c->add_option("--tau-samples", cv.tau_samples, "number of horizons (0: ten per unit tau)")->capture_default_str();
  c->add_option("--window", cv.window, "convergence window in tau")->capture_default_str();
  c->add_option("--eps", cv.eps, "relative oscillation tolerance")->capture_default_str();
  c->add_option("--out-dir", cv.out_dir, "output directory")->capture_default_str();

  InvarianceOpts iv;
  auto* i = app.add_subcommand("invariance", "check that a field is constant along a trajectory");
  i->add_option("--system", iv.sys.system, "system id (default: from the field header)");
  i->add_option("--param", iv.sys.params, "system parameter key=value (repeatable)");
  i->add_option("--seed", iv.seed, "trajectory start, comma separated")->required();
  i->add_option("--t-span", iv.t_span, "integration time")->capture_default_str();
  i->add_option("--field", iv.field, "field CSV written by 'field'")->required();
  i->add_option("--tol", iv.tol, "tolerance (default: 3 x field change across the seed's grid cell)");
  i->add_option("--step", iv.step, "RK4 step (default: the field's)");
  i->add_option("--out", iv.out, "report path")->capture_default_str();

  std::string figure;
  std::string out_dir = "repro";
  RunOpts rp;
  auto* r = app.add_subcommand("reproduce", "run a pinned figure recipe");
  r->add_option("figure", figure, "fig1 ... fig17")->required();
  r->add_option("--out-dir", out_dir, "output root")->capture_default_str();
  add_run(r, rp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*f) return cmd_field(field);
    if (*t) return cmd_transect(tr);
    if (*c) return cmd_converge(cv);
    if (*i) return cmd_invariance(iv);
    if (*r) return cmd_reproduce(figure, out_dir, rp);
  } catch (const lagdesc::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const lagdesc::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const lagdesc::NotAvailableError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
