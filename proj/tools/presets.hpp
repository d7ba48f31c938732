#pragma once

// Pinned recipes for the figure data. Grids are reduced from figure quality
// where a full-resolution run would take more than a few minutes on one core;
// README lists every reduction.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "commands.hpp"

namespace ldtool {

struct PresetContext {
  std::filesystem::path dir;
  RunOpts run;
  std::ostream* log = &std::cout;

  [[nodiscard]] std::string path(const std::string& name) const { return (dir / name).string(); }
};

namespace presets {

inline const std::string kTwoPi = "6.2831853071795862";
inline const std::vector<std::string> kAbcParams = {"A=1", "B=0.81649658092772603", "C=0.57735026918962573"};

inline FieldOpts field(const PresetContext& ctx, std::string system, std::vector<std::string> params, ConfigOpts cfg,
                       std::vector<std::string> grid, const std::string& name, std::vector<std::string> slice = {}) {
  FieldOpts o;
  o.sys = {std::move(system), std::move(params)};
  o.cfg = std::move(cfg);
  o.run = ctx.run;
  o.grid = std::move(grid);
  o.slice = std::move(slice);
  o.out = ctx.path(name + ".csv");
  if (o.grid.size() == 2) o.matrix_out = ctx.path(name + ".matrix");
  return o;
}

inline ConfigOpts mp(double p, double tau, double h) {
  ConfigOpts c;
  c.p = p;
  c.tau = tau;
  c.step = h;
  return c;
}

inline ConfigOpts arclength(double tau, double h) {
  ConfigOpts c;
  c.kind = "arclength";
  c.tau = tau;
  c.step = h;
  return c;
}

inline TransectOpts y_line(const PresetContext& ctx, std::string system, std::vector<std::string> params,
                           ConfigOpts cfg, double half_width, const std::string& name) {
  TransectOpts o;
  o.sys = {std::move(system), std::move(params)};
  o.cfg = std::move(cfg);
  o.run = ctx.run;
  o.anchor = "0,0.5";
  o.half_width = half_width;
  o.samples = 401;
  o.out = ctx.path(name + ".csv");
  return o;
}

inline const std::vector<std::string> kSquare201 = {"-1..1:201", "-1..1:201"};

inline void fig1(const PresetContext& c) {
  cmd_field(field(c, "linear-saddle", {"lambda=1"}, mp(0.5, 15, 0.1), {"-1..1:401", "-1..1:401"}, "mp_tau15"),
            *c.log);
  cmd_transect(y_line(c, "linear-saddle", {"lambda=1"}, mp(0.5, 15, 0.1), 1.0, "transect_y0.5"), *c.log);
}

inline const std::vector<std::pair<std::string, double>> kRotatedTaus = {
    {"0.005", 0.005}, {"1", 1.0}, {"2.5", 2.5}, {"5", 5.0}};

inline void fig2(const PresetContext& c) {
  for (const auto& [label, tau] : kRotatedTaus)
    cmd_field(field(c, "rotated-saddle", {}, mp(0.5, tau, 0.005), kSquare201, "mp_tau" + label), *c.log);
}

inline void fig3(const PresetContext& c) {
  for (const auto& [label, tau] : kRotatedTaus)
    cmd_transect(y_line(c, "rotated-saddle", {}, mp(0.5, tau, 0.005), 1.0, "transect_tau" + label), *c.log);
}

inline void fig4(const PresetContext& c) {
  const std::vector<std::string> params = {"lambda=2", "mu=1"};
  cmd_field(field(c, "nonham-saddle", params, mp(0.5, 15, 0.01), kSquare201, "mp0.5_tau15"), *c.log);
  ConfigOpts auto_p = mp(0.5, 15, 0.01);
  auto_p.auto_p = true;
  cmd_field(field(c, "nonham-saddle", params, auto_p, kSquare201, "mp_auto_tau15"), *c.log);
}

inline void fig5(const PresetContext& c) {
  cmd_field(field(c, "global-attractor", {}, mp(0.5, 15, 0.01), kSquare201, "mp0.5_tau15"), *c.log);
  cmd_field(field(c, "global-attractor", {}, arclength(15, 0.01), kSquare201, "arclength_tau15"), *c.log);
  cmd_transect(y_line(c, "global-attractor", {}, mp(0.5, 15, 0.01), 1.0, "transect_mp0.5"), *c.log);
  cmd_transect(y_line(c, "global-attractor", {}, arclength(15, 0.01), 1.0, "transect_arclength"), *c.log);
}

inline void fig6(const PresetContext& c) {
  const std::vector<std::string> params = {"lambda=2", "mu=1"};
  for (const char* axis : {"x", "y"}) {
    FieldOpts o = field(c, "nonham-saddle", params, mp(0.5, 15, 0.01), kSquare201, std::string("dmp_d") + axis + "0");
    o.derivative = axis;
    cmd_field(o, *c.log);
  }
}

inline void fig7(const PresetContext& c) {
  const std::vector<std::string> grid = {"-2..2:201", "-2..2:201"};
  cmd_field(field(c, "harmonic-oscillator", {}, arclength(10, 0.01), grid, "arclength_tau10"), *c.log);
  cmd_field(field(c, "harmonic-oscillator", {}, mp(1.0, 10, 0.01), grid, "mp1_tau10"), *c.log);
}

inline void fig8(const PresetContext& c) {
  const std::string axis = "0.." + kTwoPi + ":41";
  cmd_field(field(c, "abc", kAbcParams, arclength(30, 0.05), {axis, axis, axis}, "arclength_tau30"), *c.log);
  cmd_field(field(c, "abc", kAbcParams, mp(1.0, 30, 0.05), {axis, axis, axis}, "mp1_tau30"), *c.log);
}

inline void fig9(const PresetContext& c) {
  const std::string axis = "0.." + kTwoPi + ":201";
  for (const char* plane : {"y", "z"}) {
    const std::vector<std::string> slice = {std::string(plane) + "=0"};
    cmd_field(field(c, "abc", kAbcParams, arclength(30, 0.05), {axis, axis}, std::string("arclength_") + plane + "0",
                    slice),
              *c.log);
    cmd_field(field(c, "abc", kAbcParams, mp(1.0, 30, 0.05), {axis, axis}, std::string("mp1_") + plane + "0", slice),
              *c.log);
  }
}

inline const std::vector<std::string> kEllipticBox = {"2.2..4.2:81", "3.6..5.9:93"};

inline void fig10(const PresetContext& c) {
  FieldOpts m = field(c, "abc", kAbcParams, arclength(75, 0.05), kEllipticBox, "avg_arclength_tau75", {"x=0"});
  m.average = true;
  cmd_field(m, *c.log);
  FieldOpts m1 = field(c, "abc", kAbcParams, mp(1.0, 100, 0.05), kEllipticBox, "avg_mp1_tau100", {"x=0"});
  m1.average = true;
  cmd_field(m1, *c.log);
}

inline ConvergeOpts ic_line(const PresetContext& c, ConfigOpts cfg, double tau_max, const std::string& line,
                            const std::string& sub) {
  ConvergeOpts o;
  o.sys = {"abc", kAbcParams};
  o.cfg = std::move(cfg);
  o.run = c.run;
  o.x0 = "0,3.2,0";
  o.line = line;
  o.along = "z";
  o.tau_max = tau_max;
  o.out_dir = c.path(sub);
  return o;
}

inline void fig11(const PresetContext& c) {
  cmd_converge(ic_line(c, arclength(1, 0.05), 75, "3.6..5.9:24", "arclength"), *c.log);
  cmd_converge(ic_line(c, mp(1.0, 1, 0.05), 100, "3.6..5.9:24", "mp1"), *c.log);
}

inline void fig12(const PresetContext& c) {
  cmd_converge(ic_line(c, arclength(1, 0.05), 500, "5.5..5.9:5", "chaotic_arclength"), *c.log);
}

inline void fig13(const PresetContext& c) {
  const std::string axis = "0.." + kTwoPi + ":101";
  FieldOpts f = field(c, "abc", kAbcParams, mp(1.0, 100, 0.05), {axis, axis}, "avg_mp1_x0", {"x=0"});
  f.average = true;
  cmd_field(f, *c.log);
  InvarianceOpts inv;
  inv.seed = "0,3.2,4.1";
  inv.t_span = 200;
  inv.field = f.out;
  inv.out = c.path("invariance.txt");
  cmd_invariance(inv, *c.log);

  const VectorField abc = build_system({"abc", kAbcParams});
  IntegratorConfig ic;
  ic.step = 0.05;
  const Trajectory tr = integrate(abc, Point{0.0, 3.2, 4.1}, 0.0, 200.0, ic);
  std::ofstream os(c.path("trajectory.csv"), std::ios::trunc);
  os << "t,x,y,z\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    os << fmt(tr.times[i]) << ',' << fmt(tr.states[i]) << '\n';
}

inline void velocity_samples(const VectorField& f, double t, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot write '" + path + "'");
  os << "x,y,u,v\n";
  const GridAxis ax = GridAxis::range(-1.0, 1.0, 21);
  for (std::size_t j = 0; j < ax.n; ++j)
    for (std::size_t i = 0; i < ax.n; ++i) {
      const Point x{ax.coord(i), ax.coord(j)};
      const Point v = f.evaluate(x, t);
      os << fmt(x) << ',' << fmt(v) << '\n';
    }
}

inline void fig16(const PresetContext& c) {
  const VectorField sysob = build_system({"rotating-saddle", {"omega=2"}});
  velocity_samples(sysob, 0.0, c.path("velocity_rotating_saddle_t0.csv"));
  velocity_samples(transform_field(sysob, RotatingFrame{2.0, -1}), 0.0, c.path("velocity_frame_image_t0.csv"));
  // LAVD of the rest field and of its rotating-frame image.
  ConfigOpts lavd;
  lavd.kind = "lavd";
  lavd.tau = 10;
  lavd.step = 0.01;
  cmd_field(field(c, "rest", {}, lavd, kSquare201, "lavd_rest"), *c.log);
  cmd_field(field(c, "harmonic-oscillator", {}, lavd, kSquare201, "lavd_harmonic_oscillator"), *c.log);
}

inline void fig17(const PresetContext& c) {
  for (const auto& [label, t0] : std::vector<std::pair<std::string, double>>{{"0", 0.0}, {"pi_8", std::numbers::pi / 8}}) {
    ConfigOpts cfg = mp(0.5, 10, 0.01);
    cfg.t0 = t0;
    cmd_field(field(c, "rotating-saddle", {"omega=2"}, cfg, kSquare201, "mp0.5_t" + label), *c.log);
    cmd_transect(y_line(c, "rotating-saddle", {"omega=2"}, cfg, 0.5, "transect_t" + label), *c.log);
  }
}

}  // namespace presets

inline const std::map<std::string, std::function<void(const PresetContext&)>>& preset_table() {
  static const std::map<std::string, std::function<void(const PresetContext&)>> table = {
      {"fig1", presets::fig1},   {"fig2", presets::fig2},   {"fig3", presets::fig3},   {"fig4", presets::fig4},
      {"fig5", presets::fig5},   {"fig6", presets::fig6},   {"fig7", presets::fig7},   {"fig8", presets::fig8},
      {"fig9", presets::fig9},   {"fig10", presets::fig10}, {"fig11", presets::fig11}, {"fig12", presets::fig12},
      {"fig13", presets::fig13}, {"fig16", presets::fig16}, {"fig17", presets::fig17},
  };
  return table;
}

inline int cmd_reproduce(const std::string& figure, const std::filesystem::path& out_dir, const RunOpts& run,
                         std::ostream& log = std::cout) {
  const auto& table = preset_table();
  const auto it = table.find(figure);
  if (it == table.end()) {
    std::string known;
    for (const auto& [k, v] : table) known += (known.empty() ? "" : ", ") + k;
    throw ValidationError("unknown figure '" + figure + "' (known: " + known + ")");
  }
  Manifest m("reproduce");
  m.add("figure", figure);
  PresetContext ctx{out_dir / figure, run, &log};
  std::filesystem::create_directories(ctx.dir);
  it->second(ctx);
  m.add("output_dir", ctx.dir.string());
  m.write(ctx.path("manifest.txt"));
  return 0;
}

}  // namespace ldtool
