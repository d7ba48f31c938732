#pragma once

// Subcommand implementations shared by the CLI parser and the figure presets.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lagdesc/lagdesc.hpp"

namespace ldtool {

using namespace lagdesc;

/// Runtime failure that maps to exit code 2 after outputs were written.
class RunFailure : public Error {
 public:
  using Error::Error;
};

inline std::string fmt(double v) { return io_detail::fmt(v); }

inline std::string fmt(const Point& x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + fmt(x[i]);
  return s;
}

class Manifest {
 public:
  explicit Manifest(std::string subcommand) : start_(std::chrono::steady_clock::now()) {
    add("subcommand", std::move(subcommand));
  }
  void add(std::string key, std::string value) { entries_.emplace_back(std::move(key), std::move(value)); }
  void add(std::string key, double value) { add(std::move(key), fmt(value)); }
  void add_output(const std::string& path) { add("output", path); }

  void write(const std::string& path) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw Error("cannot write manifest '" + path + "'");
    for (const auto& [k, v] : entries_) os << "# " << k << '=' << v << '\n';
    os << "# wall_time_s=" << fmt(wall) << '\n';
  }

 private:
  std::chrono::steady_clock::time_point start_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

inline std::string default_created() {
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long secs = std::strtoll(sde, &end, 10);
    if (end != sde && *end == '\0') {
      const std::time_t t = static_cast<std::time_t>(secs);
      std::tm tm{};
      gmtime_r(&t, &tm);
      char buf[32];
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
      return buf;
    }
  }
  return "1970-01-01T00:00:00Z";
}

// ---- option blocks ----

struct SystemOpts {
  std::string system;
  std::vector<std::string> params;  // k=v
};

struct ConfigOpts {
  std::string kind = "mp";
  double p = 0.5;
  bool auto_p = false;
  std::optional<double> lambda, mu;
  double tau = 1.0;
  double t0 = 0.0;
  double step = 0.1;
  std::size_t max_steps = IntegratorConfig{}.max_steps;
  double box = IntegratorConfig{}.safety_half_width;
};

struct RunOpts {
  unsigned threads = 0;
  std::string created;
};

struct FieldOpts {
  SystemOpts sys;
  ConfigOpts cfg;
  RunOpts run;
  std::vector<std::string> grid;   // lo..hi:n, one per free axis in axis order
  std::vector<std::string> slice;  // axis=value
  bool average = false;
  std::string out = "field.csv";
  std::string matrix_out;
  std::string derivative;  // axis name: write the finite-difference derivative instead
};

struct TransectOpts {
  SystemOpts sys;
  ConfigOpts cfg;
  RunOpts run;
  std::string anchor;
  std::string direction = "1,0";
  double half_width = 0.5;
  std::size_t samples = 401;
  double kappa = 10.0;
  std::string out = "transect.csv";
};

struct ConvergeOpts {
  SystemOpts sys;
  ConfigOpts cfg;
  RunOpts run;
  std::string x0;
  std::string line;  // from..to:n
  std::string along;
  double tau_max = 500.0;
  std::size_t tau_samples = 0;  // 0: ten per unit of tau
  double window = 10.0;
  double eps = 1e-3;
  std::string out_dir = "converge";
};

struct InvarianceOpts {
  SystemOpts sys;
  std::string seed;
  double t_span = 200.0;
  std::string field;
  std::optional<double> tol;
  std::optional<double> step;
  std::string out = "invariance.txt";
};

// ---- parsing helpers ----

inline double to_double(const std::string& s, const std::string& what) {
  try {
    return io_detail::parse_double(s, what);
  } catch (const FormatError&) {
    throw ValidationError("invalid " + what + " '" + s + "'");
  }
}

inline Point parse_point(const std::string& s, const std::string& what) {
  if (s.empty()) throw ValidationError(what + " is required");
  const auto parts = io_detail::split(s, ',');
  if (parts.size() > kMaxDim) throw ValidationError(what + " has too many components");
  Point p(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) p[i] = to_double(std::string(parts[i]), what);
  return p;
}

struct RangeSpec {
  double lo = 0.0, hi = 0.0;
  std::size_t n = 0;
};

inline RangeSpec parse_range(const std::string& s) {
  const auto dots = s.find("..");
  const auto colon = s.rfind(':');
  if (dots == std::string::npos || colon == std::string::npos || colon < dots)
    throw ValidationError("range '" + s + "' must look like lo..hi:n");
  RangeSpec r;
  r.lo = to_double(s.substr(0, dots), "range start");
  r.hi = to_double(s.substr(dots + 2, colon - dots - 2), "range end");
  try {
    r.n = io_detail::parse_size(s.substr(colon + 1), "count");
  } catch (const FormatError&) {
    throw ValidationError("invalid node count in '" + s + "'");
  }
  return r;
}

inline std::size_t parse_axis(const std::string& name, std::size_t dim) {
  for (std::size_t a = 0; a < dim; ++a)
    if (name == io_detail::column_name(a, dim)) return a;
  throw ValidationError("unknown axis '" + name + "'");
}

inline VectorField build_system(const SystemOpts& o) {
  std::map<std::string, double> params;
  for (const auto& kv : o.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--param expects key=value, got '" + kv + "'");
    params[kv.substr(0, eq)] = to_double(kv.substr(eq + 1), "parameter " + kv.substr(0, eq));
  }
  return make_field(o.system, params);
}

inline LDConfig build_config(const ConfigOpts& o, const VectorField& f, Manifest& m) {
  LDConfig c;
  c.kind = parse_descriptor_kind(o.kind);
  c.p = o.p;
  c.tau = o.tau;
  c.t0 = o.t0;
  c.integrator.step = o.step;
  c.integrator.max_steps = o.max_steps;
  c.integrator.safety_half_width = o.box;
  if (o.auto_p) {
    if (c.kind != DescriptorKind::mp) throw ValidationError("--auto-p only applies to --kind mp");
    const auto& params = f.spec().params;
    const auto pick = [&](const std::optional<double>& flag, const char* key) {
      if (flag) return *flag;
      if (const auto it = params.find(key); it != params.end()) return it->second;
      throw ValidationError(std::string("--auto-p needs --") + key);
    };
    const PSelection s = select_p(pick(o.lambda, "lambda"), pick(o.mu, "mu"), c.tau);
    c.p = s.p;
    m.add("auto_p.raw", s.raw);
    m.add("auto_p.clamped", s.clamped ? "1" : "0");
  }
  c.validate();
  return c;
}

inline void describe(Manifest& m, const VectorField& f, const LDConfig& c, unsigned threads) {
  m.add("system_id", f.id());
  for (const auto& [k, v] : f.spec().params) m.add("param." + k, v);
  m.add("kind", std::string(to_string(c.kind)));
  m.add("p", c.p);
  m.add("tau", c.tau);
  m.add("t0", c.t0);
  m.add("h", c.integrator.step);
  m.add("max_steps", std::to_string(c.integrator.max_steps));
  m.add("safety_half_width", c.integrator.safety_half_width);
  m.add("threads", std::to_string(resolve_thread_count(threads)));
}

inline GridSpec build_grid(std::size_t dim, const std::vector<std::string>& grids,
                           const std::vector<std::string>& slices) {
  std::vector<std::optional<double>> fixed(dim);
  for (const auto& s : slices) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ValidationError("--slice expects axis=value, got '" + s + "'");
    const std::size_t a = parse_axis(s.substr(0, eq), dim);
    if (fixed[a]) throw ValidationError("axis sliced twice");
    fixed[a] = to_double(s.substr(eq + 1), "slice value");
  }
  GridSpec g;
  std::size_t next = 0;
  for (std::size_t a = 0; a < dim; ++a) {
    if (fixed[a]) {
      g.axes.push_back(GridAxis::at(*fixed[a]));
      continue;
    }
    if (next >= grids.size())
      throw ValidationError("need one --grid per free axis (" + std::to_string(dim) + " axes, " +
                            std::to_string(slices.size()) + " sliced)");
    const RangeSpec r = parse_range(grids[next++]);
    g.axes.push_back(GridAxis::range(r.lo, r.hi, r.n));
  }
  if (next != grids.size()) throw ValidationError("more --grid ranges than free axes");
  g.validate();
  return g;
}

inline std::string manifest_path(const std::string& out) { return out + ".manifest"; }

inline void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

// ---- subcommands ----

inline int cmd_field(const FieldOpts& o, std::ostream& log = std::cout) {
  Manifest m("field");
  const VectorField f = build_system(o.sys);
  const LDConfig c = build_config(o.cfg, f, m);
  describe(m, f, c, o.run.threads);
  const GridSpec g = build_grid(f.dim(), o.grid, o.slice);
  for (std::size_t a = 0; a < g.dim(); ++a)
    m.add("axis." + std::to_string(a), g.axes[a].is_free() ? fmt(g.axes[a].lo) + "," + fmt(g.axes[a].hi) + "," +
                                                                 std::to_string(g.axes[a].n)
                                                           : "fixed:" + fmt(*g.axes[a].fixed));
  m.add("average", o.average ? "1" : "0");

  const FieldOptions fo{o.run.threads, o.average};
  auto produce = [&](const GridSpec& gs, const LDConfig& cs) { return compute_field(f, gs, cs, fo); };
  ScalarField s = o.derivative.empty() ? produce(g, c)
                                       : partial_derivative_field(produce, g, c, parse_axis(o.derivative, f.dim()));
  s.meta.created = o.run.created.empty() ? default_created() : o.run.created;
  m.add("quantity", s.meta.quantity);
  m.add("created", s.meta.created);

  ensure_parent(o.out);
  write_field(s, o.out);
  m.add_output(o.out);
  if (!o.matrix_out.empty()) {
    ensure_parent(o.matrix_out);
    write_matrix(s, o.matrix_out);
    m.add_output(o.matrix_out);
  }
  const std::size_t bad = s.partial_count();
  m.add("partial_nodes", std::to_string(bad));
  m.write(manifest_path(o.out));
  log << "wrote " << o.out << " (" << s.size() << " nodes, " << bad << " partial)\n";
  if (2 * bad > s.size()) throw RunFailure("more than half of the nodes were truncated");
  return 0;
}

inline int cmd_transect(const TransectOpts& o, std::ostream& log = std::cout) {
  Manifest m("transect");
  const VectorField f = build_system(o.sys);
  const LDConfig c = build_config(o.cfg, f, m);
  describe(m, f, c, o.run.threads);
  const Point anchor = parse_point(o.anchor, "--anchor");
  Point dir = parse_point(o.direction, "--direction");
  const double len = norm(dir);
  if (!(len > 0.0)) throw ValidationError("--direction must be nonzero");
  dir *= 1.0 / len;
  const TransectProfile pr = transect(f, c, anchor, dir, o.half_width, o.samples, o.run.threads);
  const SingularFeatureReport rep = detect_singularities(pr, o.kappa);
  m.add("anchor", fmt(anchor));
  m.add("direction", fmt(dir));
  m.add("half_width", o.half_width);
  m.add("samples", std::to_string(o.samples));
  m.add("kappa", o.kappa);
  ensure_parent(o.out);
  write_transect(pr, rep, o.out);
  m.add_output(o.out);
  const auto bad = static_cast<std::size_t>(std::count(pr.partial.begin(), pr.partial.end(), std::uint8_t{1}));
  m.add("partial_nodes", std::to_string(bad));
  m.write(manifest_path(o.out));
  log << "flagged offsets:";
  if (rep.features.empty()) log << (rep.degenerate ? " none (degenerate profile)" : " none");
  for (const auto& feat : rep.features) log << ' ' << fmt(feat.offset) << " (ratio " << feat.score << ')';
  log << '\n';
  if (2 * bad > pr.values.size()) throw RunFailure("more than half of the samples were truncated");
  return 0;
}

inline int cmd_converge(const ConvergeOpts& o, std::ostream& log = std::cout) {
  Manifest m("converge");
  const VectorField f = build_system(o.sys);
  ConfigOpts co = o.cfg;
  co.tau = o.tau_max;
  const LDConfig c = build_config(co, f, m);
  describe(m, f, c, o.run.threads);
  Point base = parse_point(o.x0, "--x0");
  if (base.size() != f.dim()) throw ValidationError("--x0 has the wrong dimension");
  std::vector<Point> ics;
  if (o.line.empty()) {
    ics.push_back(base);
  } else {
    if (o.along.empty()) throw ValidationError("--line needs --along");
    const std::size_t axis = parse_axis(o.along, f.dim());
    const RangeSpec r = parse_range(o.line);
    if (r.n < 1) throw ValidationError("--line needs at least one point");
    const GridAxis ax = r.n == 1 ? GridAxis::at(r.lo) : GridAxis::range(r.lo, r.hi, r.n);
    for (std::size_t k = 0; k < r.n; ++k) {
      base[axis] = ax.coord(k);
      ics.push_back(base);
    }
    m.add("line", o.line);
    m.add("along", o.along);
  }
  const std::size_t count =
      o.tau_samples ? o.tau_samples : static_cast<std::size_t>(std::llround(std::max(1.0, 10.0 * o.tau_max)));
  const auto taus = uniform_tau_samples(o.tau_max, count);
  m.add("tau_max", o.tau_max);
  m.add("tau_samples", std::to_string(count));
  m.add("window", o.window);
  m.add("eps", o.eps);

  std::vector<ConvergenceSeries> results(ics.size());
  parallel_for(ics.size(), o.run.threads, [&](std::size_t k) {
    results[k] = assess_convergence(time_average(f, ics[k], c, taus), o.window, o.eps);
  });

  std::filesystem::create_directories(o.out_dir);
  const std::string summary_path = (std::filesystem::path(o.out_dir) / "summary.csv").string();
  std::ofstream summary(summary_path, std::ios::trunc);
  if (!summary) throw Error("cannot write '" + summary_path + "'");
  summary << "index,x0,final_average,converged,tau_converged\n";
  log << "index  x0                          final_average      status\n";
  std::size_t partial_runs = 0;
  for (std::size_t k = 0; k < ics.size(); ++k) {
    const ConvergenceSeries& s = results[k];
    char name[32];
    std::snprintf(name, sizeof name, "series_%03zu.csv", k);
    const std::string path = (std::filesystem::path(o.out_dir) / name).string();
    write_series(s, f.spec(), c, path);
    m.add_output(path);
    partial_runs += std::count(s.partial.begin(), s.partial.end(), std::uint8_t{1}) ? 1 : 0;
    const std::string status = s.tau_converged ? "converged at tau=" + fmt(*s.tau_converged) : "budget exhausted";
    summary << k << ",\"" << fmt(s.x0) << "\"," << fmt(s.averages.back()) << ',' << (s.converged ? 1 : 0) << ','
            << (s.tau_converged ? fmt(*s.tau_converged) : "budget-exhausted") << '\n';
    char row[160];
    std::snprintf(row, sizeof row, "%5zu  %-26s  %-17.10g  ", k, fmt(s.x0).c_str(), s.averages.back());
    log << row << status << '\n';
  }
  m.add_output(summary_path);
  m.add("partial_nodes", std::to_string(partial_runs));
  m.write((std::filesystem::path(o.out_dir) / "manifest.txt").string());
  return 0;
}

inline int cmd_invariance(const InvarianceOpts& o, std::ostream& log = std::cout) {
  Manifest m("invariance");
  const ScalarField field = read_field(o.field);
  SystemOpts so = o.sys;
  if (so.system.empty()) {
    so.system = field.meta.spec.system_id;
    for (const auto& [k, v] : field.meta.spec.params) so.params.push_back(k + "=" + fmt(v));
  }
  const VectorField f = build_system(so);
  const Point seed = parse_point(o.seed, "--seed");
  IntegratorConfig ic = field.meta.cfg.integrator;
  if (o.step) ic.step = *o.step;
  const double variation = cell_variation(field, seed, f.period());
  const double tol = o.tol ? *o.tol : 3.0 * variation;
  const InvarianceReport r = invariance_check(f, seed, o.t_span, field, tol, ic, field.meta.cfg.t0);
  m.add("system_id", f.id());
  m.add("field", o.field);
  m.add("seed", fmt(seed));
  m.add("t_span", o.t_span);
  m.add("h", ic.step);
  m.add("tol", tol);
  std::ostringstream rep;
  rep << "# seed_value=" << fmt(r.seed_value) << '\n'
      << "# deviation=" << fmt(r.deviation) << '\n'
      << "# cell_variation=" << fmt(variation) << '\n'
      << "# tolerance=" << fmt(tol) << '\n'
      << "# samples=" << r.samples << '\n'
      << "# left_grid=" << (r.left_grid ? 1 : 0) << '\n'
      << "# within_tolerance=" << (r.within_tolerance ? 1 : 0) << '\n';
  log << rep.str();
  ensure_parent(o.out);
  std::ofstream os(o.out, std::ios::trunc);
  if (!os) throw Error("cannot write '" + o.out + "'");
  os << rep.str();
  m.add_output(o.out);
  m.add("partial_nodes", "0");
  m.write(manifest_path(o.out));
  return 0;
}

}  // namespace ldtool
