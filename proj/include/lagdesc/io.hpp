#pragma once

// Text formats: long-form field CSV (ldfield/1), gnuplot nonuniform matrix,
// convergence series CSV (ldseries/1) and transect CSV. All reals are written
// with 17 significant digits so every format reads back bit-identically.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lagdesc/analysis.hpp"
#include "lagdesc/config.hpp"
#include "lagdesc/descriptor.hpp"
#include "lagdesc/error.hpp"
#include "lagdesc/systems.hpp"

namespace lagdesc {

class FormatError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::string_view kFieldFormat = "ldfield/1";
inline constexpr std::string_view kSeriesFormat = "ldseries/1";

namespace io_detail {

using Header = std::vector<std::pair<std::string, std::string>>;

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw FormatError("cannot parse " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

inline std::size_t parse_size(std::string_view s, std::string_view what) {
  std::size_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw FormatError("cannot parse " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

inline std::string column_name(std::size_t axis, std::size_t dim) {
  static constexpr const char* xyz[] = {"x", "y", "z"};
  return dim <= 3 ? xyz[axis] : "x" + std::to_string(axis);
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  return os;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "' for reading");
  return is;
}

inline void put_header(std::ostream& os, const Header& h) {
  for (const auto& [k, v] : h) os << "# " << k << '=' << v << '\n';
}

/// Reads the leading `# key=value` block; leaves the stream at the first
/// non-comment line.
inline std::map<std::string, std::string> get_header(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  while (is.peek() == '#') {
    std::getline(is, line);
    const std::string_view body = std::string_view(line).substr(1);
    const auto start = body.find_first_not_of(' ');
    const auto eq = body.find('=');
    if (start == std::string_view::npos || eq == std::string_view::npos || eq <= start)
      throw FormatError("malformed header line '" + line + "'");
    if (!out.emplace(std::string(body.substr(start, eq - start)), std::string(body.substr(eq + 1))).second)
      throw FormatError("duplicate header key in '" + line + "'");
  }
  return out;
}

inline const std::string& need(const std::map<std::string, std::string>& h, const std::string& key) {
  const auto it = h.find(key);
  if (it == h.end()) throw FormatError("header is missing '" + key + "'");
  return it->second;
}

inline void check_version(const std::map<std::string, std::string>& h, std::string_view expected) {
  const std::string& v = need(h, "format_version");
  if (v != expected)
    throw FormatError("format version mismatch: file has '" + v + "', expected '" + std::string(expected) + "'");
}

inline void append_system(Header& h, const VectorFieldSpec& spec) {
  h.emplace_back("system_id", spec.system_id);
  h.emplace_back("dim", std::to_string(spec.dim));
  h.emplace_back("autonomous", spec.autonomous ? "1" : "0");
  for (const auto& [k, v] : spec.params) h.emplace_back("param." + k, fmt(v));  // std::map: sorted
}

inline void append_cfg(Header& h, const LDConfig& c) {
  h.emplace_back("kind", std::string(to_string(c.kind)));
  h.emplace_back("p", fmt(c.p));
  h.emplace_back("tau", fmt(c.tau));
  h.emplace_back("t0", fmt(c.t0));
  h.emplace_back("h", fmt(c.integrator.step));
  h.emplace_back("max_steps", std::to_string(c.integrator.max_steps));
  h.emplace_back("safety_half_width", fmt(c.integrator.safety_half_width));
}

inline VectorFieldSpec read_system(const std::map<std::string, std::string>& h) {
  VectorFieldSpec s;
  s.system_id = need(h, "system_id");
  s.dim = parse_size(need(h, "dim"), "dim");
  s.autonomous = need(h, "autonomous") == "1";
  for (const auto& [k, v] : h)
    if (k.rfind("param.", 0) == 0) s.params[k.substr(6)] = parse_double(v, k);
  return s;
}

inline LDConfig read_cfg(const std::map<std::string, std::string>& h) {
  LDConfig c;
  try {
    c.kind = parse_descriptor_kind(need(h, "kind"));
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
  c.p = parse_double(need(h, "p"), "p");
  c.tau = parse_double(need(h, "tau"), "tau");
  c.t0 = parse_double(need(h, "t0"), "t0");
  c.integrator.step = parse_double(need(h, "h"), "h");
  c.integrator.max_steps = parse_size(need(h, "max_steps"), "max_steps");
  c.integrator.safety_half_width = parse_double(need(h, "safety_half_width"), "safety_half_width");
  return c;
}

}  // namespace io_detail

inline void write_field(const ScalarField& field, std::ostream& os) {
  using io_detail::fmt;
  const GridSpec& g = field.grid;
  io_detail::Header h{{"format_version", std::string(kFieldFormat)}};
  io_detail::append_system(h, field.meta.spec);
  io_detail::append_cfg(h, field.meta.cfg);
  for (std::size_t a = 0; a < g.dim(); ++a) {
    const GridAxis& ax = g.axes[a];
    h.emplace_back("axis." + std::to_string(a),
                   ax.is_free() ? fmt(ax.lo) + "," + fmt(ax.hi) + "," + std::to_string(ax.n) : "fixed:" + fmt(*ax.fixed));
  }
  h.emplace_back("quantity", field.meta.quantity);
  h.emplace_back("created", field.meta.created);
  io_detail::put_header(os, h);
  for (std::size_t a = 0; a < g.dim(); ++a) os << io_detail::column_name(a, g.dim()) << ',';
  os << "value,flag\n";
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Point x = g.node(i);
    for (double c : x) os << fmt(c) << ',';
    os << fmt(field.values[i]) << ',' << (field.partial[i] ? "partial" : "ok") << '\n';
  }
}

inline void write_field(const ScalarField& field, const std::string& path) {
  auto os = io_detail::open_out(path);
  write_field(field, os);
}

inline ScalarField read_field(std::istream& is) {
  using namespace io_detail;
  const auto h = get_header(is);
  check_version(h, kFieldFormat);
  ScalarField f;
  f.meta.spec = read_system(h);
  f.meta.cfg = read_cfg(h);
  f.meta.quantity = need(h, "quantity");
  f.meta.created = need(h, "created");
  const std::size_t dim = f.meta.spec.dim;
  if (dim == 0 || dim > kMaxDim) throw FormatError("header dimension out of range");
  for (std::size_t a = 0; a < dim; ++a) {
    const std::string& v = need(h, "axis." + std::to_string(a));
    if (v.rfind("fixed:", 0) == 0) {
      f.grid.axes.push_back(GridAxis::at(parse_double(std::string_view(v).substr(6), "slice value")));
      continue;
    }
    const auto parts = split(v, ',');
    if (parts.size() != 3) throw FormatError("malformed axis spec '" + v + "'");
    f.grid.axes.push_back(GridAxis::range(parse_double(parts[0], "axis lo"), parse_double(parts[1], "axis hi"),
                                          parse_size(parts[2], "axis n")));
  }
  if (h.count("axis." + std::to_string(dim))) throw FormatError("more grid axes than the header dimension");
  try {
    f.grid.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("invalid grid in header: ") + e.what());
  }

  std::string line, expected;
  for (std::size_t a = 0; a < dim; ++a) expected += column_name(a, dim) + ',';
  expected += "value,flag";
  if (!std::getline(is, line) || line != expected)
    throw FormatError("expected column row '" + expected + "', found '" + line + "'");

  const std::size_t n = f.grid.size();
  f.values.reserve(n);
  f.partial.reserve(n);
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != dim + 2) throw FormatError("row " + std::to_string(rows + 1) + " has the wrong column count");
    if (rows < n) {
      const Point x = f.grid.node(rows);
      for (std::size_t a = 0; a < dim; ++a)
        if (parse_double(cols[a], "coordinate") != x[a])
          throw FormatError("row " + std::to_string(rows + 1) + " coordinates do not match the grid");
      f.values.push_back(parse_double(cols[dim], "value"));
      if (cols[dim + 1] != "ok" && cols[dim + 1] != "partial")
        throw FormatError("unknown flag '" + std::string(cols[dim + 1]) + "'");
      f.partial.push_back(cols[dim + 1] == "partial" ? 1 : 0);
    }
    ++rows;
  }
  if (rows != n)
    throw FormatError("row count mismatch: grid has " + std::to_string(n) + " nodes, file has " + std::to_string(rows) +
                      " rows");
  return f;
}

inline ScalarField read_field(const std::string& path) {
  auto is = io_detail::open_in(path);
  return read_field(is);
}

/// gnuplot "nonuniform matrix": the first row is N followed by the N
/// coordinates of the first free axis, every other row is one coordinate of
/// the second free axis followed by the values along the first.
inline void write_matrix(const ScalarField& field, std::ostream& os) {
  const GridSpec& g = field.grid;
  const auto free = g.free_axes();
  if (free.size() != 2) throw ValidationError("matrix export needs exactly two free axes");
  const GridAxis& ax = g.axes[free[0]];
  const GridAxis& ay = g.axes[free[1]];
  os << ax.n;
  for (std::size_t i = 0; i < ax.n; ++i) os << ' ' << io_detail::fmt(ax.coord(i));
  os << '\n';
  std::vector<std::size_t> idx(g.dim(), 0);
  for (std::size_t j = 0; j < ay.n; ++j) {
    idx[free[1]] = j;
    os << io_detail::fmt(ay.coord(j));
    for (std::size_t i = 0; i < ax.n; ++i) {
      idx[free[0]] = i;
      os << ' ' << io_detail::fmt(field.at(idx));
    }
    os << '\n';
  }
}

inline void write_matrix(const ScalarField& field, const std::string& path) {
  auto os = io_detail::open_out(path);
  write_matrix(field, os);
}

struct SeriesFile {
  VectorFieldSpec spec;
  LDConfig cfg;
  ConvergenceSeries series;
};

/// Rows are tau_samples; converged_flag is 1 from tau_converged on. Requested
/// horizons are not stored (reading sets them to the rounded samples).
inline void write_series(const ConvergenceSeries& s, const VectorFieldSpec& spec, const LDConfig& cfg,
                         std::ostream& os) {
  using io_detail::fmt;
  io_detail::Header h{{"format_version", std::string(kSeriesFormat)}};
  io_detail::append_system(h, spec);
  io_detail::append_cfg(h, cfg);
  std::string x0;
  for (std::size_t i = 0; i < s.x0.size(); ++i) x0 += (i ? "," : "") + fmt(s.x0[i]);
  h.emplace_back("x0", x0);
  h.emplace_back("assessed", s.assessed ? "1" : "0");
  h.emplace_back("window", fmt(s.window));
  h.emplace_back("eps", fmt(s.tolerance));
  h.emplace_back("converged", s.converged ? "1" : "0");
  h.emplace_back("tau_converged", s.tau_converged ? fmt(*s.tau_converged) : "none");
  std::string partial;
  for (std::size_t k = 0; k < s.partial.size(); ++k)
    if (s.partial[k]) partial += (partial.empty() ? "" : ",") + std::to_string(k);
  h.emplace_back("partial_rows", partial.empty() ? "none" : partial);
  io_detail::put_header(os, h);
  os << "tau,average,converged_flag\n";
  for (std::size_t k = 0; k < s.tau_samples.size(); ++k) {
    const bool flag = s.tau_converged && s.tau_samples[k] >= *s.tau_converged;
    os << fmt(s.tau_samples[k]) << ',' << fmt(s.averages[k]) << ',' << (flag ? 1 : 0) << '\n';
  }
}

inline void write_series(const ConvergenceSeries& s, const VectorFieldSpec& spec, const LDConfig& cfg,
                         const std::string& path) {
  auto os = io_detail::open_out(path);
  write_series(s, spec, cfg, os);
}

inline SeriesFile read_series(std::istream& is) {
  using namespace io_detail;
  const auto h = get_header(is);
  check_version(h, kSeriesFormat);
  SeriesFile out;
  out.spec = read_system(h);
  out.cfg = read_cfg(h);
  ConvergenceSeries& s = out.series;
  const auto x0 = split(need(h, "x0"), ',');
  if (x0.size() != out.spec.dim) throw FormatError("x0 dimension does not match the system");
  s.x0 = Point(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) s.x0[i] = parse_double(x0[i], "x0");
  s.assessed = need(h, "assessed") == "1";
  s.window = parse_double(need(h, "window"), "window");
  s.tolerance = parse_double(need(h, "eps"), "eps");
  s.converged = need(h, "converged") == "1";
  if (const std::string& tc = need(h, "tau_converged"); tc != "none") s.tau_converged = parse_double(tc, "tau_converged");

  std::string line;
  if (!std::getline(is, line) || line != "tau,average,converged_flag")
    throw FormatError("expected column row 'tau,average,converged_flag', found '" + line + "'");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 3) throw FormatError("series row with the wrong column count");
    s.tau_samples.push_back(parse_double(cols[0], "tau"));
    s.averages.push_back(parse_double(cols[1], "average"));
    if (cols[2] != "0" && cols[2] != "1") throw FormatError("converged_flag must be 0 or 1");
  }
  s.tau_requested = s.tau_samples;
  s.partial.assign(s.tau_samples.size(), 0);
  if (const std::string& pr = need(h, "partial_rows"); pr != "none")
    for (auto k : split(pr, ',')) {
      const std::size_t i = parse_size(k, "partial row");
      if (i >= s.partial.size()) throw FormatError("partial row index out of range");
      s.partial[i] = 1;
    }
  return out;
}

inline SeriesFile read_series(const std::string& path) {
  auto is = io_detail::open_in(path);
  return read_series(is);
}

inline void write_transect(const TransectProfile& pr, const SingularFeatureReport& rep, std::ostream& os) {
  using io_detail::fmt;
  io_detail::Header h{{"format_version", "ldtransect/1"}};
  io_detail::append_cfg(h, pr.cfg);
  std::string a, d;
  for (std::size_t i = 0; i < pr.anchor.size(); ++i) {
    a += (i ? "," : "") + fmt(pr.anchor[i]);
    d += (i ? "," : "") + fmt(pr.direction[i]);
  }
  h.emplace_back("anchor", a);
  h.emplace_back("direction", d);
  h.emplace_back("spacing", fmt(pr.spacing));
  h.emplace_back("threshold", fmt(rep.threshold));
  h.emplace_back("degenerate", rep.degenerate ? "1" : "0");
  std::string flagged;
  for (const auto& f : rep.features) flagged += (flagged.empty() ? "" : ",") + fmt(f.offset);
  h.emplace_back("flagged_offsets", flagged.empty() ? "none" : flagged);
  io_detail::put_header(os, h);
  os << "offset,value,flag,left_slope,right_slope,singular\n";
  const std::size_t n = pr.values.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool interior = i > 0 && i + 1 < n;
    bool singular = false;
    for (const auto& f : rep.features) singular = singular || f.index == i;
    os << fmt(pr.offsets[i]) << ',' << fmt(pr.values[i]) << ',' << (pr.partial[i] ? "partial" : "ok") << ','
       << (interior ? fmt(pr.left_slope[i - 1]) : "") << ',' << (interior ? fmt(pr.right_slope[i - 1]) : "") << ','
       << (singular ? 1 : 0) << '\n';
  }
}

inline void write_transect(const TransectProfile& pr, const SingularFeatureReport& rep, const std::string& path) {
  auto os = io_detail::open_out(path);
  write_transect(pr, rep, os);
}

}  // namespace lagdesc
