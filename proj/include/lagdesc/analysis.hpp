#pragma once

// Singular-feature detection along transects and convergence-gated
// extraction of invariant sets from time-averaged fields.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "lagdesc/config.hpp"
#include "lagdesc/descriptor.hpp"
#include "lagdesc/error.hpp"
#include "lagdesc/integrator.hpp"
#include "lagdesc/parallel.hpp"
#include "lagdesc/point.hpp"
#include "lagdesc/systems.hpp"

namespace lagdesc {

struct TransectProfile {
  Point anchor;
  Point direction;
  double spacing = 0.0;
  std::vector<double> offsets;
  std::vector<double> values;
  std::vector<std::uint8_t> partial;
  // Interior samples only: entry j belongs to sample j + 1. NaN where a
  // partial sample makes the quotient meaningless.
  std::vector<double> left_slope;
  std::vector<double> right_slope;
  LDConfig cfg;

  [[nodiscard]] Point point_at(double offset) const { return axpy(anchor, offset, direction); }
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  return 0.5 * (upper + *std::max_element(v.begin(), mid));
}

inline void fill_slopes(TransectProfile& pr) {
  const std::size_t n = pr.values.size();
  pr.left_slope.assign(n - 2, 0.0);
  pr.right_slope.assign(n - 2, 0.0);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const bool bad_l = pr.partial[i - 1] || pr.partial[i];
    const bool bad_r = pr.partial[i] || pr.partial[i + 1];
    pr.left_slope[i - 1] = bad_l ? nan : (pr.values[i] - pr.values[i - 1]) / pr.spacing;
    pr.right_slope[i - 1] = bad_r ? nan : (pr.values[i + 1] - pr.values[i]) / pr.spacing;
  }
}

}  // namespace detail

/// Samples the descriptor at anchor + s * direction for n uniformly spaced
/// offsets s in [-half_width, half_width].
inline TransectProfile transect(const VectorField& f, const LDConfig& cfg, const Point& anchor, const Point& direction,
                                double half_width, std::size_t n, unsigned threads = 0) {
  cfg.validate();
  if (n < 5 || n % 2 == 0) throw ValidationError("transect needs an odd number of samples, at least 5");
  if (!(half_width > 0.0)) throw ValidationError("transect half-width must be positive");
  if (anchor.size() != f.dim() || direction.size() != f.dim())
    throw ValidationError("transect anchor/direction dimension mismatch");
  if (std::abs(norm(direction) - 1.0) > 1e-9) throw ValidationError("transect direction must be a unit vector");

  TransectProfile pr;
  pr.anchor = anchor;
  pr.direction = direction;
  pr.cfg = cfg;
  pr.spacing = 2.0 * half_width / static_cast<double>(n - 1);
  pr.offsets.resize(n);
  const std::size_t mid = n / 2;
  for (std::size_t i = 0; i < n; ++i)
    pr.offsets[i] = (static_cast<double>(i) - static_cast<double>(mid)) * pr.spacing;
  pr.offsets.front() = -half_width;
  pr.offsets.back() = half_width;
  pr.values.assign(n, 0.0);
  pr.partial.assign(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    const DescriptorValue d = descriptor_at(f, pr.point_at(pr.offsets[i]), cfg);
    pr.values[i] = d.value;
    pr.partial[i] = d.partial ? 1 : 0;
  });
  detail::fill_slopes(pr);
  return pr;
}

struct SingularFeature {
  std::size_t index = 0;  // sample index into the profile
  double offset = 0.0;
  double jump_ratio = 0.0;   // |right - left| / median |right - left|
  double slope_ratio = 0.0;  // max one-sided |slope| / median |slope|
  double score = 0.0;        // the ratio that triggered the flag; always > threshold
};

struct SingularFeatureReport {
  std::vector<SingularFeature> features;
  double threshold = 10.0;
  bool degenerate = false;

  [[nodiscard]] std::vector<double> flagged_offsets() const {
    std::vector<double> out;
    for (const auto& f : features) out.push_back(f.offset);
    return out;
  }
};

/// Flags samples where the descriptor loses differentiability. A sample is
/// suspect when its slope jump |right - left| exceeds `threshold` times the
/// median jump along the profile, or (p < 1 only) when a one-sided slope
/// exceeds `threshold` times the median absolute slope. Adjacent suspects are
/// one feature, reported at its strongest sample.
inline SingularFeatureReport detect_singularities(const TransectProfile& pr, double threshold = 10.0) {
  if (!(threshold > 1.0)) throw ValidationError("singularity threshold must be > 1");
  SingularFeatureReport rep;
  rep.threshold = threshold;
  const std::size_t m = pr.left_slope.size();

  std::vector<double> jumps, slopes;
  double max_slope = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double l = pr.left_slope[j], r = pr.right_slope[j];
    if (std::isfinite(l)) slopes.push_back(std::abs(l));
    if (j + 1 == m && std::isfinite(r)) slopes.push_back(std::abs(r));
    if (std::isfinite(l) && std::isfinite(r)) jumps.push_back(std::abs(r - l));
    if (std::isfinite(l)) max_slope = std::max(max_slope, std::abs(l));
    if (std::isfinite(r)) max_slope = std::max(max_slope, std::abs(r));
  }
  if (max_slope == 0.0 || jumps.empty()) {
    rep.degenerate = true;
    return rep;
  }
  // The floor keeps round-off in exactly piecewise-linear profiles from
  // looking like a jump.
  const double jump_scale = std::max(detail::median(jumps), 1e-6 * max_slope);
  const double slope_scale = std::max(detail::median(slopes), 1e-6 * max_slope);
  const bool check_slopes = pr.cfg.kind == DescriptorKind::mp && pr.cfg.p < 1.0;

  std::vector<SingularFeature> suspects;
  for (std::size_t j = 0; j < m; ++j) {
    const double l = pr.left_slope[j], r = pr.right_slope[j];
    if (!std::isfinite(l) || !std::isfinite(r)) continue;
    SingularFeature s;
    s.index = j + 1;
    s.offset = pr.offsets[j + 1];
    s.jump_ratio = std::abs(r - l) / jump_scale;
    s.slope_ratio = std::max(std::abs(l), std::abs(r)) / slope_scale;
    s.score = check_slopes ? std::max(s.jump_ratio, s.slope_ratio) : s.jump_ratio;
    if (s.score > threshold) suspects.push_back(s);
  }
  for (std::size_t a = 0; a < suspects.size();) {
    std::size_t b = a + 1;
    while (b < suspects.size() && suspects[b].index == suspects[b - 1].index + 1) ++b;
    rep.features.push_back(*std::max_element(suspects.begin() + static_cast<std::ptrdiff_t>(a),
                                             suspects.begin() + static_cast<std::ptrdiff_t>(b),
                                             [](const auto& x, const auto& y) { return x.score < y.score; }));
    a = b;
  }
  return rep;
}

/// Relative peak-to-peak spread of the averages over [tau_end - window, tau_end].
inline double window_oscillation(const ConvergenceSeries& s, std::size_t end, double window) {
  const double start = s.tau_samples[end] - window;
  double lo = s.averages[end], hi = s.averages[end], sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = end + 1; k-- > 0 && s.tau_samples[k] >= start - 1e-9 * window;) {
    lo = std::min(lo, s.averages[k]);
    hi = std::max(hi, s.averages[k]);
    sum += s.averages[k];
    ++count;
  }
  if (hi == lo) return 0.0;
  const double mean = std::abs(sum / static_cast<double>(count));
  return mean > 0.0 ? (hi - lo) / mean : std::numeric_limits<double>::infinity();
}

/// Converged iff the final window's relative oscillation is below eps;
/// tau_converged is the earliest window end after which every window stays
/// below eps. A series that never settles is "not converged within budget".
inline ConvergenceSeries assess_convergence(ConvergenceSeries s, double window = 10.0, double eps = 1e-3) {
  if (!(window > 0.0) || !(eps > 0.0)) throw ValidationError("window and tolerance must be positive");
  if (s.tau_samples.size() != s.averages.size() || s.tau_samples.size() < 2)
    throw ValidationError("convergence assessment needs at least two samples");
  if (s.tau_samples.back() - s.tau_samples.front() < window * (1.0 - 1e-12))
    throw ValidationError("samples do not cover one full convergence window");
  s.window = window;
  s.tolerance = eps;
  s.assessed = true;
  s.tau_converged.reset();
  const std::size_t n = s.tau_samples.size();
  std::optional<std::size_t> first_good;
  for (std::size_t k = 0; k < n; ++k) {
    if (s.tau_samples[k] - s.tau_samples.front() < window * (1.0 - 1e-12)) continue;
    const bool ok = window_oscillation(s, k, window) < eps && !s.partial.at(k);
    if (!ok)
      first_good.reset();
    else if (!first_good)
      first_good = k;
  }
  s.converged = first_good.has_value();
  if (first_good) s.tau_converged = s.tau_samples[*first_good];
  return s;
}

/// Connected components (face adjacency over the free axes) of the nodes
/// whose value lies within tol of level. Partial nodes never belong to a set.
inline std::vector<std::vector<std::size_t>> invariant_level_set(const ScalarField& field, double level, double tol) {
  if (!(tol >= 0.0)) throw ValidationError("level-set tolerance must be nonnegative");
  const GridSpec& g = field.grid;
  const auto free = g.free_axes();
  std::vector<std::uint8_t> in(field.size(), 0), seen(field.size(), 0);
  for (std::size_t i = 0; i < field.size(); ++i)
    in[i] = !field.partial[i] && std::abs(field.values[i] - level) <= tol;

  std::vector<std::vector<std::size_t>> components;
  for (std::size_t start = 0; start < field.size(); ++start) {
    if (!in[start] || seen[start]) continue;
    std::vector<std::size_t> comp;
    std::deque<std::size_t> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
      const std::size_t cur = queue.front();
      queue.pop_front();
      comp.push_back(cur);
      auto idx = g.unravel(cur);
      for (std::size_t a : free) {
        const std::size_t k = idx[a];
        for (int d : {-1, 1}) {
          if ((d < 0 && k == 0) || (d > 0 && k + 1 == g.axes[a].n)) continue;
          idx[a] = k + d;
          const std::size_t nb = g.ravel(idx);
          if (in[nb] && !seen[nb]) {
            seen[nb] = 1;
            queue.push_back(nb);
          }
        }
        idx[a] = k;
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;
}

namespace detail {

/// Wraps a coordinate into [lo, lo + period).
inline double wrap(double u, double lo, double period) { return u - period * std::floor((u - lo) / period); }

}  // namespace detail

/// Multilinear interpolation of a field at a point (fixed axes are ignored).
/// With a period, free coordinates are first wrapped into the grid's box.
inline std::optional<double> interpolate(const ScalarField& field, const Point& x,
                                         std::optional<double> period = std::nullopt) {
  const GridSpec& g = field.grid;
  if (x.size() != g.dim()) throw ValidationError("interpolation point has the wrong dimension");
  const auto free = g.free_axes();
  std::vector<std::size_t> base(g.dim(), 0);
  std::vector<double> frac(g.dim(), 0.0);
  for (std::size_t a : free) {
    const GridAxis& ax = g.axes[a];
    double u = period ? detail::wrap(x[a], ax.lo, *period) : x[a];
    const double slack = 1e-12 * (ax.hi - ax.lo);
    if (u < ax.lo - slack || u > ax.hi + slack) return std::nullopt;
    u = std::clamp(u, ax.lo, ax.hi);
    const double pos = (u - ax.lo) / ax.spacing();
    const auto k = std::min(static_cast<std::size_t>(pos), ax.n - 2);
    base[a] = k;
    frac[a] = pos - static_cast<double>(k);
  }
  double acc = 0.0;
  const std::size_t corners = std::size_t{1} << free.size();
  for (std::size_t c = 0; c < corners; ++c) {
    double w = 1.0;
    auto idx = base;
    for (std::size_t j = 0; j < free.size(); ++j) {
      const std::size_t a = free[j];
      const bool up = (c >> j) & 1U;
      idx[a] += up ? 1 : 0;
      w *= up ? frac[a] : 1.0 - frac[a];
    }
    if (w != 0.0) {
      const std::size_t li = g.ravel(idx);
      if (field.partial[li]) return std::nullopt;
      acc += w * field.values[li];
    }
  }
  return acc;
}

/// Largest difference between face-adjacent corner values of the grid cell
/// containing x: the field change across one grid spacing there.
inline double cell_variation(const ScalarField& field, const Point& x, std::optional<double> period = std::nullopt) {
  const GridSpec& g = field.grid;
  const auto free = g.free_axes();
  std::vector<std::size_t> base(g.dim(), 0);
  for (std::size_t a : free) {
    const GridAxis& ax = g.axes[a];
    const double u = std::clamp(period ? detail::wrap(x[a], ax.lo, *period) : x[a], ax.lo, ax.hi);
    base[a] = std::min(static_cast<std::size_t>((u - ax.lo) / ax.spacing()), ax.n - 2);
  }
  double var = 0.0;
  const std::size_t corners = std::size_t{1} << free.size();
  for (std::size_t c = 0; c < corners; ++c) {
    auto idx = base;
    for (std::size_t j = 0; j < free.size(); ++j) idx[free[j]] += (c >> j) & 1U;
    for (std::size_t j = 0; j < free.size(); ++j) {
      if ((c >> j) & 1U) continue;
      auto nb = idx;
      nb[free[j]] += 1;
      var = std::max(var, std::abs(field.values[g.ravel(nb)] - field.values[g.ravel(idx)]));
    }
  }
  return var;
}

struct InvarianceReport {
  double deviation = 0.0;  // max |field(x(t)) - field(seed)| over the samples
  double seed_value = 0.0;
  std::size_t samples = 0;
  bool left_grid = false;  // some samples fell outside the grid box
  bool within_tolerance = true;
};

/// Follows the trajectory through `seed` for t_span and measures how far the
/// field value drifts from its value at the seed. Full-dimensional fields are
/// sampled at every integrator node; plane slices at every crossing of the
/// slice plane (modulo the field's period for periodic domains).
inline InvarianceReport invariance_check(const VectorField& f, const Point& seed, double t_span,
                                         const ScalarField& field, double tol, const IntegratorConfig& icfg = {},
                                         double t0 = 0.0) {
  if (!(t_span > 0.0)) throw ValidationError("t_span must be positive");
  if (seed.size() != f.dim() || field.grid.dim() != f.dim())
    throw ValidationError("seed, field and system dimensions differ");
  const auto period = f.period();
  const GridSpec& g = field.grid;
  std::vector<std::size_t> fixed;
  for (std::size_t a = 0; a < g.dim(); ++a)
    if (!g.axes[a].is_free()) fixed.push_back(a);
  if (fixed.size() > 1) throw ValidationError("invariance_check supports at most one sliced axis");
  if (!fixed.empty() && std::abs(seed[fixed[0]] - *g.axes[fixed[0]].fixed) > 1e-9)
    throw ValidationError("seed must lie on the slice plane");

  const auto seed_value = interpolate(field, seed, period);
  if (!seed_value) throw ValidationError("seed lies outside the field's grid box");
  InvarianceReport rep;
  rep.seed_value = *seed_value;

  auto sample = [&](const Point& x) {
    const auto v = interpolate(field, x, period);
    if (!v) {
      rep.left_grid = true;
      return;
    }
    rep.deviation = std::max(rep.deviation, std::abs(*v - rep.seed_value));
    ++rep.samples;
  };

  Point prev;
  bool have_prev = false;
  const MarchResult r = march(f, seed, t0, t0 + t_span, icfg, [&](std::size_t i, double, const Point& x, const Point&) {
    if (fixed.empty()) {
      if (i > 0) sample(x);
    } else if (have_prev) {
      const std::size_t a = fixed[0];
      const double c = *g.axes[a].fixed;
      const double u0 = prev[a] - c, u1 = x[a] - c;
      double plane = std::numeric_limits<double>::quiet_NaN();
      if (period) {
        const double k0 = std::floor(u0 / *period), k1 = std::floor(u1 / *period);
        // Start on the plane exactly: that is the seed, not a crossing.
        if (k0 != k1 && !(i == 1 && u0 == 0.0)) plane = std::max(k0, k1) * *period;
      } else if ((u0 < 0.0) != (u1 < 0.0) && !(i == 1 && u0 == 0.0)) {
        plane = 0.0;
      }
      if (std::isfinite(plane)) {
        const double theta = (plane - u0) / (u1 - u0);
        Point hit = axpy(prev, theta, x - prev);
        hit[a] = c;
        sample(hit);
      }
    }
    prev = x;
    have_prev = true;
  });
  if (r.status == MarchStatus::non_finite) throw BlowUpError("trajectory blew up during invariance check", r.reached);
  if (r.status == MarchStatus::left_box) rep.left_grid = true;
  rep.within_tolerance = rep.deviation <= tol;
  return rep;
}

}  // namespace lagdesc
