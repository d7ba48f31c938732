#pragma once

// Descriptor engines: M_p, arc length and LAVD at a point, over grids, and as
// running time averages.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lagdesc/config.hpp"
#include "lagdesc/error.hpp"
#include "lagdesc/integrator.hpp"
#include "lagdesc/parallel.hpp"
#include "lagdesc/point.hpp"
#include "lagdesc/systems.hpp"

namespace lagdesc {

struct DescriptorValue {
  double value = 0.0;
  bool partial = false;
};

namespace detail {

inline void require_lavd_support(const VectorField& f) {
  if (f.dim() != 2) throw ValidationError("LAVD is only defined here for planar fields");
  if (!f.vorticity_fn() || !f.mean_vorticity_fn())
    throw NotAvailableError("LAVD needs a registered vorticity and spatial mean for '" + f.id() + "'");
}

/// Integrand of the configured descriptor as a function of (x, t, v).
inline std::function<double(const Point&, double, const Point&)> make_integrand(const VectorField& f,
                                                                                 const LDConfig& cfg) {
  switch (cfg.kind) {
    case DescriptorKind::mp:
      if (cfg.p == 1.0)
        return [](const Point&, double, const Point& v) {
          double s = 0.0;
          for (double c : v) s += std::abs(c);
          return s;
        };
      if (cfg.p == 0.5)
        return [](const Point&, double, const Point& v) {
          double s = 0.0;
          for (double c : v) s += std::sqrt(std::abs(c));
          return s;
        };
      return [p = cfg.p](const Point&, double, const Point& v) {
        double s = 0.0;
        for (double c : v) s += std::pow(std::abs(c), p);
        return s;
      };
    case DescriptorKind::arclength:
      return [](const Point&, double, const Point& v) { return norm(v); };
    case DescriptorKind::lavd:
      require_lavd_support(f);
      return [w = f.vorticity_fn(), mean = f.mean_vorticity_fn()](const Point& x, double t, const Point&) {
        return std::abs(w(x, t) - mean(t));
      };
  }
  throw ValidationError("unknown descriptor kind");
}

}  // namespace detail

/// Descriptor value at one initial condition: two-sided over
/// [t0 - tau, t0 + tau] for mp and arclength, forward over [t0, t0 + tau] for
/// lavd.
inline DescriptorValue descriptor_at(const VectorField& f, const Point& x0, const LDConfig& cfg) {
  cfg.validate();
  if (x0.size() != f.dim()) throw ValidationError("initial condition has the wrong dimension");
  auto g = detail::make_integrand(f, cfg);
  if (cfg.kind == DescriptorKind::lavd) {
    const auto [sum, r] =
        detail::trapezoid_leg(f, x0, cfg.t0, cfg.t0 + cfg.tau, cfg.integrator, g, [](std::size_t, double, double) {});
    return {sum, r.status != MarchStatus::complete};
  }
  const QuadratureResult q = integrate_with_quadrature(f, x0, cfg.t0, cfg.tau, cfg.integrator, g);
  return {q.value, q.partial};
}

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 1;
  std::optional<double> fixed;  // set for axes held constant (plane slices)

  static GridAxis range(double lo, double hi, std::size_t n) { return GridAxis{lo, hi, n, std::nullopt}; }
  static GridAxis at(double value) { return GridAxis{value, value, 1, value}; }

  [[nodiscard]] bool is_free() const noexcept { return !fixed.has_value(); }
  [[nodiscard]] double spacing() const noexcept { return is_free() ? (hi - lo) / static_cast<double>(n - 1) : 0.0; }
  [[nodiscard]] double coord(std::size_t k) const noexcept {
    if (!is_free()) return *fixed;
    if (k + 1 == n) return hi;
    return lo + static_cast<double>(k) * spacing();
  }

  friend bool operator==(const GridAxis&, const GridAxis&) = default;
};

/// Regular grid of initial conditions, one axis per phase-space dimension.
/// Node order is row-major with the first free axis varying fastest.
struct GridSpec {
  std::vector<GridAxis> axes;

  void validate() const {
    if (axes.empty()) throw ValidationError("grid has no axes");
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const GridAxis& ax = axes[a];
      if (!ax.is_free()) {
        if (!std::isfinite(*ax.fixed)) throw ValidationError("slice value must be finite");
        continue;
      }
      if (!std::isfinite(ax.lo) || !std::isfinite(ax.hi) || !(ax.lo < ax.hi))
        throw ValidationError("grid axis " + std::to_string(a) + " needs lo < hi");
      if (ax.n < 2) throw ValidationError("grid axis " + std::to_string(a) + " needs at least 2 nodes");
    }
  }

  [[nodiscard]] std::size_t dim() const noexcept { return axes.size(); }

  [[nodiscard]] std::vector<std::size_t> free_axes() const {
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < axes.size(); ++a)
      if (axes[a].is_free()) out.push_back(a);
    return out;
  }

  [[nodiscard]] std::size_t size() const noexcept {
    std::size_t n = 1;
    for (const auto& ax : axes)
      if (ax.is_free()) n *= ax.n;
    return n;
  }

  /// Per-axis node indices of a linear index (0 on fixed axes).
  [[nodiscard]] std::vector<std::size_t> unravel(std::size_t linear) const {
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t a = 0; a < axes.size(); ++a) {
      if (!axes[a].is_free()) continue;
      idx[a] = linear % axes[a].n;
      linear /= axes[a].n;
    }
    return idx;
  }

  [[nodiscard]] std::size_t ravel(const std::vector<std::size_t>& idx) const noexcept {
    std::size_t linear = 0, stride = 1;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      if (!axes[a].is_free()) continue;
      linear += idx[a] * stride;
      stride *= axes[a].n;
    }
    return linear;
  }

  [[nodiscard]] Point node(std::size_t linear) const {
    const auto idx = unravel(linear);
    Point p(axes.size());
    for (std::size_t a = 0; a < axes.size(); ++a) p[a] = axes[a].coord(idx[a]);
    return p;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct FieldMeta {
  VectorFieldSpec spec;
  LDConfig cfg;
  // "descriptor", "average" (value / normalization time) or "partial:<axis>".
  std::string quantity = "descriptor";
  std::string created = "1970-01-01T00:00:00Z";
};

struct ScalarField {
  GridSpec grid;
  std::vector<double> values;
  std::vector<std::uint8_t> partial;  // 1 where the node's trajectory was truncated
  FieldMeta meta;

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
  [[nodiscard]] std::size_t partial_count() const {
    return static_cast<std::size_t>(std::count(partial.begin(), partial.end(), std::uint8_t{1}));
  }
  double at(const std::vector<std::size_t>& idx) const { return values[grid.ravel(idx)]; }
};

/// Time span that turns a descriptor into a time average: 2 tau for the
/// two-sided descriptors, tau for LAVD.
inline double normalization_time(const LDConfig& cfg, double tau) {
  return cfg.kind == DescriptorKind::lavd ? tau : 2.0 * tau;
}

struct FieldOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
  bool average = false;  // store value / normalization_time instead of value
};

/// Descriptor at every grid node. Nodes are independent and written at their
/// own index, so the result does not depend on the number of threads.
inline ScalarField compute_field(const VectorField& f, const GridSpec& grid, const LDConfig& cfg,
                                 const FieldOptions& opts = {}) {
  cfg.validate();
  grid.validate();
  if (grid.dim() != f.dim())
    throw ValidationError("grid has " + std::to_string(grid.dim()) + " axes, field '" + f.id() + "' is " +
                          std::to_string(f.dim()) + "-dimensional");
  if (cfg.kind == DescriptorKind::lavd) detail::require_lavd_support(f);
  ScalarField out;
  out.grid = grid;
  out.meta.spec = f.spec();
  out.meta.cfg = cfg;
  out.meta.quantity = opts.average ? "average" : "descriptor";
  out.values.assign(grid.size(), 0.0);
  out.partial.assign(grid.size(), 0);
  const double norm_time = normalization_time(cfg, cfg.tau);
  parallel_for(grid.size(), opts.threads, [&](std::size_t i) {
    const DescriptorValue d = descriptor_at(f, grid.node(i), cfg);
    out.values[i] = opts.average ? d.value / norm_time : d.value;
    out.partial[i] = d.partial ? 1 : 0;
  });
  return out;
}

/// Running time average value(tau) / normalization_time(tau) at requested
/// horizons, all read off one trajectory per direction.
struct ConvergenceSeries {
  Point x0;
  std::vector<double> tau_requested;
  std::vector<double> tau_samples;  // requested horizons rounded to the integrator grid
  std::vector<double> averages;
  std::vector<std::uint8_t> partial;
  // Filled in by assess_convergence.
  bool assessed = false;
  bool converged = false;
  std::optional<double> tau_converged;
  double window = 0.0;
  double tolerance = 0.0;
};

inline ConvergenceSeries time_average(const VectorField& f, const Point& x0, const LDConfig& cfg,
                                      const std::vector<double>& tau_samples) {
  if (tau_samples.empty()) throw ValidationError("time_average needs at least one tau sample");
  for (std::size_t i = 0; i < tau_samples.size(); ++i) {
    if (!(tau_samples[i] > 0.0)) throw ValidationError("tau samples must be positive");
    if (i > 0 && !(tau_samples[i] > tau_samples[i - 1])) throw ValidationError("tau samples must be ascending");
  }
  LDConfig c = cfg;
  c.tau = tau_samples.back();
  c.validate();
  if (x0.size() != f.dim()) throw ValidationError("initial condition has the wrong dimension");

  const StepPlan plan = plan_steps(c.t0, c.t0 + c.tau, c.integrator);
  const double h = std::abs(plan.step);
  auto g = detail::make_integrand(f, c);

  auto leg = [&](double t1) {
    std::vector<double> cumulative;
    cumulative.reserve(plan.steps + 1);
    detail::trapezoid_leg(f, x0, c.t0, t1, c.integrator, g,
                          [&](std::size_t, double, double sum) { cumulative.push_back(sum); });
    return cumulative;
  };
  const std::vector<double> forward = leg(c.t0 + c.tau);
  const std::vector<double> backward =
      c.kind == DescriptorKind::lavd ? std::vector<double>(plan.steps + 1, 0.0) : leg(c.t0 - c.tau);

  ConvergenceSeries s;
  s.x0 = x0;
  s.tau_requested = tau_samples;
  for (double tr : tau_samples) {
    const auto k = static_cast<std::size_t>(
        std::clamp<double>(std::round(tr / h), 1.0, static_cast<double>(plan.steps)));
    const double tk = k == plan.steps ? c.tau : static_cast<double>(k) * h;
    const bool truncated = k >= forward.size() || k >= backward.size();
    const double fw = forward.empty() ? 0.0 : forward[std::min(k, forward.size() - 1)];
    const double bw = backward.empty() ? 0.0 : backward[std::min(k, backward.size() - 1)];
    s.tau_samples.push_back(tk);
    s.averages.push_back((fw + bw) / normalization_time(c, tk));
    s.partial.push_back(truncated ? 1 : 0);
  }
  return s;
}

/// Evenly spaced horizons dt, 2 dt, ..., up to tau_max.
inline std::vector<double> uniform_tau_samples(double tau_max, std::size_t count) {
  if (!(tau_max > 0.0) || count == 0) throw ValidationError("need tau_max > 0 and at least one sample");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = tau_max * static_cast<double>(i + 1) / static_cast<double>(count);
  return out;
}

struct PSelection {
  double p = 1.0;
  double raw = 1.0;
  bool clamped = false;
};

/// Exponent that keeps the two saddle terms of comparable magnitude:
/// p = 1 / (tau |lambda - mu|), clamped to at most 1.
inline PSelection select_p(double lambda, double mu, double tau) {
  if (!(tau > 0.0)) throw ValidationError("select_p needs tau > 0");
  if (lambda == mu) throw ValidationError("select_p is undefined for lambda == mu");
  PSelection s;
  s.raw = 1.0 / (tau * std::abs(lambda - mu));
  s.clamped = s.raw > 1.0;
  s.p = std::min(s.raw, 1.0);
  return s;
}

/// Finite-difference derivative of a produced field along grid axis `axis`:
/// central in the interior, one-sided at the two ends.
template <class Producer>
ScalarField partial_derivative_field(Producer&& produce, const GridSpec& grid, const LDConfig& cfg, std::size_t axis) {
  if (axis >= grid.dim() || !grid.axes[axis].is_free()) throw ValidationError("derivative axis must be a free grid axis");
  if (grid.axes[axis].n < 3) throw ValidationError("derivative axis needs at least 3 nodes");
  const ScalarField base = produce(grid, cfg);
  ScalarField out = base;
  out.meta.quantity = "partial:" + std::to_string(axis);
  const double h = grid.axes[axis].spacing();
  const std::size_t n = grid.axes[axis].n;
  for (std::size_t i = 0; i < base.size(); ++i) {
    auto idx = grid.unravel(i);
    const std::size_t k = idx[axis];
    const std::size_t lo = k == 0 ? 0 : k - 1, hi = k + 1 == n ? k : k + 1;
    idx[axis] = lo;
    const std::size_t ilo = grid.ravel(idx);
    idx[axis] = hi;
    const std::size_t ihi = grid.ravel(idx);
    out.values[i] = (base.values[ihi] - base.values[ilo]) / (static_cast<double>(hi - lo) * h);
    out.partial[i] = (base.partial[ihi] || base.partial[ilo] || base.partial[i]) ? 1 : 0;
  }
  return out;
}

}  // namespace lagdesc
