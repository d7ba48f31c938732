#pragma once

// Fixed-step classical RK4. Every node of a grid shares the same time grid,
// so results do not depend on how nodes are scheduled.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lagdesc/config.hpp"
#include "lagdesc/error.hpp"
#include "lagdesc/point.hpp"
#include "lagdesc/systems.hpp"

namespace lagdesc {

struct Trajectory {
  std::vector<double> times;
  std::vector<Point> states;
  std::string system_id;
  bool left_box = false;  // truncated at the safety box before reaching t1
};

/// Number of steps and the (possibly shortened) signed step that lands on t1.
struct StepPlan {
  std::size_t steps = 0;
  double step = 0.0;
};

inline StepPlan plan_steps(double t0, double t1, const IntegratorConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(t0) || !std::isfinite(t1)) throw ValidationError("integration bounds must be finite");
  const double span = t1 - t0;
  if (span == 0.0) return {0, 0.0};
  const double ratio = std::abs(span) / cfg.step;
  // Spans that are an integer multiple of h up to rounding keep h unchanged.
  double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) n = std::ceil(ratio);
  n = std::max(n, 1.0);
  if (n > static_cast<double>(cfg.max_steps))
    throw ValidationError("horizon needs " + std::to_string(static_cast<long long>(n)) + " steps, max_steps is " +
                          std::to_string(cfg.max_steps));
  return {static_cast<std::size_t>(n), span / n};
}

inline Point rk4_step(const VectorField& f, const Point& x, double t, double h, const Point& k1) {
  const Point k2 = f(axpy(x, 0.5 * h, k1), t + 0.5 * h);
  const Point k3 = f(axpy(x, 0.5 * h, k2), t + 0.5 * h);
  const Point k4 = f(axpy(x, h, k3), t + h);
  Point out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

enum class MarchStatus { complete, left_box, non_finite };

struct MarchResult {
  MarchStatus status = MarchStatus::complete;
  std::size_t nodes = 0;  // nodes visited, including the initial one
  double reached = 0.0;   // time of the last visited node
};

namespace detail {

inline bool inside_box(const Point& x, double half_width) {
  for (double v : x)
    if (!(std::abs(v) <= half_width)) return false;
  return true;
}

}  // namespace detail

/// Steps from (x0, t0) towards t1 and calls visit(index, t, x, v) at every
/// node with v = f(x, t). Stops early when the state leaves the safety box or
/// stops being finite; the offending state is never visited.
template <class Visitor>
MarchResult march(const VectorField& f, const Point& x0, double t0, double t1, const IntegratorConfig& cfg,
                  Visitor&& visit) {
  const StepPlan plan = plan_steps(t0, t1, cfg);
  if (x0.size() != f.dim()) throw ValidationError("initial condition has the wrong dimension");
  MarchResult r;
  Point x = x0;
  Point v = f(x, t0);
  if (!all_finite(x) || !all_finite(v)) return {MarchStatus::non_finite, 0, t0};
  if (!detail::inside_box(x, cfg.safety_half_width)) return {MarchStatus::left_box, 0, t0};
  visit(std::size_t{0}, t0, x, v);
  r.nodes = 1;
  r.reached = t0;
  for (std::size_t i = 0; i < plan.steps; ++i) {
    const double t = t0 + static_cast<double>(i) * plan.step;
    const double tn = i + 1 == plan.steps ? t1 : t0 + static_cast<double>(i + 1) * plan.step;
    Point xn = rk4_step(f, x, t, plan.step, v);
    if (!all_finite(xn)) return {MarchStatus::non_finite, r.nodes, r.reached};
    if (!detail::inside_box(xn, cfg.safety_half_width)) return {MarchStatus::left_box, r.nodes, r.reached};
    Point vn = f(xn, tn);
    if (!all_finite(vn)) return {MarchStatus::non_finite, r.nodes, r.reached};
    x = std::move(xn);
    v = std::move(vn);
    visit(i + 1, tn, x, v);
    ++r.nodes;
    r.reached = tn;
  }
  return r;
}

/// RK4 trajectory from t0 to t1 (backward when t1 < t0). Throws BlowUpError
/// if the state becomes non-finite; leaving the safety box truncates the
/// trajectory and sets left_box.
inline Trajectory integrate(const VectorField& f, const Point& x0, double t0, double t1,
                            const IntegratorConfig& cfg = {}) {
  Trajectory tr;
  tr.system_id = f.id();
  const StepPlan plan = plan_steps(t0, t1, cfg);
  tr.times.reserve(plan.steps + 1);
  tr.states.reserve(plan.steps + 1);
  const MarchResult r = march(f, x0, t0, t1, cfg, [&](std::size_t, double t, const Point& x, const Point&) {
    tr.times.push_back(t);
    tr.states.push_back(x);
  });
  if (r.status == MarchStatus::non_finite)
    throw BlowUpError("trajectory of '" + f.id() + "' became non-finite after t = " + std::to_string(r.reached),
                      r.reached);
  tr.left_box = r.status == MarchStatus::left_box;
  return tr;
}

struct QuadratureResult {
  double value = 0.0;
  bool partial = false;
  double forward_reached = 0.0;   // last time integrated on the forward leg
  double backward_reached = 0.0;  // last time integrated on the backward leg
};

namespace detail {

/// Composite trapezoid of integrand(x, t, v) along one leg t0 -> t1; calls
/// on_node(index, t, running_integral) at every node.
template <class Integrand, class OnNode>
std::pair<double, MarchResult> trapezoid_leg(const VectorField& f, const Point& x0, double t0, double t1,
                                             const IntegratorConfig& cfg, Integrand& g, OnNode&& on_node) {
  double sum = 0.0, prev_g = 0.0, prev_t = t0;
  const MarchResult r = march(f, x0, t0, t1, cfg, [&](std::size_t i, double t, const Point& x, const Point& v) {
    const double gi = g(x, t, v);
    if (i > 0) sum += 0.5 * std::abs(t - prev_t) * (prev_g + gi);
    prev_g = gi;
    prev_t = t;
    on_node(i, t, sum);
  });
  return {sum, r};
}

}  // namespace detail

/// Two-sided integral of a nonnegative integrand over [t0 - tau, t0 + tau]
/// along the trajectory through x0 at t0. A leg that leaves the safety box or
/// blows up contributes what it accumulated so far and the result is partial.
template <class Integrand>
QuadratureResult integrate_with_quadrature(const VectorField& f, const Point& x0, double t0, double tau,
                                           const IntegratorConfig& cfg, Integrand&& integrand) {
  if (!(tau > 0.0)) throw ValidationError("tau must be positive");
  auto ignore = [](std::size_t, double, double) {};
  const auto [fw, rf] = detail::trapezoid_leg(f, x0, t0, t0 + tau, cfg, integrand, ignore);
  const auto [bw, rb] = detail::trapezoid_leg(f, x0, t0, t0 - tau, cfg, integrand, ignore);
  QuadratureResult q;
  q.value = fw + bw;
  q.partial = rf.status != MarchStatus::complete || rb.status != MarchStatus::complete;
  q.forward_reached = rf.reached;
  q.backward_reached = rb.reached;
  return q;
}

}  // namespace lagdesc
