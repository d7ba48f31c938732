#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lagdesc/integrator.hpp"
#include "support/oracles.hpp"

using namespace lagdesc;
using Catch::Approx;

namespace {

IntegratorConfig with_step(double h) {
  IntegratorConfig c;
  c.step = h;
  return c;
}

double endpoint_error(double h) {
  const VectorField f = make_field("linear-saddle");
  const Point x0{1.0, 1.0};
  const Trajectory tr = integrate(f, x0, 0.0, 1.0, with_step(h));
  return max_abs_diff(tr.states.back(), f.exact_solution(x0, 0.0, 1.0));
}

}  // namespace

TEST_CASE("single RK4 step on xdot = x", "[integrator]") {
  // k1..k4 = 1, 1.05, 1.0525, 1.10525 by hand.
  const double expected = 1.0 + 0.1 / 6.0 * (1.0 + 2.0 * 1.05 + 2.0 * 1.0525 + 1.10525);
  const Trajectory tr = integrate(make_field("linear-saddle"), Point{1.0, 0.0}, 0.0, 0.1, with_step(0.1));
  REQUIRE(tr.states.size() == 2);
  CHECK(tr.states[1][0] == Approx(expected).epsilon(1e-15));
  CHECK(tr.states[1][0] == Approx(1.10517083).margin(1e-8));
}

TEST_CASE("degenerate span returns the initial condition", "[integrator]") {
  const Trajectory tr = integrate(make_field("abc"), Point{0.1, 0.2, 0.3}, 2.0, 2.0);
  REQUIRE(tr.states.size() == 1);
  CHECK(tr.states[0] == Point{0.1, 0.2, 0.3});
  CHECK(tr.times[0] == 2.0);
}

TEST_CASE("linear saddle trajectory matches the exact solution", "[integrator]") {
  const Trajectory tr = integrate(make_field("linear-saddle"), Point{1.0, 1.0}, 0.0, 1.0, with_step(0.01));
  CHECK(tr.times.back() == 1.0);
  CHECK(std::abs(tr.states.back()[0] - std::exp(1.0)) < 1e-8);
  CHECK(std::abs(tr.states.back()[1] - std::exp(-1.0)) < 1e-8);
  CHECK(tr.system_id == "linear-saddle");
  CHECK(!tr.left_box);
}

TEST_CASE("step plans land exactly on the horizon", "[integrator]") {
  IntegratorConfig c = with_step(0.3);
  StepPlan plan = plan_steps(0.0, 1.0, c);
  CHECK(plan.steps == 4);
  CHECK(plan.step == Approx(0.25));
  plan = plan_steps(0.0, -1.0, c);
  CHECK(plan.steps == 4);
  CHECK(plan.step == Approx(-0.25));
  plan = plan_steps(0.0, 15.0, with_step(0.1));
  CHECK(plan.steps == 150);
  CHECK(plan.step <= 0.1);

  const Trajectory tr = integrate(make_field("harmonic-oscillator"), Point{1.0, 0.0}, 0.0, -1.0, c);
  CHECK(tr.times.back() == -1.0);
  for (std::size_t i = 1; i < tr.times.size(); ++i) CHECK(tr.times[i] < tr.times[i - 1]);

  c.max_steps = 3;
  CHECK_THROWS_AS(plan_steps(0.0, 1.0, c), ValidationError);
  CHECK_THROWS_AS(plan_steps(0.0, INFINITY, with_step(0.1)), ValidationError);
  CHECK_THROWS_AS(with_step(0.0).validate(), ValidationError);
  CHECK_THROWS_AS(with_step(-0.1).validate(), ValidationError);
}

TEST_CASE("RK4 endpoint error is fourth order", "[integrator]") {
  for (double h : {0.1, 0.05, 0.02}) {
    const double ratio = endpoint_error(h) / endpoint_error(h / 2.0);
    INFO("h=" << h << " ratio=" << ratio);
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
  }
}

TEST_CASE("blow-up raises an error with the last finite time", "[integrator]") {
  // xdot = (2 + sin t) x + x^2 escapes to infinity before t = 1 from x = 1.
  IntegratorConfig c = with_step(1e-3);
  c.safety_half_width = 1e300;
  const VectorField f = make_field("nonauto-nonlinear-saddle", {{"f", 1.0}});
  try {
    integrate(f, Point{1.0, 0.0}, 0.0, 5.0, c);
    FAIL("expected BlowUpError");
  } catch (const BlowUpError& e) {
    CHECK(e.last_finite_time() > 0.0);
    CHECK(e.last_finite_time() < 1.0);
  }
  // With the default box the same trajectory is truncated instead.
  const Trajectory tr = integrate(f, Point{1.0, 0.0}, 0.0, 5.0, with_step(1e-3));
  CHECK(tr.left_box);
  CHECK(tr.times.back() < 1.0);
  for (const Point& x : tr.states) CHECK(all_finite(x));
}

TEST_CASE("quadrature examples", "[integrator]") {
  auto one = [](const Point&, double, const Point&) { return 1.0; };
  QuadratureResult q = integrate_with_quadrature(make_field("rest"), Point{0.3, 0.1}, 0.0, 3.0, with_step(0.1), one);
  CHECK(q.value == Approx(6.0).epsilon(1e-14));
  CHECK(!q.partial);
  CHECK(q.forward_reached == Approx(3.0));
  CHECK(q.backward_reached == Approx(-3.0));

  auto m1 = [](const Point&, double, const Point& v) { return std::abs(v[0]) + std::abs(v[1]); };
  q = integrate_with_quadrature(make_field("linear-saddle"), Point{1.0, 1.0}, 0.0, 1.0, with_step(1e-3), m1);
  CHECK(std::abs(q.value - 4.0 * std::sinh(1.0)) < 1e-5);

  auto speed = [](const Point&, double, const Point& v) { return norm(v); };
  q = integrate_with_quadrature(make_field("harmonic-oscillator"), Point{2.0, 0.0}, 0.0, 10.0, with_step(1e-3), speed);
  CHECK(std::abs(q.value - 40.0) < 1e-6);

  CHECK_THROWS_AS(integrate_with_quadrature(make_field("rest"), Point{0.0, 0.0}, 0.0, 0.0, with_step(0.1), one),
                  ValidationError);
}

TEST_CASE("quadrature is nonnegative and nondecreasing in tau", "[integrator][property]") {
  auto m = [](const Point&, double, const Point& v) { return std::sqrt(std::abs(v[0])) + std::sqrt(std::abs(v[1])); };
  for (const char* id : {"linear-saddle", "rotated-saddle", "harmonic-oscillator", "nonauto-linear-saddle"}) {
    const VectorField f = make_field(id);
    for (const Point& x0 : oracle::random_points(5, -1.0, 1.0, 17)) {
      double prev = 0.0;
      for (double tau : {0.1, 0.5, 1.0, 2.0, 4.0}) {
        const double v = integrate_with_quadrature(f, x0, 0.2, tau, with_step(0.01), m).value;
        CHECK(v >= 0.0);
        CHECK(v >= prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("time reversal returns to the initial condition", "[integrator][property]") {
  const IntegratorConfig c = with_step(1e-3);
  for (const char* id : {"linear-saddle", "rotated-saddle", "nonlinear-saddle", "harmonic-oscillator"}) {
    const VectorField f = make_field(id);
    for (const Point& x0 : oracle::random_points(4, -0.5, 0.5, 23)) {
      for (double tau : {1.0, 5.0}) {
        if (std::string(id) == "nonlinear-saddle" && tau > 1.0 && std::abs(x0[0] * x0[1]) > 0.1) continue;
        const Point there = integrate(f, x0, 0.0, tau, c).states.back();
        const Point back = integrate(f, there, tau, 0.0, c).states.back();
        INFO(id << " x0=" << x0 << " tau=" << tau);
        CHECK(max_abs_diff(back, x0) < 1e-9);
      }
    }
  }
}

TEST_CASE("leaving the safety box marks the result partial", "[integrator]") {
  IntegratorConfig c = with_step(1e-2);
  c.safety_half_width = 1e6;
  auto m = [](const Point&, double, const Point& v) { return std::abs(v[0]) + std::abs(v[1]); };
  const VectorField f = make_field("nonham-saddle", {{"lambda", 2.0}, {"mu", 1.0}});
  const QuadratureResult q = integrate_with_quadrature(f, Point{0.5, 0.5}, 0.0, 15.0, c, m);
  CHECK(q.partial);
  CHECK(q.forward_reached < 15.0);
  CHECK(q.backward_reached < -14.0);  // backward leg: x shrinks, y grows only like e^{15}
  CHECK(std::isfinite(q.value));
  CHECK(q.value > 0.0);
}

TEST_CASE("march is deterministic", "[integrator]") {
  const VectorField f = make_field("abc");
  const Trajectory a = integrate(f, Point{0.0, 3.2, 4.1}, 0.0, 20.0, with_step(0.05));
  const Trajectory b = integrate(f, Point{0.0, 3.2, 4.1}, 0.0, 20.0, with_step(0.05));
  CHECK(a.states == b.states);
  CHECK(a.times == b.times);
}
