#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "lagdesc/descriptor.hpp"
#include "support/oracles.hpp"

using namespace lagdesc;
using Catch::Approx;

namespace {

LDConfig mp(double p, double tau, double h) {
  LDConfig c;
  c.p = p;
  c.tau = tau;
  c.integrator.step = h;
  return c;
}

LDConfig of_kind(DescriptorKind k, double tau, double h) {
  LDConfig c = mp(1.0, tau, h);
  c.kind = k;
  return c;
}

GridSpec square(double lo, double hi, std::size_t n) {
  return GridSpec{{GridAxis::range(lo, hi, n), GridAxis::range(lo, hi, n)}};
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("descriptor_at examples", "[descriptor]") {
  const DescriptorValue d = descriptor_at(make_field("linear-saddle"), Point{1.0, 0.0}, mp(0.5, 1.0, 1e-3));
  CHECK(d.value == Approx(4.0 * std::sinh(0.5)).epsilon(1e-6));
  CHECK(d.value == Approx(2.084381).margin(1e-6));
  CHECK(!d.partial);

  const VectorField ho = make_field("harmonic-oscillator");
  CHECK(descriptor_at(ho, Point{1.0, 0.0}, of_kind(DescriptorKind::arclength, 10.0, 1e-3)).value ==
        Approx(20.0).epsilon(1e-9));
  for (const Point& x0 : oracle::random_points(5, -2.0, 2.0, 4))
    for (double tau : {0.3, 7.0}) CHECK(descriptor_at(ho, x0, of_kind(DescriptorKind::lavd, tau, 0.1)).value == 0.0);
}

TEST_CASE("descriptor configuration is validated", "[descriptor]") {
  const VectorField f = make_field("linear-saddle");
  CHECK_THROWS_AS(descriptor_at(f, Point{0.1, 0.1}, mp(1.5, 1.0, 0.1)), ValidationError);
  CHECK_THROWS_AS(descriptor_at(f, Point{0.1, 0.1}, mp(0.0, 1.0, 0.1)), ValidationError);
  CHECK_THROWS_AS(descriptor_at(f, Point{0.1, 0.1}, mp(0.5, 0.0, 0.1)), ValidationError);
  CHECK_THROWS_AS(descriptor_at(f, Point{0.1, 0.1, 0.1}, mp(0.5, 1.0, 0.1)), ValidationError);
  CHECK_THROWS_AS(descriptor_at(make_field("abc"), Point{0.1, 0.1, 0.1}, of_kind(DescriptorKind::lavd, 1.0, 0.1)),
                  ValidationError);
  CHECK_THROWS_AS(descriptor_at(make_field("nonlinear-saddle"), Point{0.1, 0.1}, of_kind(DescriptorKind::lavd, 1.0, 0.1)),
                  NotAvailableError);
  CHECK(parse_descriptor_kind("arclength") == DescriptorKind::arclength);
  CHECK_THROWS_AS(parse_descriptor_kind("ftle"), ValidationError);
}

TEST_CASE("numeric descriptors match the oracles", "[descriptor][oracle]") {
  struct Case {
    const char* id;
    std::map<std::string, double> params;
    LDConfig cfg;
    double tol;
  };
  std::vector<Case> cases = {
      {"linear-saddle", {{"lambda", 1.0}}, mp(0.5, 5.0, 1e-3), 1e-6},
      {"nonlinear-saddle", {}, mp(0.5, 2.0, 1e-3), 1e-6},
      {"nonham-saddle", {{"lambda", 2.0}, {"mu", 1.0}}, mp(0.4, 4.0, 1e-3), 1e-6},
      {"global-attractor", {}, of_kind(DescriptorKind::arclength, 5.0, 1e-3), 1e-6},
      {"harmonic-oscillator", {}, mp(1.0, 6.0, 1e-3), 1e-6},
      {"nonauto-linear-saddle", {{"f", 2.0}}, mp(0.5, 3.0, 1e-3), 1e-6},
      {"nonauto-linear-saddle", {{"f", 1.0}}, of_kind(DescriptorKind::arclength, 3.0, 1e-3), 1e-6},
  };
  cases.back().cfg.t0 = 0.7;
  for (const Case& k : cases) {
    const VectorField f = make_field(k.id, k.params);
    for (const Point& x0 : oracle::random_points(6, -0.5, 0.5, 31)) {
      INFO(k.id << " x0=" << x0);
      CHECK(oracle::rel_err(descriptor_at(f, x0, k.cfg).value, oracle::descriptor_by_exact_flow(f, x0, k.cfg)) <= k.tol);
    }
  }
}

TEST_CASE("compute_field examples", "[descriptor]") {
  const VectorField saddle = make_field("linear-saddle");
  const LDConfig c = mp(0.5, 1.0, 1e-3);
  const ScalarField f = compute_field(saddle, square(-1.0, 1.0, 3), c, {1, false});
  REQUIRE(f.size() == 9);
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(std::abs(f.values[i] - oracle::descriptor_by_exact_flow(saddle, f.grid.node(i), c)) <= 1e-5);
  CHECK(f.grid.node(0) == Point{-1.0, -1.0});
  CHECK(f.grid.node(1) == Point{0.0, -1.0});
  CHECK(f.grid.node(3) == Point{-1.0, 0.0});

  const GridSpec origin{{GridAxis::at(0.0), GridAxis::at(0.0)}};
  for (const char* id : {"linear-saddle", "rotated-saddle", "nonham-saddle", "nonlinear-saddle"})
    CHECK(compute_field(make_field(id), origin, c).values == std::vector<double>{0.0});

  const GridSpec plane{{GridAxis::range(0.0, 2.0 * std::numbers::pi, 16), GridAxis::range(0.0, 2.0 * std::numbers::pi, 16),
                        GridAxis::at(0.0)}};
  const ScalarField abc = compute_field(make_field("abc"), plane, of_kind(DescriptorKind::arclength, 1.0, 0.01));
  CHECK(abc.size() == 256);
  for (double v : abc.values) {
    CHECK(v > 0.0);
    CHECK(v <= 6.0 * std::sqrt(3.0));
  }
  CHECK_THROWS_AS(compute_field(saddle, square(1.0, 1.0, 3), c), ValidationError);
  CHECK_THROWS_AS(compute_field(saddle, square(-1.0, 1.0, 1), c), ValidationError);
  CHECK_THROWS_AS(compute_field(make_field("abc"), square(-1.0, 1.0, 3), c), ValidationError);
}

TEST_CASE("fields are bit-identical for any worker count", "[descriptor][property]") {
  const VectorField f = make_field("rotated-saddle");
  const GridSpec g = square(-1.0, 1.0, 41);
  const LDConfig c = mp(0.5, 2.0, 0.01);
  const ScalarField one = compute_field(f, g, c, {1, false});
  for (unsigned threads : {2u, 3u, 8u}) {
    const ScalarField many = compute_field(f, g, c, {threads, false});
    CHECK(bitwise_equal(one.values, many.values));
    CHECK(one.partial == many.partial);
  }
  for (double v : one.values) CHECK(v >= 0.0);
}

TEST_CASE("descriptor is nondecreasing in tau", "[descriptor][property]") {
  for (const char* id : {"linear-saddle", "rotated-saddle", "harmonic-oscillator", "global-attractor"}) {
    const VectorField f = make_field(id);
    for (const Point& x0 : oracle::random_points(5, -1.0, 1.0, 41)) {
      double prev = 0.0;
      for (double tau : {0.2, 1.0, 3.0, 6.0}) {
        const double v = descriptor_at(f, x0, mp(0.3, tau, 0.01)).value;
        CHECK(v >= prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("linear saddle descriptor is symmetric", "[descriptor][property]") {
  const VectorField f = make_field("linear-saddle");
  const LDConfig c = mp(0.5, 4.0, 0.01);
  for (const Point& x0 : oracle::random_points(10, -1.0, 1.0, 43)) {
    const double v = descriptor_at(f, x0, c).value;
    for (const Point& y : {Point{-x0[0], x0[1]}, Point{x0[0], -x0[1]}, Point{-x0[0], -x0[1]}, Point{x0[1], x0[0]}})
      CHECK(descriptor_at(f, y, c).value == Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("harmonic oscillator averages stay below 2 rho^p", "[descriptor][property]") {
  const VectorField f = make_field("harmonic-oscillator");
  for (const Point& x0 : oracle::random_points(6, -2.0, 2.0, 47)) {
    const double rho = norm(x0);
    for (double p : {0.2, 0.5, 1.0}) {
      const ConvergenceSeries s = time_average(f, x0, mp(p, 1.0, 0.01), uniform_tau_samples(20.0, 40));
      for (double a : s.averages) {
        CHECK(a >= 0.0);
        CHECK(a <= 2.0 * std::pow(rho, p) * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("LAVD vanishes for the rest field and the harmonic oscillator", "[descriptor]") {
  const GridSpec g = square(-1.0, 1.0, 21);
  for (const char* id : {"rest", "harmonic-oscillator"}) {
    const ScalarField f = compute_field(make_field(id), g, of_kind(DescriptorKind::lavd, 5.0, 0.05));
    for (std::size_t i = 0; i < f.size(); ++i)
      if (norm(g.node(i)) <= 1.0) CHECK(f.values[i] == 0.0);
  }
}

TEST_CASE("time averages", "[descriptor]") {
  const VectorField ho = make_field("harmonic-oscillator");
  ConvergenceSeries s = time_average(ho, Point{1.0, 0.0}, of_kind(DescriptorKind::arclength, 1.0, 0.01),
                                     uniform_tau_samples(50.0, 50));
  for (double a : s.averages) CHECK(a == Approx(1.0).epsilon(1e-10));

  s = time_average(ho, Point{0.0, 1.0}, mp(1.0, 1.0, 0.01), uniform_tau_samples(100.0, 100));
  CHECK(std::abs(s.averages.back() - 4.0 / std::numbers::pi) < 5e-3);

  s = time_average(make_field("linear-saddle"), Point{0.0, 0.0}, mp(0.5, 1.0, 0.1), {1.0, 2.0, 3.0});
  for (double a : s.averages) CHECK(a == 0.0);

  // Samples off the integrator grid are rounded onto it.
  s = time_average(ho, Point{1.0, 0.0}, mp(1.0, 1.0, 0.1), {0.33, 1.0});
  CHECK(s.tau_requested[0] == 0.33);
  CHECK(s.tau_samples[0] == Approx(0.3));

  CHECK_THROWS_AS(time_average(ho, Point{1.0, 0.0}, mp(1.0, 1.0, 0.1), {}), ValidationError);
  CHECK_THROWS_AS(time_average(ho, Point{1.0, 0.0}, mp(1.0, 1.0, 0.1), {2.0, 1.0}), ValidationError);
}

TEST_CASE("incremental averages equal independent descriptor evaluations", "[descriptor][property]") {
  const VectorField f = make_field("rotated-saddle");
  const LDConfig c = mp(0.5, 1.0, 0.01);
  const Point x0{0.3, -0.2};
  const ConvergenceSeries s = time_average(f, x0, c, {0.5, 1.0, 1.5, 2.0});
  for (std::size_t k = 0; k < s.tau_samples.size(); ++k) {
    LDConfig ck = c;
    ck.tau = s.tau_samples[k];
    CHECK(s.averages[k] == Approx(descriptor_at(f, x0, ck).value / (2.0 * ck.tau)).epsilon(1e-12));
  }
}

TEST_CASE("select_p", "[descriptor]") {
  CHECK(select_p(2.0, 1.0, 15.0).p == Approx(1.0 / 15.0));
  CHECK(!select_p(2.0, 1.0, 15.0).clamped);
  const PSelection s = select_p(2.0, 1.0, 1.0);
  CHECK(s.p == 1.0);
  CHECK(s.raw == Approx(1.0));
  CHECK(select_p(2.0, 1.0, 0.5).clamped);
  CHECK(select_p(3.0, 1.0, 10.0).p == Approx(0.05));
  CHECK(select_p(1.0, 3.0, 10.0).p == Approx(0.05));
  CHECK_THROWS_AS(select_p(1.0, 1.0, 10.0), ValidationError);
  CHECK_THROWS_AS(select_p(2.0, 1.0, 0.0), ValidationError);
}

TEST_CASE("partial derivative fields", "[descriptor]") {
  auto producer = [](const VectorField& f) {
    return [&f](const GridSpec& g, const LDConfig& c) { return compute_field(f, g, c); };
  };
  const VectorField rest = make_field("rest");
  const ScalarField zero = partial_derivative_field(producer(rest), square(-1.0, 1.0, 5), mp(0.5, 1.0, 0.1), 0);
  for (double v : zero.values) CHECK(v == 0.0);

  // d/dx0 of the closed form: |x0|^{p-1} 2 lambda^{p-1} sinh(lambda p tau) at x0 > 0 (lambda = 1).
  const VectorField saddle = make_field("linear-saddle");
  const LDConfig c = mp(0.5, 2.0, 1e-3);
  const GridSpec g{{GridAxis::range(0.4, 0.6, 21), GridAxis::at(0.3)}};
  const ScalarField d = partial_derivative_field(producer(saddle), g, c, 0);
  CHECK(d.meta.quantity == "partial:0");
  for (std::size_t i = 1; i + 1 < d.size(); ++i) {
    const double x = g.node(i)[0];
    const double exact = std::pow(x, c.p - 1.0) * 2.0 * std::sinh(c.p * c.tau);
    CHECK(d.values[i] == Approx(exact).epsilon(1e-4));
  }

  // Diverges at the stable manifold x0 = 0 of the non-Hamiltonian saddle.
  const VectorField nonham = make_field("nonham-saddle", {{"lambda", 2.0}, {"mu", 1.0}});
  const GridSpec line{{GridAxis::range(-1.0, 1.0, 201), GridAxis::at(0.5)}};
  const ScalarField dn = partial_derivative_field(producer(nonham), line, mp(0.5, 15.0, 0.01), 0);
  std::vector<double> mags;
  for (double v : dn.values) mags.push_back(std::abs(v));
  std::vector<double> sorted = mags;
  std::nth_element(sorted.begin(), sorted.begin() + 100, sorted.end());
  CHECK(mags[101] > 10.0 * sorted[100]);

  CHECK_THROWS_AS(partial_derivative_field(producer(rest), square(-1.0, 1.0, 2), mp(0.5, 1.0, 0.1), 0),
                  ValidationError);
  CHECK_THROWS_AS(partial_derivative_field(producer(rest), line, mp(0.5, 1.0, 0.1), 1), ValidationError);
}
