#pragma once

// Benchmark catalog: every builtin vector field with its flow map and the
// closed-form descriptor values that are known for it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lagdesc/config.hpp"
#include "lagdesc/error.hpp"
#include "lagdesc/point.hpp"

namespace lagdesc {

struct VectorFieldSpec {
  std::string system_id;
  std::map<std::string, double> params;
  std::size_t dim = 0;  // 0 means "whatever the builtin has"
  bool autonomous = true;

  friend bool operator==(const VectorFieldSpec&, const VectorFieldSpec&) = default;
};

enum class OracleKind { descriptor_closed_form, average_limit };

/// A closed-form value of a descriptor (or of its long-time average) for one
/// system. `only_p` restricts an mp oracle to a single exponent.
struct AnalyticOracle {
  OracleKind kind = OracleKind::descriptor_closed_form;
  DescriptorKind descriptor = DescriptorKind::mp;
  std::optional<double> only_p;
  std::function<double(const Point&, const LDConfig&)> eval;

  [[nodiscard]] bool matches(OracleKind k, const LDConfig& cfg) const {
    if (k != kind || cfg.kind != descriptor) return false;
    return !(descriptor == DescriptorKind::mp && only_p && *only_p != cfg.p);
  }
};

/// Runtime vector field v(x, t) plus whatever analytic knowledge is attached
/// to it. Builtins come from make_field(); user code can build its own with
/// the constructor and the with_* setters.
class VectorField {
 public:
  using Rhs = std::function<Point(const Point&, double)>;
  using FlowMap = std::function<Point(const Point&, double, double)>;
  using StateScalar = std::function<double(const Point&, double)>;
  using TimeScalar = std::function<double(double)>;

  VectorField(VectorFieldSpec spec, Rhs rhs) : spec_(std::move(spec)), rhs_(std::move(rhs)) {
    if (spec_.dim == 0 || spec_.dim > kMaxDim) throw ValidationError("vector field dimension out of range");
  }

  [[nodiscard]] const VectorFieldSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] const std::string& id() const noexcept { return spec_.system_id; }
  [[nodiscard]] std::size_t dim() const noexcept { return spec_.dim; }
  [[nodiscard]] bool autonomous() const noexcept { return spec_.autonomous; }

  /// Unchecked evaluation, used in the integration loops.
  Point operator()(const Point& x, double t) const { return rhs_(x, t); }

  Point evaluate(const Point& x, double t) const {
    if (x.size() != dim())
      throw ValidationError("point has dimension " + std::to_string(x.size()) + ", field '" + id() + "' expects " +
                            std::to_string(dim()));
    if (!std::isfinite(t)) throw ValidationError("time must be finite");
    return rhs_(x, t);
  }

  VectorField& with_exact_solution(FlowMap flow) {
    flow_ = std::move(flow);
    return *this;
  }
  VectorField& with_vorticity(StateScalar w, TimeScalar mean) {
    vorticity_ = std::move(w);
    mean_vorticity_ = std::move(mean);
    return *this;
  }
  VectorField& with_constant_vorticity(double w) {
    constant_vorticity_ = w;
    return with_vorticity([w](const Point&, double) { return w; }, [w](double) { return w; });
  }
  VectorField& with_oracle(AnalyticOracle o) {
    oracles_.push_back(std::move(o));
    return *this;
  }
  VectorField& with_period(double period) {
    period_ = period;
    return *this;
  }

  [[nodiscard]] bool has_exact_solution() const noexcept { return static_cast<bool>(flow_); }

  /// Exact flow map: the state at time t of the trajectory through x0 at t0.
  Point exact_solution(const Point& x0, double t0, double t) const {
    if (!flow_) throw NotAvailableError("no exact solution registered for '" + id() + "'");
    if (x0.size() != dim()) throw ValidationError("initial condition has the wrong dimension");
    if (t == t0) return x0;
    return flow_(x0, t0, t);
  }

  [[nodiscard]] bool has_vorticity() const noexcept { return static_cast<bool>(vorticity_); }
  [[nodiscard]] std::optional<double> constant_vorticity() const noexcept { return constant_vorticity_; }
  double vorticity(const Point& x, double t) const {
    if (!vorticity_) throw NotAvailableError("no vorticity registered for '" + id() + "'");
    return vorticity_(x, t);
  }
  double mean_vorticity(double t) const {
    if (!mean_vorticity_) throw NotAvailableError("no mean vorticity registered for '" + id() + "'");
    return mean_vorticity_(t);
  }

  [[nodiscard]] const std::vector<AnalyticOracle>& oracles() const noexcept { return oracles_; }
  /// Length of the periodic box along every axis, if the domain is periodic.
  [[nodiscard]] std::optional<double> period() const noexcept { return period_; }

  [[nodiscard]] const FlowMap& flow_map() const noexcept { return flow_; }
  [[nodiscard]] const StateScalar& vorticity_fn() const noexcept { return vorticity_; }
  [[nodiscard]] const TimeScalar& mean_vorticity_fn() const noexcept { return mean_vorticity_; }

 private:
  VectorFieldSpec spec_;
  Rhs rhs_;
  FlowMap flow_;
  StateScalar vorticity_;
  TimeScalar mean_vorticity_;
  std::optional<double> constant_vorticity_;
  std::vector<AnalyticOracle> oracles_;
  std::optional<double> period_;
};

struct BuiltinInfo {
  std::string_view id;
  std::size_t dim;
  bool autonomous;
  std::vector<std::pair<std::string_view, double>> defaults;
};

inline const std::vector<BuiltinInfo>& builtin_catalog() {
  static const std::vector<BuiltinInfo> catalog = {
      {"linear-saddle", 2, true, {{"lambda", 1.0}}},
      {"rotated-saddle", 2, true, {}},
      {"nonlinear-saddle", 2, true, {}},
      {"nonauto-linear-saddle", 2, false, {{"f", 1.0}}},
      {"nonauto-nonlinear-saddle", 2, false, {{"f", 1.0}}},
      {"nonham-saddle", 2, true, {{"lambda", 2.0}, {"mu", 1.0}}},
      {"global-attractor", 2, true, {}},
      {"harmonic-oscillator", 2, true, {}},
      {"rotating-saddle", 2, false, {{"omega", 2.0}}},
      {"abc", 3, true, {{"A", 1.0}, {"B", 1.0}, {"C", 1.0}}},
      {"rest", 2, true, {}},
  };
  return catalog;
}

inline const BuiltinInfo& builtin_info(std::string_view id) {
  for (const auto& b : builtin_catalog())
    if (b.id == id) return b;
  throw ValidationError("unknown system id '" + std::string(id) + "'");
}

/// Validates a spec against the catalog and materializes defaults, the
/// builtin dimension and the autonomy flag.
inline VectorFieldSpec resolve_spec(const VectorFieldSpec& in) {
  const BuiltinInfo& info = builtin_info(in.system_id);
  if (in.dim != 0 && in.dim != info.dim)
    throw ValidationError("'" + in.system_id + "' is " + std::to_string(info.dim) + "-dimensional, got dim " +
                          std::to_string(in.dim));
  VectorFieldSpec out;
  out.system_id = in.system_id;
  out.dim = info.dim;
  out.autonomous = info.autonomous;
  for (const auto& [name, value] : in.params) {
    const bool known = std::any_of(info.defaults.begin(), info.defaults.end(),
                                   [&](const auto& d) { return d.first == name; });
    if (!known) throw ValidationError("'" + in.system_id + "' has no parameter '" + name + "'");
    if (!std::isfinite(value)) throw ValidationError("parameter '" + name + "' must be finite");
  }
  for (const auto& [name, value] : info.defaults) {
    auto it = in.params.find(std::string(name));
    out.params[std::string(name)] = it == in.params.end() ? value : it->second;
  }

  const auto& p = out.params;
  if (p.contains("lambda") && !(p.at("lambda") > 0.0)) throw ValidationError("lambda must be > 0");
  if (p.contains("mu")) {
    if (!(p.at("mu") > 0.0)) throw ValidationError("mu must be > 0");
    if (p.at("mu") == p.at("lambda")) throw ValidationError("nonham-saddle requires mu != lambda");
  }
  if (p.contains("f") && p.at("f") != 1.0 && p.at("f") != 2.0)
    throw ValidationError("forcing selector f must be 1 (2 + sin t) or 2 (1 + t^2/(1+t^2))");
  return out;
}

namespace detail {

/// Positive C^1 forcing for the nonautonomous saddles, with its antiderivative
/// F(t) = int_0^t f(s) ds.
struct Forcing {
  int selector = 1;
  [[nodiscard]] double f(double t) const { return selector == 1 ? 2.0 + std::sin(t) : 1.0 + t * t / (1.0 + t * t); }
  [[nodiscard]] double F(double t) const {
    return selector == 1 ? 2.0 * t + 1.0 - std::cos(t) : 2.0 * t - std::atan(t);
  }
};

inline double pow_abs(double v, double p) { return p == 1.0 ? std::abs(v) : std::pow(std::abs(v), p); }

// int_{-tau}^{tau} |c e^{k t}|^p dt for c = 1: 2 sinh(k p tau) / (k p), with the k -> 0 limit.
inline double exp_power_integral(double k, double p, double tau) {
  const double kp = k * p;
  if (kp == 0.0) return 2.0 * tau;
  return 2.0 * std::sinh(kp * tau) / kp;
}

// Antiderivative of |sin s|, continuous and nondecreasing.
inline double abs_sin_primitive(double s) {
  const double k = std::floor(s / std::numbers::pi);
  return 2.0 * k + 1.0 - std::cos(s - k * std::numbers::pi);
}

inline double gk_integral(const std::function<double(double)>& g, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  const double mid = 0.5 * (a + b);
  return gauss_kronrod<double, 61>::integrate(g, a, mid, 20, 1e-14) +
         gauss_kronrod<double, 61>::integrate(g, mid, b, 20, 1e-14);
}

inline AnalyticOracle closed_form(DescriptorKind k, std::function<double(const Point&, const LDConfig&)> f,
                                  std::optional<double> only_p = std::nullopt) {
  return AnalyticOracle{OracleKind::descriptor_closed_form, k, only_p, std::move(f)};
}

inline VectorField build_linear_saddle(const VectorFieldSpec& s) {
  const double lam = s.params.at("lambda");
  VectorField vf(s, [lam](const Point& x, double) { return Point{lam * x[0], -lam * x[1]}; });
  vf.with_exact_solution([lam](const Point& x0, double t0, double t) {
      const double e = std::exp(lam * (t - t0));
      return Point{x0[0] * e, x0[1] / e};
    })
      .with_constant_vorticity(0.0)
      .with_oracle(closed_form(DescriptorKind::mp, [lam](const Point& x0, const LDConfig& c) {
        return (pow_abs(x0[0], c.p) + pow_abs(x0[1], c.p)) * std::pow(lam, c.p) * exp_power_integral(lam, c.p, c.tau);
      }));
  return vf;
}

inline VectorField build_rotated_saddle(const VectorFieldSpec& s) {
  VectorField vf(s, [](const Point& x, double) { return Point{x[1], x[0]}; });
  vf.with_exact_solution([](const Point& x0, double t0, double t) {
      const double c = std::cosh(t - t0), sh = std::sinh(t - t0);
      return Point{x0[0] * c + x0[1] * sh, x0[0] * sh + x0[1] * c};
    })
      .with_constant_vorticity(0.0);
  return vf;
}

// H(x, y) = xy + x^2 y^2. The product xy is a first integral, so the flow is a
// linear saddle with trajectory-dependent rate 1 + 2 x0 y0.
inline VectorField build_nonlinear_saddle(const VectorFieldSpec& s) {
  VectorField vf(s, [](const Point& x, double) {
    const double xy = x[0] * x[1];
    return Point{x[0] * (1.0 + 2.0 * xy), -x[1] * (1.0 + 2.0 * xy)};
  });
  vf.with_exact_solution([](const Point& x0, double t0, double t) {
      const double e = std::exp((1.0 + 2.0 * x0[0] * x0[1]) * (t - t0));
      return Point{x0[0] * e, x0[1] / e};
    })
      .with_vorticity([](const Point& x, double) { return -2.0 * (x[0] * x[0] + x[1] * x[1]); }, nullptr)
      .with_oracle(closed_form(DescriptorKind::mp, [](const Point& x0, const LDConfig& c) {
        const double rate = 1.0 + 2.0 * x0[0] * x0[1];
        if (rate == 0.0) return 0.0;
        return (pow_abs(x0[0], c.p) + pow_abs(x0[1], c.p)) * pow_abs(rate, c.p) *
               exp_power_integral(rate, c.p, c.tau);
      }));
  return vf;
}

inline VectorField build_nonauto_linear_saddle(const VectorFieldSpec& s) {
  const Forcing fc{static_cast<int>(s.params.at("f"))};
  VectorField vf(s, [fc](const Point& x, double t) {
    const double f = fc.f(t);
    return Point{f * x[0], -f * x[1]};
  });
  vf.with_exact_solution([fc](const Point& x0, double t0, double t) {
      const double e = std::exp(fc.F(t) - fc.F(t0));
      return Point{x0[0] * e, x0[1] / e};
    })
      .with_constant_vorticity(0.0)
      // |x0|^p A + |y0|^p B, with A and B by adaptive Gauss-Kronrod quadrature.
      .with_oracle(closed_form(DescriptorKind::mp,
                               [fc](const Point& x0, const LDConfig& c) {
                                 const double base = fc.F(c.t0);
                                 auto a = [&](double t) { return std::pow(fc.f(t) * std::exp(fc.F(t) - base), c.p); };
                                 auto b = [&](double t) { return std::pow(fc.f(t) * std::exp(base - fc.F(t)), c.p); };
                                 const double lo = c.t0 - c.tau, hi = c.t0 + c.tau;
                                 return pow_abs(x0[0], c.p) * gk_integral(a, lo, hi) +
                                        pow_abs(x0[1], c.p) * gk_integral(b, lo, hi);
                               }))
      .with_oracle(closed_form(DescriptorKind::arclength, [fc](const Point& x0, const LDConfig& c) {
        const double base = fc.F(c.t0);
        auto speed = [&](double t) {
          const double g = fc.F(t) - base;
          return fc.f(t) * std::hypot(x0[0] * std::exp(g), x0[1] * std::exp(-g));
        };
        return gk_integral(speed, c.t0 - c.tau, c.t0 + c.tau);
      }));
  return vf;
}

// H(x, y, t) = f(t) xy + x^2 y, i.e. g1 = x^2, g2 = -2xy.
inline VectorField build_nonauto_nonlinear_saddle(const VectorFieldSpec& s) {
  const Forcing fc{static_cast<int>(s.params.at("f"))};
  VectorField vf(s, [fc](const Point& x, double t) {
    const double f = fc.f(t);
    return Point{f * x[0] + x[0] * x[0], -f * x[1] - 2.0 * x[0] * x[1]};
  });
  vf.with_vorticity([](const Point& x, double) { return -2.0 * x[1]; }, nullptr);
  return vf;
}

inline VectorField build_nonham_saddle(const VectorFieldSpec& s) {
  const double lam = s.params.at("lambda"), mu = s.params.at("mu");
  VectorField vf(s, [lam, mu](const Point& x, double) { return Point{lam * x[0], -mu * x[1]}; });
  vf.with_exact_solution([lam, mu](const Point& x0, double t0, double t) {
      return Point{x0[0] * std::exp(lam * (t - t0)), x0[1] * std::exp(-mu * (t - t0))};
    })
      .with_constant_vorticity(0.0)
      .with_oracle(closed_form(DescriptorKind::mp, [lam, mu](const Point& x0, const LDConfig& c) {
        return std::pow(lam, c.p) * pow_abs(x0[0], c.p) * exp_power_integral(lam, c.p, c.tau) +
               std::pow(mu, c.p) * pow_abs(x0[1], c.p) * exp_power_integral(mu, c.p, c.tau);
      }));
  return vf;
}

inline VectorField build_global_attractor(const VectorFieldSpec& s) {
  VectorField vf(s, [](const Point& x, double) { return Point{-x[0], -x[1]}; });
  vf.with_exact_solution([](const Point& x0, double t0, double t) { return x0 * std::exp(-(t - t0)); })
      .with_constant_vorticity(0.0)
      .with_oracle(closed_form(DescriptorKind::mp,
                               [](const Point& x0, const LDConfig& c) {
                                 return (pow_abs(x0[0], c.p) + pow_abs(x0[1], c.p)) * 2.0 * std::sinh(c.p * c.tau) /
                                        c.p;
                               }))
      .with_oracle(closed_form(DescriptorKind::arclength, [](const Point& x0, const LDConfig& c) {
        return 2.0 * std::hypot(x0[0], x0[1]) * std::sinh(c.tau);
      }));
  return vf;
}

// x = rho cos(theta), y = rho sin(theta), theta(t) = theta0 - (t - t0).
inline VectorField build_harmonic_oscillator(const VectorFieldSpec& s) {
  VectorField vf(s, [](const Point& x, double) { return Point{x[1], -x[0]}; });
  vf.with_exact_solution([](const Point& x0, double t0, double t) { return rotate2(x0, -(t - t0)); })
      .with_constant_vorticity(-2.0)
      .with_oracle(closed_form(DescriptorKind::arclength,
                               [](const Point& x0, const LDConfig& c) { return 2.0 * c.tau * std::hypot(x0[0], x0[1]); }))
      .with_oracle(closed_form(
          DescriptorKind::mp,
          [](const Point& x0, const LDConfig& c) {
            // |xdot| + |ydot| = rho (|sin s| + |cos s|), s sweeping [theta0 - tau, theta0 + tau].
            const double rho = std::hypot(x0[0], x0[1]);
            if (rho == 0.0) return 0.0;
            const double th = std::atan2(x0[1], x0[0]);
            const double lo = th - c.tau, hi = th + c.tau, q = std::numbers::pi / 2.0;
            return rho * (abs_sin_primitive(hi) - abs_sin_primitive(lo) + abs_sin_primitive(hi + q) -
                          abs_sin_primitive(lo + q));
          },
          1.0))
      .with_oracle(closed_form(DescriptorKind::lavd, [](const Point&, const LDConfig&) { return 0.0; }))
      .with_oracle(AnalyticOracle{OracleKind::average_limit, DescriptorKind::arclength, std::nullopt,
                                  [](const Point& x0, const LDConfig&) { return std::hypot(x0[0], x0[1]); }})
      .with_oracle(AnalyticOracle{OracleKind::average_limit, DescriptorKind::mp, 1.0,
                                  [](const Point& x0, const LDConfig&) {
                                    return 4.0 / std::numbers::pi * std::hypot(x0[0], x0[1]);
                                  }});
  return vf;
}

// xdot = [[sin 2wt, w + cos 2wt], [-w + cos 2wt, -sin 2wt]] x. In the frame
// u = R(wt) x it is the stationary saddle udot = (u2, u1).
inline VectorField build_rotating_saddle(const VectorFieldSpec& s) {
  const double w = s.params.at("omega");
  VectorField vf(s, [w](const Point& x, double t) {
    const double sn = std::sin(2.0 * w * t), cs = std::cos(2.0 * w * t);
    return Point{sn * x[0] + (w + cs) * x[1], (-w + cs) * x[0] - sn * x[1]};
  });
  vf.with_exact_solution([w](const Point& x0, double t0, double t) {
      const Point u0 = rotate2(x0, w * t0);
      const double c = std::cosh(t - t0), sh = std::sinh(t - t0);
      return rotate2(Point{u0[0] * c + u0[1] * sh, u0[0] * sh + u0[1] * c}, -w * t);
    })
      .with_constant_vorticity(-2.0 * w);
  return vf;
}

inline VectorField build_abc(const VectorFieldSpec& s) {
  const double A = s.params.at("A"), B = s.params.at("B"), C = s.params.at("C");
  VectorField vf(s, [A, B, C](const Point& x, double) {
    return Point{A * std::sin(x[2]) + C * std::cos(x[1]), B * std::sin(x[0]) + A * std::cos(x[2]),
                 C * std::sin(x[1]) + B * std::cos(x[0])};
  });
  vf.with_period(2.0 * std::numbers::pi);
  return vf;
}

inline VectorField build_rest(const VectorFieldSpec& s) {
  VectorField vf(s, [](const Point& x, double) { return Point(x.size()); });
  auto zero = [](const Point&, const LDConfig&) { return 0.0; };
  vf.with_exact_solution([](const Point& x0, double, double) { return x0; })
      .with_constant_vorticity(0.0)
      .with_oracle(closed_form(DescriptorKind::mp, zero))
      .with_oracle(closed_form(DescriptorKind::arclength, zero))
      .with_oracle(closed_form(DescriptorKind::lavd, zero));
  return vf;
}

}  // namespace detail

inline VectorField make_field(const VectorFieldSpec& spec) {
  const VectorFieldSpec s = resolve_spec(spec);
  using Builder = VectorField (*)(const VectorFieldSpec&);
  static const std::map<std::string_view, Builder> builders = {
      {"linear-saddle", detail::build_linear_saddle},
      {"rotated-saddle", detail::build_rotated_saddle},
      {"nonlinear-saddle", detail::build_nonlinear_saddle},
      {"nonauto-linear-saddle", detail::build_nonauto_linear_saddle},
      {"nonauto-nonlinear-saddle", detail::build_nonauto_nonlinear_saddle},
      {"nonham-saddle", detail::build_nonham_saddle},
      {"global-attractor", detail::build_global_attractor},
      {"harmonic-oscillator", detail::build_harmonic_oscillator},
      {"rotating-saddle", detail::build_rotating_saddle},
      {"abc", detail::build_abc},
      {"rest", detail::build_rest},
  };
  return builders.at(s.system_id)(s);
}

inline VectorField make_field(std::string_view id, std::map<std::string, double> params = {}) {
  return make_field(VectorFieldSpec{std::string(id), std::move(params), 0, true});
}

inline Point evaluate_field(const VectorFieldSpec& spec, const Point& x, double t) {
  return make_field(spec).evaluate(x, t);
}

inline Point exact_solution(const VectorFieldSpec& spec, const Point& x0, double t0, double t) {
  return make_field(spec).exact_solution(x0, t0, t);
}

inline const AnalyticOracle* find_oracle(const VectorField& field, OracleKind kind, const LDConfig& cfg) {
  for (const auto& o : field.oracles())
    if (o.matches(kind, cfg)) return &o;
  return nullptr;
}

/// Closed-form descriptor value for (field, cfg), where one is known.
inline double oracle_descriptor(const VectorField& field, const Point& x0, const LDConfig& cfg) {
  cfg.validate();
  const AnalyticOracle* o = find_oracle(field, OracleKind::descriptor_closed_form, cfg);
  if (!o)
    throw NotAvailableError("no closed-form " + std::string(to_string(cfg.kind)) + " oracle for '" + field.id() + "'");
  if (x0.size() != field.dim()) throw ValidationError("initial condition has the wrong dimension");
  return o->eval(x0, cfg);
}

inline double oracle_descriptor(const VectorFieldSpec& spec, const Point& x0, const LDConfig& cfg) {
  return oracle_descriptor(make_field(spec), x0, cfg);
}

/// Limit of the normalized descriptor (value / 2 tau) as tau grows.
inline double oracle_average_limit(const VectorField& field, const Point& x0, const LDConfig& cfg) {
  const AnalyticOracle* o = find_oracle(field, OracleKind::average_limit, cfg);
  if (!o) throw NotAvailableError("no average-limit oracle for '" + field.id() + "'");
  return o->eval(x0, cfg);
}

}  // namespace lagdesc
