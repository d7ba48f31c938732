#pragma once

// Rotating reference frames in the plane. Frame coordinates are
// xf = R(theta)^T x with theta = sense * omega * t and R(a) the
// counter-clockwise rotation by a.

#include <cmath>
#include <string>

#include "lagdesc/error.hpp"
#include "lagdesc/point.hpp"
#include "lagdesc/systems.hpp"

namespace lagdesc {

struct RotatingFrame {
  double omega = 1.0;
  int sense = 1;

  [[nodiscard]] double angular_velocity() const { return sense * omega; }
  [[nodiscard]] double angle(double t) const { return angular_velocity() * t; }

  void validate() const {
    if (!std::isfinite(omega)) throw ValidationError("frame angular speed must be finite");
    if (sense != 1 && sense != -1) throw ValidationError("frame sense must be +1 or -1");
  }
};

/// R(theta)^T x, or R(theta) x when inverse.
inline Point transform_point(const RotatingFrame& fr, const Point& x, double t, bool inverse = false) {
  fr.validate();
  if (x.size() != 2) throw ValidationError("rotating frames are planar");
  return rotate2(x, inverse ? fr.angle(t) : -fr.angle(t));
}

/// The field seen in the frame: v_f(xf, t) = R^T v(R xf, t) - w J xf, with
/// J xf = (-y, x). Two known pairs map onto exact builtins.
inline VectorField transform_field(const VectorField& f, const RotatingFrame& fr) {
  fr.validate();
  if (f.dim() != 2) throw ValidationError("rotating frames are planar; '" + f.id() + "' has dimension " +
                                          std::to_string(f.dim()));
  const double w = fr.angular_velocity();
  if (w == 0.0) return f;
  if (f.id() == "rest" && w == 1.0) return make_field("harmonic-oscillator");
  if (f.id() == "rotating-saddle" && w == -f.spec().params.at("omega")) return make_field("rotated-saddle");

  VectorFieldSpec spec;
  spec.system_id = "rotating-frame(" + f.id() + ")";
  spec.params = f.spec().params;
  spec.params["frame.omega"] = w;
  spec.dim = 2;
  spec.autonomous = false;

  VectorField out(spec, [f, w](const Point& xf, double t) {
    const Point v = f(rotate2(xf, w * t), t);
    Point r = rotate2(v, -w * t);
    r[0] += w * xf[1];
    r[1] -= w * xf[0];
    return r;
  });
  if (f.has_exact_solution())
    out.with_exact_solution([f, w](const Point& x0, double t0, double t) {
      return rotate2(f.exact_solution(rotate2(x0, w * t0), t0, t), -w * t);
    });
  if (f.has_vorticity()) {
    if (const auto c = f.constant_vorticity())
      out.with_constant_vorticity(*c - 2.0 * w);
    else
      out.with_vorticity([f, w](const Point& xf, double t) { return f.vorticity(rotate2(xf, w * t), t) - 2.0 * w; },
                         f.mean_vorticity_fn() ? VectorField::TimeScalar([f, w](double t) {
                           return f.mean_vorticity(t) - 2.0 * w;
                         })
                                               : VectorField::TimeScalar{});
  }
  return out;
}

}  // namespace lagdesc
