#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "lagdesc/error.hpp"

namespace lagdesc {

enum class DescriptorKind { mp, arclength, lavd };

inline std::string_view to_string(DescriptorKind k) {
  switch (k) {
    case DescriptorKind::mp: return "mp";
    case DescriptorKind::arclength: return "arclength";
    case DescriptorKind::lavd: return "lavd";
  }
  return "?";
}

inline DescriptorKind parse_descriptor_kind(std::string_view s) {
  if (s == "mp") return DescriptorKind::mp;
  if (s == "arclength") return DescriptorKind::arclength;
  if (s == "lavd") return DescriptorKind::lavd;
  throw ValidationError("unknown descriptor kind '" + std::string(s) + "'");
}

struct IntegratorConfig {
  double step = 0.1;
  std::size_t max_steps = 50'000'000;
  // Trajectories whose coordinates exceed this magnitude are truncated and
  // the descriptor value is flagged partial.
  double safety_half_width = 1e15;

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("integrator step must be positive and finite");
    if (max_steps == 0) throw ValidationError("max_steps must be positive");
    if (!(safety_half_width > 0.0)) throw ValidationError("safety half-width must be positive");
  }
};

struct LDConfig {
  DescriptorKind kind = DescriptorKind::mp;
  double p = 0.5;  // only meaningful for kind == mp
  double tau = 1.0;
  double t0 = 0.0;
  IntegratorConfig integrator{};

  void validate() const {
    integrator.validate();
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be positive and finite");
    if (!std::isfinite(t0)) throw ValidationError("t0 must be finite");
    if (kind == DescriptorKind::mp && !(p > 0.0 && p <= 1.0))
      throw ValidationError("p must lie in (0, 1] for the mp descriptor");
  }
};

}  // namespace lagdesc
