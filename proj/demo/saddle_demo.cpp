// Linear saddle: compare the numerical M_p with its closed form and locate
// the stable manifold on the line y = 0.5.

#include <cstdio>

#include "lagdesc/lagdesc.hpp"

int main() {
  using namespace lagdesc;
  const VectorField saddle = make_field("linear-saddle", {{"lambda", 1.0}});
  LDConfig cfg;
  cfg.p = 0.5;
  cfg.tau = 15.0;
  cfg.integrator.step = 0.01;

  const Point x0{0.3, -0.2};
  std::printf("M_p(0.3, -0.2): numeric %.10g, closed form %.10g\n", descriptor_at(saddle, x0, cfg).value,
              oracle_descriptor(saddle, x0, cfg));

  const TransectProfile line = transect(saddle, cfg, Point{0.0, 0.5}, Point{1.0, 0.0}, 0.5, 201);
  for (const auto& f : detect_singularities(line).features)
    std::printf("singular feature at x = %g (jump ratio %.1f)\n", f.offset, f.jump_ratio);
}
