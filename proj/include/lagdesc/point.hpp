#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <ostream>

namespace lagdesc {

inline constexpr std::size_t kMaxDim = 6;

/// Fixed-capacity state vector. Phase spaces here are small (2D/3D builtins),
/// so a point never allocates; arithmetic is component-wise over size().
class Point {
 public:
  Point() = default;
  explicit Point(std::size_t dim) : n_(dim) { assert(dim <= kMaxDim); }
  Point(std::initializer_list<double> values) : n_(values.size()) {
    assert(values.size() <= kMaxDim);
    std::copy(values.begin(), values.end(), c_.begin());
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] bool empty() const noexcept { return n_ == 0; }

  double& operator[](std::size_t i) noexcept { return c_[i]; }
  double operator[](std::size_t i) const noexcept { return c_[i]; }

  double* begin() noexcept { return c_.data(); }
  double* end() noexcept { return c_.data() + n_; }
  const double* begin() const noexcept { return c_.data(); }
  const double* end() const noexcept { return c_.data() + n_; }

  Point& operator+=(const Point& o) noexcept {
    for (std::size_t i = 0; i < n_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Point& operator-=(const Point& o) noexcept {
    for (std::size_t i = 0; i < n_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Point& operator*=(double s) noexcept {
    for (std::size_t i = 0; i < n_; ++i) c_[i] *= s;
    return *this;
  }

  friend Point operator+(Point a, const Point& b) noexcept { return a += b; }
  friend Point operator-(Point a, const Point& b) noexcept { return a -= b; }
  friend Point operator*(Point a, double s) noexcept { return a *= s; }
  friend Point operator*(double s, Point a) noexcept { return a *= s; }

  friend bool operator==(const Point& a, const Point& b) noexcept {
    return a.n_ == b.n_ && std::equal(a.begin(), a.end(), b.begin());
  }

  friend std::ostream& operator<<(std::ostream& os, const Point& p) {
    os << '(';
    for (std::size_t i = 0; i < p.n_; ++i) os << (i ? ", " : "") << p.c_[i];
    return os << ')';
  }

 private:
  std::array<double, kMaxDim> c_{};
  std::size_t n_ = 0;
};

/// a + s*b without temporaries; the RK4 stages use this.
inline Point axpy(const Point& a, double s, const Point& b) noexcept {
  Point r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * b[i];
  return r;
}

inline double norm(const Point& p) noexcept {
  double s = 0.0;
  for (double v : p) s += v * v;
  return std::sqrt(s);
}

inline double max_abs_diff(const Point& a, const Point& b) noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline bool all_finite(const Point& p) noexcept {
  return std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); });
}

/// Planar rotation by `angle` (counter-clockwise), i.e. R(angle) x.
inline Point rotate2(const Point& x, double angle) noexcept {
  const double c = std::cos(angle), s = std::sin(angle);
  return Point{c * x[0] - s * x[1], s * x[0] + c * x[1]};
}

}  // namespace lagdesc
