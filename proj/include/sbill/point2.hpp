#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace sbill {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Point2 {
  double x{0.0};
  double y{0.0};

  constexpr Point2() = default;
  constexpr Point2(double x_, double y_) : x(x_), y(y_) {}
  explicit Point2(std::complex<double> z) : x(z.real()), y(z.imag()) {}

  std::complex<double> as_complex() const { return {x, y}; }

  constexpr Point2& operator+=(const Point2& o) { x += o.x; y += o.y; return *this; }
  constexpr Point2& operator-=(const Point2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Point2& operator*=(double s) { x *= s; y *= s; return *this; }
};

constexpr Point2 operator+(Point2 a, const Point2& b) { return a += b; }
constexpr Point2 operator-(Point2 a, const Point2& b) { return a -= b; }
constexpr Point2 operator-(const Point2& a) { return {-a.x, -a.y}; }
constexpr Point2 operator*(Point2 a, double s) { return a *= s; }
constexpr Point2 operator*(double s, Point2 a) { return a *= s; }
constexpr Point2 operator/(Point2 a, double s) { return {a.x / s, a.y / s}; }

constexpr double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Point2& a) { return std::hypot(a.x, a.y); }
inline Point2 normalized(const Point2& a) { return a / norm(a); }

/// e^{it}
inline Point2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Multiplication by i.
constexpr Point2 perp(const Point2& a) { return {-a.y, a.x}; }

inline Point2 rotate(const Point2& a, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

/// Signed angle from a to b in (-pi, pi].
inline double angle_between(const Point2& a, const Point2& b) {
  return std::atan2(cross(a, b), dot(a, b));
}

/// Reduce an angle into [0, 2pi).
inline double wrap_2pi(double t) {
  double r = std::fmod(t, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

/// Reduce an angle into (-pi, pi].
inline double wrap_pi(double t) {
  double r = wrap_2pi(t);
  if (r > kPi) r -= kTwoPi;
  return r;
}

/// Reduce an angle into [0, pi).
inline double wrap_half(double t) {
  double r = std::fmod(t, kPi);
  if (r < 0.0) r += kPi;
  if (r >= kPi) r -= kPi;
  return r;
}

}  // namespace sbill
