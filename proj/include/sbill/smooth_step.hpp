#pragma once

#include <cmath>

namespace sbill {

/// Value with first and second derivative.
struct Jet2 {
  double v{0.0};
  double d1{0.0};
  double d2{0.0};
};

/// Smooth cutoff: 0 on (-inf,-1], 1 on [0,inf), C-infinity and monotone in between.
/// On (-1,0) it is e^{-1/(x+1)} / (e^{-1/(x+1)} + e^{1/x}) = 1 / (1 + e^{u}),
/// u = 1/x + 1/(x+1).
inline Jet2 smooth_step(double x) {
  if (x <= -1.0) return {0.0, 0.0, 0.0};
  if (x >= 0.0) return {1.0, 0.0, 0.0};
  const double xp = x + 1.0;
  const double u = 1.0 / x + 1.0 / xp;
  const double du = -1.0 / (x * x) - 1.0 / (xp * xp);
  const double ddu = 2.0 / (x * x * x) + 2.0 / (xp * xp * xp);
  if (u > 700.0) return {0.0, 0.0, 0.0};
  if (u < -700.0) return {1.0, 0.0, 0.0};
  const double psi = 1.0 / (1.0 + std::exp(u));
  const double w = psi * (1.0 - psi);  // -d psi / du
  const double dpsi = -w * du;
  const double dw = (1.0 - 2.0 * psi) * dpsi;
  const double ddpsi = -(dw * du + w * ddu);
  return {psi, dpsi, ddpsi};
}

inline double smooth_step_value(double x) { return smooth_step(x).v; }

}  // namespace sbill
