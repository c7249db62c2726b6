#pragma once

// Real-valued trigonometric polynomials stored by their complex Fourier
// coefficients alpha_k, -N <= k <= N, with alpha_{-k} = conj(alpha_k).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "sbill/errors.hpp"
#include "sbill/point2.hpp"

namespace sbill {

using cplx = std::complex<double>;

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kImagResidueTol = 1e-12;
inline constexpr std::size_t kDefaultFitGrid = 4096;
inline constexpr int kDefaultFitDegree = 128;

class TrigPoly {
 public:
  TrigPoly() : coeffs_{cplx{0.0, 0.0}} {}

  /// Full coefficient vector of odd length 2N+1, index k+N holds alpha_k.
  /// Rejects input whose negative side is not the conjugate of the positive side.
  explicit TrigPoly(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty() || coeffs_.size() % 2 == 0) {
      throw Error(ErrorCode::InvalidArgument, "coefficient vector must have odd length 2N+1");
    }
    const int n = degree();
    if (std::abs(coeffs_[n].imag()) > kSymmetryTol) {
      throw Error(ErrorCode::AsymmetricCoefficients, "alpha_0 must be real");
    }
    for (int k = 1; k <= n; ++k) {
      if (std::abs(coeff(-k) - std::conj(coeff(k))) > kSymmetryTol) {
        throw Error(ErrorCode::AsymmetricCoefficients,
                    "alpha_{-" + std::to_string(k) + "} != conj(alpha_" + std::to_string(k) + ")");
      }
    }
    // Snap the sub-tolerance residue so evaluation is exactly real.
    coeffs_[n] = cplx{coeffs_[n].real(), 0.0};
    for (int k = 1; k <= n; ++k) coeffs_[n - k] = std::conj(coeffs_[n + k]);
  }

  /// Build from alpha_0..alpha_N; the negative side is reconstructed by symmetry.
  static TrigPoly from_nonnegative(std::span<const cplx> pos) {
    if (pos.empty()) return TrigPoly{};
    const int n = static_cast<int>(pos.size()) - 1;
    std::vector<cplx> all(2 * n + 1);
    for (int k = 0; k <= n; ++k) {
      all[n + k] = pos[k];
      all[n - k] = std::conj(pos[k]);
    }
    return TrigPoly(std::move(all));
  }

  static TrigPoly constant(double c) { return TrigPoly(std::vector<cplx>{cplx{c, 0.0}}); }

  /// amp * cos(k t)
  static TrigPoly cosine(int k, double amp) {
    std::vector<cplx> pos(k + 1, cplx{0.0, 0.0});
    pos[k] += k == 0 ? cplx{amp, 0.0} : cplx{amp / 2.0, 0.0};
    return from_nonnegative(pos);
  }

  /// amp * sin(k t)
  static TrigPoly sine(int k, double amp) {
    if (k == 0) return TrigPoly{};
    std::vector<cplx> pos(k + 1, cplx{0.0, 0.0});
    pos[k] = cplx{0.0, -amp / 2.0};
    return from_nonnegative(pos);
  }

  int degree() const { return static_cast<int>(coeffs_.size() / 2); }

  cplx coeff(int k) const {
    const int n = degree();
    if (k < -n || k > n) return {0.0, 0.0};
    return coeffs_[static_cast<std::size_t>(k + n)];
  }

  const std::vector<cplx>& coefficients() const { return coeffs_; }

  /// Cosine/sine amplitudes: p(t) = a0 + sum_k (A_k cos kt + B_k sin kt).
  double cos_amplitude(int k) const { return k == 0 ? coeff(0).real() : 2.0 * coeff(k).real(); }
  double sin_amplitude(int k) const { return k == 0 ? 0.0 : -2.0 * coeff(k).imag(); }

  double operator()(double t) const { return eval(t); }

  double eval(double t) const {
    const int n = degree();
    const cplx z = std::polar(1.0, t);
    cplx zk{1.0, 0.0};
    cplx sum = coeff(0);
    for (int k = 1; k <= n; ++k) {
      zk *= z;
      if (k % 32 == 0) zk = std::polar(1.0, k * t);  // limit recurrence drift
      sum += coeff(k) * zk + coeff(-k) * std::conj(zk);
    }
    if (std::abs(sum.imag()) > kImagResidueTol * std::max(1.0, l1_norm())) {
      throw Error(ErrorCode::ImaginaryResidue, "evaluation produced a non-real value");
    }
    return sum.real();
  }

  TrigPoly derivative() const {
    const int n = degree();
    std::vector<cplx> out(coeffs_.size());
    for (int k = -n; k <= n; ++k) out[k + n] = cplx{0.0, static_cast<double>(k)} * coeff(k);
    return TrigPoly(std::move(out));
  }

  double l1_norm() const {
    double s = 0.0;
    for (const auto& c : coeffs_) s += std::abs(c);
    return s;
  }

  /// Largest coefficient magnitude of the given index set.
  template <class Pred>
  double max_coeff_where(Pred pred) const {
    double m = 0.0;
    for (int k = -degree(); k <= degree(); ++k) {
      if (pred(k)) m = std::max(m, std::abs(coeff(k)));
    }
    return m;
  }

  friend TrigPoly operator+(const TrigPoly& a, const TrigPoly& b) {
    const int n = std::max(a.degree(), b.degree());
    std::vector<cplx> out(2 * n + 1);
    for (int k = -n; k <= n; ++k) out[k + n] = a.coeff(k) + b.coeff(k);
    return TrigPoly(std::move(out));
  }
  friend TrigPoly operator*(double s, const TrigPoly& a) {
    std::vector<cplx> out = a.coeffs_;
    for (auto& c : out) c *= s;
    return TrigPoly(std::move(out));
  }
  friend TrigPoly operator-(const TrigPoly& a, const TrigPoly& b) { return a + (-1.0) * b; }

 private:
  std::vector<cplx> coeffs_;
};

/// int_0^t p(s) e^{is} ds in closed form. Requires alpha_{-1} = 0 so the
/// integrand has no secular term and the curve closes at t = 2pi.
inline Point2 path_integral(const TrigPoly& p, double t) {
  if (std::abs(p.coeff(-1)) > kSymmetryTol) {
    throw Error(ErrorCode::NonClosedCurve, "alpha_{-1} must vanish for a closed curve");
  }
  const int n = p.degree();
  cplx sum{0.0, 0.0};
  for (int k = -n; k <= n; ++k) {
    if (k == -1) continue;
    const double m = static_cast<double>(k + 1);
    sum += p.coeff(k) * (std::polar(1.0, m * t) - 1.0) / cplx{0.0, m};
  }
  return Point2(sum);
}

inline TrigPoly derivative(const TrigPoly& p) { return p.derivative(); }

struct FitResult {
  TrigPoly poly;
  double residual{0.0};  // max |fit - sample| over the sample grid
};

/// Discrete Fourier fit of degree N from equispaced samples covering one period.
inline FitResult fit(std::span<const std::pair<double, double>> samples, int degree) {
  if (degree < 0) throw Error(ErrorCode::InvalidArgument, "degree must be non-negative");
  const std::size_t m = samples.size();
  if (m < static_cast<std::size_t>(2 * degree + 1)) {
    throw Error(ErrorCode::InsufficientSamples,
                std::to_string(m) + " samples cannot determine degree " + std::to_string(degree));
  }
  const double step = kTwoPi / static_cast<double>(m);
  const double t0 = samples[0].first;
  for (std::size_t j = 0; j < m; ++j) {
    if (std::abs(samples[j].first - (t0 + step * static_cast<double>(j))) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument, "fit requires equispaced samples over one period");
    }
  }
  std::vector<cplx> pos(degree + 1, cplx{0.0, 0.0});
  for (int k = 0; k <= degree; ++k) {
    cplx acc{0.0, 0.0};
    for (const auto& [t, y] : samples) acc += y * std::polar(1.0, -k * t);
    pos[k] = acc / static_cast<double>(m);
  }
  pos[0] = cplx{pos[0].real(), 0.0};
  FitResult out{TrigPoly::from_nonnegative(pos), 0.0};
  for (const auto& [t, y] : samples) out.residual = std::max(out.residual, std::abs(out.poly(t) - y));
  return out;
}

/// Sample a callable on the standard equispaced grid t_j = 2 pi j / m.
template <class F>
std::vector<std::pair<double, double>> sample_periodic(F&& fn, std::size_t m = kDefaultFitGrid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double t = kTwoPi * static_cast<double>(j) / static_cast<double>(m);
    out.emplace_back(t, fn(t));
  }
  return out;
}

inline bool in_V_index(int k) { return k % 2 != 0 && k != 1 && k != -1; }

/// Projection onto V: drop even harmonics (including the mean) and k = +-1.
inline TrigPoly project_V(const TrigPoly& p) {
  std::vector<cplx> out = p.coefficients();
  const int n = p.degree();
  for (int k = -n; k <= n; ++k) {
    if (!in_V_index(k)) out[k + n] = cplx{0.0, 0.0};
  }
  return TrigPoly(std::move(out));
}

/// Largest coefficient that project_V would discard.
inline double projection_defect(const TrigPoly& p) {
  return p.max_coeff_where([](int k) { return !in_V_index(k); });
}

// On disk a TrigPoly is a JSON array of [k, re, im] triples, k >= 0.
inline nlohmann::json to_json(const TrigPoly& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (int k = 0; k <= p.degree(); ++k) {
    const cplx c = p.coeff(k);
    arr.push_back({k, c.real(), c.imag()});
  }
  return arr;
}

inline TrigPoly trig_poly_from_json(const nlohmann::json& arr) {
  if (!arr.is_array()) throw Error(ErrorCode::InvalidArgument, "coefficients must be a JSON array");
  int n = 0;
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 3) {
      throw Error(ErrorCode::InvalidArgument, "coefficient entries must be [k, re, im]");
    }
    const int k = e[0].get<int>();
    if (k < 0) throw Error(ErrorCode::InvalidArgument, "only k >= 0 is stored on disk");
    n = std::max(n, k);
  }
  std::vector<cplx> pos(n + 1, cplx{0.0, 0.0});
  for (const auto& e : arr) pos[e[0].get<int>()] = cplx{e[1].get<double>(), e[2].get<double>()};
  if (std::abs(pos[0].imag()) > kSymmetryTol) {
    throw Error(ErrorCode::AsymmetricCoefficients, "alpha_0 must be real");
  }
  return TrigPoly::from_nonnegative(pos);
}

}  // namespace sbill
