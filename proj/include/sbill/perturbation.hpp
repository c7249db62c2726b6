#pragma once

// Recovery of the curvature perturbation f, the translation c and the field
// h = <p, i e^{it}> from g = <p, e^{it}>, where p(t) = c + int_0^t f(s) e^{is} ds.
// Differentiating p gives  h' = -g  and  g' = f + h,  hence f = g' - h.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "sbill/errors.hpp"
#include "sbill/point2.hpp"
#include "sbill/trig_series.hpp"
#include "sbill/vanishing_builder.hpp"

namespace sbill {

inline constexpr double kReconstructionTol = 1e-8;
inline constexpr double kSpectralTol = 1e-10;
inline constexpr double kProjectionTol = 1e-9;

/// g, g', g'' and h at one parameter value (h' = -g, h'' = -g').
struct FieldJet {
  double g{0.0};
  double g1{0.0};
  double g2{0.0};
  double h{0.0};

  double hdot() const { return -g; }
  double hddot() const { return -g1; }
};

struct SpectralPerturbation {
  TrigPoly f;
  Point2 c;
};

namespace detail {

inline TrigPoly from_amplitudes(const std::vector<double>& cos_amp, const std::vector<double>& sin_amp) {
  const std::size_t n = std::max(cos_amp.size(), sin_amp.size());
  std::vector<cplx> pos(std::max<std::size_t>(n, 1), cplx{0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    const double a = k < cos_amp.size() ? cos_amp[k] : 0.0;
    const double b = k < sin_amp.size() ? sin_amp[k] : 0.0;
    pos[k] = k == 0 ? cplx{a, 0.0} : cplx{a / 2.0, -b / 2.0};
  }
  return TrigPoly::from_nonnegative(pos);
}

}  // namespace detail

/// Forward map (f, c) -> g by the Fourier identity
///   g = gamma1 cos t + gamma2 sin t + sum_{k>0} 2k/(k^2-1) (a_k sin kt + b_k cos kt),
///   gamma1 = c1 - sum_k b_k/(k+1),  gamma2 = c2 + sum_k a_k/(k+1),  alpha_k = a_k + i b_k.
inline TrigPoly g_from_spectral(const TrigPoly& f, Point2 c) {
  if (std::abs(f.coeff(1)) > kSymmetryTol || std::abs(f.coeff(-1)) > kSymmetryTol) {
    throw Error(ErrorCode::NonClosedCurve, "f must have alpha_{+-1} = 0");
  }
  const int n = f.degree();
  double gamma1 = c.x, gamma2 = c.y;
  for (int k = -n; k <= n; ++k) {
    if (k == -1) continue;
    gamma1 -= f.coeff(k).imag() / (k + 1);
    gamma2 += f.coeff(k).real() / (k + 1);
  }
  std::vector<double> ca(n + 1, 0.0), sa(n + 1, 0.0);
  if (n >= 1) {
    ca[1] = gamma1;
    sa[1] = gamma2;
  } else {
    ca.resize(2, 0.0);
    sa.resize(2, 0.0);
    ca[1] = gamma1;
    sa[1] = gamma2;
  }
  for (int k = 2; k <= n; ++k) {
    const double w = 2.0 * k / (static_cast<double>(k) * k - 1.0);
    sa[k] += w * f.coeff(k).real();
    ca[k] += w * f.coeff(k).imag();
  }
  return detail::from_amplitudes(ca, sa);
}

/// Inverse of g_from_spectral: frequency-1 content of g goes to c, k >= 3 to f.
inline SpectralPerturbation spectral_from_g(const TrigPoly& g) {
  const int n = g.degree();
  std::vector<cplx> pos(std::max(n, 1) + 1, cplx{0.0, 0.0});
  double c1 = g.cos_amplitude(1);
  double c2 = g.sin_amplitude(1);
  for (int k = 2; k <= n; ++k) {
    const double ck = g.cos_amplitude(k), sk = g.sin_amplitude(k);
    const double w = (static_cast<double>(k) * k - 1.0) / (2.0 * k);
    pos[k] = cplx{w * sk, w * ck};  // a_k + i b_k
    c1 += ck;
    c2 += sk / k;
  }
  return {TrigPoly::from_nonnegative(pos), Point2{c1, c2}};
}

/// h = -int g with the constant fixed by h(t) + h(t+pi) = 0; closed form for a
/// polynomial g with zero mean.
inline TrigPoly h_from_g(const TrigPoly& g) {
  const int n = g.degree();
  std::vector<cplx> out(2 * n + 1, cplx{0.0, 0.0});
  for (int k = -n; k <= n; ++k) {
    if (k != 0) out[k + n] = cplx{0.0, 1.0} * g.coeff(k) / static_cast<double>(k);
  }
  return TrigPoly(std::move(out));
}

namespace detail {

/// Uniform grid on [0, 2pi] plus every breakpoint of g and 16 subcells per
/// breakpoint interval, so each cell sees a smooth and well-resolved integrand.
inline std::vector<double> quadrature_knots(const SymmetricFunction& g, std::size_t grid) {
  std::vector<double> knots;
  for (std::size_t j = 0; j <= grid; ++j) knots.push_back(kTwoPi * static_cast<double>(j) / grid);
  knots.push_back(kPi);
  auto bps = g.breakpoints();
  std::sort(bps.begin(), bps.end());
  for (std::size_t i = 0; i < bps.size(); ++i) {
    knots.push_back(bps[i]);
    const double next = i + 1 < bps.size() ? bps[i + 1] : bps.front() + kTwoPi;
    const double w = next - bps[i];
    for (int s = 1; s < 16; ++s) knots.push_back(wrap_2pi(bps[i] + w * s / 16.0));
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end(), [](double a, double b) { return std::abs(a - b) < 1e-15; }),
              knots.end());
  return knots;
}

using Gauss20 = boost::math::quadrature::gauss<double, 20>;

}  // namespace detail

/// h for a general odd g: cumulative Gauss-Legendre over the knot cells,
/// one partial cell on query.
class QuadratureAntiderivative {
 public:
  explicit QuadratureAntiderivative(std::shared_ptr<const SymmetricFunction> g, std::size_t grid = 4096)
      : g_(std::move(g)), knots_(detail::quadrature_knots(*g_, grid)) {
    cum_.assign(knots_.size(), 0.0);
    auto gv = [this](double s) { return g_->jet(s).v; };
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      cum_[i] = cum_[i - 1] + detail::Gauss20::integrate(gv, knots_[i - 1], knots_[i]);
    }
    half_ = integral(kPi);
  }

  /// int_0^t g, t in [0, 2pi)
  double integral(double t) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const std::size_t j = it == knots_.begin() ? 0 : static_cast<std::size_t>(std::prev(it) - knots_.begin());
    const double a = knots_[j];
    if (t == a) return cum_[j];
    auto gv = [this](double s) { return g_->jet(s).v; };
    return cum_[j] + detail::Gauss20::integrate(gv, a, t);
  }

  double operator()(double t) const { return -integral(wrap_2pi(t)) + 0.5 * half_; }

  const std::vector<double>& knots() const { return knots_; }

 private:
  std::shared_ptr<const SymmetricFunction> g_;
  std::vector<double> knots_;
  std::vector<double> cum_;
  double half_{0.0};
};

/// Everything downstream needs about the perturbation of the inner circle.
struct PerturbationData {
  std::shared_ptr<const SymmetricFunction> g;
  std::function<double(double)> h;
  Point2 c;
  std::optional<TrigPoly> f_poly;  // exact when g is a polynomial
  TrigPoly f_fit;                  // projected onto V
  double fit_residual{0.0};
  double projection_defect{0.0};
  double reconstruction_defect{0.0};
  std::optional<double> spectral_defect;
  std::string backend;

  FieldJet jet(double t) const {
    const Jet2 gj = g->jet(t);
    return {gj.v, gj.d1, gj.d2, h(t)};
  }

  double f(double t) const {
    if (f_poly) return (*f_poly)(t);
    return g->jet(t).d1 - h(t);
  }
};

namespace detail {

inline double max_grid_deviation(const std::function<double(double)>& a, const std::function<double(double)>& b,
                                 std::size_t m) {
  double dev = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double t = kTwoPi * static_cast<double>(j) / m;
    dev = std::max(dev, std::abs(a(t) - b(t)));
  }
  return dev;
}

}  // namespace detail

inline PerturbationData recover_perturbation(const std::shared_ptr<const TrigFunction>& gfun,
                                             std::size_t grid = kDefaultFitGrid) {
  const TrigPoly& g = gfun->poly();
  PerturbationData pd;
  pd.g = gfun;
  pd.backend = "trigpoly";
  const TrigPoly h = h_from_g(g);
  pd.h = [h](double t) { return h(t); };
  const TrigPoly f_raw = g.derivative() - h;
  pd.projection_defect = projection_defect(f_raw);
  if (pd.projection_defect > kProjectionTol) {
    throw Error(ErrorCode::ReconstructionMismatch, "f leaves V by " + std::to_string(pd.projection_defect));
  }
  const TrigPoly f = project_V(f_raw);
  pd.c = Point2{g(0.0), h(0.0)};
  pd.f_poly = f;
  pd.f_fit = f;

  // Second route: the Fourier identity between g and (f, c).
  const SpectralPerturbation sp = spectral_from_g(g);
  double sdef = std::hypot(sp.c.x - pd.c.x, sp.c.y - pd.c.y);
  for (int k = -std::max(f.degree(), sp.f.degree()); k <= std::max(f.degree(), sp.f.degree()); ++k) {
    sdef = std::max(sdef, std::abs(f.coeff(k) - sp.f.coeff(k)));
  }
  pd.spectral_defect = sdef;
  if (sdef > kSpectralTol) {
    throw Error(ErrorCode::ReconstructionMismatch, "spectral and differential routes differ by " + std::to_string(sdef));
  }

  const Point2 c = pd.c;
  pd.reconstruction_defect = detail::max_grid_deviation(
      [&](double t) { return dot(c + path_integral(f, t), unit(t)); }, [&](double t) { return g(t); }, grid);
  if (pd.reconstruction_defect > kReconstructionTol) {
    throw Error(ErrorCode::ReconstructionMismatch,
                "rebuilt g differs by " + std::to_string(pd.reconstruction_defect));
  }
  return pd;
}

inline PerturbationData recover_perturbation(const TrigPoly& g, std::size_t grid = kDefaultFitGrid) {
  return recover_perturbation(std::make_shared<const TrigFunction>(g), grid);
}

inline PerturbationData recover_perturbation(const std::shared_ptr<const SymmetricFunction>& gfun,
                                             std::size_t grid = kDefaultFitGrid, int fit_degree = kDefaultFitDegree) {
  if (auto trig = std::dynamic_pointer_cast<const TrigFunction>(gfun)) return recover_perturbation(trig, grid);

  PerturbationData pd;
  pd.g = gfun;
  pd.backend = "bump";
  auto anti = std::make_shared<const QuadratureAntiderivative>(gfun, grid);
  pd.h = [anti](double t) { return (*anti)(t); };
  pd.c = Point2{gfun->jet(0.0).v, pd.h(0.0)};

  auto fval = [&](double t) { return gfun->jet(t).d1 - pd.h(t); };
  const auto samples = sample_periodic(fval, grid);
  FitResult fr = fit(samples, std::min<int>(fit_degree, static_cast<int>((grid - 1) / 2)));
  pd.fit_residual = fr.residual;
  pd.projection_defect = projection_defect(fr.poly);
  pd.f_fit = project_V(fr.poly);

  // Rebuild g = <c + int_0^t f e^{is} ds, e^{it}> by quadrature, cell by cell.
  const auto& knots = anti->knots();
  const auto& xs = detail::Gauss20::abscissa();
  const auto& ws = detail::Gauss20::weights();
  Point2 acc{0.0, 0.0};
  double defect = 0.0;
  std::size_t next_grid = 1;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    const double a = knots[i - 1], b = knots[i];
    const double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
    for (std::size_t q = 0; q < xs.size(); ++q) {
      for (double sgn : {-1.0, 1.0}) {
        if (xs[q] == 0.0 && sgn < 0.0) continue;
        const double s = mid + sgn * rad * xs[q];
        acc += (rad * ws[q] * fval(s)) * unit(s);
      }
    }
    const double tg = kTwoPi * static_cast<double>(next_grid) / grid;
    if (next_grid < grid && std::abs(b - tg) < 1e-15) {
      defect = std::max(defect, std::abs(dot(pd.c + acc, unit(b)) - gfun->jet(b).v));
      ++next_grid;
    }
  }
  pd.reconstruction_defect = defect;
  if (defect > kReconstructionTol) {
    throw Error(ErrorCode::ReconstructionMismatch, "rebuilt g differs by " + std::to_string(defect));
  }
  return pd;
}

/// Replace a bump-built g by its odd-harmonic Fourier fit (trigpoly backend).
inline std::shared_ptr<const TrigFunction> fit_symmetric(const SymmetricFunction& g, int degree = kDefaultFitDegree,
                                                         std::size_t grid = kDefaultFitGrid, double* residual = nullptr) {
  const auto samples = sample_periodic([&](double t) { return g.jet(t).v; }, grid);
  FitResult fr = fit(samples, degree);
  std::vector<cplx> coeffs = fr.poly.coefficients();
  const int n = fr.poly.degree();
  for (int k = -n; k <= n; ++k) {
    if (k % 2 == 0) coeffs[k + n] = cplx{0.0, 0.0};
  }
  if (residual != nullptr) *residual = fr.residual;
  return std::make_shared<const TrigFunction>(TrigPoly(std::move(coeffs)));
}

}  // namespace sbill
