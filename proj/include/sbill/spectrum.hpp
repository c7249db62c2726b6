#pragma once

// Stability of the 2-periodic diameter orbits. For a chord of length d hitting
// the boundary perpendicularly at feet with curvatures k1, k2,
//   trace dT^2 = 2 + 4 d (k1 k2 d - k1 - k2),
// and at a foot of a string table (h' = 0, H = tau h, d = 1 + l)
//   k(t0) = 1/(d - H) + 1/(d - H - 2H''),   k(t0 + pi) = 1/(d + H) + 1/(d + H + 2H''),
// so k1 k2 d - k1 - k2 = 4 d H''^2 / ((d^2 - H^2)(d^2 - (H + 2H'')^2)) >= 0.

#include <cmath>
#include <complex>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sbill/billiard_map.hpp"
#include "sbill/errors.hpp"
#include "sbill/parallel.hpp"
#include "sbill/table_builder.hpp"

namespace sbill {

inline constexpr double kCurvatureMatchTol = 1e-6;
inline constexpr double kChordMatchTol = 1e-9;
inline constexpr double kHddotTol = 1e-10;
inline constexpr double kIndicatorRelTol = 1e-12;
inline constexpr double kTraceTol = 1e-7;

enum class OrbitClass { Hyperbolic, Parabolic, Elliptic };

inline std::string to_string(OrbitClass c) {
  switch (c) {
    case OrbitClass::Hyperbolic: return "hyperbolic";
    case OrbitClass::Parabolic: return "parabolic";
    case OrbitClass::Elliptic: return "elliptic";
  }
  return "?";
}

struct KPair {
  double k1{0.0};  // at t0
  double k2{0.0};  // at t0 + pi
  double d{0.0};
};

inline KPair k_pair_closed_form(double ell, double h, double hddot) {
  const double d = 1.0 + ell;
  return {1.0 / (d - h) + 1.0 / (d - h - 2.0 * hddot), 1.0 / (d + h) + 1.0 / (d + h + 2.0 * hddot), d};
}

/// Closed-form curvatures and chord at a foot, checked against the measured geometry.
inline KPair k_pair(const StringTable& st, double t0) {
  if (std::abs(st.g_of_t(t0)) > 1e-9) {
    throw Error(ErrorCode::NotACriticalPoint, "h'(" + std::to_string(t0) + ") != 0");
  }
  const FieldJet f = st.field(t0);
  const KPair kp = k_pair_closed_form(st.ell(), f.h, f.hddot());
  const double m1 = st.curvature_of_boundary(t0), m2 = st.curvature_of_boundary(t0 + kPi);
  const double chord = norm(st.boundary(t0) - st.boundary(t0 + kPi));
  if (std::abs(m1 - kp.k1) > kCurvatureMatchTol || std::abs(m2 - kp.k2) > kCurvatureMatchTol ||
      std::abs(chord - kp.d) > kChordMatchTol) {
    throw Error(ErrorCode::FormulaMismatch, "at t0 = " + std::to_string(t0) + ": closed form (" +
                                                std::to_string(kp.k1) + ", " + std::to_string(kp.k2) + ", " +
                                                std::to_string(kp.d) + ") vs measured (" + std::to_string(m1) +
                                                ", " + std::to_string(m2) + ", " + std::to_string(chord) + ")");
  }
  return kp;
}

struct Indicators {
  double i1{0.0};  // k1 k2 d - (k1 + k2)
  double i2{0.0};  // d^2 k1 k2 - d (k1 + k2) - 2
  bool parabolic{false};
  std::optional<std::string> warning;
};

inline double indicator_scale(double k1, double k2, double d) { return kIndicatorRelTol * std::max(1.0, k1 * k2 * d); }

inline Indicators indicators(double k1, double k2, double d) {
  Indicators out;
  out.i1 = k1 * k2 * d - (k1 + k2);
  out.i2 = d * d * k1 * k2 - d * (k1 + k2) - 2.0;
  const double tol = indicator_scale(k1, k2, d);
  out.parabolic = std::abs(out.i1) < tol;
  if (std::abs(out.i2) < tol || std::abs(1.0 - d * k1) < 1e-9 || std::abs(1.0 - d * k2) < 1e-9) {
    out.warning = "chord length meets a radius of curvature; not a near-circular table";
  }
  return out;
}

/// 4 d H''^2 / ((d^2 - H^2)(d^2 - (H + 2H'')^2)), the value of I1 at a foot.
inline double i1_closed_form(double d, double h, double hddot) {
  return 4.0 * d * hddot * hddot / ((d * d - h * h) * (d * d - (h + 2.0 * hddot) * (h + 2.0 * hddot)));
}

struct DiameterSpectrum {
  double t0{0.0};
  double h{0.0};
  double hddot{0.0};
  KPair k;
  Indicators ind;
  double trace{0.0};
  double det{0.0};
  std::complex<double> ev1, ev2;
  OrbitClass cls{OrbitClass::Parabolic};

  double max_modulus() const { return std::max(std::abs(ev1), std::abs(ev2)); }
};

inline std::pair<std::complex<double>, std::complex<double>> eigenvalues(const Mat2& m) {
  const double tr = trace(m), dt = det(m);
  const std::complex<double> disc = std::sqrt(std::complex<double>(0.25 * tr * tr - dt, 0.0));
  const std::complex<double> a = 0.5 * tr + disc, b = 0.5 * tr - disc;
  return std::abs(a) >= std::abs(b) ? std::make_pair(a, b) : std::make_pair(b, a);
}

/// Classify the diameter orbit at t0 three ways: (a) H'' != 0, (b) I1 != 0,
/// (c) |trace dT^2| != 2 from the finite-difference Jacobian. All three must agree.
inline DiameterSpectrum classify(const StringTable& st, double t0) {
  DiameterSpectrum ds;
  ds.t0 = t0;
  ds.k = k_pair(st, t0);
  const FieldJet f = st.field(t0);
  ds.h = f.h;
  ds.hddot = f.hddot();
  ds.ind = indicators(ds.k.k1, ds.k.k2, ds.k.d);
  const Mat2 m = jacobian_fd(st, {t0, kPi / 2.0}, 2);
  ds.trace = trace(m);
  ds.det = det(m);
  std::tie(ds.ev1, ds.ev2) = eigenvalues(m);

  auto verdict = [](bool degenerate, double sign) {
    if (degenerate) return OrbitClass::Parabolic;
    return sign > 0.0 ? OrbitClass::Hyperbolic : OrbitClass::Elliptic;
  };
  // (a): I1 is a positive multiple of H''^2, so H'' != 0 means hyperbolic
  const OrbitClass a = verdict(std::abs(ds.hddot) <= kHddotTol, 1.0);
  const OrbitClass b = verdict(ds.ind.parabolic, ds.ind.i1);
  const OrbitClass c = verdict(std::abs(std::abs(ds.trace) - 2.0) <= kTraceTol, std::abs(ds.trace) - 2.0);
  if (a != b || b != c) {
    throw Error(ErrorCode::ClassificationConflict,
                "diameter at t0 = " + std::to_string(t0) + ": h'' says " + to_string(a) + ", indicators say " +
                    to_string(b) + ", trace " + std::to_string(ds.trace) + " says " + to_string(c));
  }
  ds.cls = a;
  return ds;
}

/// Spectra of every isolated diameter in [0, pi), in order of t0.
inline std::vector<DiameterSpectrum> spectrum(const StringTable& st) {
  const DiameterSet set = find_diameters(st);
  std::vector<DiameterSpectrum> out(set.isolated.size());
  parallel_for(out.size(), [&](std::size_t i) { out[i] = classify(st, set.isolated[i].t0); });
  return out;
}

// ---------------------------------------------------------------------------
// Export

inline nlohmann::json to_json(const DiameterSpectrum& s) {
  nlohmann::json j;
  j["t0"] = s.t0;
  j["k1"] = s.k.k1;
  j["k2"] = s.k.k2;
  j["d"] = s.k.d;
  j["I1"] = s.ind.i1;
  j["I2"] = s.ind.i2;
  j["trace"] = s.trace;
  j["det"] = s.det;
  j["eigenvalues"] = {{s.ev1.real(), s.ev1.imag()}, {s.ev2.real(), s.ev2.imag()}};
  j["class"] = to_string(s.cls);
  if (s.ind.warning) j["warning"] = *s.ind.warning;
  return j;
}

inline void write_spectrum_csv(const std::vector<DiameterSpectrum>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  os.precision(17);
  os << "t0,k1,k2,d,I1,I2,trace,det,max_modulus,class\n";
  for (const auto& s : rows) {
    os << s.t0 << ',' << s.k.k1 << ',' << s.k.k2 << ',' << s.k.d << ',' << s.ind.i1 << ',' << s.ind.i2 << ','
       << s.trace << ',' << s.det << ',' << s.max_modulus() << ',' << to_string(s.cls) << '\n';
  }
}

}  // namespace sbill
