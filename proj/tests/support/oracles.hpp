#pragma once

// Independent reference computations used only by the test suites. Nothing
// here calls into the library's numerical code.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace geoprof::oracle {

inline constexpr double kPi = std::numbers::pi;

/// Midpoint rule over the square [cx - half, cx + half] x [cy - half, cy + half].
inline double integrate_square(const std::function<double(double, double)>& f, double cx,
                               double cy, double half, double step) {
  const auto n = static_cast<std::size_t>(std::ceil(2.0 * half / step));
  const double h = 2.0 * half / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = cx - half + (static_cast<double>(i) + 0.5) * h;
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += f(x, cy - half + (static_cast<double>(j) + 0.5) * h);
    sum += row;
  }
  return sum * h * h;
}

/// Midpoint rule in polar coordinates around (cx, cy): r in [0, rmax],
/// angle in [0, 2pi). `f` takes planar coordinates.
inline double integrate_disc(const std::function<double(double, double)>& f, double cx, double cy,
                             double rmax, std::size_t nr, std::size_t nphi) {
  const double hr = rmax / static_cast<double>(nr);
  const double hp = 2.0 * kPi / static_cast<double>(nphi);
  double sum = 0.0;
  for (std::size_t i = 0; i < nr; ++i) {
    const double r = (static_cast<double>(i) + 0.5) * hr;
    double ring = 0.0;
    for (std::size_t j = 0; j < nphi; ++j) {
      const double phi = (static_cast<double>(j) + 0.5) * hp;
      ring += f(cx + r * std::cos(phi), cy + r * std::sin(phi));
    }
    sum += ring * r;
  }
  return sum * hr * hp;
}

/// Composite Simpson on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n) {
  if (n % 2) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + static_cast<double>(i) * h);
  return s * h / 3.0;
}

/// Standard normal CDF by its Taylor series, Φ(x) = 1/2 + φ(x) Σ x^(2k+1)/(1·3···(2k+1)),
/// summed until terms vanish. Reliable for |x| <= 8.
inline double normal_cdf_series(double x) {
  long double term = x;
  long double sum = x;
  for (int k = 1; k < 500; ++k) {
    term *= static_cast<long double>(x) * x / (2 * k + 1);
    sum += term;
    if (std::abs(term) < 1e-22L * std::abs(sum)) break;
  }
  const long double pdf = std::exp(-0.5L * x * x) / std::sqrt(2.0L * std::numbers::pi_v<long double>);
  return static_cast<double>(0.5L + pdf * sum);
}

/// Transverse Mercator by the classical power series in the longitude
/// offset (Snyder's USGS form). WGS84, metres.
struct SeriesTm {
  static constexpr double a = 6378137.0;
  static constexpr double f = 1.0 / 298.257223563;
  static constexpr double k0 = 0.9996;
  double e2 = f * (2 - f);
  double ep2 = e2 / (1 - e2);

  double meridian_arc(double phi) const {
    const double e4 = e2 * e2, e6 = e4 * e2;
    return a * ((1 - e2 / 4 - 3 * e4 / 64 - 5 * e6 / 256) * phi -
                (3 * e2 / 8 + 3 * e4 / 32 + 45 * e6 / 1024) * std::sin(2 * phi) +
                (15 * e4 / 256 + 45 * e6 / 1024) * std::sin(4 * phi) -
                (35 * e6 / 3072) * std::sin(6 * phi));
  }

  /// Returns (easting, northing) in metres for a northern-hemisphere point.
  std::pair<double, double> forward(double lat_deg, double lon_deg, double lon0_deg) const {
    const double phi = lat_deg * kPi / 180.0;
    const double N = a / std::sqrt(1 - e2 * std::sin(phi) * std::sin(phi));
    const double T = std::tan(phi) * std::tan(phi);
    const double C = ep2 * std::cos(phi) * std::cos(phi);
    const double A = (lon_deg - lon0_deg) * kPi / 180.0 * std::cos(phi);
    const double x = k0 * N *
                     (A + (1 - T + C) * std::pow(A, 3) / 6 +
                      (5 - 18 * T + T * T + 72 * C - 58 * ep2) * std::pow(A, 5) / 120);
    const double y =
        k0 * (meridian_arc(phi) +
              N * std::tan(phi) *
                  (A * A / 2 + (5 - T + 9 * C + 4 * C * C) * std::pow(A, 4) / 24 +
                   (61 - 58 * T + T * T + 600 * C - 330 * ep2) * std::pow(A, 6) / 720));
    return {500000.0 + x, y};
  }

  /// Inverse of forward(); returns (lat, lon) in degrees.
  std::pair<double, double> inverse(double easting_m, double northing_m, double lon0_deg) const {
    const double e4 = e2 * e2, e6 = e4 * e2;
    const double M = northing_m / k0;
    const double mu = M / (a * (1 - e2 / 4 - 3 * e4 / 64 - 5 * e6 / 256));
    const double e1 = (1 - std::sqrt(1 - e2)) / (1 + std::sqrt(1 - e2));
    const double phi1 = mu + (3 * e1 / 2 - 27 * std::pow(e1, 3) / 32) * std::sin(2 * mu) +
                        (21 * e1 * e1 / 16 - 55 * std::pow(e1, 4) / 32) * std::sin(4 * mu) +
                        (151 * std::pow(e1, 3) / 96) * std::sin(6 * mu) +
                        (1097 * std::pow(e1, 4) / 512) * std::sin(8 * mu);
    const double s1 = std::sin(phi1), c1 = std::cos(phi1), t1 = std::tan(phi1);
    const double C1 = ep2 * c1 * c1;
    const double T1 = t1 * t1;
    const double N1 = a / std::sqrt(1 - e2 * s1 * s1);
    const double R1 = a * (1 - e2) / std::pow(1 - e2 * s1 * s1, 1.5);
    const double D = (easting_m - 500000.0) / (N1 * k0);
    const double phi =
        phi1 - (N1 * t1 / R1) *
                   (D * D / 2 - (5 + 3 * T1 + 10 * C1 - 4 * C1 * C1 - 9 * ep2) * std::pow(D, 4) / 24 +
                    (61 + 90 * T1 + 298 * C1 + 45 * T1 * T1 - 252 * ep2 - 3 * C1 * C1) *
                        std::pow(D, 6) / 720);
    const double lam = (D - (1 + 2 * T1 + C1) * std::pow(D, 3) / 6 +
                        (5 - 2 * C1 + 28 * T1 - 3 * C1 * C1 + 8 * ep2 + 24 * T1 * T1) *
                            std::pow(D, 5) / 120) /
                       c1;
    return {phi * 180.0 / kPi, lon0_deg + lam * 180.0 / kPi};
  }
};

}  // namespace geoprof::oracle
