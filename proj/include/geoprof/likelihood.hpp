#pragma once

// Per-crime likelihood densities p(x | z, theta). All distances in km,
// angles in radians, densities per km^2.

#include <cmath>
#include <numbers>

#include "geoprof/error.hpp"
#include "geoprof/geodesy.hpp"

namespace geoprof {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSqrtTwoPi = 2.5066282746310005024;

/// Standard normal CDF.
inline double std_normal_cdf(double x) {
  if (!std::isfinite(x)) throw InputError("std_normal_cdf: non-finite argument");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

struct M1Params {
  double alpha;  // mean offense distance
};

struct M2Params {
  double alpha;  // ring radius
  double sigma;  // radial spread
};

struct NonResParams {
  double alpha;   // mean offense distance
  double sigma1;  // radial spread
  double theta;   // preferred direction, [0, 2pi)
  double sigma2;  // angular spread
};

inline void validate(const M1Params& p) {
  if (!(std::isfinite(p.alpha) && p.alpha > 0)) throw ParameterError("M1: alpha must be > 0");
}

inline void validate(const M2Params& p) {
  if (!(std::isfinite(p.alpha) && p.alpha > 0)) throw ParameterError("M2: alpha must be > 0");
  if (!(std::isfinite(p.sigma) && p.sigma > 0)) throw ParameterError("M2: sigma must be > 0");
}

inline void validate(const NonResParams& p) {
  if (!(std::isfinite(p.alpha) && p.alpha > 0)) throw ParameterError("NONRES: alpha must be > 0");
  if (!(std::isfinite(p.sigma1) && p.sigma1 > 0))
    throw ParameterError("NONRES: sigma1 must be > 0");
  if (!(std::isfinite(p.theta) && p.theta >= 0 && p.theta < kTwoPi))
    throw ParameterError("NONRES: theta must lie in [0, 2pi)");
  if (!(std::isfinite(p.sigma2) && p.sigma2 > 0))
    throw ParameterError("NONRES: sigma2 must be > 0");
}

inline double distance(const UtmPoint& a, const UtmPoint& b) {
  return std::hypot(a.easting - b.easting, a.northing - b.northing);
}

inline double squared_distance(const UtmPoint& a, const UtmPoint& b) {
  const double dx = a.easting - b.easting;
  const double dy = a.northing - b.northing;
  return dx * dx + dy * dy;
}

// ---------------------------------------------------------------------------
// M1: isotropic normal with sigma = sqrt(2/pi) * alpha.

inline double m1_log_density_sq(double r2, double alpha) {
  return -std::log(4.0 * alpha * alpha) - kPi / (4.0 * alpha * alpha) * r2;
}

inline double m1_density(const UtmPoint& x, const UtmPoint& z, const M1Params& p) {
  validate(p);
  const double a2 = p.alpha * p.alpha;
  return 1.0 / (4.0 * a2) * std::exp(-kPi / (4.0 * a2) * squared_distance(x, z));
}

// ---------------------------------------------------------------------------
// M2: ring-normal kernel exp(-(r - alpha)^2 / (2 sigma^2)).

/// Radial factor int_0^inf r exp(-(r-alpha)^2/(2 sigma^2)) dr. The planar
/// normaliser of the ring kernel is 2*pi times this.
inline double radial_normalizer(double alpha, double sigma) {
  if (!(alpha >= 0 && sigma > 0)) throw ParameterError("radial_normalizer: need alpha >= 0, sigma > 0");
  return sigma * sigma * std::exp(-alpha * alpha / (2.0 * sigma * sigma)) +
         kSqrtTwoPi * alpha * sigma * (1.0 - std_normal_cdf(-alpha / sigma));
}

inline double ring_normal_normalizer(double alpha, double sigma) {
  if (!(alpha > 0 && sigma > 0)) throw ParameterError("ring_normal_normalizer: need alpha, sigma > 0");
  return 2.0 * kPi * sigma * sigma * std::exp(-alpha * alpha / (2.0 * sigma * sigma)) +
         2.0 * kPi * kSqrtTwoPi * alpha * sigma * (1.0 - std_normal_cdf(-alpha / sigma));
}

inline double m2_density(const UtmPoint& x, const UtmPoint& z, const M2Params& p) {
  validate(p);
  const double r = distance(x, z);
  const double d = r - p.alpha;
  return std::exp(-d * d / (2.0 * p.sigma * p.sigma)) / ring_normal_normalizer(p.alpha, p.sigma);
}

// ---------------------------------------------------------------------------
// Non-resident: radial ring kernel times an unwrapped Gaussian in the angle.

/// Counterclockwise angle of (dx, dy) from the positive easting axis, in [0, 2pi).
inline double arg_angle(double dx, double dy) {
  if (dx == 0.0 && dy == 0.0) throw InputError("arg_angle: zero vector has no angle");
  double phi = std::atan2(dy, dx);
  if (phi < 0.0) phi += kTwoPi;
  if (phi >= kTwoPi) phi = 0.0;  // atan2 of (-0 just below the axis) rounds up to 2pi
  return phi;
}

/// int_0^{2pi} exp(-(phi - theta)^2 / (2 sigma^2)) dphi.
inline double angular_normalizer(double theta, double sigma) {
  if (!(sigma > 0)) throw ParameterError("angular_normalizer: sigma must be > 0");
  return sigma * kSqrtTwoPi *
         (std_normal_cdf((kTwoPi - theta) / sigma) - std_normal_cdf(-theta / sigma));
}

inline double nonres_kernel(double r, double phi, const NonResParams& p) {
  const double dr = r - p.alpha;
  const double da = phi - p.theta;
  return std::exp(-dr * dr / (2.0 * p.sigma1 * p.sigma1)) *
         std::exp(-da * da / (2.0 * p.sigma2 * p.sigma2));
}

inline double nonres_normalizer(const NonResParams& p) {
  return radial_normalizer(p.alpha, p.sigma1) * angular_normalizer(p.theta, p.sigma2);
}

inline double nonres_density(const UtmPoint& x, const UtmPoint& z, const NonResParams& p) {
  validate(p);
  const double dx = x.easting - z.easting;
  const double dy = x.northing - z.northing;
  const double phi = arg_angle(dx, dy);
  return nonres_kernel(std::hypot(dx, dy), phi, p) / nonres_normalizer(p);
}

}  // namespace geoprof
