#pragma once

// WGS84 geographic -> UTM (kilometres) via Krüger's series in the third
// flattening n, carried to sixth order.

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "geoprof/error.hpp"

namespace geoprof {

struct GeoPoint {
  double lat = 0.0;  // decimal degrees
  double lon = 0.0;
};

/// Planar UTM coordinate. Easting and northing are in kilometres.
struct UtmPoint {
  int zone = 0;
  double easting = 0.0;
  double northing = 0.0;

  friend bool operator==(const UtmPoint&, const UtmPoint&) = default;
};

inline bool valid(const GeoPoint& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 &&
         p.lat <= 90.0 && p.lon >= -180.0 && p.lon < 180.0;
}

inline int utm_zone(double lon) {
  if (!std::isfinite(lon)) throw InputError("utm_zone: non-finite longitude");
  int zone = static_cast<int>(std::floor((lon + 180.0) / 6.0)) + 1;
  if (zone < 1) zone = 1;
  if (zone > 60) zone = 60;
  return zone;
}

inline double central_meridian(int zone) { return -183.0 + 6.0 * zone; }

namespace detail {

struct KruegerCoefficients {
  double rectifying_radius;  // A, metres
  double ecc;                // first eccentricity
  std::array<double, 6> alpha;
};

inline const KruegerCoefficients& wgs84_krueger() {
  static const KruegerCoefficients c = [] {
    constexpr double a = 6378137.0;
    constexpr double f = 1.0 / 298.257223563;
    const double n = f / (2.0 - f);
    const double n2 = n * n, n3 = n2 * n, n4 = n3 * n, n5 = n4 * n, n6 = n5 * n;
    KruegerCoefficients k{};
    k.rectifying_radius = a / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
    k.ecc = std::sqrt(f * (2.0 - f));
    k.alpha = {
        n / 2.0 - 2.0 * n2 / 3.0 + 5.0 * n3 / 16.0 + 41.0 * n4 / 180.0 -
            127.0 * n5 / 288.0 + 7891.0 * n6 / 37800.0,
        13.0 * n2 / 48.0 - 3.0 * n3 / 5.0 + 557.0 * n4 / 1440.0 +
            281.0 * n5 / 630.0 - 1983433.0 * n6 / 1935360.0,
        61.0 * n3 / 240.0 - 103.0 * n4 / 140.0 + 15061.0 * n5 / 26880.0 +
            167603.0 * n6 / 181440.0,
        49561.0 * n4 / 161280.0 - 179.0 * n5 / 168.0 + 6601661.0 * n6 / 7257600.0,
        34729.0 * n5 / 80640.0 - 3418889.0 * n6 / 1995840.0,
        212378941.0 * n6 / 319334400.0,
    };
    return k;
  }();
  return c;
}

}  // namespace detail

/// Projects `p` onto UTM. When `forced_zone` is set the point is projected
/// with that zone's central meridian even if it lies outside the zone.
inline UtmPoint latlon_to_utm(const GeoPoint& p, std::optional<int> forced_zone = std::nullopt) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon))
    throw InputError("latlon_to_utm: non-finite coordinate");
  if (std::abs(p.lat) > 84.0)
    throw DomainError("latlon_to_utm: |lat| > 84 (got " + std::to_string(p.lat) + ")");
  if (forced_zone && (*forced_zone < 1 || *forced_zone > 60))
    throw InputError("latlon_to_utm: zone out of [1, 60]");

  const int zone = forced_zone ? *forced_zone : utm_zone(p.lon);
  const auto& k = detail::wgs84_krueger();
  constexpr double deg = 3.14159265358979323846 / 180.0;
  constexpr double k0 = 0.9996;
  constexpr double false_easting = 500000.0;

  const double phi = p.lat * deg;
  double dlon = p.lon - central_meridian(zone);
  dlon = std::remainder(dlon, 360.0);
  const double lam = dlon * deg;

  // conformal latitude, expressed through t = tan(chi)
  const double s = std::sin(phi);
  const double t = std::sinh(std::atanh(s) - k.ecc * std::atanh(k.ecc * s));
  const double xi_p = std::atan2(t, std::cos(lam));
  const double eta_p = std::atanh(std::sin(lam) / std::hypot(1.0, t));

  double xi = xi_p;
  double eta = eta_p;
  for (int j = 1; j <= 6; ++j) {
    const double a = k.alpha[j - 1];
    xi += a * std::sin(2.0 * j * xi_p) * std::cosh(2.0 * j * eta_p);
    eta += a * std::cos(2.0 * j * xi_p) * std::sinh(2.0 * j * eta_p);
  }

  const double false_northing = p.lat < 0.0 ? 10000000.0 : 0.0;
  UtmPoint out;
  out.zone = zone;
  out.easting = (false_easting + k0 * k.rectifying_radius * eta) / 1000.0;
  out.northing = (false_northing + k0 * k.rectifying_radius * xi) / 1000.0;
  return out;
}

}  // namespace geoprof
