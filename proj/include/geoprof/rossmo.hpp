#pragma once

// Rossmo's criminal geographic targeting hit score, used as the baseline.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "geoprof/classifier.hpp"
#include "geoprof/dataset.hpp"
#include "geoprof/error.hpp"
#include "geoprof/grid.hpp"

namespace geoprof {

struct RossmoParams {
  double b = 1.0;  // buffer radius, km
  double g = 1.2;
  double h = 1.2;
  double k = 1.0;
};

inline void validate(const RossmoParams& p) {
  if (!(std::isfinite(p.b) && p.b > 0)) throw ParameterError("rossmo: b must be > 0");
  if (!(std::isfinite(p.k) && p.k > 0)) throw ParameterError("rossmo: k must be > 0");
  if (!(std::isfinite(p.g) && std::isfinite(p.h))) throw ParameterError("rossmo: non-finite exponent");
}

inline double manhattan_distance(const UtmPoint& a, const UtmPoint& b) {
  return std::abs(a.easting - b.easting) + std::abs(a.northing - b.northing);
}

/// Half the mean Manhattan nearest-neighbour distance between crime sites.
/// Returns 0 when all sites coincide; callers decide the fallback.
inline double buffer_radius(std::span<const UtmPoint> sites) {
  if (sites.size() < 2) throw InsufficientDataError("buffer_radius: need at least 2 sites");
  const auto nn = nn_distances(sites, &manhattan_distance);
  double sum = 0.0;
  for (double d : nn) sum += d;
  return 0.5 * sum / static_cast<double>(nn.size());
}

/// Buffer radius with the coincident-site fallback of half a cell diagonal.
inline double buffer_radius_or_fallback(std::span<const UtmPoint> sites, const Grid& grid,
                                        std::vector<std::string>* warnings = nullptr) {
  const double b = buffer_radius(sites);
  if (b > 0) return b;
  if (warnings) warnings->push_back("rossmo: all crime sites coincide; b set to half the cell diagonal");
  return 0.5 * std::hypot(grid.dx(), grid.dy());
}

inline double rossmo_decay(double d, const RossmoParams& p) {
  if (!(d >= 0)) throw InputError("rossmo_decay: distance must be >= 0");
  if (d > p.b) return p.k / std::pow(d, p.h);
  return p.k * std::pow(p.b, p.g - p.h) / std::pow(2.0 * p.b - d, p.g);
}

/// Raw hit scores S(y) = Σ f(d(x_i, y)) at the cell centres, row-major.
inline std::vector<double> hit_scores(std::span<const UtmPoint> sites, const Grid& grid,
                                      const RossmoParams& p) {
  validate(grid);
  validate(p);
  std::vector<double> s(grid.size(), 0.0);
  for (int r = 0; r < grid.nrows; ++r)
    for (int c = 0; c < grid.ncols; ++c) {
      const auto y = cell_center(grid, r, c);
      double acc = 0.0;
      for (const auto& x : sites) acc += rossmo_decay(manhattan_distance(x, y), p);
      s[grid.index(r, c)] = acc;
    }
  return s;
}

/// Hit scores rescaled to sum 1 so they rank like a posterior surface.
inline PosteriorSurface hit_score_surface(std::span<const UtmPoint> sites, const Grid& grid,
                                          const RossmoParams& p) {
  return PosteriorSurface::from_weights(grid, hit_scores(sites, grid, p));
}

inline PosteriorSurface hit_score_surface(const CrimeSeries& series, const Grid& grid,
                                          std::vector<std::string>* warnings = nullptr) {
  RossmoParams p;
  p.b = buffer_radius_or_fallback(series.sites, grid, warnings);
  return hit_score_surface(series.sites, grid, p);
}

}  // namespace geoprof
