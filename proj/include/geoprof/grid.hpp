#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "geoprof/error.hpp"
#include "geoprof/geodesy.hpp"

namespace geoprof {

/// Axis-aligned jurisdiction rectangle in UTM km, split into nrows x ncols
/// cells. Row 0 is the southernmost row.
struct Grid {
  double west = 300.0;
  double east = 400.0;
  double south = 4330.0;
  double north = 4400.0;
  int ncols = 100;
  int nrows = 70;
  int zone = 18;

  double dx() const { return (east - west) / ncols; }
  double dy() const { return (north - south) / nrows; }
  std::size_t size() const { return static_cast<std::size_t>(nrows) * ncols; }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * ncols + col;
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

inline void validate(const Grid& g) {
  if (!(std::isfinite(g.west) && std::isfinite(g.east) && std::isfinite(g.south) &&
        std::isfinite(g.north)))
    throw InputError("grid: non-finite bounds");
  if (!(g.east > g.west && g.north > g.south)) throw InputError("grid: empty extent");
  if (g.ncols < 1 || g.nrows < 1) throw InputError("grid: need at least one row and column");
}

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

inline UtmPoint cell_center(const Grid& g, int row, int col) {
  if (row < 0 || row >= g.nrows || col < 0 || col >= g.ncols)
    throw OutOfBoundsError("cell_center: index (" + std::to_string(row) + ", " +
                           std::to_string(col) + ") outside grid");
  return {g.zone, g.west + (col + 0.5) * g.dx(), g.south + (row + 0.5) * g.dy()};
}

/// Half-open containment; the east and north edges belong to the last cell.
inline Cell locate_cell(const Grid& g, const UtmPoint& p) {
  if (!(p.easting >= g.west && p.easting <= g.east && p.northing >= g.south &&
        p.northing <= g.north))
    throw OutOfBoundsError("locate_cell: point (" + std::to_string(p.easting) + ", " +
                           std::to_string(p.northing) + ") outside grid");
  int col = static_cast<int>(std::floor((p.easting - g.west) / g.dx()));
  int row = static_cast<int>(std::floor((p.northing - g.south) / g.dy()));
  if (col >= g.ncols) col = g.ncols - 1;
  if (row >= g.nrows) row = g.nrows - 1;
  return {row, col};
}

inline bool contains(const Grid& g, const UtmPoint& p) {
  return p.easting >= g.west && p.easting <= g.east && p.northing >= g.south &&
         p.northing <= g.north;
}

/// Discrete probability mass over grid cells, row-major, summing to 1.
class PosteriorSurface {
 public:
  PosteriorSurface(Grid grid, std::vector<double> mass)
      : grid_(std::move(grid)), mass_(std::move(mass)) {
    if (mass_.size() != grid_.size()) throw InputError("surface: mass size does not match grid");
  }

  /// Normalises nonnegative weights to sum 1 (row-major summation order).
  static PosteriorSurface from_weights(Grid grid, std::vector<double> weights) {
    double total = 0.0;
    for (double w : weights) {
      if (!(std::isfinite(w) && w >= 0.0)) throw InputError("surface: weights must be finite and >= 0");
      total += w;
    }
    if (!(total > 0.0)) throw DegenerateSurfaceError("surface: all cell weights are zero");
    for (double& w : weights) w /= total;
    return PosteriorSurface(std::move(grid), std::move(weights));
  }

  const Grid& grid() const { return grid_; }
  const std::vector<double>& mass() const { return mass_; }
  double at(int row, int col) const { return mass_[grid_.index(row, col)]; }
  double total() const { return std::accumulate(mass_.begin(), mass_.end(), 0.0); }

 private:
  Grid grid_;
  std::vector<double> mass_;
};

}  // namespace geoprof
