#pragma once

// Leave-one-out priors: a kernel-smoothed anchor-point surface and tabulated
// one-dimensional parameter densities with bounded support.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geoprof/classifier.hpp"
#include "geoprof/dataset.hpp"
#include "geoprof/error.hpp"
#include "geoprof/grid.hpp"
#include "geoprof/likelihood.hpp"

namespace geoprof {

enum class ParamKind {
  kDistanceM1,
  kDistanceM2,
  kDistanceNonRes,
  kAngleM2,
  kAngleNonRes,
  kSpreadRadial,
  kSpreadAngular,
};

inline constexpr ParamKind kAllParamKinds[] = {
    ParamKind::kDistanceM1,   ParamKind::kDistanceM2,   ParamKind::kDistanceNonRes,
    ParamKind::kAngleM2,      ParamKind::kAngleNonRes,  ParamKind::kSpreadRadial,
    ParamKind::kSpreadAngular};

inline std::string to_string(ParamKind k) {
  switch (k) {
    case ParamKind::kDistanceM1: return "DISTANCE_M1";
    case ParamKind::kDistanceM2: return "DISTANCE_M2";
    case ParamKind::kDistanceNonRes: return "DISTANCE_NONRES";
    case ParamKind::kAngleM2: return "ANGLE_M2";
    case ParamKind::kAngleNonRes: return "ANGLE_NONRES";
    case ParamKind::kSpreadRadial: return "SPREAD_RADIAL";
    case ParamKind::kSpreadAngular: return "SPREAD_ANGULAR";
  }
  return "?";
}

struct Support {
  double lo;
  double hi;
};

/// Fixed tabulation range for each parameter kind.
inline Support default_support(ParamKind k) {
  switch (k) {
    case ParamKind::kDistanceM1:
    case ParamKind::kDistanceM2:
    case ParamKind::kDistanceNonRes: return {0.0, 150.0};
    case ParamKind::kAngleM2:
    case ParamKind::kAngleNonRes: return {0.0, kTwoPi};
    case ParamKind::kSpreadRadial: return {0.05, 20.0};
    case ParamKind::kSpreadAngular: return {0.02, kPi};
  }
  return {0.0, 1.0};
}

inline constexpr std::size_t kPriorNodes = 512;

/// Piecewise-linear density tabulated on equally spaced nodes over [lo, hi];
/// zero outside. Normalised so the trapezoid integral is exactly 1.
class ParamPrior {
 public:
  ParamPrior(ParamKind kind, double lo, double hi, std::vector<double> density)
      : kind_(kind), lo_(lo), hi_(hi), density_(std::move(density)) {
    if (!(hi_ > lo_)) throw InputError("ParamPrior: empty support");
    if (density_.size() < 2) throw InputError("ParamPrior: need at least 2 nodes");
    for (double d : density_)
      if (!(std::isfinite(d) && d >= 0)) throw InputError("ParamPrior: invalid density value");
    const double area = trapezoid(density_);
    if (!(area > 0)) throw InputError("ParamPrior: zero mass");
    for (double& d : density_) d /= area;
    cdf_.resize(density_.size());
    cdf_[0] = 0.0;
    for (std::size_t i = 1; i < density_.size(); ++i)
      cdf_[i] = cdf_[i - 1] + 0.5 * step() * (density_[i - 1] + density_[i]);
  }

  ParamKind kind() const { return kind_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double step() const { return (hi_ - lo_) / static_cast<double>(density_.size() - 1); }
  std::size_t size() const { return density_.size(); }
  double node(std::size_t i) const { return lo_ + static_cast<double>(i) * step(); }
  const std::vector<double>& table() const { return density_; }

  double density(double x) const {
    if (!(x >= lo_ && x <= hi_)) return 0.0;
    const double u = (x - lo_) / step();
    const auto i = std::min(static_cast<std::size_t>(u), density_.size() - 2);
    const double t = u - static_cast<double>(i);
    return density_[i] + t * (density_[i + 1] - density_[i]);
  }

  double cdf(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    const double u = (x - lo_) / step();
    const auto i = std::min(static_cast<std::size_t>(u), density_.size() - 2);
    const double t = (u - static_cast<double>(i)) * step();
    const double slope = (density_[i + 1] - density_[i]) / step();
    return cdf_[i] + density_[i] * t + 0.5 * slope * t * t;
  }

  /// Inverse of the exact piecewise-quadratic CDF.
  double quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("quantile: p must lie in [0, 1]");
    const double total = cdf_.back();
    const double target = p * total;
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    std::size_t i = it == cdf_.begin() ? 0 : static_cast<std::size_t>(it - cdf_.begin()) - 1;
    if (i >= density_.size() - 1) return hi_;
    const double need = target - cdf_[i];
    const double f0 = density_[i];
    const double slope = (density_[i + 1] - density_[i]) / step();
    double t;
    if (std::abs(slope) < 1e-300) {
      t = f0 > 0 ? need / f0 : 0.0;
    } else {
      // 0.5 slope t^2 + f0 t - need = 0, numerically stable root
      const double disc = std::max(0.0, f0 * f0 + 2.0 * slope * need);
      t = 2.0 * need / (f0 + std::sqrt(disc));
    }
    return std::clamp(node(i) + t, lo_, hi_);
  }

  double integral() const { return trapezoid(density_); }

 private:
  double trapezoid(const std::vector<double>& v) const {
    double s = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) s += 0.5 * (v[i - 1] + v[i]);
    return s * step();
  }

  ParamKind kind_;
  double lo_, hi_;
  std::vector<double> density_;
  std::vector<double> cdf_;
};

inline ParamPrior flat_prior(ParamKind kind, Support s) {
  return ParamPrior(kind, s.lo, s.hi, std::vector<double>(kPriorNodes, 1.0));
}

inline ParamPrior flat_prior(ParamKind kind) { return flat_prior(kind, default_support(kind)); }

namespace detail {

inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + (pos - static_cast<double>(i)) * (sorted[i + 1] - sorted[i]);
}

}  // namespace detail

/// Silverman's rule of thumb, 0.9 min(sd, IQR/1.34) n^(-1/5).
inline double silverman_bandwidth(std::span<const double> samples) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = detail::sample_sd(samples);
  const double iqr = detail::quantile_sorted(sorted, 0.75) - detail::quantile_sorted(sorted, 0.25);
  double spread = sd;
  if (iqr > 0) spread = std::min(sd, iqr / 1.34);
  return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

/// Gaussian KDE reflected at both support boundaries and tabulated on
/// kPriorNodes nodes. Samples outside [lo, hi] are rejected.
inline ParamPrior bounded_density_1d(std::span<const double> samples, double lo, double hi,
                                     ParamKind kind = ParamKind::kDistanceM1,
                                     std::optional<double> bandwidth = std::nullopt) {
  if (samples.size() < 3)
    throw InsufficientDataError("bounded_density_1d: need at least 3 samples, got " +
                                std::to_string(samples.size()));
  if (!(hi > lo)) throw InputError("bounded_density_1d: empty support");
  for (double s : samples)
    if (!(s >= lo && s <= hi))
      throw InputError("bounded_density_1d: sample " + std::to_string(s) + " outside support");

  const double node_step = (hi - lo) / static_cast<double>(kPriorNodes - 1);
  double h = bandwidth.value_or(silverman_bandwidth(samples));
  h = std::max(h, 2.0 * node_step);

  std::vector<double> table(kPriorNodes, 0.0);
  const double inv = 1.0 / (2.0 * h * h);
  for (std::size_t i = 0; i < kPriorNodes; ++i) {
    const double x = lo + static_cast<double>(i) * node_step;
    double acc = 0.0;
    for (double s : samples) {
      const double d0 = x - s;
      const double d1 = x - (2.0 * lo - s);
      const double d2 = x - (2.0 * hi - s);
      acc += std::exp(-d0 * d0 * inv) + std::exp(-d1 * d1 * inv) + std::exp(-d2 * d2 * inv);
    }
    table[i] = acc;
  }
  return ParamPrior(kind, lo, hi, std::move(table));
}

// ---------------------------------------------------------------------------
// Anchor prior

/// Nonnegative cell weights summing to 1 on the evaluation grid.
struct AnchorPrior {
  Grid grid;
  std::vector<double> weight;

  double at(int row, int col) const { return weight[grid.index(row, col)]; }
};

inline AnchorPrior flat_anchor_prior(const Grid& grid) {
  validate(grid);
  return {grid, std::vector<double>(grid.size(), 1.0 / static_cast<double>(grid.size()))};
}

struct Bandwidth2d {
  double x;
  double y;
};

/// Silverman's rule for a product Gaussian kernel in two dimensions,
/// h_j = sd_j * n^(-1/6).
inline Bandwidth2d silverman_bandwidth_2d(std::span<const UtmPoint> points, const Grid& grid) {
  std::vector<double> xs, ys;
  for (const auto& p : points) {
    xs.push_back(p.easting);
    ys.push_back(p.northing);
  }
  std::sort(xs.begin(), xs.end());  // order-independent rounding
  std::sort(ys.begin(), ys.end());
  const double f = std::pow(static_cast<double>(points.size()), -1.0 / 6.0);
  // A kernel narrower than half a cell cannot be resolved at cell centres.
  return {std::max(detail::sample_sd(xs) * f, 0.5 * grid.dx()),
          std::max(detail::sample_sd(ys) * f, 0.5 * grid.dy())};
}

inline AnchorPrior kde2d(std::span<const UtmPoint> points, const Grid& grid,
                         std::optional<Bandwidth2d> bandwidth = std::nullopt) {
  validate(grid);
  if (points.size() < 2)
    throw InsufficientDataError("kde2d: need at least 2 points, got " + std::to_string(points.size()));
  const Bandwidth2d h = bandwidth.value_or(silverman_bandwidth_2d(points, grid));
  if (!(h.x > 0 && h.y > 0)) throw InputError("kde2d: bandwidth must be > 0");

  // Points are summed in sorted order so the surface does not depend on the
  // caller's ordering.
  std::vector<UtmPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const UtmPoint& a, const UtmPoint& b) {
    return a.easting != b.easting ? a.easting < b.easting : a.northing < b.northing;
  });

  std::vector<double> w(grid.size(), 0.0);
  const double ix = 1.0 / (2.0 * h.x * h.x);
  const double iy = 1.0 / (2.0 * h.y * h.y);
  for (int r = 0; r < grid.nrows; ++r)
    for (int c = 0; c < grid.ncols; ++c) {
      const auto z = cell_center(grid, r, c);
      double acc = 0.0;
      for (const auto& p : sorted) {
        const double dx = z.easting - p.easting;
        const double dy = z.northing - p.northing;
        acc += std::exp(-dx * dx * ix - dy * dy * iy);
      }
      w[grid.index(r, c)] = acc;
    }
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0)) throw DegenerateSurfaceError("kde2d: kernel mass underflowed on the grid");
  for (double& v : w) v /= total;
  return {grid, std::move(w)};
}

// ---------------------------------------------------------------------------
// Per-offender summaries and the prior set

inline constexpr double kNonResidentThresholdKm = 10.0;

/// Ground-truth residency: non-resident when every crime lies more than
/// `threshold` km from the anchor.
inline bool is_nonresident(const CrimeSeries& s, double threshold = kNonResidentThresholdKm) {
  if (!s.anchor) throw DataError("offender " + s.offender_id + " has no anchor point");
  double min_d = std::numeric_limits<double>::infinity();
  for (const auto& x : s.sites) min_d = std::min(min_d, distance(x, *s.anchor));
  return min_d > threshold;
}

struct OffenderSummary {
  double mean_distance = 0.0;
  std::optional<double> mean_angle;  // naive mean in [0, 2pi)
  double sd_distance = 0.0;
  std::optional<double> sd_angle;
};

/// Summary statistics of crime sites relative to the known anchor. Sites
/// coinciding with the anchor have no direction and are skipped for angles.
inline OffenderSummary summarize(const CrimeSeries& s) {
  if (!s.anchor) throw DataError("offender " + s.offender_id + " has no anchor point");
  std::vector<double> radii, angles;
  for (const auto& x : s.sites) {
    const double dx = x.easting - s.anchor->easting;
    const double dy = x.northing - s.anchor->northing;
    radii.push_back(std::hypot(dx, dy));
    if (dx != 0.0 || dy != 0.0) angles.push_back(arg_angle(dx, dy));
  }
  OffenderSummary out;
  for (double r : radii) out.mean_distance += r;
  out.mean_distance /= static_cast<double>(radii.size());
  out.sd_distance = detail::sample_sd(radii);
  if (!angles.empty()) {
    double m = 0.0;
    for (double a : angles) m += a;
    out.mean_angle = m / static_cast<double>(angles.size());
  }
  if (angles.size() >= 2) out.sd_angle = detail::sample_sd(angles);
  return out;
}

struct PriorSet {
  AnchorPrior anchor;
  std::map<ParamKind, ParamPrior> params;
  std::size_t source_offender_count = 0;
  std::vector<std::string> warnings;

  const ParamPrior& param(ParamKind k) const {
    auto it = params.find(k);
    if (it == params.end()) throw MissingPriorError("prior set lacks " + to_string(k));
    return it->second;
  }
};

using LabelMap = std::map<std::string, SubtypeLabel, std::less<>>;

/// Builds every prior from `donors` alone. Donor residency comes from their
/// known anchors; resident donors are split by their subtype label.
inline PriorSet build_prior_set_from_donors(const Dataset& donors, const LabelMap& labels,
                                            const Grid& grid) {
  PriorSet ps;
  ps.source_offender_count = donors.series.size();

  std::vector<UtmPoint> anchors;
  std::map<ParamKind, std::vector<double>> samples;
  for (const auto& s : donors.series) {
    if (!s.anchor) continue;
    anchors.push_back(*s.anchor);
    const auto summary = summarize(s);
    const bool nonres = is_nonresident(s);
    std::optional<Subtype> sub;
    if (auto it = labels.find(s.offender_id); it != labels.end()) sub = it->second.kind;

    auto add = [&](ParamKind k, double v) {
      const auto sup = default_support(k);
      samples[k].push_back(std::clamp(v, sup.lo, std::nextafter(sup.hi, sup.lo)));
    };
    if (nonres) {
      add(ParamKind::kDistanceNonRes, summary.mean_distance);
      if (summary.mean_angle) add(ParamKind::kAngleNonRes, *summary.mean_angle);
    } else if (sub == Subtype::kM1) {
      add(ParamKind::kDistanceM1, summary.mean_distance);
    } else if (sub == Subtype::kM2) {
      add(ParamKind::kDistanceM2, summary.mean_distance);
      if (summary.mean_angle) add(ParamKind::kAngleM2, *summary.mean_angle);
    }
    if (nonres || sub == Subtype::kM2) {
      add(ParamKind::kSpreadRadial, summary.sd_distance);
      if (summary.sd_angle) add(ParamKind::kSpreadAngular, *summary.sd_angle);
    }
  }

  if (anchors.size() >= 2) {
    ps.anchor = kde2d(anchors, grid);
  } else {
    ps.warnings.push_back("anchor prior: fewer than 2 donor anchors; using flat prior");
    ps.anchor = flat_anchor_prior(grid);
  }

  for (ParamKind k : kAllParamKinds) {
    const auto sup = default_support(k);
    const auto& v = samples[k];
    if (v.size() >= 3) {
      ps.params.emplace(k, bounded_density_1d(v, sup.lo, sup.hi, k));
    } else {
      ps.warnings.push_back(to_string(k) + ": " + std::to_string(v.size()) +
                            " donor samples; using flat prior");
      ps.params.emplace(k, flat_prior(k, sup));
    }
  }
  return ps;
}

/// Leave-one-out prior set for `excluded`.
inline PriorSet build_prior_set(const Dataset& ds, std::string_view excluded,
                                const LabelMap& labels, const Grid& grid) {
  const Dataset donors = leave_one_out(ds, excluded);
  if (donors.series.empty())
    throw InsufficientDataError("build_prior_set: no donor offenders after excluding '" +
                                std::string(excluded) + "'");
  return build_prior_set_from_donors(donors, labels, grid);
}

}  // namespace geoprof
