#pragma once

// Marginal anchor-point posterior on the jurisdiction grid:
//
//   mass(z) ∝ h(z) · Σ_j w_j Π_i p(x_i | z, θ_j)
//
// with θ_j on equal-probability (prior-quantile) nodes. Products are formed
// in log space; each family's likelihood product is evaluated from per-cell
// sufficient statistics of the crime sites.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "geoprof/classifier.hpp"
#include "geoprof/dataset.hpp"
#include "geoprof/error.hpp"
#include "geoprof/grid.hpp"
#include "geoprof/likelihood.hpp"
#include "geoprof/priors.hpp"

namespace geoprof {

enum class Family { kM1, kM2, kNonRes };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::kM1: return "M1";
    case Family::kM2: return "M2";
    case Family::kNonRes: return "NONRES";
  }
  return "?";
}

struct QuadratureConfig {
  int distance_nodes = 32;
  int angle_nodes = 32;
  int spread_nodes = 8;
};

/// Parameter names accepted in ModelSpec::fixed_overrides.
namespace param {
inline constexpr const char* kAlpha = "alpha";
inline constexpr const char* kSigma = "sigma";    // M2 radial spread, NONRES sigma1
inline constexpr const char* kTheta = "theta";
inline constexpr const char* kSigma2 = "sigma2";  // NONRES angular spread
}  // namespace param

struct ModelSpec {
  Family family = Family::kM1;
  QuadratureConfig quadrature{};
  ParamKind distance_prior = ParamKind::kDistanceM1;
  ParamKind angle_prior = ParamKind::kAngleNonRes;
  std::map<std::string, double, std::less<>> fixed_overrides;

  static ModelSpec m1(QuadratureConfig q = {}) {
    return {Family::kM1, q, ParamKind::kDistanceM1, ParamKind::kAngleNonRes, {}};
  }
  static ModelSpec m2(QuadratureConfig q = {}) {
    return {Family::kM2, q, ParamKind::kDistanceM2, ParamKind::kAngleM2, {}};
  }
  /// Direction-aware model driven by the resident (M2) distance and angle priors.
  static ModelSpec nonres_for_residents(QuadratureConfig q = {}) {
    return {Family::kNonRes, q, ParamKind::kDistanceM2, ParamKind::kAngleM2, {}};
  }
  static ModelSpec nonres(QuadratureConfig q = {}) {
    return {Family::kNonRes, q, ParamKind::kDistanceNonRes, ParamKind::kAngleNonRes, {}};
  }
};

struct QuadNode {
  double value;
  double weight;
};

/// Midpoint rule in probability: node j sits at the prior's
/// ((j + 1/2) / count)-quantile with weight 1/count.
inline std::vector<QuadNode> quantile_nodes(const ParamPrior& prior, int count) {
  if (count < 1) throw InputError("quantile_nodes: need at least one node");
  std::vector<QuadNode> nodes;
  nodes.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j)
    nodes.push_back({prior.quantile((j + 0.5) / count), 1.0 / count});
  return nodes;
}

namespace detail {

inline std::vector<QuadNode> nodes_for(const ModelSpec& spec, const PriorSet& priors,
                                       const char* name, ParamKind kind, int count) {
  const ParamPrior& prior = priors.param(kind);
  if (auto it = spec.fixed_overrides.find(name); it != spec.fixed_overrides.end()) {
    const double v = it->second;
    if (!(v >= prior.lo() && v <= prior.hi()))
      throw ParameterError(std::string("override for ") + name + " outside prior support");
    return {{v, 1.0}};
  }
  return quantile_nodes(prior, count);
}

inline double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// Precomputed (log weight, parameters, log normaliser) for a radial
/// ring-normal factor.
struct RadialTerm {
  double log_weight;
  double alpha;
  double inv_two_var;
  double log_norm;
};

struct AngularTerm {
  double log_weight;
  double theta;
  double inv_two_var;
  double log_norm;
};

/// Mean and centred sum of squares; Σ(v - a)^2 = ss + n (mean - a)^2.
struct Moments {
  double mean = 0.0;
  double ss = 0.0;
};

inline Moments moments(std::span<const double> v) {
  Moments m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.ss += (x - m.mean) * (x - m.mean);
  return m;
}

}  // namespace detail

/// Coincident cell centre and crime site: evaluated at this radius in the
/// preferred direction.
inline constexpr double kCoincidentRadius = 1e-6;
inline constexpr double kCoincidenceTolerance = 1e-12;

/// Generic grid posterior. `log_likelihood(z)` returns the (marginalised)
/// log-likelihood of the whole series for anchor z. Cells are independent;
/// `threads > 1` splits rows across workers without changing any value.
template <typename LogLikelihood>
PosteriorSurface grid_posterior(const Grid& grid, const AnchorPrior& anchor,
                                LogLikelihood&& log_likelihood, unsigned threads = 1) {
  validate(grid);
  if (!(anchor.grid == grid)) throw CombineError("anchor prior grid differs from evaluation grid");
  std::vector<double> log_mass(grid.size());
  auto work = [&](int row_begin, int row_end) {
    for (int r = row_begin; r < row_end; ++r)
      for (int c = 0; c < grid.ncols; ++c) {
        const auto i = grid.index(r, c);
        const double h = anchor.weight[i];
        log_mass[i] = h > 0 ? log_likelihood(cell_center(grid, r, c)) + std::log(h)
                            : -std::numeric_limits<double>::infinity();
      }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(grid.nrows)));
  if (threads == 1) {
    work(0, grid.nrows);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (grid.nrows + static_cast<int>(threads) - 1) / static_cast<int>(threads);
    for (int b = 0; b < grid.nrows; b += chunk) pool.emplace_back(work, b, std::min(grid.nrows, b + chunk));
    for (auto& t : pool) t.join();
  }

  double peak = -std::numeric_limits<double>::infinity();
  for (double v : log_mass)
    if (!std::isnan(v)) peak = std::max(peak, v);
  if (!std::isfinite(peak)) throw DegenerateSurfaceError("posterior underflowed in every cell");
  std::vector<double> mass(grid.size());
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (std::isnan(log_mass[i])) throw DegenerateSurfaceError("posterior is NaN in a cell");
    mass[i] = std::exp(log_mass[i] - peak);
  }
  return PosteriorSurface::from_weights(grid, std::move(mass));
}

/// Log of the parameter-marginalised likelihood of `sites` at anchor z.
class SeriesLikelihood {
 public:
  SeriesLikelihood(std::span<const UtmPoint> sites, const ModelSpec& spec, const PriorSet& priors)
      : sites_(sites.begin(), sites.end()), family_(spec.family) {
    if (sites_.empty()) throw InsufficientDataError("posterior: series has no crime sites");
    const auto& q = spec.quadrature;
    const auto alphas =
        detail::nodes_for(spec, priors, param::kAlpha, spec.distance_prior, q.distance_nodes);
    const double n = static_cast<double>(sites_.size());
    switch (family_) {
      case Family::kM1:
        for (const auto& a : alphas) {
          if (!(a.value > 0)) throw ParameterError("M1: alpha node must be > 0");
          radial_.push_back({std::log(a.weight), a.value, kPi / (4.0 * a.value * a.value),
                             n * std::log(4.0 * a.value * a.value)});
        }
        break;
      case Family::kM2:
      case Family::kNonRes: {
        const auto sigmas = detail::nodes_for(spec, priors, param::kSigma,
                                              ParamKind::kSpreadRadial, q.spread_nodes);
        for (const auto& a : alphas)
          for (const auto& s : sigmas) {
            if (!(a.value > 0 && s.value > 0)) throw ParameterError("radial node must be > 0");
            const double norm = family_ == Family::kM2 ? ring_normal_normalizer(a.value, s.value)
                                                       : radial_normalizer(a.value, s.value);
            radial_.push_back({std::log(a.weight * s.weight), a.value,
                               1.0 / (2.0 * s.value * s.value), n * std::log(norm)});
          }
        if (family_ == Family::kNonRes) {
          const auto thetas = detail::nodes_for(spec, priors, param::kTheta, spec.angle_prior,
                                                q.angle_nodes);
          const auto spreads = detail::nodes_for(spec, priors, param::kSigma2,
                                                 ParamKind::kSpreadAngular, q.spread_nodes);
          for (const auto& t : thetas)
            for (const auto& s : spreads) {
              if (!(s.value > 0)) throw ParameterError("angular spread node must be > 0");
              angular_.push_back({std::log(t.weight * s.weight), t.value,
                                  1.0 / (2.0 * s.value * s.value),
                                  n * std::log(angular_normalizer(t.value, s.value))});
            }
        }
        break;
      }
    }
  }

  double operator()(const UtmPoint& z) const {
    thread_local std::vector<double> terms;
    terms.resize(std::max(radial_.size(), angular_.size()));
    const double n = static_cast<double>(sites_.size());

    if (family_ == Family::kM1) {
      double s2 = 0.0;
      for (const auto& x : sites_) s2 += squared_distance(x, z);
      for (std::size_t j = 0; j < radial_.size(); ++j) {
        const auto& t = radial_[j];
        terms[j] = t.log_weight - t.log_norm - t.inv_two_var * s2;
      }
      return detail::log_sum_exp(std::span(terms.data(), radial_.size()));
    }

    thread_local std::vector<double> radii, angles;
    radii.clear();
    angles.clear();
    for (const auto& x : sites_) {
      const double dx = x.easting - z.easting;
      const double dy = x.northing - z.northing;
      const double r = std::hypot(dx, dy);
      if (r <= kCoincidenceTolerance) {
        radii.push_back(kCoincidentRadius);
      } else {
        radii.push_back(r);
        if (family_ == Family::kNonRes) angles.push_back(arg_angle(dx, dy));
      }
    }
    const auto rm = detail::moments(radii);
    for (std::size_t j = 0; j < radial_.size(); ++j) {
      const auto& t = radial_[j];
      const double d = rm.mean - t.alpha;
      terms[j] = t.log_weight - t.log_norm - t.inv_two_var * (rm.ss + n * d * d);
    }
    double result = detail::log_sum_exp(std::span(terms.data(), radial_.size()));
    if (family_ == Family::kM2) return result;

    // Sites coinciding with z sit exactly at the preferred direction, so
    // their angular exponent is zero for every theta node.
    const auto am = detail::moments(angles);
    const double na = static_cast<double>(angles.size());
    for (std::size_t j = 0; j < angular_.size(); ++j) {
      const auto& t = angular_[j];
      const double d = am.mean - t.theta;
      terms[j] = t.log_weight - t.log_norm - t.inv_two_var * (am.ss + na * d * d);
    }
    return result + detail::log_sum_exp(std::span(terms.data(), angular_.size()));
  }

  Family family() const { return family_; }
  std::size_t radial_nodes() const { return radial_.size(); }
  std::size_t angular_nodes() const { return angular_.size(); }

 private:
  std::vector<UtmPoint> sites_;
  Family family_;
  std::vector<detail::RadialTerm> radial_;
  std::vector<detail::AngularTerm> angular_;
};

inline PosteriorSurface posterior_surface(std::span<const UtmPoint> sites, const ModelSpec& spec,
                                          const PriorSet& priors, const Grid& grid,
                                          unsigned threads = 1) {
  const SeriesLikelihood loglik(sites, spec, priors);
  return grid_posterior(grid, priors.anchor, loglik, threads);
}

inline PosteriorSurface posterior_surface(const CrimeSeries& series, const ModelSpec& spec,
                                          const PriorSet& priors, const Grid& grid,
                                          unsigned threads = 1) {
  return posterior_surface(std::span<const UtmPoint>(series.sites), spec, priors, grid, threads);
}

// ---------------------------------------------------------------------------
// Multimodel inference

inline constexpr double kWeightSumTolerance = 1e-12;

/// Cellwise weighted average of surfaces sharing one grid.
inline PosteriorSurface multimodel_combine(std::span<const PosteriorSurface> surfaces,
                                           std::span<const double> weights) {
  if (surfaces.empty()) throw CombineError("multimodel_combine: no surfaces");
  if (surfaces.size() != weights.size())
    throw CombineError("multimodel_combine: surface and weight counts differ");
  double total = 0.0;
  for (double w : weights) {
    if (!(std::isfinite(w) && w >= 0)) throw CombineError("multimodel_combine: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance)
    throw CombineError("multimodel_combine: weights sum to " + std::to_string(total) + ", not 1");
  const Grid& grid = surfaces.front().grid();
  for (const auto& s : surfaces)
    if (!(s.grid() == grid)) throw CombineError("multimodel_combine: grid mismatch");

  std::vector<double> mass(grid.size(), 0.0);
  for (std::size_t k = 0; k < surfaces.size(); ++k) {
    const auto& m = surfaces[k].mass();
    for (std::size_t i = 0; i < mass.size(); ++i) mass[i] += weights[k] * m[i];
  }
  return PosteriorSurface(grid, std::move(mass));
}

inline PosteriorSurface multimodel_combine(std::initializer_list<PosteriorSurface> surfaces,
                                           std::initializer_list<double> weights) {
  return multimodel_combine(std::span(surfaces.begin(), surfaces.size()),
                            std::span(weights.begin(), weights.size()));
}

/// Clustered resident: one no-buffer (M1) model per cluster, using only that
/// cluster's sites, plus one buffer-zone model over all sites. Components
/// are ordered clusters first, buffer last. Default weights are 1/R.
inline PosteriorSurface m3_surface(const CrimeSeries& series, const SubtypeLabel& label,
                                   const PriorSet& priors, const Grid& grid,
                                   const ModelSpec& buffer_model,
                                   std::optional<std::vector<double>> weights = std::nullopt,
                                   QuadratureConfig quadrature = {}, unsigned threads = 1) {
  if (label.kind != Subtype::kM3 || label.clusters.empty())
    throw InputError("m3_surface: label must be M3 with at least one cluster");
  std::vector<PosteriorSurface> parts;
  for (const auto& cluster : label.clusters) {
    std::vector<UtmPoint> sub;
    for (auto i : cluster) {
      if (i >= series.sites.size()) throw InputError("m3_surface: cluster index out of range");
      sub.push_back(series.sites[i]);
    }
    parts.push_back(posterior_surface(sub, ModelSpec::m1(quadrature), priors, grid, threads));
  }
  parts.push_back(posterior_surface(series, buffer_model, priors, grid, threads));
  std::vector<double> w =
      weights.value_or(std::vector<double>(parts.size(), 1.0 / static_cast<double>(parts.size())));
  if (!weights) {
    // 1/R rounded R times may miss 1 by more than the tolerance for some R
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) s += w[i];
    w.back() = 1.0 - s;
  }
  return multimodel_combine(parts, w);
}

// ---------------------------------------------------------------------------
// Method wiring

enum class MethodId { k1a, k1b, k2ai, k2aii, k2bi, k2bii, kRossmo };

inline constexpr MethodId kAllMethods[] = {MethodId::k1a,   MethodId::k1b,  MethodId::k2ai,
                                           MethodId::k2aii, MethodId::k2bi, MethodId::k2bii,
                                           MethodId::kRossmo};

inline std::string to_string(MethodId m) {
  switch (m) {
    case MethodId::k1a: return "1a";
    case MethodId::k1b: return "1b";
    case MethodId::k2ai: return "2ai";
    case MethodId::k2aii: return "2aii";
    case MethodId::k2bi: return "2bi";
    case MethodId::k2bii: return "2bii";
    case MethodId::kRossmo: return "ROSSMO";
  }
  return "?";
}

inline MethodId parse_method(std::string_view s) {
  for (MethodId m : kAllMethods)
    if (to_string(m) == s) return m;
  if (s == "rossmo" || s == "Rossmo") return MethodId::kRossmo;
  throw InputError("unknown method '" + std::string(s) + "'");
}

/// Weights (resident, non-resident) for the methods that admit both.
struct ResidencyWeights {
  double equal_resident = 0.5;
  double equal_nonresident = 0.5;
  double frequency_resident = 10.0 / 11.0;
  double frequency_nonresident = 1.0 / 11.0;
};

struct EngineConfig {
  QuadratureConfig quadrature{};
  ResidencyWeights residency{};
  std::optional<std::vector<double>> cluster_weights;
  unsigned threads = 1;
};

/// Evaluates and caches the component surfaces of one offender so that all
/// methods are composed from the same pieces.
class MethodEngine {
 public:
  MethodEngine(const CrimeSeries& series, SubtypeLabel label, const PriorSet& priors, Grid grid,
               EngineConfig cfg = {})
      : series_(series), label_(std::move(label)), priors_(priors), grid_(std::move(grid)),
        cfg_(std::move(cfg)) {}

  /// Resident surface with M2 offenders on the ring model (variant a) or
  /// the direction-aware model (variant b).
  const PosteriorSurface& resident(bool direction_aware) {
    auto& slot = direction_aware ? resident_b_ : resident_a_;
    if (!slot) {
      const auto buffer = direction_aware ? ModelSpec::nonres_for_residents(cfg_.quadrature)
                                          : ModelSpec::m2(cfg_.quadrature);
      switch (label_.kind) {
        case Subtype::kM1:
          slot = posterior_surface(series_, ModelSpec::m1(cfg_.quadrature), priors_, grid_,
                                   cfg_.threads);
          break;
        case Subtype::kM2:
          slot = posterior_surface(series_, buffer, priors_, grid_, cfg_.threads);
          break;
        case Subtype::kM3:
          slot = m3_surface(series_, label_, priors_, grid_, buffer, cfg_.cluster_weights,
                            cfg_.quadrature, cfg_.threads);
          break;
      }
    }
    return *slot;
  }

  const PosteriorSurface& nonresident() {
    if (!nonres_)
      nonres_ = posterior_surface(series_, ModelSpec::nonres(cfg_.quadrature), priors_, grid_,
                                  cfg_.threads);
    return *nonres_;
  }

  PosteriorSurface run(MethodId method) {
    const auto& w = cfg_.residency;
    switch (method) {
      case MethodId::k1a: return resident(false);
      case MethodId::k1b: return resident(true);
      case MethodId::k2ai:
        return mix(resident(false), w.equal_resident, w.equal_nonresident);
      case MethodId::k2aii:
        return mix(resident(false), w.frequency_resident, w.frequency_nonresident);
      case MethodId::k2bi:
        return mix(resident(true), w.equal_resident, w.equal_nonresident);
      case MethodId::k2bii:
        return mix(resident(true), w.frequency_resident, w.frequency_nonresident);
      case MethodId::kRossmo: break;
    }
    throw InputError("run_method: ROSSMO is evaluated by the hit-score baseline");
  }

 private:
  PosteriorSurface mix(const PosteriorSurface& res, double w_res, double w_non) {
    const PosteriorSurface parts[] = {res, nonresident()};
    const double weights[] = {w_res, w_non};
    return multimodel_combine(parts, weights);
  }

  const CrimeSeries& series_;
  SubtypeLabel label_;
  const PriorSet& priors_;
  Grid grid_;
  EngineConfig cfg_;
  std::optional<PosteriorSurface> resident_a_, resident_b_, nonres_;
};

inline PosteriorSurface run_method(const CrimeSeries& series, MethodId method,
                                   const SubtypeLabel& label, const PriorSet& priors,
                                   const Grid& grid, const EngineConfig& cfg = {}) {
  MethodEngine engine(series, label, priors, grid, cfg);
  return engine.run(method);
}

}  // namespace geoprof
