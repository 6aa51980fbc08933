#pragma once

// Resident subtype assignment from crime-site geometry alone.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "geoprof/error.hpp"
#include "geoprof/geodesy.hpp"
#include "geoprof/likelihood.hpp"

namespace geoprof {

enum class Subtype { kM1, kM2, kM3 };

inline std::string to_string(Subtype s) {
  switch (s) {
    case Subtype::kM1: return "M1";
    case Subtype::kM2: return "M2";
    case Subtype::kM3: return "M3";
  }
  return "?";
}

using Cluster = std::vector<std::size_t>;  // sorted site indices

struct SubtypeLabel {
  Subtype kind = Subtype::kM1;
  std::vector<Cluster> clusters;  // nonempty iff kind == kM3
};

struct ClassifierConfig {
  double cutoff_km = 2.0;
  double m1_coverage = 0.8;
  double m3_coverage = 0.6;
};

inline double euclidean(const UtmPoint& a, const UtmPoint& b) { return distance(a, b); }

/// Distance from each site to its nearest other site under `metric`.
template <typename Metric = double (*)(const UtmPoint&, const UtmPoint&)>
std::vector<double> nn_distances(std::span<const UtmPoint> sites, Metric metric = &euclidean) {
  if (sites.size() < 2) throw InsufficientDataError("nn_distances: need at least 2 sites");
  std::vector<double> out(sites.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (std::size_t j = i + 1; j < sites.size(); ++j) {
      const double d = metric(sites[i], sites[j]);
      out[i] = std::min(out[i], d);
      out[j] = std::min(out[j], d);
    }
  return out;
}

/// Single-linkage components under dist <= cutoff. Singletons are dropped.
/// Clusters are ordered by their smallest site index.
inline std::vector<Cluster> detect_clusters(std::span<const UtmPoint> sites, double cutoff) {
  if (sites.size() < 2) throw InsufficientDataError("detect_clusters: need at least 2 sites");
  if (!(cutoff > 0)) throw InputError("detect_clusters: cutoff must be > 0");
  std::vector<std::size_t> parent(sites.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (std::size_t j = i + 1; j < sites.size(); ++j)
      if (distance(sites[i], sites[j]) <= cutoff) {
        const auto a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::vector<Cluster> by_root(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) by_root[find(i)].push_back(i);
  std::vector<Cluster> clusters;
  for (auto& c : by_root)
    if (c.size() >= 2) clusters.push_back(std::move(c));
  return clusters;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// M1 when sites are tightly spaced and form (at most) one dominant
/// cluster, M3 when two or more clusters hold most sites, else M2.
inline SubtypeLabel classify(std::span<const UtmPoint> sites, const ClassifierConfig& cfg = {}) {
  if (sites.size() < 3) throw InsufficientDataError("classify: need at least 3 sites");
  const double n = static_cast<double>(sites.size());
  const auto clusters = detect_clusters(sites, cfg.cutoff_km);
  std::size_t covered = 0;
  for (const auto& c : clusters) covered += c.size();

  const double med = median(nn_distances(sites));
  if (med <= cfg.cutoff_km && clusters.size() <= 1 && covered >= cfg.m1_coverage * n)
    return {Subtype::kM1, {}};
  if (clusters.size() >= 2 && covered >= cfg.m3_coverage * n) return {Subtype::kM3, clusters};
  return {Subtype::kM2, {}};
}

}  // namespace geoprof
