#pragma once

// Search-fraction evaluation: rank cells by surface value, count how many
// must be searched before reaching the true anchor, and aggregate over
// offenders into accumulation curves.

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "geoprof/classifier.hpp"
#include "geoprof/dataset.hpp"
#include "geoprof/error.hpp"
#include "geoprof/grid.hpp"
#include "geoprof/posterior.hpp"
#include "geoprof/priors.hpp"
#include "geoprof/rossmo.hpp"

namespace geoprof {

/// Cells in descending order of mass; ties keep row-major order.
inline std::vector<Cell> rank_cells(const PosteriorSurface& s) {
  const auto& m = s.mass();
  std::vector<std::size_t> idx(m.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return m[a] > m[b]; });
  std::vector<Cell> out;
  out.reserve(idx.size());
  const int ncols = s.grid().ncols;
  for (auto i : idx) out.push_back({static_cast<int>(i) / ncols, static_cast<int>(i) % ncols});
  return out;
}

struct SearchResult {
  std::string offender_id;
  MethodId method = MethodId::k1a;
  std::string subtype;
  std::size_t cells_examined = 0;
  double fraction = 0.0;
};

/// 1-based rank of the anchor's cell, without materialising the full order.
inline std::size_t anchor_rank(const PosteriorSurface& s, const UtmPoint& anchor) {
  const Cell target = locate_cell(s.grid(), anchor);
  const auto& m = s.mass();
  const std::size_t t = s.grid().index(target.row, target.col);
  std::size_t ahead = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] > m[t] || (m[i] == m[t] && i < t)) ++ahead;
  return ahead + 1;
}

inline SearchResult search_fraction(const PosteriorSurface& s, const UtmPoint& anchor) {
  SearchResult r;
  r.cells_examined = anchor_rank(s, anchor);
  r.fraction = static_cast<double>(r.cells_examined) / static_cast<double>(s.grid().size());
  return r;
}

struct AccumulationCurve {
  MethodId method = MethodId::k1a;
  std::vector<double> thresholds;
  std::vector<double> found_fraction;
};

inline AccumulationCurve accumulation_curve(const std::vector<SearchResult>& results,
                                            const std::vector<double>& thresholds,
                                            MethodId method = MethodId::k1a) {
  if (results.empty()) throw InsufficientDataError("accumulation_curve: no results");
  AccumulationCurve c;
  c.method = method;
  c.thresholds = thresholds;
  for (double t : thresholds) {
    if (!(t > 0 && t <= 1)) throw InputError("accumulation_curve: threshold outside (0, 1]");
    // thresholds are percentages of the grid; absorb their decimal rounding
    const auto found = std::count_if(results.begin(), results.end(),
                                     [&](const SearchResult& r) { return r.fraction <= t + 1e-12; });
    c.found_fraction.push_back(static_cast<double>(found) / static_cast<double>(results.size()));
  }
  return c;
}

enum class Scope { kResidentsOnly, kAll };

inline std::string to_string(Scope s) { return s == Scope::kAll ? "ALL" : "RESIDENTS_ONLY"; }

inline Scope parse_scope(std::string_view s) {
  if (s == "ALL" || s == "all") return Scope::kAll;
  if (s == "RESIDENTS_ONLY" || s == "residents" || s == "residents_only") return Scope::kResidentsOnly;
  throw InputError("unknown scope '" + std::string(s) + "'");
}

inline std::vector<double> default_thresholds(Scope s) {
  if (s == Scope::kResidentsOnly)
    return {0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10, 0.16, 0.17};
  return {0.01, 0.05, 0.10, 0.15, 0.20, 0.25, 0.36, 0.37, 0.38, 0.39};
}

struct EvaluationConfig {
  Grid grid{};
  ClassifierConfig classifier{};
  EngineConfig engine{};
  std::optional<std::vector<double>> thresholds;
};

struct ErrorRecord {
  std::string offender_id;
  std::string method;  // empty when the whole offender failed
  std::string message;
};

struct Report {
  Scope scope = Scope::kAll;
  std::vector<MethodId> methods;
  std::vector<SearchResult> results;  // offender order, then method order
  std::vector<AccumulationCurve> curves;
  std::vector<ErrorRecord> errors;
  std::vector<std::string> warnings;
};

inline LabelMap classify_all(const Dataset& ds, const ClassifierConfig& cfg = {}) {
  LabelMap labels;
  for (const auto& s : ds.series) labels.emplace(s.offender_id, classify(s.sites, cfg));
  return labels;
}

/// Runs every method on every in-scope offender with leave-one-out priors.
inline Report compare_methods(const Dataset& ds, const std::vector<MethodId>& methods, Scope scope,
                              const EvaluationConfig& cfg = {}) {
  Report rep;
  rep.scope = scope;
  rep.methods = methods;
  const LabelMap labels = classify_all(ds, cfg.classifier);

  std::map<MethodId, std::vector<SearchResult>> per_method;
  for (const auto& series : ds.series) {
    try {
      if (!series.anchor) throw DataError("no anchor point");
      if (scope == Scope::kResidentsOnly && is_nonresident(series)) continue;
      if (!contains(cfg.grid, *series.anchor))
        throw OutOfBoundsError("anchor lies outside the evaluation grid; excluded");
    } catch (const Error& e) {
      rep.errors.push_back({series.offender_id, "", e.what()});
      continue;
    }

    const SubtypeLabel& label = labels.at(series.offender_id);
    std::optional<PriorSet> priors;
    std::optional<MethodEngine> engine;
    for (MethodId m : methods) {
      try {
        std::optional<PosteriorSurface> surface;
        if (m == MethodId::kRossmo) {
          surface = hit_score_surface(series, cfg.grid, &rep.warnings);
        } else {
          if (!priors) {
            priors = build_prior_set(ds, series.offender_id, labels, cfg.grid);
            for (const auto& w : priors->warnings)
              rep.warnings.push_back(series.offender_id + ": " + w);
            engine.emplace(series, label, *priors, cfg.grid, cfg.engine);
          }
          surface = engine->run(m);
        }
        SearchResult r = search_fraction(*surface, *series.anchor);
        r.offender_id = series.offender_id;
        r.method = m;
        r.subtype = to_string(label.kind);
        rep.results.push_back(r);
        per_method[m].push_back(r);
      } catch (const Error& e) {
        rep.errors.push_back({series.offender_id, to_string(m), e.what()});
      }
    }
  }

  const auto thresholds = cfg.thresholds.value_or(default_thresholds(scope));
  for (MethodId m : methods) {
    auto it = per_method.find(m);
    if (it == per_method.end() || it->second.empty()) continue;
    rep.curves.push_back(accumulation_curve(it->second, thresholds, m));
  }
  return rep;
}

}  // namespace geoprof
