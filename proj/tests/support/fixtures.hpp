#pragma once

// Shared builders for posterior-level tests.

#include <string>
#include <vector>

#include "geoprof/geoprof.hpp"

namespace geoprof::fixture {

/// Flat anchor prior and flat parameter priors on their default supports.
inline PriorSet flat_priors(const Grid& grid) {
  PriorSet ps;
  ps.anchor = flat_anchor_prior(grid);
  for (ParamKind k : kAllParamKinds) ps.params.emplace(k, flat_prior(k));
  return ps;
}

/// Parameter priors learned leave-one-out from the other replicates of a
/// synthetic scenario, with the anchor prior replaced by a flat one.
inline PriorSet replicate_priors(const std::vector<CrimeSeries>& replicates, std::size_t excluded,
                                 Subtype kind, const Grid& grid) {
  Dataset ds;
  ds.series = replicates;
  LabelMap labels;
  for (const auto& s : replicates) labels[s.offender_id] = {kind, {}};
  PriorSet ps = build_prior_set(ds, replicates.at(excluded).offender_id, labels, grid);
  ps.anchor = flat_anchor_prior(grid);
  return ps;
}

inline std::size_t argmax(const PosteriorSurface& s) {
  const auto& m = s.mass();
  std::size_t best = 0;
  for (std::size_t i = 1; i < m.size(); ++i)
    if (m[i] > m[best]) best = i;
  return best;
}

/// Chebyshev distance in cells between the argmax and the cell holding `p`.
inline int argmax_offset(const PosteriorSurface& s, const UtmPoint& p) {
  const Grid& g = s.grid();
  const auto i = argmax(s);
  const Cell truth = locate_cell(g, p);
  const int r = static_cast<int>(i) / g.ncols;
  const int c = static_cast<int>(i) % g.ncols;
  return std::max(std::abs(r - truth.row), std::abs(c - truth.col));
}

}  // namespace geoprof::fixture
