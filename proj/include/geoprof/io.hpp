#pragma once

// Plot- and report-ready artifact writers, plus the flat key = value run
// configuration used by the command-line tool.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoprof/error.hpp"
#include "geoprof/evaluation.hpp"
#include "geoprof/grid.hpp"
#include "geoprof/priors.hpp"

namespace geoprof {

/// row,col,easting,northing,mass
inline void write_surface_csv(std::ostream& out, const PosteriorSurface& s) {
  const Grid& g = s.grid();
  out << "row,col,easting,northing,mass\n" << std::setprecision(17);
  for (int r = 0; r < g.nrows; ++r)
    for (int c = 0; c < g.ncols; ++c) {
      const auto z = cell_center(g, r, c);
      out << r << ',' << c << ',' << z.easting << ',' << z.northing << ',' << s.at(r, c) << '\n';
    }
}

/// Binary 8-bit PGM, ncols x nrows, north at the top, max mass -> 255.
inline void write_surface_pgm(std::ostream& out, const PosteriorSurface& s) {
  const Grid& g = s.grid();
  const double peak = *std::max_element(s.mass().begin(), s.mass().end());
  out << "P5\n" << g.ncols << ' ' << g.nrows << "\n255\n";
  for (int r = g.nrows - 1; r >= 0; --r)
    for (int c = 0; c < g.ncols; ++c) {
      const double v = peak > 0 ? s.at(r, c) / peak * 255.0 : 0.0;
      out.put(static_cast<char>(static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L))));
    }
}

inline nlohmann::json grid_json(const Grid& g) {
  return {{"west", g.west},   {"east", g.east},   {"south", g.south}, {"north", g.north},
          {"ncols", g.ncols}, {"nrows", g.nrows}, {"zone", g.zone}};
}

inline nlohmann::json surface_sidecar(const PosteriorSurface& s, const std::string& offender_id,
                                      const std::string& method, const std::string& subtype,
                                      std::size_t top = 20) {
  nlohmann::json j;
  j["offender_id"] = offender_id;
  j["method"] = method;
  j["subtype"] = subtype;
  j["grid"] = grid_json(s.grid());
  auto ranked = rank_cells(s);
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t i = 0; i < std::min(top, ranked.size()); ++i) {
    const auto [r, c] = ranked[i];
    const auto z = cell_center(s.grid(), r, c);
    cells.push_back({{"rank", i + 1}, {"row", r}, {"col", c}, {"easting", z.easting},
                     {"northing", z.northing}, {"mass", s.at(r, c)}});
  }
  j["top_cells"] = std::move(cells);
  return j;
}

inline void write_results_csv(std::ostream& out, const std::vector<SearchResult>& results) {
  out << "offender_id,method,subtype,cells_examined,fraction\n" << std::setprecision(17);
  for (const auto& r : results)
    out << r.offender_id << ',' << to_string(r.method) << ',' << r.subtype << ','
        << r.cells_examined << ',' << r.fraction << '\n';
}

inline void write_curves_csv(std::ostream& out, const std::vector<AccumulationCurve>& curves) {
  out << "method,threshold,found_fraction\n" << std::setprecision(17);
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.thresholds.size(); ++i)
      out << to_string(c.method) << ',' << c.thresholds[i] << ',' << c.found_fraction[i] << '\n';
}

/// Table-style summary: one row per method, one column per threshold.
inline void print_curve_table(std::ostream& out, const std::vector<AccumulationCurve>& curves) {
  if (curves.empty()) return;
  out << std::left << std::setw(10) << "method";
  for (double t : curves.front().thresholds)
    out << std::right << std::setw(8) << (std::to_string(static_cast<int>(std::lround(t * 100))) + "%");
  out << '\n';
  for (const auto& c : curves) {
    out << std::left << std::setw(10) << to_string(c.method) << std::right << std::fixed
        << std::setprecision(4);
    for (double f : c.found_fraction) out << std::setw(8) << f;
    out << '\n';
    out.unsetf(std::ios::fixed);
  }
}

/// node,density
inline void write_prior_csv(std::ostream& out, const ParamPrior& p) {
  out << "node,density\n" << std::setprecision(17);
  for (std::size_t i = 0; i < p.size(); ++i) out << p.node(i) << ',' << p.table()[i] << '\n';
}

inline void write_grid_csv(std::ostream& out, const Grid& g) {
  out << "row,col,easting,northing\n" << std::setprecision(17);
  for (int r = 0; r < g.nrows; ++r)
    for (int c = 0; c < g.ncols; ++c) {
      const auto z = cell_center(g, r, c);
      out << r << ',' << c << ',' << z.easting << ',' << z.northing << '\n';
    }
}

// ---------------------------------------------------------------------------
// key = value configuration

using KeyValues = std::map<std::string, std::string, std::less<>>;

/// Parses `key = value` lines; '#' starts a comment. Duplicate keys are an error.
inline KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw InputError("config line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw InputError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return kv;
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError(what + ": not a number: '" + s + "'");
  }
}

inline int to_int(const std::string& s, const std::string& what) {
  const double v = to_double(s, what);
  if (v != std::floor(v)) throw InputError(what + ": not an integer: '" + s + "'");
  return static_cast<int>(v);
}

inline std::uint64_t to_seed(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InputError("seed: not an unsigned integer: '" + s + "'");
  return v;
}

/// "WxH", e.g. "100x70" (ncols x nrows).
inline void apply_grid_shape(Grid& g, const std::string& s) {
  const auto x = s.find_first_of("xX");
  if (x == std::string::npos) throw InputError("grid: expected WxH, got '" + s + "'");
  g.ncols = to_int(s.substr(0, x), "grid width");
  g.nrows = to_int(s.substr(x + 1), "grid height");
}

/// "W,E,S,N" in km.
inline void apply_grid_bounds(Grid& g, const std::string& s) {
  const auto parts = split_list(s);
  if (parts.size() != 4) throw InputError("bounds: expected W,E,S,N, got '" + s + "'");
  g.west = to_double(parts[0], "bounds west");
  g.east = to_double(parts[1], "bounds east");
  g.south = to_double(parts[2], "bounds south");
  g.north = to_double(parts[3], "bounds north");
}

/// Everything a CLI run needs. Defaults reproduce the published setup.
struct RunConfig {
  std::string dataset;
  Grid grid{};
  std::vector<MethodId> methods{MethodId::k1a, MethodId::k1b, MethodId::kRossmo};
  Scope scope = Scope::kResidentsOnly;
  QuadratureConfig quadrature{};
  ClassifierConfig classifier{};
  ResidencyWeights weights{};
  std::string out = ".";
  std::uint64_t seed = 42;
  std::optional<std::vector<double>> thresholds;

  EvaluationConfig evaluation() const {
    EvaluationConfig e;
    e.grid = grid;
    e.classifier = classifier;
    e.engine.quadrature = quadrature;
    e.engine.residency = weights;
    e.thresholds = thresholds;
    return e;
  }
};

inline void check_weights(const ResidencyWeights& w) {
  if (std::abs(w.equal_resident + w.equal_nonresident - 1.0) > kWeightSumTolerance ||
      std::abs(w.frequency_resident + w.frequency_nonresident - 1.0) > kWeightSumTolerance)
    throw InputError("config: resident/non-resident weights must sum to 1");
}

/// Overlays `kv` onto `cfg`. Unknown keys are rejected.
inline void apply_config(RunConfig& cfg, const KeyValues& kv) {
  auto weight_pair = [](const std::string& v, double& a, double& b) {
    const auto parts = split_list(v);
    if (parts.size() != 2) throw InputError("config: weights need two values 'resident,nonresident'");
    a = to_double(parts[0], "weight");
    b = to_double(parts[1], "weight");
  };
  for (const auto& [key, value] : kv) {
    if (key == "dataset") cfg.dataset = value;
    else if (key == "grid") apply_grid_shape(cfg.grid, value);
    else if (key == "bounds") apply_grid_bounds(cfg.grid, value);
    else if (key == "methods") {
      cfg.methods.clear();
      for (const auto& m : split_list(value)) cfg.methods.push_back(parse_method(m));
    } else if (key == "scope") cfg.scope = parse_scope(value);
    else if (key == "distance_nodes") cfg.quadrature.distance_nodes = to_int(value, key);
    else if (key == "angle_nodes") cfg.quadrature.angle_nodes = to_int(value, key);
    else if (key == "spread_nodes") cfg.quadrature.spread_nodes = to_int(value, key);
    else if (key == "cluster_cutoff_km") cfg.classifier.cutoff_km = to_double(value, key);
    else if (key == "m1_coverage") cfg.classifier.m1_coverage = to_double(value, key);
    else if (key == "m3_coverage") cfg.classifier.m3_coverage = to_double(value, key);
    else if (key == "equal_weights")
      weight_pair(value, cfg.weights.equal_resident, cfg.weights.equal_nonresident);
    else if (key == "frequency_weights")
      weight_pair(value, cfg.weights.frequency_resident, cfg.weights.frequency_nonresident);
    else if (key == "out") cfg.out = value;
    else if (key == "seed") cfg.seed = to_seed(value);
    else if (key == "thresholds") {
      std::vector<double> t;
      for (const auto& v : split_list(value)) t.push_back(to_double(v, key) / 100.0);
      cfg.thresholds = std::move(t);
    } else {
      throw InputError("config: unknown key '" + key + "'");
    }
  }
  validate(cfg.grid);
  check_weights(cfg.weights);
  if (cfg.quadrature.distance_nodes < 1 || cfg.quadrature.angle_nodes < 1 ||
      cfg.quadrature.spread_nodes < 1)
    throw InputError("config: node counts must be >= 1");
}

}  // namespace geoprof
