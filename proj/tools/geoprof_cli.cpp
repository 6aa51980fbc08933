// geoprof: command-line front end for the geographic profiling pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geoprof/geoprof.hpp"

namespace fs = std::filesystem;
using namespace geoprof;

namespace {

/// Flags shared by every subcommand. Values given on the command line
/// override the same keys from --config.
struct Flags {
  std::string config;
  std::string dataset;
  std::string out;
  std::string seed;
  std::string grid;
  std::string bounds;
  std::string scope;
  std::string method;
  std::string offender;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key = value run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--dataset", f.dataset, "crime series CSV");
  cmd->add_option("--out", f.out, "output directory (or file for convert)");
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--grid", f.grid, "grid shape WxH (columns x rows)");
  cmd->add_option("--bounds", f.bounds, "grid bounds W,E,S,N in UTM km");
  cmd->add_option("--scope", f.scope, "RESIDENTS_ONLY or ALL");
  cmd->add_option("--method", f.method, "method id, or a comma-separated list");
  cmd->add_option("--offender", f.offender, "offender id");
}

RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw InputError("cannot read config '" + f.config + "'");
    apply_config(cfg, parse_key_values(in));
  }
  KeyValues cli;
  if (!f.dataset.empty()) cli["dataset"] = f.dataset;
  if (!f.out.empty()) cli["out"] = f.out;
  if (!f.seed.empty()) cli["seed"] = f.seed;
  if (!f.grid.empty()) cli["grid"] = f.grid;
  if (!f.bounds.empty()) cli["bounds"] = f.bounds;
  if (!f.scope.empty()) cli["scope"] = f.scope;
  if (!f.method.empty()) cli["methods"] = f.method;
  apply_config(cfg, cli);
  return cfg;
}

Dataset open_dataset(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw InputError("no dataset given (--dataset or 'dataset' key)");
  std::ifstream in(cfg.dataset, std::ios::binary);
  if (!in) throw InputError("cannot read dataset '" + cfg.dataset + "'");
  Dataset ds = load_dataset(in);
  for (const auto& w : ds.warnings) std::cerr << "warning: " << w << '\n';
  return ds;
}

std::ofstream open_out(const fs::path& p, bool binary = false) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
  if (!out) throw InputError("cannot write '" + p.string() + "'");
  return out;
}

// ---------------------------------------------------------------------------

int cmd_convert(const Flags& f) {
  if (f.dataset.empty()) throw InputError("convert: --dataset is required");
  std::ifstream in(f.dataset, std::ios::binary);
  if (!in) throw InputError("cannot read '" + f.dataset + "'");
  const bool empty = in.peek() == std::char_traits<char>::eof();
  const auto records = empty ? std::vector<CrimeRecord>{} : parse_records(in);

  std::ofstream file;
  if (!f.out.empty()) file = open_out(f.out);
  std::ostream& out = f.out.empty() ? std::cout : file;
  out << kCanonicalHeader
      << ",zone,crime_easting_km,crime_northing_km,anchor_easting_km,anchor_northing_km\n"
      << std::setprecision(17);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    auto project = [&](const GeoPoint& p, const char* column) {
      try {
        return latlon_to_utm(p, kDatasetZone);
      } catch (const Error& e) {
        throw RowError(i + 2, column, e.what());
      }
    };
    const UtmPoint x = project(r.crime_site, "crime_lat");
    const UtmPoint a = project(r.anchor, "anchor_lat");
    out << r.offender_id << ',' << r.crime_id << ',' << r.ucr_code << ',' << r.crime_site.lat << ','
        << r.crime_site.lon << ',' << r.anchor.lat << ',' << r.anchor.lon << ',' << x.zone << ','
        << x.easting << ',' << x.northing << ',' << a.easting << ',' << a.northing << '\n';
  }
  return 0;
}

int cmd_classify(const Flags& f) {
  const RunConfig cfg = resolve(f);
  const Dataset ds = open_dataset(cfg);
  std::ofstream file;
  if (!f.out.empty()) file = open_out(fs::path(cfg.out) / "classify.csv");
  std::ostream& out = f.out.empty() ? std::cout : file;
  out << "offender_id,label,n_clusters\n";
  for (const auto& s : ds.series) {
    const auto label = classify(s.sites, cfg.classifier);
    out << s.offender_id << ',' << to_string(label.kind) << ',' << label.clusters.size() << '\n';
  }
  return 0;
}

int cmd_profile(const Flags& f) {
  const RunConfig cfg = resolve(f);
  if (f.offender.empty()) throw InputError("profile: --offender is required");
  if (cfg.methods.size() != 1) throw InputError("profile: give exactly one --method");
  const MethodId method = cfg.methods.front();
  const Dataset ds = open_dataset(cfg);
  const CrimeSeries& series = ds.at(f.offender);
  const auto labels = classify_all(ds, cfg.classifier);
  const SubtypeLabel& label = labels.at(series.offender_id);

  std::optional<PosteriorSurface> surface;
  try {
    if (method == MethodId::kRossmo) {
      std::vector<std::string> warnings;
      surface = hit_score_surface(series, cfg.grid, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    } else {
      const PriorSet priors = build_prior_set(ds, series.offender_id, labels, cfg.grid);
      for (const auto& w : priors.warnings) std::cerr << "warning: " << w << '\n';
      surface = run_method(series, method, label, priors, cfg.grid, cfg.evaluation().engine);
    }
  } catch (const Error& e) {
    throw Error("offender " + series.offender_id + ", method " + to_string(method) + ": " + e.what());
  }

  const fs::path stem = fs::path(cfg.out) / (series.offender_id + "_" + to_string(method));
  {
    auto out = open_out(stem.string() + ".csv");
    write_surface_csv(out, *surface);
  }
  {
    auto out = open_out(stem.string() + ".pgm", true);
    write_surface_pgm(out, *surface);
  }
  {
    auto out = open_out(stem.string() + ".json");
    out << surface_sidecar(*surface, series.offender_id, to_string(method), to_string(label.kind))
               .dump(2)
        << '\n';
  }
  std::cout << stem.string() << ".{csv,pgm,json}\n";
  return 0;
}

int cmd_evaluate(const Flags& f) {
  const RunConfig cfg = resolve(f);
  const Dataset ds = open_dataset(cfg);
  const Report rep = compare_methods(ds, cfg.methods, cfg.scope, cfg.evaluation());
  {
    auto out = open_out(fs::path(cfg.out) / "results.csv");
    write_results_csv(out, rep.results);
  }
  {
    auto out = open_out(fs::path(cfg.out) / "curves.csv");
    write_curves_csv(out, rep.curves);
  }
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& e : rep.errors)
    std::cerr << "error: offender " << e.offender_id << (e.method.empty() ? "" : " method " + e.method)
              << ": " << e.message << '\n';
  std::cout << "scope " << to_string(rep.scope) << ", " << rep.results.size() << " results\n";
  print_curve_table(std::cout, rep.curves);
  return rep.errors.empty() ? 0 : 1;
}

int cmd_emit_grid(const Flags& f) {
  const RunConfig cfg = resolve(f);
  {
    auto out = open_out(fs::path(cfg.out) / "grid.csv");
    write_grid_csv(out, cfg.grid);
  }
  auto out = open_out(fs::path(cfg.out) / "grid.json");
  out << grid_json(cfg.grid).dump(2) << '\n';
  return 0;
}

struct SynthFlags {
  std::string family = "M2";
  double alpha = 5.0;
  double sigma = 1.0;
  double theta = 0.0;
  double sigma2 = 0.5;
  std::size_t n = 12;
  std::size_t replicates = 10;
  std::vector<double> anchor{350.0, 4365.0};
};

int cmd_synth(const Flags& f, const SynthFlags& s) {
  const RunConfig cfg = resolve(f);
  SyntheticScenario sc;
  if (s.family == "M1") sc.params = M1Params{s.alpha};
  else if (s.family == "M2") sc.params = M2Params{s.alpha, s.sigma};
  else if (s.family == "NONRES") sc.params = NonResParams{s.alpha, s.sigma, s.theta, s.sigma2};
  else throw InputError("synth: family must be M1, M2 or NONRES");
  sc.true_anchor = {kDatasetZone, s.anchor.at(0), s.anchor.at(1)};
  sc.n = s.n;
  sc.replicates = s.replicates;
  sc.seed = cfg.seed;
  const auto records = to_utm_records(sample_series(sc));
  std::ofstream file;
  if (!f.out.empty()) file = open_out(f.out);
  write_utm_records(f.out.empty() ? std::cout : file, records);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian geographic profiling of serial offenders"};
  app.require_subcommand(1);

  Flags flags;
  auto* convert = app.add_subcommand("convert", "append zone-18 UTM columns to a WGS84 CSV");
  auto* classify_cmd = app.add_subcommand("classify", "label each offender M1, M2 or M3");
  auto* profile = app.add_subcommand("profile", "write one offender's surface (CSV, PGM, JSON)");
  auto* evaluate = app.add_subcommand("evaluate", "search-fraction comparison of methods");
  auto* emit_grid = app.add_subcommand("emit-grid", "write the grid cell centres");
  auto* synth = app.add_subcommand("synth", "draw synthetic offenders (UTM-layout CSV)");
  for (auto* cmd : {convert, classify_cmd, profile, evaluate, emit_grid, synth}) add_common(cmd, flags);

  SynthFlags sf;
  synth->add_option("--family", sf.family, "M1, M2 or NONRES")->capture_default_str();
  synth->add_option("--alpha", sf.alpha, "distance parameter, km")->capture_default_str();
  synth->add_option("--sigma", sf.sigma, "radial spread, km")->capture_default_str();
  synth->add_option("--theta", sf.theta, "preferred direction, rad")->capture_default_str();
  synth->add_option("--sigma2", sf.sigma2, "angular spread, rad")->capture_default_str();
  synth->add_option("--n", sf.n, "crimes per offender")->capture_default_str();
  synth->add_option("--replicates", sf.replicates, "number of offenders")->capture_default_str();
  synth->add_option("--anchor", sf.anchor, "anchor easting northing, km")->expected(2);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*convert) return cmd_convert(flags);
    if (*classify_cmd) return cmd_classify(flags);
    if (*profile) return cmd_profile(flags);
    if (*evaluate) return cmd_evaluate(flags);
    if (*emit_grid) return cmd_emit_grid(flags);
    if (*synth) return cmd_synth(flags, sf);
  } catch (const std::exception& e) {
    std::cerr << "geoprof: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
