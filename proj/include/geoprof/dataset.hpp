#pragma once

// Crime-series ingestion. Two CSV layouts are accepted:
//
//   offender_id,crime_id,ucr_code,crime_lat,crime_lon,anchor_lat,anchor_lon
//   offender_id,crime_id,ucr_code,crime_easting_km,crime_northing_km,anchor_easting_km,anchor_northing_km
//
// The first is the canonical WGS84 layout; the second is a UTM-native
// variant (zone 18, km) used by the synthetic generator.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <iterator>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "geoprof/error.hpp"
#include "geoprof/geodesy.hpp"

namespace geoprof {

inline constexpr std::string_view kCanonicalHeader =
    "offender_id,crime_id,ucr_code,crime_lat,crime_lon,anchor_lat,anchor_lon";
inline constexpr std::string_view kUtmHeader =
    "offender_id,crime_id,ucr_code,crime_easting_km,crime_northing_km,anchor_easting_km,"
    "anchor_northing_km";
inline constexpr int kDatasetZone = 18;
inline constexpr std::size_t kMinSeriesLength = 3;

struct CrimeRecord {
  std::string offender_id;
  std::string crime_id;
  std::string ucr_code;
  GeoPoint crime_site;
  GeoPoint anchor;
};

struct UtmRecord {
  std::string offender_id;
  std::string crime_id;
  std::string ucr_code;
  UtmPoint crime_site;
  UtmPoint anchor;
};

struct CrimeSeries {
  std::string offender_id;
  std::vector<UtmPoint> sites;
  std::optional<UtmPoint> anchor;  // ground truth; evaluation only

  std::size_t n() const { return sites.size(); }
};

struct Dataset {
  std::vector<CrimeSeries> series;
  std::vector<std::string> warnings;

  std::size_t total_crimes() const {
    std::size_t total = 0;
    for (const auto& s : series) total += s.n();
    return total;
  }

  const CrimeSeries* find(std::string_view id) const {
    for (const auto& s : series)
      if (s.offender_id == id) return &s;
    return nullptr;
  }

  const CrimeSeries& at(std::string_view id) const {
    if (const auto* s = find(id)) return *s;
    throw LookupError("unknown offender id '" + std::string(id) + "'");
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_number(std::string_view field, std::size_t row, const char* column) {
  double value = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value))
    throw RowError(row, column, "unparseable value '" + std::string(field) + "'");
  return value;
}

inline double parse_lat(std::string_view field, std::size_t row, const char* column) {
  const double v = parse_number(field, row, column);
  if (v < -90.0 || v > 90.0)
    throw RowError(row, column, "latitude out of range: " + std::string(field));
  return v;
}

inline double parse_lon(std::string_view field, std::size_t row, const char* column) {
  const double v = parse_number(field, row, column);
  if (v < -180.0 || v >= 180.0)
    throw RowError(row, column, "longitude out of range: " + std::string(field));
  return v;
}

enum class Layout { kGeographic, kUtm };

inline Layout read_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto cols = split_csv(line);
  auto joined = [&] {
    std::string s;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) s += ',';
      s += cols[i];
    }
    return s;
  }();
  if (joined == kCanonicalHeader) return Layout::kGeographic;
  if (joined == kUtmHeader) return Layout::kUtm;
  for (auto expected : split_csv(kCanonicalHeader))
    if (std::find(cols.begin(), cols.end(), expected) == cols.end())
      throw SchemaError("missing column '" + std::string(expected) + "'");
  throw SchemaError("header columns out of order; expected '" + std::string(kCanonicalHeader) + "'");
}

/// Calls `on_row(row_number, fields)` for every non-blank data row.
template <typename F>
void for_each_row(std::istream& in, F&& on_row) {
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != 7)
      throw RowError(row, "*", "expected 7 fields, got " + std::to_string(fields.size()));
    if (fields[0].empty()) throw RowError(row, "offender_id", "empty offender id");
    on_row(row, fields);
  }
}

}  // namespace detail

/// Parses the canonical WGS84 CSV. Throws SchemaError or RowError.
inline std::vector<CrimeRecord> parse_records(std::istream& in) {
  if (detail::read_header(in) != detail::Layout::kGeographic)
    throw SchemaError("expected the WGS84 layout '" + std::string(kCanonicalHeader) + "'");
  std::vector<CrimeRecord> records;
  detail::for_each_row(in, [&](std::size_t row, const auto& f) {
    CrimeRecord r;
    r.offender_id = std::string(f[0]);
    r.crime_id = std::string(f[1]);
    r.ucr_code = std::string(f[2]);
    r.crime_site = {detail::parse_lat(f[3], row, "crime_lat"),
                    detail::parse_lon(f[4], row, "crime_lon")};
    r.anchor = {detail::parse_lat(f[5], row, "anchor_lat"),
                detail::parse_lon(f[6], row, "anchor_lon")};
    records.push_back(std::move(r));
  });
  return records;
}

inline std::vector<CrimeRecord> parse_records(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_records(in);
}

inline std::vector<UtmRecord> parse_utm_records(std::istream& in) {
  if (detail::read_header(in) != detail::Layout::kUtm)
    throw SchemaError("expected the UTM layout '" + std::string(kUtmHeader) + "'");
  std::vector<UtmRecord> records;
  detail::for_each_row(in, [&](std::size_t row, const auto& f) {
    UtmRecord r;
    r.offender_id = std::string(f[0]);
    r.crime_id = std::string(f[1]);
    r.ucr_code = std::string(f[2]);
    r.crime_site = {kDatasetZone, detail::parse_number(f[3], row, "crime_easting_km"),
                    detail::parse_number(f[4], row, "crime_northing_km")};
    r.anchor = {kDatasetZone, detail::parse_number(f[5], row, "anchor_easting_km"),
                detail::parse_number(f[6], row, "anchor_northing_km")};
    records.push_back(std::move(r));
  });
  return records;
}

inline void write_records(std::ostream& out, const std::vector<CrimeRecord>& records) {
  out << kCanonicalHeader << '\n';
  out << std::setprecision(17);
  for (const auto& r : records)
    out << r.offender_id << ',' << r.crime_id << ',' << r.ucr_code << ',' << r.crime_site.lat
        << ',' << r.crime_site.lon << ',' << r.anchor.lat << ',' << r.anchor.lon << '\n';
}

inline void write_utm_records(std::ostream& out, const std::vector<UtmRecord>& records) {
  out << kUtmHeader << '\n';
  out << std::setprecision(17);
  for (const auto& r : records)
    out << r.offender_id << ',' << r.crime_id << ',' << r.ucr_code << ',' << r.crime_site.easting
        << ',' << r.crime_site.northing << ',' << r.anchor.easting << ',' << r.anchor.northing
        << '\n';
}

namespace detail {

template <typename Record, typename Project, typename SameAnchor>
Dataset group(const std::vector<Record>& records, Project project, SameAnchor same_anchor) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const Record*>> by_offender;
  for (const auto& r : records) {
    auto [it, inserted] = by_offender.try_emplace(r.offender_id);
    if (inserted) order.push_back(r.offender_id);
    it->second.push_back(&r);
  }
  Dataset ds;
  for (const auto& id : order) {
    const auto& rows = by_offender[id];
    if (rows.size() < kMinSeriesLength) {
      ds.warnings.push_back("offender " + id + " has " + std::to_string(rows.size()) +
                            " crimes (< 3); excluded");
      continue;
    }
    CrimeSeries s;
    s.offender_id = id;
    for (const Record* r : rows) {
      if (!same_anchor(r->anchor, rows.front()->anchor))
        throw DataError("offender " + id + ": inconsistent anchor coordinates across rows");
      s.sites.push_back(project(r->crime_site));
    }
    s.anchor = project(rows.front()->anchor);
    ds.series.push_back(std::move(s));
  }
  return ds;
}

}  // namespace detail

/// Groups records by offender and projects them into the zone-18 frame.
inline Dataset group_into_series(const std::vector<CrimeRecord>& records) {
  return detail::group(
      records, [](const GeoPoint& p) { return latlon_to_utm(p, kDatasetZone); },
      [](const GeoPoint& a, const GeoPoint& b) {
        return std::abs(a.lat - b.lat) <= 1e-9 && std::abs(a.lon - b.lon) <= 1e-9;
      });
}

inline Dataset group_into_series(const std::vector<UtmRecord>& records) {
  return detail::group(
      records, [](const UtmPoint& p) { return p; },
      [](const UtmPoint& a, const UtmPoint& b) {
        return std::abs(a.easting - b.easting) <= 1e-9 && std::abs(a.northing - b.northing) <= 1e-9;
      });
}

/// Reads either CSV layout, chosen by its header.
inline Dataset load_dataset(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw SchemaError("missing header row");
  std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream probe(header + "\n");
  const auto layout = detail::read_header(probe);
  std::istringstream full(header + "\n" + rest);
  if (layout == detail::Layout::kGeographic) return group_into_series(parse_records(full));
  return group_into_series(parse_utm_records(full));
}

/// Copy of `ds` without offender `id`.
inline Dataset leave_one_out(const Dataset& ds, std::string_view id) {
  if (!ds.find(id)) throw LookupError("leave_one_out: unknown offender id '" + std::string(id) + "'");
  Dataset out;
  for (const auto& s : ds.series)
    if (s.offender_id != id) out.series.push_back(s);
  return out;
}

}  // namespace geoprof
