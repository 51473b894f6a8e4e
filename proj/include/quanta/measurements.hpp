#pragma once

// Preparing quantogram inputs from archaeological tables: centre-line
// reduction of wall-face pairs, all-pairs differences along each measurement
// line, pooling, and building width/depth tables.

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quanta/csv.hpp"
#include "quanta/error.hpp"
#include "quanta/quantogram.hpp"

namespace quanta::measurements {

enum class LineOrientation { EastWest, NorthSouth };

enum class PositionRole { InsideFace, OutsideFace, ObjectBoundary, Centre };

inline bool is_face(PositionRole r) { return r == PositionRole::InsideFace || r == PositionRole::OutsideFace; }

struct MeasurementLine {
  std::string site_id;
  std::string line_id;
  LineOrientation orientation = LineOrientation::EastWest;
  std::vector<double> positions; ///< metres along the line, in order
  std::vector<PositionRole> roles;

  std::string label() const { return site_id + "/" + line_id; }

  void validate() const {
    if (positions.size() != roles.size()) throw ValidationError("line " + label() + ": role count mismatch");
    if (positions.size() < 2) throw ValidationError("line " + label() + ": at least 2 positions are required");
    for (double p : positions)
      if (!std::isfinite(p)) throw ValidationError("line " + label() + ": non-finite position");
  }
};

struct BuildingDims {
  std::string building_id;
  double width = 0.0;
  double depth = 0.0;
  std::string source_table;
};

/// Replaces each consecutive pair of wall-face positions by its midpoint and
/// lists every object boundary twice.
inline MeasurementLine centre_lines(const MeasurementLine& line) {
  if (line.positions.size() != line.roles.size()) throw ValidationError("line " + line.label() + ": role count mismatch");
  MeasurementLine out;
  out.site_id = line.site_id;
  out.line_id = line.line_id;
  out.orientation = line.orientation;
  std::optional<double> pending;
  for (std::size_t i = 0; i < line.positions.size(); ++i) {
    const double p = line.positions[i];
    const PositionRole role = line.roles[i];
    if (is_face(role)) {
      if (pending) {
        out.positions.push_back(0.5 * (*pending + p));
        out.roles.push_back(PositionRole::Centre);
        pending.reset();
      } else {
        pending = p;
      }
    } else {
      for (int rep = 0; rep < 2; ++rep) {
        out.positions.push_back(p);
        out.roles.push_back(role == PositionRole::Centre ? PositionRole::Centre : PositionRole::ObjectBoundary);
      }
    }
  }
  if (pending)
    throw PairingError("line " + line.label() + ": odd number of wall-face positions, the last face at " +
                       csv::format(*pending) + " m has no partner");
  return out;
}

/// {|pⱼ − pᵢ| : i < j} with zero differences dropped.
inline MeasurementSet all_pair_differences(const MeasurementLine& line) {
  if (line.positions.size() < 2) throw ValidationError("line " + line.label() + ": at least 2 positions are required");
  MeasurementSet out;
  const std::string tag = line.label();
  const auto& p = line.positions;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const double d = std::abs(p[j] - p[i]);
      if (d > 0.0) out.add(d, tag);
    }
  }
  return out;
}

/// All-pairs absolute differences of a coordinate list, zeros dropped.
inline MeasurementSet all_pair_differences(std::span<const double> coords, const std::string& tag) {
  MeasurementSet out;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for (std::size_t j = i + 1; j < coords.size(); ++j) {
      const double d = std::abs(coords[j] - coords[i]);
      if (d > 0.0) out.add(d, tag);
    }
  }
  return out;
}

/// Multiset union, tags carried along.
inline MeasurementSet pool(std::span<const MeasurementSet> sets) {
  MeasurementSet out;
  for (const auto& s : sets) {
    out.values.insert(out.values.end(), s.values.begin(), s.values.end());
    out.tags.insert(out.tags.end(), s.tags.begin(), s.tags.end());
  }
  return out;
}

/// Per-line differences pooled over all lines, optionally after centre-line
/// reduction.
inline MeasurementSet lines_to_measurements(std::span<const MeasurementLine> lines, bool use_centre_lines = true) {
  std::vector<MeasurementSet> sets;
  for (const auto& l : lines) sets.push_back(all_pair_differences(use_centre_lines ? centre_lines(l) : l));
  return pool(sets);
}

/// Each width and each depth becomes one measurement.
inline MeasurementSet dims_to_measurements(std::span<const BuildingDims> dims) {
  MeasurementSet out;
  for (const auto& d : dims) {
    out.add(d.width, d.building_id + ":width");
    out.add(d.depth, d.building_id + ":depth");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Table ingestion

enum class TableFormat { MeasurementLines, BuildingDims, Values };

inline const std::vector<std::string>& lines_columns() {
  static const std::vector<std::string> c{"site", "line", "orientation", "position_m", "role"};
  return c;
}
inline const std::vector<std::string>& dims_columns() {
  static const std::vector<std::string> c{"building", "width_m", "depth_m", "source"};
  return c;
}

/// Recognizes a table by its exact header. Raw value tables use `value_m`
/// with an optional `source` column.
inline std::optional<TableFormat> detect_format(const csv::Table& t) {
  if (t.header == lines_columns()) return TableFormat::MeasurementLines;
  if (t.header == dims_columns()) return TableFormat::BuildingDims;
  if (t.header == std::vector<std::string>{"value_m"} || t.header == std::vector<std::string>{"value_m", "source"})
    return TableFormat::Values;
  return std::nullopt;
}

namespace detail {

inline void require_header(const csv::Table& t, const std::vector<std::string>& cols, const std::string& source) {
  if (t.header != cols) {
    std::string want;
    for (const auto& c : cols) want += (want.empty() ? "" : ",") + c;
    throw InputError(source + ": header must be exactly '" + want + "'");
  }
  if (t.rows.empty()) throw ValidationError(source + ": no data rows");
}

inline LineOrientation parse_orientation(const std::string& s, std::size_t line, const std::string& source) {
  if (s == "E-W" || s == "EW" || s == "e-w" || s == "ew") return LineOrientation::EastWest;
  if (s == "N-S" || s == "NS" || s == "n-s" || s == "ns") return LineOrientation::NorthSouth;
  throw InputError(source + ": line " + std::to_string(line) + ": orientation must be E-W or N-S");
}

inline PositionRole parse_role(const std::string& s, std::size_t line, const std::string& source) {
  if (s == "inside" || s == "insideFace" || s == "inside_face") return PositionRole::InsideFace;
  if (s == "outside" || s == "outsideFace" || s == "outside_face") return PositionRole::OutsideFace;
  if (s == "object" || s == "objectBoundary" || s == "object_boundary") return PositionRole::ObjectBoundary;
  throw InputError(source + ": line " + std::to_string(line) + ": role must be inside, outside or object");
}

} // namespace detail

/// Schema `site,line,orientation,position_m,role`. Rows are grouped into
/// lines by (site, line) in order of first appearance; row order is kept
/// within a line.
inline std::vector<MeasurementLine> parse_lines(const csv::Table& t, const std::string& source = "lines") {
  detail::require_header(t, lines_columns(), source);
  std::vector<MeasurementLine> lines;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& row : t.rows) {
    const auto& f = row.fields;
    const auto key = std::make_pair(f[0], f[1]);
    auto it = index.find(key);
    const LineOrientation o = detail::parse_orientation(f[2], row.line, source);
    if (it == index.end()) {
      it = index.emplace(key, lines.size()).first;
      lines.push_back({f[0], f[1], o, {}, {}});
    } else if (lines[it->second].orientation != o) {
      throw ValidationError(source + ": line " + std::to_string(row.line) + ": orientation differs within line " + f[0] +
                            "/" + f[1]);
    }
    auto& l = lines[it->second];
    l.positions.push_back(csv::parse_number(f[3], row.line, source));
    l.roles.push_back(detail::parse_role(f[4], row.line, source));
  }
  for (const auto& l : lines) l.validate();
  return lines;
}

/// Schema `building,width_m,depth_m,source`.
inline std::vector<BuildingDims> parse_dims(const csv::Table& t, const std::string& source = "dims") {
  detail::require_header(t, dims_columns(), source);
  std::vector<BuildingDims> out;
  for (const auto& row : t.rows) {
    const auto& f = row.fields;
    BuildingDims d{f[0], csv::parse_number(f[1], row.line, source), csv::parse_number(f[2], row.line, source), f[3]};
    if (!(d.width > 0.0) || !(d.depth > 0.0))
      throw ValidationError(source + ": line " + std::to_string(row.line) + ": width and depth must be positive");
    out.push_back(std::move(d));
  }
  return out;
}

/// Schema `value_m[,source]`.
inline MeasurementSet parse_values(const csv::Table& t, const std::string& source = "values") {
  if (t.header != std::vector<std::string>{"value_m"} && t.header != std::vector<std::string>{"value_m", "source"})
    throw InputError(source + ": header must be 'value_m' or 'value_m,source'");
  if (t.rows.empty()) throw ValidationError(source + ": no data rows");
  MeasurementSet out;
  for (const auto& row : t.rows) {
    const double v = csv::parse_number(row.fields[0], row.line, source);
    if (!(v > 0.0)) throw ValidationError(source + ": line " + std::to_string(row.line) + ": value must be positive");
    out.add(v, row.fields.size() > 1 ? row.fields[1] : source);
  }
  return out;
}

struct LoadedTable {
  TableFormat format = TableFormat::Values;
  std::vector<MeasurementLine> lines;
  std::vector<BuildingDims> dims;
  MeasurementSet values;
};

/// Reads a table file; with no explicit format the header decides.
inline LoadedTable load_tables(const std::string& path, std::optional<TableFormat> format = std::nullopt) {
  const csv::Table t = csv::read_file(path);
  if (!format) format = detect_format(t);
  if (!format)
    throw InputError(path + ": unrecognized header (expected measurement lines, building dims or value_m columns)");
  LoadedTable out;
  out.format = *format;
  switch (*format) {
    case TableFormat::MeasurementLines: out.lines = parse_lines(t, path); break;
    case TableFormat::BuildingDims: out.dims = parse_dims(t, path); break;
    case TableFormat::Values: out.values = parse_values(t, path); break;
  }
  return out;
}

} // namespace quanta::measurements
