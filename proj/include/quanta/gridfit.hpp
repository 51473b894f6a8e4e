#pragma once

// Two-grid fitting from building corners: edge orientations, two-von-Mises
// building assignment, rotation into each grid's axes, the four-axis
// compendium of coordinate differences, offsets by circular averaging, and
// fitted grid models with per-corner residuals.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "quanta/circstats.hpp"
#include "quanta/csv.hpp"
#include "quanta/error.hpp"
#include "quanta/geometry.hpp"
#include "quanta/measurements.hpp"
#include "quanta/quantogram.hpp"

namespace quanta::gridfit {

/// A building given by 3 or 4 ordered corners; 3 corners means the fourth is
/// missing and the open side is not an edge.
struct Building {
  std::string id;
  std::vector<Point> corners;

  void validate() const {
    if (corners.size() < 3 || corners.size() > 4)
      throw ValidationError("building " + id + ": expected 3 or 4 corners, got " + std::to_string(corners.size()));
    for (std::size_t i = 0; i < corners.size(); ++i) {
      if (!std::isfinite(corners[i].x) || !std::isfinite(corners[i].y))
        throw ValidationError("building " + id + ": non-finite corner");
      for (std::size_t j = i + 1; j < corners.size(); ++j)
        if (corners[i] == corners[j])
          throw GeometryError("building " + id + ": corners " + std::to_string(i) + " and " + std::to_string(j) +
                              " coincide");
    }
  }
};

/// Schema `building,corner_index,x,y`, 3 or 4 rows per building. Buildings
/// keep the order of first appearance; corners are ordered by index.
inline std::vector<Building> parse_corners(const csv::Table& t, const std::string& source = "corners") {
  if (t.header != std::vector<std::string>{"building", "corner_index", "x", "y"})
    throw InputError(source + ": header must be exactly 'building,corner_index,x,y'");
  if (t.rows.empty()) throw ValidationError(source + ": no data rows");
  std::vector<Building> out;
  std::vector<std::map<long, Point>> corners;
  std::map<std::string, std::size_t> index;
  for (const auto& row : t.rows) {
    const auto& f = row.fields;
    const double ci = csv::parse_number(f[1], row.line, source);
    if (ci != std::floor(ci) || ci < 0)
      throw InputError(source + ": line " + std::to_string(row.line) + ": corner_index must be a non-negative integer");
    auto it = index.find(f[0]);
    if (it == index.end()) {
      it = index.emplace(f[0], out.size()).first;
      out.push_back({f[0], {}});
      corners.emplace_back();
    }
    const Point p{csv::parse_number(f[2], row.line, source), csv::parse_number(f[3], row.line, source)};
    if (!corners[it->second].emplace(static_cast<long>(ci), p).second)
      throw ValidationError(source + ": line " + std::to_string(row.line) + ": building " + f[0] + " repeats corner " +
                            f[1]);
  }
  for (std::size_t b = 0; b < out.size(); ++b) {
    for (const auto& [k, p] : corners[b]) out[b].corners.push_back(p);
    out[b].validate();
  }
  return out;
}

inline std::vector<Building> load_corners(const std::string& path) { return parse_corners(csv::read_file(path), path); }

struct EdgeOrientation {
  std::size_t building = 0; ///< index into the building list
  double degrees = 0.0;     ///< folded to [0, 90)
};

inline std::vector<EdgeOrientation> building_edges(std::span<const Building> buildings) {
  std::vector<EdgeOrientation> edges;
  for (std::size_t b = 0; b < buildings.size(); ++b) {
    const Building& bld = buildings[b];
    bld.validate();
    const std::size_t n = bld.corners.size();
    const std::size_t count = n == 4 ? 4 : 2;
    for (std::size_t e = 0; e < count; ++e) {
      const Point& p = bld.corners[e];
      const Point& q = bld.corners[(e + 1) % n];
      const double deg = circstats::rad_to_deg(std::atan2(q.y - p.y, q.x - p.x));
      edges.push_back({b, circstats::fold_angle(deg, 90.0)});
    }
  }
  return edges;
}

struct GridAssignment {
  std::string building_id;
  std::optional<int> cluster; ///< 1 or 2; empty = unassigned
  std::vector<double> edge_orientations;
  std::vector<int> edge_components; ///< 1 or 2 per edge
};

struct AssignmentResult {
  circstats::MixtureFit mixture;
  std::vector<GridAssignment> assignments;
  std::array<double, 2> orientation_deg{}; ///< component modes mapped back to [0, 90)
};

/// Fits two von Mises components to the scaled mod-90 edge orientations;
/// each edge goes to its more probable component and a building joins a
/// cluster only if all of its edges agree. Edges are fitted in sorted order so
/// the result does not depend on the order buildings are listed.
inline AssignmentResult assign_buildings(std::span<const Building> buildings,
                                         const circstats::MixtureOptions& opt = {}) {
  if (buildings.size() < 2) throw InputError("assign buildings: at least 2 buildings are required");
  const auto edges = building_edges(buildings);
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> scaled(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) scaled[i] = circstats::scale_to_circle(edges[i].degrees, 90.0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scaled[a] < scaled[b]; });
  std::vector<double> sorted(edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = scaled[order[i]];

  AssignmentResult out;
  out.mixture = circstats::fit_mixture(circstats::CircularSample(sorted), circstats::MixtureKind::TwoVonMises, opt);
  for (int k = 0; k < 2; ++k)
    out.orientation_deg[static_cast<std::size_t>(k)] =
        circstats::unscale_from_circle(out.mixture.components[static_cast<std::size_t>(k)].mu, 90.0);

  std::vector<int> component(edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& r = out.mixture.responsibilities[i];
    component[order[i]] = r[1] > r[0] ? 2 : 1;
  }
  out.assignments.resize(buildings.size());
  for (std::size_t b = 0; b < buildings.size(); ++b) out.assignments[b].building_id = buildings[b].id;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto& a = out.assignments[edges[i].building];
    a.edge_orientations.push_back(edges[i].degrees);
    a.edge_components.push_back(component[i]);
  }
  for (auto& a : out.assignments) {
    const int first = a.edge_components.front();
    if (std::all_of(a.edge_components.begin(), a.edge_components.end(), [first](int c) { return c == first; }))
      a.cluster = first;
  }
  return out;
}

/// Rotates points by −orientation so the grid axes become x and y.
inline std::vector<Point> project_to_grid_axes(std::span<const Point> points, double orientation_deg) {
  const double t = circstats::deg_to_rad(orientation_deg);
  const double c = std::cos(t);
  const double s = std::sin(t);
  std::vector<Point> out;
  out.reserve(points.size());
  for (const Point& p : points) out.push_back({p.x * c + p.y * s, -p.x * s + p.y * c});
  return out;
}

inline std::string axis_tag(std::size_t cluster_index, char axis) {
  return "cluster" + std::to_string(cluster_index + 1) + ":" + axis;
}

/// Union of the all-pairs coordinate differences along each grid axis of each
/// cluster, tagged "clusterK:x" / "clusterK:y".
inline MeasurementSet compendium_differences(std::span<const std::vector<Point>> clusters) {
  std::vector<MeasurementSet> sets;
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    std::vector<double> xs, ys;
    for (const Point& p : clusters[k]) {
      xs.push_back(p.x);
      ys.push_back(p.y);
    }
    sets.push_back(measurements::all_pair_differences(xs, axis_tag(k, 'x')));
    sets.push_back(measurements::all_pair_differences(ys, axis_tag(k, 'y')));
  }
  return measurements::pool(sets);
}

inline MeasurementSet compendium_differences(const std::vector<Point>& cluster1, const std::vector<Point>& cluster2) {
  if (cluster1.empty() || cluster2.empty()) throw InputError("compendium: each cluster must be non-empty");
  const std::vector<std::vector<Point>> both{cluster1, cluster2};
  return compendium_differences(both);
}

/// Values carrying `tag`, e.g. one axis of the compendium.
inline MeasurementSet select_tag(const MeasurementSet& set, const std::string& tag) {
  MeasurementSet out;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (set.tags[i] == tag) out.add(set.values[i], set.tags[i]);
  return out;
}

struct OffsetFit {
  double x = 0.0; ///< in [0, q)
  double y = 0.0;
  double rbar_x = 0.0;
  double rbar_y = 0.0;
};

/// Circular mean of coordinates taken modulo q, in metres on [0, q).
inline std::pair<double, double> fit_offset_1d(std::span<const double> coords, double quantum) {
  if (!(quantum > 0.0)) throw ConfigError("offset fit: quantum must be positive");
  if (coords.empty()) throw InputError("offset fit: no coordinates");
  std::vector<double> angles;
  angles.reserve(coords.size());
  for (double v : coords) angles.push_back(circstats::scale_to_circle(circstats::fold_angle(v, quantum), quantum));
  const auto m = circstats::circular_mean_resultant(circstats::CircularSample(std::move(angles)));
  if (m.degenerate()) throw DegenerateError("offset fit: coordinates are spread evenly modulo the quantum");
  return {circstats::unscale_from_circle(*m.mean, quantum), m.rbar};
}

inline OffsetFit fit_offsets(std::span<const Point> coords, double quantum) {
  std::vector<double> xs, ys;
  for (const Point& p : coords) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  OffsetFit f;
  std::tie(f.x, f.rbar_x) = fit_offset_1d(xs, quantum);
  std::tie(f.y, f.rbar_y) = fit_offset_1d(ys, quantum);
  return f;
}

struct GridExtent {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0; ///< grid frame
};

struct GridModel {
  int cluster = 1;
  double orientation_deg = 0.0;
  double quantum = 0.0;
  double offset_x = 0.0;
  double offset_y = 0.0;
  GridExtent extent;
};

/// Corners of one cluster in world coordinates with their provenance.
struct ClusterCorners {
  int cluster = 1;
  double orientation_deg = 0.0;
  std::vector<Point> corners;
  std::vector<std::string> building_ids;
  std::vector<std::size_t> corner_index;
};

struct CornerResidual {
  int cluster = 1;
  std::string building_id;
  std::size_t corner_index = 0;
  double dx = 0.0;       ///< per-axis residual, folded to [−q/2, q/2)
  double dy = 0.0;
  double distance = 0.0; ///< to the nearest grid intersection
};

struct FitSummary {
  std::vector<CornerResidual> residuals;
  double mean_abs_axis_residual = 0.0;
  double rms_distance = 0.0;
};

inline double fold_residual(double v, double quantum) {
  double r = circstats::fold_angle(v, quantum);
  if (r >= 0.5 * quantum) r -= quantum;
  return r;
}

struct GridFit {
  std::vector<GridModel> models;
  std::vector<OffsetFit> offsets;
  FitSummary summary;
};

/// Grid per cluster with the given offsets; extent is the bounding box of the
/// cluster's corners in its grid frame padded by one quantum.
inline GridFit build_grid_models(std::span<const ClusterCorners> clusters, double quantum,
                                 std::span<const OffsetFit> offsets) {
  if (!(quantum > 0.0)) throw ConfigError("grid models: quantum must be positive");
  if (offsets.size() != clusters.size()) throw InputError("grid models: one offset fit per cluster is required");
  GridFit fit;
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    const ClusterCorners& c = clusters[k];
    const auto coords = project_to_grid_axes(c.corners, c.orientation_deg);
    GridModel m;
    m.cluster = c.cluster;
    m.orientation_deg = c.orientation_deg;
    m.quantum = quantum;
    m.offset_x = offsets[k].x;
    m.offset_y = offsets[k].y;
    m.extent = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < coords.size(); ++i) {
      const Point& p = coords[i];
      m.extent.x_min = std::min(m.extent.x_min, p.x);
      m.extent.x_max = std::max(m.extent.x_max, p.x);
      m.extent.y_min = std::min(m.extent.y_min, p.y);
      m.extent.y_max = std::max(m.extent.y_max, p.y);
      CornerResidual r;
      r.cluster = c.cluster;
      r.building_id = i < c.building_ids.size() ? c.building_ids[i] : std::string{};
      r.corner_index = i < c.corner_index.size() ? c.corner_index[i] : i;
      r.dx = fold_residual(p.x - m.offset_x, quantum);
      r.dy = fold_residual(p.y - m.offset_y, quantum);
      r.distance = std::hypot(r.dx, r.dy);
      abs_sum += std::abs(r.dx) + std::abs(r.dy);
      sq_sum += r.distance * r.distance;
      ++count;
      fit.summary.residuals.push_back(std::move(r));
    }
    m.extent.x_min -= quantum;
    m.extent.x_max += quantum;
    m.extent.y_min -= quantum;
    m.extent.y_max += quantum;
    fit.models.push_back(m);
    fit.offsets.push_back(offsets[k]);
  }
  if (count > 0) {
    fit.summary.mean_abs_axis_residual = abs_sum / (2.0 * static_cast<double>(count));
    fit.summary.rms_distance = std::sqrt(sq_sum / static_cast<double>(count));
  }
  return fit;
}

/// Offsets fitted per cluster in its own frame, then grid models.
inline GridFit fit_grids(std::span<const ClusterCorners> clusters, double quantum) {
  std::vector<OffsetFit> offsets;
  for (const auto& c : clusters) offsets.push_back(fit_offsets(project_to_grid_axes(c.corners, c.orientation_deg), quantum));
  return build_grid_models(clusters, quantum, offsets);
}

/// Display-only shift of mod-90 orientations (keeps a cluster from being split
/// across the histogram's ends). Never used for fitting.
inline std::vector<double> histogram_rotation_for_plot(std::span<const double> orientations, double rotate = 45.0) {
  std::vector<double> out;
  out.reserve(orientations.size());
  for (double o : orientations) out.push_back(circstats::fold_angle(o + rotate, 90.0));
  return out;
}

// ---------------------------------------------------------------------------
// Full pipeline

struct GridfitOptions {
  quantogram::FrequencyGrid grid;
  quantogram::BoundaryOptions boundary;
  circstats::MixtureOptions mixture;
  bool simulate_boundary = true;
};

struct GridfitResult {
  std::optional<AssignmentResult> assignment; ///< empty for a single-building run
  std::vector<GridAssignment> assignments;
  std::vector<ClusterCorners> clusters;
  MeasurementSet compendium;
  quantogram::QuantogramCurve curve;
  std::optional<quantogram::BoundaryCurve> boundary;
  quantogram::PeakReport peak;
  std::vector<std::string> warnings;
};

/// Assignment, cluster frames, compendium quantogram and its peak. Grids are
/// fitted separately (fit_grids) so that several quanta can be compared.
inline GridfitResult analyse_buildings(std::span<const Building> buildings, const GridfitOptions& opt = {}) {
  if (buildings.empty()) throw InputError("gridfit: no buildings");
  opt.grid.validate();
  GridfitResult res;
  if (buildings.size() == 1) {
    const auto edges = building_edges(buildings);
    std::vector<double> scaled;
    for (const auto& e : edges) scaled.push_back(circstats::scale_to_circle(e.degrees, 90.0));
    const auto m = circstats::circular_mean_resultant(circstats::CircularSample(scaled));
    GridAssignment a;
    a.building_id = buildings[0].id;
    a.cluster = 1;
    for (const auto& e : edges) {
      a.edge_orientations.push_back(e.degrees);
      a.edge_components.push_back(1);
    }
    res.assignments.push_back(a);
    ClusterCorners c;
    c.cluster = 1;
    c.orientation_deg = circstats::unscale_from_circle(m.mean.value_or(0.0), 90.0);
    res.clusters.push_back(c);
    res.warnings.push_back("only one building: single-cluster run without a mixture fit");
  } else {
    res.assignment = assign_buildings(buildings, opt.mixture);
    res.assignments = res.assignment->assignments;
    for (int k = 1; k <= 2; ++k) {
      ClusterCorners c;
      c.cluster = k;
      c.orientation_deg = res.assignment->orientation_deg[static_cast<std::size_t>(k - 1)];
      res.clusters.push_back(c);
    }
  }
  for (std::size_t b = 0; b < buildings.size(); ++b) {
    const auto& a = res.assignments[b];
    if (!a.cluster) {
      res.warnings.push_back("building " + a.building_id + " is unassigned (edges split between grids)");
      continue;
    }
    ClusterCorners& c = res.clusters[static_cast<std::size_t>(*a.cluster - 1)];
    for (std::size_t i = 0; i < buildings[b].corners.size(); ++i) {
      c.corners.push_back(buildings[b].corners[i]);
      c.building_ids.push_back(buildings[b].id);
      c.corner_index.push_back(i);
    }
  }
  std::erase_if(res.clusters, [&](const ClusterCorners& c) {
    if (c.corners.empty()) res.warnings.push_back("cluster " + std::to_string(c.cluster) + " has no buildings");
    return c.corners.empty();
  });
  if (res.clusters.empty()) throw DegenerateError("gridfit: no building could be assigned to a grid");

  std::vector<std::vector<Point>> frames;
  for (const auto& c : res.clusters) frames.push_back(project_to_grid_axes(c.corners, c.orientation_deg));
  res.compendium = compendium_differences(frames);
  if (res.compendium.size() < 2) throw DegenerateError("gridfit: fewer than 2 coordinate differences");
  res.curve = quantogram::cosine_quantogram(res.compendium, opt.grid);
  if (opt.simulate_boundary) res.boundary = quantogram::simulate_boundary(res.compendium, opt.grid, opt.boundary);
  res.peak = quantogram::find_peak(res.curve, res.boundary ? &*res.boundary : nullptr, opt.grid);
  return res;
}

} // namespace quanta::gridfit
