#pragma once

// Post-hole point patterns: isolated-point rejection, nearest-neighbour
// directions, detection of perpendicular structure with a uniform + von Mises
// mixture on mod-90 orientations, per-point gridding labels and single-linkage
// spatial clusters.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "quanta/circstats.hpp"
#include "quanta/csv.hpp"
#include "quanta/error.hpp"
#include "quanta/geometry.hpp"

namespace quanta::postholes {

/// Points table whose first columns are `id,x,y`; further columns (such as
/// the labels this tool writes) are ignored. Ids must be unique.
inline PointPattern parse_points(const csv::Table& t, const std::string& source = "points") {
  if (t.header.size() < 3 || t.header[0] != "id" || t.header[1] != "x" || t.header[2] != "y")
    throw InputError(source + ": header must start with 'id,x,y'");
  if (t.rows.empty()) throw ValidationError(source + ": no data rows");
  PointPattern p;
  std::set<std::string> seen;
  for (const auto& row : t.rows) {
    const auto& f = row.fields;
    if (!seen.insert(f[0]).second)
      throw ValidationError(source + ": line " + std::to_string(row.line) + ": duplicate id " + f[0]);
    p.add({csv::parse_number(f[1], row.line, source), csv::parse_number(f[2], row.line, source)}, f[0]);
  }
  return p;
}

inline PointPattern load_points(const std::string& path) { return parse_points(csv::read_file(path), path); }

/// Labels points with fewer than `min_neighbours` other points within
/// `radius` as rejected. One pass against the original pattern.
inline PointPattern reject_isolated(PointPattern pattern, double radius, std::size_t min_neighbours = 1) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("isolation radius must be positive");
  pattern.validate();
  const std::size_t n = pattern.size();
  std::vector<bool> accepted(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < n && count < min_neighbours; ++j)
      if (j != i && distance(pattern.points[i], pattern.points[j]) <= radius) ++count;
    accepted[i] = count >= min_neighbours;
  }
  for (std::size_t i = 0; i < n; ++i) {
    pattern.accepted[i] = accepted[i];
    if (!accepted[i]) {
      pattern.gridded[i] = false;
      pattern.cluster[i].reset();
    }
  }
  return pattern;
}

struct NearestNeighbourDirections {
  std::vector<std::size_t> point_index; ///< which pattern point each direction belongs to
  std::vector<double> degrees;          ///< bearing to the nearest neighbour, [0, 360)
  std::vector<double> distances;
};

/// Bearing (counter-clockwise from +x) from each accepted point to its
/// nearest accepted neighbour. Equidistant neighbours resolve to the one with
/// the lowest (x, y).
inline NearestNeighbourDirections nn_directions(const PointPattern& pattern) {
  pattern.validate();
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < pattern.size(); ++i)
    if (pattern.accepted[i]) active.push_back(i);
  if (active.size() < 2) throw InputError("nearest-neighbour directions: at least 2 accepted points are required");

  NearestNeighbourDirections out;
  for (std::size_t i : active) {
    const Point& p = pattern.points[i];
    std::size_t best = i;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j : active) {
      if (j == i) continue;
      const Point& q = pattern.points[j];
      const double d = distance(p, q);
      if (d == 0.0)
        throw GeometryError("coincident points " + pattern.ids[i] + " and " + pattern.ids[j] +
                            ": nearest-neighbour direction is undefined");
      const Point& b = pattern.points[best];
      if (d < best_d || (d == best_d && std::tie(q.x, q.y) < std::tie(b.x, b.y))) {
        best = j;
        best_d = d;
      }
    }
    const Point& q = pattern.points[best];
    out.point_index.push_back(i);
    out.degrees.push_back(circstats::fold_angle(circstats::rad_to_deg(std::atan2(q.y - p.y, q.x - p.x)), 360.0));
    out.distances.push_back(best_d);
  }
  return out;
}

struct PerpOptions {
  circstats::MixtureOptions mixture;
  circstats::AxialityThresholds axiality;
};

struct PerpReport {
  circstats::MixtureFit mixture;          ///< uniform + von Mises on scaled mod-90 orientations
  circstats::AxialityVerdict axiality;    ///< on the raw directions
  double grid_orientation_deg = 0.0;      ///< von Mises mode mapped back to [0, 90)
  double gridded_fraction = 0.0;          ///< von Mises component weight
  bool perpendicular = false;             ///< claim stands only with a perpendicular verdict
  std::vector<double> folded_deg;         ///< the mod-90 orientations that were fitted
};

/// Orientation on the fitting circle for a raw direction in degrees.
inline double direction_to_circle(double degrees) {
  return circstats::scale_to_circle(circstats::fold_angle(degrees, 90.0), 90.0);
}

inline PerpReport perpendicularity_analysis(const std::vector<double>& directions_deg, const PerpOptions& opt = {}) {
  if (directions_deg.size() < 5) throw InputError("perpendicularity analysis: at least 5 directions are required");
  PerpReport r;
  std::vector<double> scaled;
  std::vector<double> raw;
  for (double d : directions_deg) {
    const double folded = circstats::fold_angle(d, 90.0);
    r.folded_deg.push_back(folded);
    scaled.push_back(circstats::scale_to_circle(folded, 90.0));
    raw.push_back(circstats::deg_to_rad(circstats::fold_angle(d, 360.0)));
  }
  r.mixture = circstats::fit_mixture(circstats::CircularSample(scaled), circstats::MixtureKind::UniformVonMises,
                                     opt.mixture);
  r.axiality = circstats::axiality_test(circstats::CircularSample::wrapped(raw), opt.axiality);
  r.grid_orientation_deg = circstats::unscale_from_circle(r.mixture.components[0].mu, 90.0);
  r.gridded_fraction = r.mixture.vonmises_weight();
  r.perpendicular = r.axiality.classification == circstats::Axiality::Perpendicular;
  return r;
}

/// Posterior probability that a direction belongs to the von Mises (grid)
/// component of the fitted mixture.
inline double gridded_responsibility(const PerpReport& report, double direction_deg) {
  return report.mixture.posterior(direction_to_circle(direction_deg))[1];
}

/// Points whose von Mises responsibility exceeds `threshold` become gridded;
/// points without a direction (rejected) are background.
inline PointPattern classify_points(PointPattern pattern, const NearestNeighbourDirections& directions,
                                    const PerpReport& report, double threshold = 0.5) {
  if (!report.mixture.converged)
    throw DegenerateError("classify points: the orientation mixture did not converge");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("classification threshold must lie in [0, 1]");
  pattern.validate();
  std::fill(pattern.gridded.begin(), pattern.gridded.end(), false);
  for (auto& c : pattern.cluster) c.reset();
  for (std::size_t k = 0; k < directions.point_index.size(); ++k) {
    const std::size_t i = directions.point_index.at(k);
    if (i >= pattern.size()) throw InputError("classify points: direction refers to a missing point");
    pattern.gridded[i] = pattern.accepted[i] && gridded_responsibility(report, directions.degrees[k]) > threshold;
  }
  return pattern;
}

/// Median nearest-neighbour distance among gridded points, times `factor`.
inline double default_link_distance(const PointPattern& pattern, double factor = 3.0) {
  std::vector<double> nn;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (!pattern.gridded[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pattern.size(); ++j)
      if (j != i && pattern.gridded[j]) best = std::min(best, distance(pattern.points[i], pattern.points[j]));
    if (std::isfinite(best) && best > 0.0) nn.push_back(best);
  }
  if (nn.empty()) throw DegenerateError("link distance: fewer than 2 gridded points");
  std::sort(nn.begin(), nn.end());
  const std::size_t m = nn.size() / 2;
  const double median = nn.size() % 2 ? nn[m] : 0.5 * (nn[m - 1] + nn[m]);
  return factor * median;
}

/// Median nearest-neighbour distance over all points, times `factor`.
inline double default_isolation_radius(const PointPattern& pattern, double factor = 4.0) {
  std::vector<double> nn;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pattern.size(); ++j)
      if (j != i) best = std::min(best, distance(pattern.points[i], pattern.points[j]));
    if (std::isfinite(best) && best > 0.0) nn.push_back(best);
  }
  if (nn.empty()) throw DegenerateError("isolation radius: fewer than 2 distinct points");
  std::sort(nn.begin(), nn.end());
  const std::size_t m = nn.size() / 2;
  return factor * (nn.size() % 2 ? nn[m] : 0.5 * (nn[m - 1] + nn[m]));
}

namespace detail {

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

} // namespace detail

/// Single-linkage components of the gridded points ("connected if within
/// link distance"). Components below `min_cluster_size` stay unassigned;
/// cluster ids run 1, 2, ... by size descending, ties to the leftmost point.
inline PointPattern spatial_cluster(PointPattern pattern, double link_distance, std::size_t min_cluster_size = 5) {
  if (!(link_distance > 0.0) || !std::isfinite(link_distance)) throw ConfigError("link distance must be positive");
  pattern.validate();
  std::vector<std::size_t> g;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    pattern.cluster[i].reset();
    if (pattern.gridded[i]) g.push_back(i);
  }
  detail::DisjointSet ds(g.size());
  for (std::size_t a = 0; a < g.size(); ++a)
    for (std::size_t b = a + 1; b < g.size(); ++b)
      if (distance(pattern.points[g[a]], pattern.points[g[b]]) <= link_distance) ds.unite(a, b);

  struct Component {
    std::vector<std::size_t> members;
    Point leftmost{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  };
  std::vector<Component> comps;
  std::vector<std::optional<std::size_t>> slot(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    const std::size_t root = ds.find(a);
    if (!slot[root]) {
      slot[root] = comps.size();
      comps.emplace_back();
    }
    Component& c = comps[*slot[root]];
    c.members.push_back(g[a]);
    const Point& p = pattern.points[g[a]];
    if (std::tie(p.x, p.y) < std::tie(c.leftmost.x, c.leftmost.y)) c.leftmost = p;
  }
  std::sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
    return std::tie(a.leftmost.x, a.leftmost.y) < std::tie(b.leftmost.x, b.leftmost.y);
  });
  int next = 1;
  for (const auto& c : comps) {
    if (c.members.size() < min_cluster_size) continue;
    for (std::size_t i : c.members) pattern.cluster[i] = next;
    ++next;
  }
  return pattern;
}

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

/// Histogram of orientations folded into [0, modulus) after an optional
/// display rotation.
inline std::vector<HistogramBin> orientation_histogram(const std::vector<double>& degrees, double bin_width = 5.0,
                                                       double modulus = 90.0, double rotate = 0.0) {
  if (!(bin_width > 0.0) || bin_width > modulus) throw ConfigError("histogram bin width must lie in (0, modulus]");
  const auto nbins = static_cast<std::size_t>(std::ceil(modulus / bin_width - 1e-9));
  std::vector<HistogramBin> bins(nbins);
  for (std::size_t b = 0; b < nbins; ++b) {
    bins[b].lo = static_cast<double>(b) * bin_width;
    bins[b].hi = std::min(modulus, static_cast<double>(b + 1) * bin_width);
  }
  for (double d : degrees) {
    const double v = circstats::fold_angle(d + rotate, modulus);
    const auto b = std::min(nbins - 1, static_cast<std::size_t>(v / bin_width));
    ++bins[b].count;
  }
  return bins;
}

} // namespace quanta::postholes
