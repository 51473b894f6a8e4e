#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "quanta/error.hpp"

namespace quanta {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(const Point& a, const Point& b) noexcept { return std::hypot(b.x - a.x, b.y - a.y); }

/// Planar points with per-point labels. `unitless` marks pixel coordinates
/// that were not scaled to metres.
struct PointPattern {
  std::vector<Point> points;
  std::vector<std::string> ids;
  std::vector<bool> accepted;                ///< false = rejected as isolated
  std::vector<bool> gridded;                 ///< part of the aligned grid structure
  std::vector<std::optional<int>> cluster;   ///< 1-based spatial cluster, gridded points only
  bool unitless = false;

  std::size_t size() const noexcept { return points.size(); }

  void add(Point p, std::string id) {
    points.push_back(p);
    ids.push_back(std::move(id));
    accepted.push_back(true);
    gridded.push_back(false);
    cluster.push_back(std::nullopt);
  }

  void validate() const {
    const std::size_t n = points.size();
    if (ids.size() != n || accepted.size() != n || gridded.size() != n || cluster.size() != n)
      throw ValidationError("point pattern: label arrays do not match the point count");
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y))
        throw ValidationError("point pattern: point " + ids[i] + " has non-finite coordinates");
      if (cluster[i] && !gridded[i])
        throw ValidationError("point pattern: point " + ids[i] + " has a cluster but is not gridded");
    }
  }

  static PointPattern from_points(const std::vector<Point>& pts) {
    PointPattern p;
    for (std::size_t i = 0; i < pts.size(); ++i) p.add(pts[i], std::to_string(i + 1));
    return p;
  }
};

} // namespace quanta
