#pragma once

// Candidate post-hole extraction from a binary plan raster: 8-connected clump
// labelling, shape features, and the three removal rules (long/thin or
// non-circular clumps, clumps on the lines those define, isolated clumps).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "quanta/error.hpp"
#include "quanta/geometry.hpp"

namespace quanta::rasterclean {

struct BinaryRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels; ///< row-major, 1 = ink
  std::optional<double> scale;      ///< metres per pixel

  BinaryRaster() = default;
  BinaryRaster(std::size_t w, std::size_t h) : width(w), height(h), pixels(w * h, 0) {
    if (w < 1 || h < 1) throw InputError("raster: width and height must be >= 1");
  }

  bool ink(std::size_t x, std::size_t y) const noexcept { return pixels[y * width + x] != 0; }
  void set(std::size_t x, std::size_t y, bool v = true) noexcept { pixels[y * width + x] = v ? 1 : 0; }

  std::size_t ink_count() const noexcept {
    return static_cast<std::size_t>(std::count(pixels.begin(), pixels.end(), std::uint8_t{1}));
  }
};

// ---------------------------------------------------------------------------
// PBM / PGM input

namespace detail {

inline std::string next_token(std::istream& in) {
  std::string tok;
  for (;;) {
    const int c = in.get();
    if (c == EOF) return tok;
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      if (!tok.empty()) return tok;
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
}

inline std::size_t parse_size(const std::string& tok, const char* what) {
  std::size_t v = 0;
  try {
    std::size_t used = 0;
    v = std::stoul(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
  } catch (const std::exception&) {
    throw InputError(std::string("raster: bad ") + what + " '" + tok + "'");
  }
  return v;
}

} // namespace detail

/// Reads P1/P4 (bitmap, 1 = black) and P2/P5 (greymap, values below half of
/// maxval count as ink).
inline BinaryRaster read_pnm(std::istream& in) {
  const std::string magic = detail::next_token(in);
  if (magic != "P1" && magic != "P2" && magic != "P4" && magic != "P5")
    throw InputError("raster: unsupported format '" + magic + "' (expected P1, P2, P4 or P5)");
  const std::size_t w = detail::parse_size(detail::next_token(in), "width");
  const std::size_t h = detail::parse_size(detail::next_token(in), "height");
  if (w < 1 || h < 1 || w > 100000 || h > 100000) throw InputError("raster: implausible dimensions");
  std::size_t maxval = 1;
  if (magic == "P2" || magic == "P5") {
    maxval = detail::parse_size(detail::next_token(in), "maxval");
    if (maxval < 1 || maxval > 65535) throw InputError("raster: maxval out of range");
  }
  BinaryRaster r(w, h);
  if (magic == "P1") {
    std::size_t i = 0;
    while (i < w * h) {
      const int c = in.get();
      if (c == EOF) throw InputError("raster: truncated P1 data");
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
      } else if (c == '0' || c == '1') {
        r.pixels[i++] = c == '1' ? 1 : 0;
      } else if (!std::isspace(c)) {
        throw InputError("raster: invalid character in P1 data");
      }
    }
  } else if (magic == "P2") {
    for (std::size_t i = 0; i < w * h; ++i) {
      const std::string tok = detail::next_token(in);
      if (tok.empty()) throw InputError("raster: truncated P2 data");
      const std::size_t v = detail::parse_size(tok, "pixel value");
      r.pixels[i] = 2 * v < maxval ? 1 : 0;
    }
  } else if (magic == "P4") {
    const std::size_t row_bytes = (w + 7) / 8;
    std::vector<unsigned char> row(row_bytes);
    for (std::size_t y = 0; y < h; ++y) {
      if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row_bytes)))
        throw InputError("raster: truncated P4 data");
      for (std::size_t x = 0; x < w; ++x) r.set(x, y, (row[x / 8] >> (7 - x % 8)) & 1);
    }
  } else {
    const std::size_t bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> buf(w * h * bytes);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw InputError("raster: truncated P5 data");
    for (std::size_t i = 0; i < w * h; ++i) {
      const std::size_t v = bytes == 1 ? buf[i] : (std::size_t{buf[2 * i]} << 8) | buf[2 * i + 1];
      r.pixels[i] = 2 * v < maxval ? 1 : 0;
    }
  }
  return r;
}

inline BinaryRaster read_pnm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return read_pnm(in);
}

/// Plain PBM (P1) output.
inline void write_pbm(std::ostream& out, const BinaryRaster& r) {
  out << "P1\n" << r.width << ' ' << r.height << '\n';
  for (std::size_t y = 0; y < r.height; ++y) {
    for (std::size_t x = 0; x < r.width; ++x) out << (r.ink(x, y) ? '1' : '0');
    out << '\n';
  }
}

/// Clears every pixel outside [x0, x1) × [y0, y1); coordinates are kept.
inline BinaryRaster crop(const BinaryRaster& r, std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) {
  if (!(x0 < x1 && y0 < y1)) throw ConfigError("crop: require x0 < x1 and y0 < y1");
  BinaryRaster out = r;
  for (std::size_t y = 0; y < r.height; ++y)
    for (std::size_t x = 0; x < r.width; ++x)
      if (x < x0 || x >= x1 || y < y0 || y >= y1) out.set(x, y, false);
  return out;
}

// ---------------------------------------------------------------------------
// Clumps

struct Clump {
  std::size_t id = 0;        ///< 1-based, in raster scan order of the first pixel
  std::size_t first_row = 0; ///< top-left pixel (first in raster scan order)
  std::size_t first_col = 0;
  std::size_t pixel_count = 0;
  Point centroid;            ///< pixel coordinates (x = column, y = row)
  std::size_t bbox_width = 0;
  std::size_t bbox_height = 0;
  double elongation = 1.0;   ///< sqrt of major/minor second-moment eigenvalue ratio
  double circularity = 0.0;  ///< 4π·area / perimeter²
  double axis_angle = 0.0;   ///< principal axis direction, radians
  std::size_t perimeter = 0; ///< exposed pixel edges
};

/// 8-connected components of ink pixels, ordered by their first pixel in
/// raster scan order. Second moments treat each pixel as a unit square.
inline std::vector<Clump> connected_components(const BinaryRaster& r) {
  const std::size_t w = r.width;
  const std::size_t h = r.height;
  std::vector<std::int32_t> label(w * h, -1);
  std::vector<Clump> clumps;
  std::vector<std::size_t> stack;

  auto ink_at = [&](long x, long y) {
    return x >= 0 && y >= 0 && x < static_cast<long>(w) && y < static_cast<long>(h) &&
           r.ink(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
  };

  for (std::size_t y0 = 0; y0 < h; ++y0) {
    for (std::size_t x0 = 0; x0 < w; ++x0) {
      if (!r.ink(x0, y0) || label[y0 * w + x0] >= 0) continue;
      const auto id = static_cast<std::int32_t>(clumps.size());
      Clump c;
      c.id = clumps.size() + 1;
      c.first_row = y0;
      c.first_col = x0;
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      std::size_t minx = x0, maxx = x0, miny = y0, maxy = y0;
      label[y0 * w + x0] = id;
      stack.assign(1, y0 * w + x0);
      while (!stack.empty()) {
        const std::size_t idx = stack.back();
        stack.pop_back();
        const auto x = static_cast<long>(idx % w);
        const auto y = static_cast<long>(idx / w);
        ++c.pixel_count;
        const auto fx = static_cast<double>(x);
        const auto fy = static_cast<double>(y);
        sx += fx;
        sy += fy;
        sxx += fx * fx;
        syy += fy * fy;
        sxy += fx * fy;
        minx = std::min(minx, static_cast<std::size_t>(x));
        maxx = std::max(maxx, static_cast<std::size_t>(x));
        miny = std::min(miny, static_cast<std::size_t>(y));
        maxy = std::max(maxy, static_cast<std::size_t>(y));
        if (!ink_at(x - 1, y)) ++c.perimeter;
        if (!ink_at(x + 1, y)) ++c.perimeter;
        if (!ink_at(x, y - 1)) ++c.perimeter;
        if (!ink_at(x, y + 1)) ++c.perimeter;
        for (long dy = -1; dy <= 1; ++dy) {
          for (long dx = -1; dx <= 1; ++dx) {
            if ((dx == 0 && dy == 0) || !ink_at(x + dx, y + dy)) continue;
            const std::size_t n = static_cast<std::size_t>(y + dy) * w + static_cast<std::size_t>(x + dx);
            if (label[n] >= 0) continue;
            label[n] = id;
            stack.push_back(n);
          }
        }
      }
      const auto n = static_cast<double>(c.pixel_count);
      c.centroid = {sx / n, sy / n};
      const double vxx = sxx / n - c.centroid.x * c.centroid.x + 1.0 / 12.0;
      const double vyy = syy / n - c.centroid.y * c.centroid.y + 1.0 / 12.0;
      const double vxy = sxy / n - c.centroid.x * c.centroid.y;
      const double mid = 0.5 * (vxx + vyy);
      const double rad = std::sqrt(0.25 * (vxx - vyy) * (vxx - vyy) + vxy * vxy);
      const double major = mid + rad;
      const double minor = std::max(mid - rad, 1e-12);
      c.elongation = std::max(1.0, std::sqrt(major / minor));
      c.axis_angle = 0.5 * std::atan2(2.0 * vxy, vxx - vyy);
      c.bbox_width = maxx - minx + 1;
      c.bbox_height = maxy - miny + 1;
      c.circularity = 4.0 * std::numbers::pi * n / (static_cast<double>(c.perimeter) * static_cast<double>(c.perimeter));
      clumps.push_back(c);
    }
  }
  return clumps;
}

// ---------------------------------------------------------------------------
// Filtering

enum class RemovalReason { LongThin, OnLineOfLongThin, Isolated, TooLarge, TooSmall };

inline std::string to_string(RemovalReason r) {
  switch (r) {
    case RemovalReason::LongThin: return "longThin";
    case RemovalReason::OnLineOfLongThin: return "onLineOfLongThin";
    case RemovalReason::Isolated: return "isolated";
    case RemovalReason::TooLarge: return "tooLarge";
    case RemovalReason::TooSmall: return "tooSmall";
  }
  return "longThin";
}

struct FilterRules {
  double max_elongation = 3.0;
  double min_circularity = 0.4;
  double line_band_width = 5.0;   ///< px either side of a long-thin clump's axis
  double isolation_radius = 100.0; ///< px; 0 disables the isolation rule
  std::size_t min_area = 1;
  std::size_t max_area = std::numeric_limits<std::size_t>::max();

  void validate() const {
    if (!(max_elongation >= 1.0)) throw ConfigError("max-elongation must be >= 1");
    if (!(min_circularity >= 0.0 && min_circularity <= 1.0)) throw ConfigError("min-circularity must lie in [0, 1]");
    if (!(line_band_width >= 0.0)) throw ConfigError("line band width must be >= 0");
    if (!(isolation_radius >= 0.0)) throw ConfigError("isolation-radius must be >= 0");
    if (min_area > max_area) throw ConfigError("area bounds: min exceeds max");
  }
};

struct RemovedClump {
  Clump clump;
  RemovalReason reason = RemovalReason::LongThin;
};

struct CleanReport {
  std::vector<Clump> kept;
  std::vector<RemovedClump> removed;
};

/// Rules run in a fixed order: (1) shape and area, (2) clumps whose centroid
/// lies within the band around the principal axis of any long-thin clump,
/// (3) clumps whose nearest surviving neighbour is beyond the isolation
/// radius. Output is in canonical clump order whatever the input order.
inline CleanReport filter_clumps(std::vector<Clump> clumps, const FilterRules& rules = {}) {
  rules.validate();
  std::sort(clumps.begin(), clumps.end(), [](const Clump& a, const Clump& b) {
    return std::tie(a.first_row, a.first_col) < std::tie(b.first_row, b.first_col);
  });
  const std::size_t n = clumps.size();
  std::vector<std::optional<RemovalReason>> reason(n);

  std::vector<std::size_t> long_thin;
  for (std::size_t i = 0; i < n; ++i) {
    const Clump& c = clumps[i];
    if (c.elongation > rules.max_elongation || c.circularity < rules.min_circularity) {
      reason[i] = RemovalReason::LongThin;
      long_thin.push_back(i);
    } else if (c.pixel_count < rules.min_area) {
      reason[i] = RemovalReason::TooSmall;
    } else if (c.pixel_count > rules.max_area) {
      reason[i] = RemovalReason::TooLarge;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (reason[i]) continue;
    for (std::size_t l : long_thin) {
      const Clump& line = clumps[l];
      const double dx = clumps[i].centroid.x - line.centroid.x;
      const double dy = clumps[i].centroid.y - line.centroid.y;
      const double off = std::abs(dx * std::sin(line.axis_angle) - dy * std::cos(line.axis_angle));
      if (off <= rules.line_band_width) {
        reason[i] = RemovalReason::OnLineOfLongThin;
        break;
      }
    }
  }

  if (rules.isolation_radius > 0.0) {
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < n; ++i)
      if (!reason[i]) survivors.push_back(i);
    std::vector<std::size_t> isolated;
    for (std::size_t i : survivors) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t j : survivors)
        if (j != i) nearest = std::min(nearest, distance(clumps[i].centroid, clumps[j].centroid));
      if (nearest > rules.isolation_radius) isolated.push_back(i);
    }
    for (std::size_t i : isolated) reason[i] = RemovalReason::Isolated;
  }

  CleanReport report;
  for (std::size_t i = 0; i < n; ++i) {
    if (reason[i]) report.removed.push_back({clumps[i], *reason[i]});
    else report.kept.push_back(clumps[i]);
  }
  return report;
}

/// One point per kept clump at its centroid, in metres when a scale is given.
inline PointPattern clumps_to_points(const CleanReport& report, std::optional<double> scale = std::nullopt) {
  if (report.kept.empty()) throw DegenerateError("clean: no clumps survived filtering");
  if (scale && !(*scale > 0.0)) throw ConfigError("raster scale must be positive");
  PointPattern p;
  const double s = scale.value_or(1.0);
  for (const auto& c : report.kept) p.add({c.centroid.x * s, c.centroid.y * s}, std::to_string(c.id));
  p.unitless = !scale.has_value();
  return p;
}

} // namespace quanta::rasterclean
