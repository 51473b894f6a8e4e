#pragma once

// Minimal SVG figures in the style of the quantogram and plan plots:
// solid data curve, dotted comparison boundary, dotted ROI delimiters, a
// solid line at the chosen peak; plans with triangle/circle markers.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "quanta/quanta.hpp"

namespace quanta::tool::svg {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline const char* cluster_colour(int k) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};
  return k <= 0 ? "#7f7f7f" : palette[(k - 1) % 7];
}

class Canvas {
 public:
  Canvas(double width, double height) : w_(width), h_(height) {}

  void line(double x1, double y1, double x2, double y2, const std::string& style) {
    body_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2) << "\" y2=\"" << fmt(y2)
          << "\" " << style << "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& style) {
    body_ << "<polyline fill=\"none\" " << style << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) body_ << (i ? " " : "") << fmt(pts[i].first) << "," << fmt(pts[i].second);
    body_ << "\"/>\n";
  }

  void circle(double cx, double cy, double r, const std::string& style) {
    body_ << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"" << fmt(r) << "\" " << style << "/>\n";
  }

  void triangle(double cx, double cy, double r, const std::string& style) {
    body_ << "<polygon points=\"" << fmt(cx) << "," << fmt(cy - r) << " " << fmt(cx - 0.87 * r) << ","
          << fmt(cy + 0.5 * r) << " " << fmt(cx + 0.87 * r) << "," << fmt(cy + 0.5 * r) << "\" " << style << "/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& style) {
    body_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
          << "\" " << style << "/>\n";
  }

  void text(double x, double y, const std::string& s, const std::string& anchor = "middle", int size = 12) {
    std::string esc;
    for (char c : s) {
      if (c == '<') esc += "&lt;";
      else if (c == '>') esc += "&gt;";
      else if (c == '&') esc += "&amp;";
      else esc += c;
    }
    body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-family=\"sans-serif\" font-size=\"" << size
          << "\" text-anchor=\"" << anchor << "\">" << esc << "</text>\n";
  }

  std::string str(const std::string& comment = {}) const {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (!comment.empty()) out << "<!-- " << comment << " -->\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w_) << "\" height=\"" << fmt(h_)
        << "\" viewBox=\"0 0 " << fmt(w_) << " " << fmt(h_) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  double w_, h_;
  std::ostringstream body_;
};

/// Maps data coordinates into a pixel box; `flip_y` puts larger y at the top.
struct Frame {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  double left = 60, top = 20, width = 600, height = 360;
  bool flip_y = true;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * width; }
  double py(double y) const {
    const double t = (y - y0) / (y1 - y0);
    return flip_y ? top + (1.0 - t) * height : top + t * height;
  }

  /// Equal scale on both axes, centred in the box.
  static Frame equal_aspect(double x0, double x1, double y0, double y1, double left, double top, double width,
                            double height, bool flip_y = true) {
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    const double s = std::min(width / (x1 - x0), height / (y1 - y0));
    const double cx = 0.5 * (x0 + x1);
    const double cy = 0.5 * (y0 + y1);
    const double hw = 0.5 * width / s;
    const double hh = 0.5 * height / s;
    return {cx - hw, cx + hw, cy - hh, cy + hh, left, top, width, height, flip_y};
  }
};

inline double nice_step(double span, int target = 6) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

inline std::string tick(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return csv::format(r == 0.0 ? 0.0 : r);
}

inline void axes(Canvas& c, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  const std::string axis = "stroke=\"black\" stroke-width=\"1\"";
  c.rect(f.left, f.top, f.width, f.height, "fill=\"none\" " + axis);
  const double xs = nice_step(f.x1 - f.x0);
  for (double v = std::ceil(f.x0 / xs) * xs; v <= f.x1 + 1e-12; v += xs) {
    const double x = f.px(v);
    c.line(x, f.top + f.height, x, f.top + f.height + 4, axis);
    c.text(x, f.top + f.height + 16, tick(v), "middle", 10);
  }
  const double ys = nice_step(f.y1 - f.y0);
  for (double v = std::ceil(f.y0 / ys) * ys; v <= f.y1 + 1e-12; v += ys) {
    const double y = f.py(v);
    c.line(f.left - 4, y, f.left, y, axis);
    c.text(f.left - 6, y + 3, tick(v), "end", 10);
  }
  c.text(f.left + f.width / 2, f.top + f.height + 34, xlabel);
  c.text(14, f.top + f.height / 2, ylabel, "middle");
}

// ---------------------------------------------------------------------------
// Figures

inline std::string quantogram_plot(const quantogram::QuantogramCurve& curve, const quantogram::BoundaryCurve* boundary,
                                   const quantogram::FrequencyGrid& grid, const quantogram::PeakReport& peak,
                                   const std::string& comment) {
  Canvas c(720, 440);
  Frame f;
  f.x0 = curve.frequencies.front();
  f.x1 = curve.frequencies.back();
  double lo = 0.0, hi = 0.0;
  for (double h : curve.heights) lo = std::min(lo, h), hi = std::max(hi, h);
  if (boundary)
    for (double h : boundary->boundary_heights) lo = std::min(lo, h), hi = std::max(hi, h);
  const double pad = 0.05 * std::max(hi - lo, 1e-9);
  f.y0 = lo - pad;
  f.y1 = hi + pad;
  axes(c, f, "frequency (1/m)", "");

  c.line(f.px(f.x0), f.py(0.0), f.px(f.x1), f.py(0.0), "stroke=\"#999\" stroke-width=\"0.5\"");
  const std::string dotted = "stroke=\"black\" stroke-width=\"0.8\" stroke-dasharray=\"1.5,3\"";
  c.line(f.px(grid.roi_min), f.top, f.px(grid.roi_min), f.top + f.height, dotted);
  c.line(f.px(grid.roi_max), f.top, f.px(grid.roi_max), f.top + f.height, dotted);

  std::vector<std::pair<double, double>> pts;
  if (boundary) {
    for (std::size_t j = 0; j < boundary->frequencies.size(); ++j)
      pts.emplace_back(f.px(boundary->frequencies[j]), f.py(boundary->boundary_heights[j]));
    c.polyline(pts, "stroke=\"black\" stroke-width=\"1\" stroke-dasharray=\"2,2\"");
    pts.clear();
  }
  for (std::size_t j = 0; j < curve.frequencies.size(); ++j)
    pts.emplace_back(f.px(curve.frequencies[j]), f.py(curve.heights[j]));
  c.polyline(pts, "stroke=\"black\" stroke-width=\"1.2\"");

  if (peak.primary) {
    const double x = f.px(peak.primary->frequency);
    c.line(x, f.top, x, f.top + f.height, "stroke=\"black\" stroke-width=\"1.5\"");
    c.text(x + 4, f.top + 14, "q = " + csv::format(std::round(peak.primary->quantum * 1000.0) / 1000.0) + " m", "start");
  }
  return c.str(comment);
}

inline void points_panel(Canvas& c, const Frame& f, const PointPattern& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = f.px(p.points[i].x);
    const double y = f.py(p.points[i].y);
    if (!p.accepted[i]) {
      c.circle(x, y, 3, "fill=\"none\" stroke=\"#555\"");
    } else if (p.gridded[i]) {
      const std::string col = cluster_colour(p.cluster[i].value_or(0));
      c.triangle(x, y, 4, "fill=\"" + col + "\" stroke=\"" + col + "\"");
    } else {
      c.triangle(x, y, 4, "fill=\"none\" stroke=\"#555\"");
    }
  }
}

inline std::string perp_plot(const PointPattern& p, const postholes::PerpReport& report,
                             const std::vector<postholes::HistogramBin>& bins, const std::string& comment) {
  Canvas c(980, 460);
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& q : p.points) x0 = std::min(x0, q.x), x1 = std::max(x1, q.x), y0 = std::min(y0, q.y), y1 = std::max(y1, q.y);
  const Frame pf = Frame::equal_aspect(x0, x1, y0, y1, 20, 20, 540, 400, !p.unitless);
  c.rect(pf.left, pf.top, pf.width, pf.height, "fill=\"none\" stroke=\"black\"");
  points_panel(c, pf, p);
  c.text(pf.left + pf.width / 2, 445, "triangles: accepted (filled = gridded, coloured by cluster); circles: rejected");

  Frame hf;
  hf.left = 640;
  hf.top = 20;
  hf.width = 310;
  hf.height = 380;
  hf.x0 = 0.0;
  hf.x1 = 90.0;
  std::size_t top = 1;
  for (const auto& b : bins) top = std::max(top, b.count);
  hf.y0 = 0.0;
  hf.y1 = 1.1 * static_cast<double>(top);
  axes(c, hf, "orientation mod 90 (deg)", "");
  for (const auto& b : bins)
    c.rect(hf.px(b.lo), hf.py(static_cast<double>(b.count)), hf.px(b.hi) - hf.px(b.lo),
           hf.py(0.0) - hf.py(static_cast<double>(b.count)), "fill=\"#ccc\" stroke=\"black\" stroke-width=\"0.5\"");
  // Fitted mixture density in counts per bin.
  if (!bins.empty() && !report.folded_deg.empty()) {
    const double width = bins.front().hi - bins.front().lo;
    const double scale = static_cast<double>(report.folded_deg.size()) * width / 90.0 * circstats::kTwoPi;
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k <= 180; ++k) {
      const double d = 0.5 * k;
      const double dens = std::exp(report.mixture.log_density(circstats::scale_to_circle(std::fmod(d, 90.0), 90.0)));
      pts.emplace_back(hf.px(d), hf.py(std::min(hf.y1, dens * scale)));
    }
    c.polyline(pts, "stroke=\"black\" stroke-width=\"1.2\"");
  }
  return c.str(comment);
}

inline std::string clean_plot(const rasterclean::BinaryRaster& r, const rasterclean::CleanReport& report,
                              const std::string& comment) {
  const double s = std::min(900.0 / static_cast<double>(r.width), 700.0 / static_cast<double>(r.height));
  const double w = s * static_cast<double>(r.width);
  const double h = s * static_cast<double>(r.height);
  Canvas c(w + 20, h + 40);
  c.rect(10, 10, w, h, "fill=\"none\" stroke=\"black\"");
  const double m = std::max(3.0, 2.0 * s);
  for (const auto& k : report.removed)
    c.circle(10 + s * (k.clump.centroid.x + 0.5), 10 + s * (k.clump.centroid.y + 0.5), m, "fill=\"none\" stroke=\"#555\"");
  for (const auto& k : report.kept)
    c.triangle(10 + s * (k.centroid.x + 0.5), 10 + s * (k.centroid.y + 0.5), m + 1, "fill=\"black\"");
  c.text(10 + w / 2, h + 32, "triangles: kept clumps; circles: removed clumps");
  return c.str(comment);
}

inline std::string gridfit_plot(std::span<const gridfit::Building> buildings,
                                const std::vector<gridfit::GridAssignment>& assignments, const gridfit::GridFit& fit,
                                const std::string& comment) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& b : buildings)
    for (const auto& q : b.corners) x0 = std::min(x0, q.x), x1 = std::max(x1, q.x), y0 = std::min(y0, q.y), y1 = std::max(y1, q.y);
  const double pad = fit.models.empty() ? 1.0 : fit.models.front().quantum;
  Canvas c(760, 720);
  const Frame f = Frame::equal_aspect(x0 - pad, x1 + pad, y0 - pad, y1 + pad, 20, 20, 700, 660);
  c.rect(f.left, f.top, f.width, f.height, "fill=\"none\" stroke=\"black\"");

  for (const auto& m : fit.models) {
    const double t = circstats::deg_to_rad(m.orientation_deg);
    auto world = [&](double u, double v) { return Point{u * std::cos(t) - v * std::sin(t), u * std::sin(t) + v * std::cos(t)}; };
    const std::string style = std::string("stroke=\"") + cluster_colour(m.cluster) + "\" stroke-width=\"0.6\" stroke-opacity=\"0.6\"";
    const double q = m.quantum;
    for (double u = m.offset_x + std::ceil((m.extent.x_min - m.offset_x) / q) * q; u <= m.extent.x_max + 1e-9; u += q) {
      const Point a = world(u, m.extent.y_min), b = world(u, m.extent.y_max);
      c.line(f.px(a.x), f.py(a.y), f.px(b.x), f.py(b.y), style);
    }
    for (double v = m.offset_y + std::ceil((m.extent.y_min - m.offset_y) / q) * q; v <= m.extent.y_max + 1e-9; v += q) {
      const Point a = world(m.extent.x_min, v), b = world(m.extent.x_max, v);
      c.line(f.px(a.x), f.py(a.y), f.px(b.x), f.py(b.y), style);
    }
  }
  for (std::size_t i = 0; i < buildings.size(); ++i) {
    const auto& b = buildings[i];
    const std::optional<int> k = i < assignments.size() ? assignments[i].cluster : std::nullopt;
    const std::string col = cluster_colour(k.value_or(0));
    std::vector<std::pair<double, double>> outline;
    for (const auto& q : b.corners) outline.emplace_back(f.px(q.x), f.py(q.y));
    if (b.corners.size() == 4) outline.push_back(outline.front());
    c.polyline(outline, "stroke=\"" + col + "\" stroke-width=\"1.2\"" + (k ? "" : " stroke-dasharray=\"4,2\""));
    for (const auto& q : b.corners)
      c.circle(f.px(q.x), f.py(q.y), 2.5, k ? "fill=\"" + col + "\"" : "fill=\"white\" stroke=\"" + col + "\"");
  }
  if (!fit.models.empty())
    c.text(f.left + f.width / 2, 708, "quantum " + csv::format(std::round(fit.models.front().quantum * 1000.0) / 1000.0) +
                                          " m; dashed outline = unassigned building");
  return c.str(comment);
}

} // namespace quanta::tool::svg
