#pragma once

// Result files for the quanta tool: JSON reports, CSV tables and the run
// manifest every result refers to.

#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "quanta/quanta.hpp"

namespace quanta::tool {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kManifestName = "manifest.json";

// ---------------------------------------------------------------------------
// Files

inline std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int{md[i]};
  return out.str();
}

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw InputError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw InputError("cannot write " + path(name).string());
    out << text;
  }

  void write_json(const std::string& name, const Json& j) const { write(name, j.dump(2) + "\n"); }

 private:
  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// Manifest

struct InputFile {
  std::string path;
  std::string sha256;
  std::size_t bytes = 0;
};

inline InputFile digest_input(const std::string& path) {
  const std::string bytes = read_bytes(path);
  return {path, sha256_hex(bytes), bytes.size()};
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

inline Json make_manifest(const std::string& command, const std::vector<std::string>& argv, const Json& config,
                          const std::vector<InputFile>& inputs, std::uint64_t seed) {
  Json j;
  j["tool"] = "quanta";
  j["version"] = kVersion;
  j["command"] = command;
  j["argv"] = argv;
  j["config"] = config;
  j["seed"] = seed;
  Json in = Json::array();
  for (const auto& f : inputs) in.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["inputs"] = in;
  j["created"] = utc_timestamp();
  return j;
}

/// Stamps a report with the manifest it belongs to.
inline Json with_manifest(Json body) {
  Json j;
  j["manifest"] = kManifestName;
  for (auto& [k, v] : body.items()) j[k] = std::move(v);
  return j;
}

// ---------------------------------------------------------------------------
// CSV

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) {
    out_ << "# manifest: " << kManifestName << "\n";
    row(header);
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << csv::escape(fields[i]);
    out_ << "\n";
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

inline std::string num(double v) { return csv::format(v); }

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

// ---------------------------------------------------------------------------
// Report conversions

namespace qg = quantogram;
namespace cs = circstats;

inline Json to_json(const qg::FrequencyGrid& g) {
  return {{"omega_min", g.omega_min}, {"omega_max", g.omega_max}, {"omega_step", g.step},
          {"roi", {g.roi_min, g.roi_max}}};
}

inline Json to_json(const qg::BoundaryOptions& b) {
  return {{"nsims", b.n_sims}, {"rank", b.rank}, {"jitter", b.jitter_fraction}, {"seed", b.seed}};
}

inline Json to_json(const qg::Peak& p) {
  return {{"frequency", p.frequency}, {"quantum", p.quantum}, {"height", p.height}, {"grid_index", p.index},
          {"inside_roi", p.inside_roi}};
}

inline Json to_json(const qg::PeakReport& r, std::size_t max_secondary = 10) {
  Json j;
  j["primary"] = r.primary ? to_json(*r.primary) : Json(nullptr);
  j["exceeds_boundary"] = r.exceeds_boundary;
  j["boundary_height"] = optional_json(r.boundary_height);
  j["error_range"] = optional_json(r.error_range);
  j["dominant"] = r.dominant ? to_json(*r.dominant) : Json(nullptr);
  j["dominant_outside_roi"] = r.dominant_outside_roi();
  Json sec = Json::array();
  for (std::size_t i = 0; i < r.secondary.size() && i < max_secondary; ++i) sec.push_back(to_json(r.secondary[i]));
  j["secondary"] = sec;
  j["diagnostic"] = r.diagnostic;
  return j;
}

inline Json to_json(const qg::ErrorRange& e) {
  return {{"half_width", e.half_width}, {"lower", e.lower}, {"upper", e.upper}, {"replicates_used", e.n_used},
          {"replicates_dropped", e.n_dropped}};
}

inline std::string curve_csv(const qg::QuantogramCurve& c) {
  CsvWriter w({"omega", "quantum", "height"});
  for (std::size_t j = 0; j < c.frequencies.size(); ++j)
    w.row({num(c.frequencies[j]), num(1.0 / c.frequencies[j]), num(c.heights[j])});
  return w.str();
}

inline std::string boundary_csv(const qg::BoundaryCurve& b) {
  CsvWriter w({"omega", "boundary"});
  for (std::size_t j = 0; j < b.frequencies.size(); ++j) w.row({num(b.frequencies[j]), num(b.boundary_heights[j])});
  return w.str();
}

inline std::string values_csv(const MeasurementSet& m) {
  CsvWriter w({"value_m", "source"});
  for (std::size_t i = 0; i < m.size(); ++i) w.row({num(m.values[i]), m.tags[i]});
  return w.str();
}

inline Json to_json(const cs::VonMisesParams& p) { return {{"mu", p.mu}, {"kappa", p.kappa}}; }

inline Json to_json(const cs::MixtureFit& m, bool with_trace = false) {
  Json j;
  j["kind"] = m.kind == cs::MixtureKind::UniformVonMises ? "uniform+vonMises" : "vonMises+vonMises";
  j["weights"] = {m.weights[0], m.weights[1]};
  Json comps = Json::array();
  for (const auto& c : m.components) comps.push_back(to_json(c));
  j["components"] = comps;
  j["log_likelihood"] = m.log_likelihood;
  j["converged"] = m.converged;
  j["iterations"] = m.iterations;
  j["degenerate_component"] = m.degenerate_component;
  j["winning_start"] = m.restart;
  if (with_trace) j["log_likelihood_trace"] = m.log_likelihood_trace;
  return j;
}

inline Json to_json(const cs::AxialityVerdict& a) {
  return {{"classification", cs::to_string(a.classification)}, {"r2", a.r2}, {"r4", a.r4}};
}

inline Json to_json(const postholes::PerpReport& r) {
  Json j;
  j["grid_orientation_deg"] = r.grid_orientation_deg;
  j["gridded_fraction"] = r.gridded_fraction;
  j["perpendicular"] = r.perpendicular;
  j["axiality"] = to_json(r.axiality);
  j["mixture"] = to_json(r.mixture);
  return j;
}

inline std::string points_csv(const PointPattern& p) {
  CsvWriter w({"id", "x", "y", "accepted", "gridded", "cluster"});
  for (std::size_t i = 0; i < p.size(); ++i)
    w.row({p.ids[i], num(p.points[i].x), num(p.points[i].y), p.accepted[i] ? "1" : "0", p.gridded[i] ? "1" : "0",
           p.cluster[i] ? std::to_string(*p.cluster[i]) : ""});
  return w.str();
}

inline std::string plain_points_csv(const PointPattern& p) {
  CsvWriter w({"id", "x", "y"});
  for (std::size_t i = 0; i < p.size(); ++i) w.row({p.ids[i], num(p.points[i].x), num(p.points[i].y)});
  return w.str();
}

inline std::string histogram_csv(const std::vector<postholes::HistogramBin>& bins) {
  CsvWriter w({"lo_deg", "hi_deg", "count"});
  for (const auto& b : bins) w.row({num(b.lo), num(b.hi), std::to_string(b.count)});
  return w.str();
}

inline Json to_json(const rasterclean::Clump& c) {
  return {{"id", c.id},
          {"first_row", c.first_row},
          {"first_col", c.first_col},
          {"pixel_count", c.pixel_count},
          {"centroid", {c.centroid.x, c.centroid.y}},
          {"bbox", {c.bbox_width, c.bbox_height}},
          {"elongation", c.elongation},
          {"circularity", c.circularity}};
}

inline Json to_json(const rasterclean::CleanReport& r) {
  Json kept = Json::array();
  for (const auto& c : r.kept) kept.push_back(to_json(c));
  Json removed = Json::array();
  Json counts = Json::object();
  for (const auto& c : r.removed) {
    Json e = to_json(c.clump);
    const std::string reason = rasterclean::to_string(c.reason);
    e["reason"] = reason;
    removed.push_back(e);
    counts[reason] = counts.value(reason, 0) + 1;
  }
  return {{"kept_count", r.kept.size()}, {"removed_count", r.removed.size()}, {"removed_by_reason", counts},
          {"kept", kept}, {"removed", removed}};
}

inline Json to_json(const rasterclean::FilterRules& r) {
  return {{"max_elongation", r.max_elongation},
          {"min_circularity", r.min_circularity},
          {"line_band_width", r.line_band_width},
          {"isolation_radius", r.isolation_radius},
          {"min_area", r.min_area},
          {"max_area", r.max_area}};
}

inline Json to_json(const gridfit::GridAssignment& a) {
  return {{"building", a.building_id},
          {"cluster", optional_json(a.cluster)},
          {"edge_orientations_deg", a.edge_orientations},
          {"edge_components", a.edge_components}};
}

inline Json to_json(const gridfit::GridModel& m) {
  return {{"cluster", m.cluster},
          {"orientation_deg", m.orientation_deg},
          {"quantum", m.quantum},
          {"offset_x", m.offset_x},
          {"offset_y", m.offset_y},
          {"extent", {{"x_min", m.extent.x_min}, {"x_max", m.extent.x_max}, {"y_min", m.extent.y_min},
                      {"y_max", m.extent.y_max}}}};
}

inline Json to_json(const gridfit::GridFit& f) {
  Json models = Json::array();
  for (std::size_t k = 0; k < f.models.size(); ++k) {
    Json m = to_json(f.models[k]);
    m["rbar_x"] = f.offsets[k].rbar_x;
    m["rbar_y"] = f.offsets[k].rbar_y;
    models.push_back(m);
  }
  Json res = Json::array();
  for (const auto& r : f.summary.residuals)
    res.push_back({{"cluster", r.cluster}, {"building", r.building_id}, {"corner_index", r.corner_index},
                   {"dx", r.dx}, {"dy", r.dy}, {"distance", r.distance}});
  return {{"models", models},
          {"summary", {{"mean_abs_axis_residual", f.summary.mean_abs_axis_residual},
                       {"rms_distance", f.summary.rms_distance}}},
          {"residuals", res}};
}

} // namespace quanta::tool
