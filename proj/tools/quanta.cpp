// quanta: command-line front end for quantogram, post-hole perpendicularity,
// two-grid fitting and plan cleaning.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "output.hpp"
#include "svg.hpp"

namespace {

using namespace quanta;
using tool::Json;
namespace qg = quanta::quantogram;
namespace ms = quanta::measurements;
namespace ph = quanta::postholes;
namespace rc = quanta::rasterclean;
namespace gf = quanta::gridfit;

// ---------------------------------------------------------------------------
// Shared flags

struct GridFlags {
  double omega_min = qg::FrequencyGrid{}.omega_min;
  double omega_max = qg::FrequencyGrid{}.omega_max;
  double omega_step = qg::FrequencyGrid{}.step;
  std::string roi = "0.15:0.33";

  void add(CLI::App& app) {
    app.add_option("--omega-min", omega_min, "lowest frequency scanned (1/m)")->capture_default_str();
    app.add_option("--omega-max", omega_max, "highest frequency scanned (1/m)")->capture_default_str();
    app.add_option("--omega-step", omega_step, "frequency step (1/m)")->capture_default_str();
    app.add_option("--roi", roi, "region of interest as a:b in 1/m")->capture_default_str();
  }

  qg::FrequencyGrid resolve() const {
    qg::FrequencyGrid g;
    g.omega_min = omega_min;
    g.omega_max = omega_max;
    g.step = omega_step;
    const auto colon = roi.find(':');
    if (colon == std::string::npos) throw ConfigError("--roi must have the form a:b");
    try {
      std::size_t used = 0;
      g.roi_min = std::stod(roi.substr(0, colon), &used);
      if (used != colon) throw std::invalid_argument(roi);
      const std::string hi = roi.substr(colon + 1);
      g.roi_max = std::stod(hi, &used);
      if (used != hi.size()) throw std::invalid_argument(roi);
    } catch (const std::exception&) {
      throw ConfigError("--roi must have the form a:b with numeric a and b, got '" + roi + "'");
    }
    g.validate();
    return g;
  }
};

struct BoundaryFlags {
  std::size_t nsims = 499;
  std::size_t rank = 5;
  double jitter = 0.15;

  void add(CLI::App& app) {
    app.add_option("--nsims", nsims, "simulations for the comparison boundary")->capture_default_str();
    app.add_option("--rank", rank, "boundary = rank-th largest simulated height")->capture_default_str();
    app.add_option("--jitter", jitter, "multiplicative jitter fraction for simulations")->capture_default_str();
  }

  qg::BoundaryOptions resolve(std::uint64_t seed) const {
    qg::BoundaryOptions b;
    b.n_sims = nsims;
    b.rank = rank;
    b.jitter_fraction = jitter;
    b.seed = seed;
    b.validate();
    return b;
  }
};

struct RasterFlags {
  std::optional<double> scale;
  std::string crop;
  double max_elongation = 3.0;
  double min_circularity = 0.4;
  double line_band = 5.0;
  std::size_t min_area = 1;
  std::optional<std::size_t> max_area;

  void add(CLI::App& app) {
    app.add_option("--scale", scale, "metres per pixel");
    app.add_option("--crop", crop, "keep only x0,y0,x1,y1 (pixels)");
    app.add_option("--max-elongation", max_elongation, "remove clumps more elongated than this")->capture_default_str();
    app.add_option("--min-circularity", min_circularity, "remove clumps less circular than this")
        ->capture_default_str();
    app.add_option("--line-band", line_band, "half-width (px) of the band around long thin clumps")
        ->capture_default_str();
    app.add_option("--min-area", min_area, "smallest clump kept (pixels)")->capture_default_str();
    app.add_option("--max-area", max_area, "largest clump kept (pixels)");
  }

  std::optional<std::array<std::size_t, 4>> crop_box() const {
    if (crop.empty()) return std::nullopt;
    std::array<std::size_t, 4> box{};
    std::stringstream in(crop);
    std::string part;
    std::size_t k = 0;
    while (std::getline(in, part, ',')) {
      if (k == 4) throw ConfigError("--crop takes exactly four values x0,y0,x1,y1");
      try {
        std::size_t used = 0;
        const long v = std::stol(part, &used);
        if (used != part.size() || v < 0) throw std::invalid_argument(part);
        box[k++] = static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        throw ConfigError("--crop values must be non-negative integers, got '" + crop + "'");
      }
    }
    if (k != 4) throw ConfigError("--crop takes exactly four values x0,y0,x1,y1");
    if (!(box[0] < box[2] && box[1] < box[3])) throw ConfigError("--crop requires x0 < x1 and y0 < y1");
    return box;
  }

  rc::FilterRules rules(double isolation_radius) const {
    rc::FilterRules r;
    r.max_elongation = max_elongation;
    r.min_circularity = min_circularity;
    r.line_band_width = line_band;
    r.isolation_radius = isolation_radius;
    r.min_area = min_area;
    if (max_area) r.max_area = *max_area;
    r.validate();
    if (scale && !(*scale > 0.0)) throw ConfigError("--scale must be positive");
    crop_box();
    return r;
  }

  Json to_json(const rc::FilterRules& r) const {
    Json j = tool::to_json(r);
    j["scale"] = tool::optional_json(scale);
    j["crop"] = crop.empty() ? Json(nullptr) : Json(crop);
    if (!max_area) j["max_area"] = nullptr;
    return j;
  }
};

struct CommonFlags {
  std::uint64_t seed = kDefaultSeed;
  std::string out = "quanta-out";

  void add(CLI::App& app) {
    app.add_option("--seed", seed, "random seed")->capture_default_str();
    app.add_option("--out", out, "output directory")->capture_default_str();
  }
};

// Context shared by every command: where results go, how the run was invoked.
struct Run {
  std::string command;
  std::vector<std::string> argv;
  std::optional<tool::OutputDir> dir;

  void start(const std::string& out, const Json& config, const std::vector<std::string>& inputs, std::uint64_t seed) {
    std::vector<tool::InputFile> digests;
    for (const auto& p : inputs) digests.push_back(tool::digest_input(p));
    dir.emplace(out);
    dir->write_json(tool::kManifestName, tool::make_manifest(command, argv, config, digests, seed));
  }

  std::string svg_comment() const { return std::string("manifest: ") + tool::kManifestName; }
};

rc::BinaryRaster load_raster(const std::string& path, const RasterFlags& flags) {
  rc::BinaryRaster r = rc::read_pnm_file(path);
  if (const auto box = flags.crop_box()) {
    const auto& b = *box;
    if (b[2] > r.width || b[3] > r.height)
      throw ConfigError("--crop rectangle exceeds the raster (" + std::to_string(r.width) + "x" +
                        std::to_string(r.height) + ")");
    r = rc::crop(r, b[0], b[1], b[2], b[3]);
  }
  r.scale = flags.scale;
  return r;
}

bool is_raster(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".pbm" || ext == ".pgm" || ext == ".pnm";
}

// ---------------------------------------------------------------------------
// quantogram

struct QuantogramCmd {
  std::vector<std::string> inputs;
  std::string format = "auto";
  bool no_centre_lines = false;
  std::size_t nboot = 199;
  GridFlags grid;
  BoundaryFlags boundary;
  CommonFlags common;

  void add(CLI::App& app) {
    app.add_option("inputs", inputs, "measurement-line, building-dims or value_m CSV files")->required();
    app.add_option("--format", format, "auto, lines, dims or values")->capture_default_str();
    app.add_flag("--no-centre-lines", no_centre_lines, "use wall-face positions as given");
    app.add_option("--nboot", nboot, "bootstrap replicates for the error range (0 = skip)")->capture_default_str();
    grid.add(app);
    boundary.add(app);
    common.add(app);
  }

  int run(Run& ctx) const {
    const auto g = grid.resolve();
    const auto b = boundary.resolve(common.seed);
    std::optional<ms::TableFormat> fmt;
    if (format == "lines") fmt = ms::TableFormat::MeasurementLines;
    else if (format == "dims") fmt = ms::TableFormat::BuildingDims;
    else if (format == "values") fmt = ms::TableFormat::Values;
    else if (format != "auto") throw ConfigError("--format must be auto, lines, dims or values");
    if (nboot == 1) throw ConfigError("--nboot must be 0 or at least 2");

    Json config{{"inputs", inputs},  {"format", format}, {"centre_lines", !no_centre_lines},
                {"grid", tool::to_json(g)}, {"boundary", tool::to_json(b)}, {"nboot", nboot}};
    ctx.start(common.out, config, inputs, common.seed);

    std::vector<MeasurementSet> sets;
    for (const auto& path : inputs) {
      const auto t = ms::load_tables(path, fmt);
      switch (t.format) {
        case ms::TableFormat::MeasurementLines: sets.push_back(ms::lines_to_measurements(t.lines, !no_centre_lines)); break;
        case ms::TableFormat::BuildingDims: sets.push_back(ms::dims_to_measurements(t.dims)); break;
        case ms::TableFormat::Values: sets.push_back(t.values); break;
      }
    }
    const MeasurementSet data = ms::pool(sets);
    if (data.size() < 2) throw DegenerateError("quantogram: fewer than 2 measurements after preparation");

    const auto curve = qg::cosine_quantogram(data, g);
    const auto bound = qg::simulate_boundary(data, g, b);
    auto peak = qg::find_peak(curve, &bound, g);
    Json range = nullptr;
    if (peak.primary && nboot > 0) {
      try {
        qg::BootstrapOptions bo;
        bo.n_boot = nboot;
        bo.seed = common.seed;
        const auto e = qg::estimate_error_range(data, g, bo);
        peak.error_range = e.half_width;
        range = tool::to_json(e);
      } catch (const DegenerateError& e) {
        range = Json{{"unavailable", e.what()}};
      }
    }

    const auto& dir = *ctx.dir;
    dir.write("values.csv", tool::values_csv(data));
    dir.write("curve.csv", tool::curve_csv(curve));
    dir.write("boundary.csv", tool::boundary_csv(bound));
    Json report = tool::to_json(peak);
    report["n_measurements"] = data.size();
    report["error_range_detail"] = range;
    dir.write_json("peak.json", tool::with_manifest(report));
    dir.write("quantogram.svg", tool::svg::quantogram_plot(curve, &bound, g, peak, ctx.svg_comment()));

    if (peak.primary)
      std::cout << "peak: q = " << csv::format(peak.primary->quantum) << " m (omega " << csv::format(peak.primary->frequency)
                << "), height " << csv::format(peak.primary->height)
                << (peak.exceeds_boundary ? ", above boundary" : ", below boundary") << "\n";
    else
      std::cout << "no peak inside the region of interest\n";
    if (peak.dominant_outside_roi())
      std::cout << "dominant peak outside the region of interest: q = " << csv::format(peak.dominant->quantum) << " m\n";
    return 0;
  }
};

// ---------------------------------------------------------------------------
// perp

struct PerpCmd {
  std::string input;
  std::optional<double> isolation_radius;
  std::size_t min_neighbours = 1;
  std::optional<double> link_distance;
  std::size_t min_cluster = 5;
  double threshold = 0.5;
  double bin = 5.0;
  RasterFlags raster;
  CommonFlags common;

  void add(CLI::App& app) {
    app.add_option("input", input, "points CSV (id,x,y) or PBM/PGM plan")->required();
    app.add_option("--isolation-radius", isolation_radius,
                   "reject points with no neighbour within this distance (default 4 x median NN distance)");
    app.add_option("--min-neighbours", min_neighbours, "neighbours required within the isolation radius")
        ->capture_default_str();
    app.add_option("--link-distance", link_distance,
                   "single-linkage distance (default 3 x median NN distance of gridded points)");
    app.add_option("--min-cluster", min_cluster, "smallest spatial cluster")->capture_default_str();
    app.add_option("--threshold", threshold, "responsibility needed to call a point gridded")->capture_default_str();
    app.add_option("--bin", bin, "orientation histogram bin width (degrees)")->capture_default_str();
    raster.add(app);
    common.add(app);
  }

  int run(Run& ctx) const {
    if (isolation_radius && !(*isolation_radius > 0.0)) throw ConfigError("--isolation-radius must be positive");
    if (link_distance && !(*link_distance > 0.0)) throw ConfigError("--link-distance must be positive");
    if (min_neighbours < 1) throw ConfigError("--min-neighbours must be at least 1");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("--threshold must lie in [0, 1]");
    if (!(bin > 0.0 && bin <= 90.0)) throw ConfigError("--bin must lie in (0, 90]");
    const bool from_raster = is_raster(input);
    // Isolation is handled once, at the point stage.
    const rc::FilterRules rules = raster.rules(0.0);
    circstats::MixtureOptions mix;
    mix.seed = common.seed;

    Json config{{"input", input},
                {"isolation_radius", tool::optional_json(isolation_radius)},
                {"min_neighbours", min_neighbours},
                {"link_distance", tool::optional_json(link_distance)},
                {"min_cluster", min_cluster},
                {"threshold", threshold},
                {"bin", bin},
                {"mixture", {{"starts", mix.n_starts}, {"max_iter", mix.max_iter}, {"tol", mix.tol}}}};
    if (from_raster) config["raster"] = raster.to_json(rules);
    ctx.start(common.out, config, {input}, common.seed);
    const auto& dir = *ctx.dir;

    PointPattern pts;
    if (from_raster) {
      const auto r = load_raster(input, raster);
      const auto report = rc::filter_clumps(rc::connected_components(r), rules);
      dir.write_json("clean.json", tool::with_manifest(tool::to_json(report)));
      pts = rc::clumps_to_points(report, r.scale);
    } else {
      pts = ph::load_points(input);
    }
    if (pts.size() < 2) throw DegenerateError("perp: fewer than 2 points");

    const double iso = isolation_radius ? *isolation_radius : ph::default_isolation_radius(pts);
    pts = ph::reject_isolated(pts, iso, min_neighbours);
    const auto dirs = ph::nn_directions(pts);
    const auto report = ph::perpendicularity_analysis(dirs.degrees, {mix, {}});
    pts = ph::classify_points(pts, dirs, report, threshold);
    std::optional<double> link = link_distance;
    std::string cluster_note;
    if (!link) {
      try {
        link = ph::default_link_distance(pts);
      } catch (const DegenerateError& e) {
        cluster_note = e.what();
      }
    }
    if (link) pts = ph::spatial_cluster(pts, *link, min_cluster);
    const auto bins = ph::orientation_histogram(report.folded_deg, bin);

    std::size_t accepted = 0, gridded = 0;
    int clusters = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      accepted += pts.accepted[i];
      gridded += pts.gridded[i];
      if (pts.cluster[i]) clusters = std::max(clusters, *pts.cluster[i]);
    }
    dir.write("points.csv", tool::points_csv(pts));
    dir.write("histogram.csv", tool::histogram_csv(bins));
    Json j = tool::to_json(report);
    j["units"] = pts.unitless ? "pixels" : "metres";
    j["points"] = pts.size();
    j["accepted"] = accepted;
    j["gridded"] = gridded;
    j["clusters"] = clusters;
    j["isolation_radius_used"] = iso;
    j["link_distance_used"] = tool::optional_json(link);
    j["diagnostic"] = cluster_note;
    dir.write_json("perp.json", tool::with_manifest(j));
    dir.write("perp.svg", tool::svg::perp_plot(pts, report, bins, ctx.svg_comment()));

    std::cout << "axiality: " << circstats::to_string(report.axiality.classification) << " (r2 "
              << csv::format(report.axiality.r2) << ", r4 " << csv::format(report.axiality.r4) << ")\n"
              << "grid orientation " << csv::format(report.grid_orientation_deg) << " deg, gridded fraction "
              << csv::format(report.gridded_fraction) << "\n"
              << gridded << " of " << pts.size() << " points gridded, " << clusters << " clusters\n";
    return 0;
  }
};

// ---------------------------------------------------------------------------
// gridfit

struct GridfitCmd {
  std::string input;
  std::optional<double> quantum;
  bool no_boundary = false;
  GridFlags grid;
  BoundaryFlags boundary;
  CommonFlags common;

  void add(CLI::App& app) {
    app.add_option("input", input, "corners CSV (building,corner_index,x,y)")->required();
    app.add_option("--quantum", quantum, "also fit grids with this quantum for comparison (m)");
    app.add_flag("--no-boundary", no_boundary, "skip the simulated comparison boundary");
    grid.add(app);
    boundary.add(app);
    common.add(app);
  }

  int run(Run& ctx) const {
    if (quantum && !(*quantum > 0.0)) throw ConfigError("--quantum must be positive");
    gf::GridfitOptions opt;
    opt.grid = grid.resolve();
    opt.boundary = boundary.resolve(common.seed);
    opt.mixture.seed = common.seed;
    opt.simulate_boundary = !no_boundary;

    Json config{{"input", input},
                {"quantum", tool::optional_json(quantum)},
                {"grid", tool::to_json(opt.grid)},
                {"boundary", no_boundary ? Json(nullptr) : tool::to_json(opt.boundary)}};
    ctx.start(common.out, config, {input}, common.seed);
    const auto& dir = *ctx.dir;

    const auto buildings = gf::load_corners(input);
    const auto res = gf::analyse_buildings(buildings, opt);

    Json assign;
    assign["mixture"] = res.assignment ? tool::to_json(res.assignment->mixture) : Json(nullptr);
    assign["orientation_deg"] = Json::array();
    for (const auto& c : res.clusters) assign["orientation_deg"].push_back({{"cluster", c.cluster}, {"degrees", c.orientation_deg}});
    Json list = Json::array();
    Json unassigned = Json::array();
    for (const auto& a : res.assignments) {
      list.push_back(tool::to_json(a));
      if (!a.cluster) unassigned.push_back(a.building_id);
    }
    assign["assignments"] = list;
    assign["unassigned"] = unassigned;
    assign["warnings"] = res.warnings;
    dir.write_json("assignments.json", tool::with_manifest(assign));
    dir.write("compendium.csv", tool::values_csv(res.compendium));
    dir.write("curve.csv", tool::curve_csv(res.curve));
    if (res.boundary) dir.write("boundary.csv", tool::boundary_csv(*res.boundary));
    Json peak = tool::to_json(res.peak);
    peak["n_differences"] = res.compendium.size();
    dir.write_json("peak.json", tool::with_manifest(peak));
    dir.write("quantogram.svg", tool::svg::quantogram_plot(res.curve, res.boundary ? &*res.boundary : nullptr, opt.grid,
                                                           res.peak, ctx.svg_comment()));
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";

    std::vector<std::pair<std::string, double>> fits;
    if (res.peak.primary) fits.emplace_back("fitted", res.peak.primary->quantum);
    if (quantum) fits.emplace_back("override", *quantum);
    if (fits.empty())
      throw DegenerateError("gridfit: the compendium quantogram has no peak in the region of interest; "
                            "pass --quantum to fit grids anyway");

    Json grids = Json::array();
    for (const auto& [label, q] : fits) {
      const auto fit = gf::fit_grids(res.clusters, q);
      Json j = tool::to_json(fit);
      j["label"] = label;
      j["quantum"] = q;
      grids.push_back(j);
      dir.write("grid_" + label + ".svg", tool::svg::gridfit_plot(buildings, res.assignments, fit, ctx.svg_comment()));
      std::cout << label << " quantum " << csv::format(q) << " m: mean |axis residual| "
                << csv::format(fit.summary.mean_abs_axis_residual) << " m, rms distance "
                << csv::format(fit.summary.rms_distance) << " m\n";
    }
    Json out{{"fits", grids}};
    if (fits.size() == 2) {
      out["comparison"] = {
          {"fitted_quantum", fits[0].second},
          {"override_quantum", fits[1].second},
          {"fitted_mean_abs_axis_residual", grids[0]["summary"]["mean_abs_axis_residual"]},
          {"override_mean_abs_axis_residual", grids[1]["summary"]["mean_abs_axis_residual"]},
          {"fitted_is_better", grids[0]["summary"]["mean_abs_axis_residual"].get<double>() <
                                   grids[1]["summary"]["mean_abs_axis_residual"].get<double>()}};
    }
    dir.write_json("grids.json", tool::with_manifest(out));
    return 0;
  }
};

// ---------------------------------------------------------------------------
// clean

struct CleanCmd {
  std::string input;
  double isolation_radius = 100.0;
  RasterFlags raster;
  CommonFlags common;

  void add(CLI::App& app) {
    app.add_option("input", input, "PBM/PGM plan raster")->required();
    app.add_option("--isolation-radius", isolation_radius, "remove clumps with no neighbour within this (px; 0 = off)")
        ->capture_default_str();
    raster.add(app);
    common.add(app);
  }

  int run(Run& ctx) const {
    const rc::FilterRules rules = raster.rules(isolation_radius);
    ctx.start(common.out, Json{{"input", input}, {"rules", raster.to_json(rules)}}, {input}, common.seed);
    const auto& dir = *ctx.dir;
    const auto r = load_raster(input, raster);
    const auto report = rc::filter_clumps(rc::connected_components(r), rules);
    dir.write_json("clean.json", tool::with_manifest(tool::to_json(report)));
    dir.write("clean.svg", tool::svg::clean_plot(r, report, ctx.svg_comment()));
    const auto pts = rc::clumps_to_points(report, r.scale);
    dir.write("points.csv", tool::plain_points_csv(pts));
    std::cout << report.kept.size() << " clumps kept, " << report.removed.size() << " removed\n";
    return 0;
  }
};

// ---------------------------------------------------------------------------
// Entry

int dispatch(const std::vector<std::string>& args);

int replay(const std::string& manifest_path, const std::optional<std::string>& out, bool verify) {
  Json m;
  try {
    m = Json::parse(tool::read_bytes(manifest_path));
  } catch (const Json::exception& e) {
    throw InputError(manifest_path + ": not a valid manifest (" + e.what() + ")");
  }
  if (!m.contains("argv") || !m["argv"].is_array()) throw InputError(manifest_path + ": manifest has no argv");
  if (verify)
    for (const auto& f : m.value("inputs", Json::array())) {
      const auto now = tool::digest_input(f.at("path").get<std::string>());
      if (now.sha256 != f.at("sha256").get<std::string>())
        throw InputError("replay: input " + now.path + " changed since the manifest was written");
    }
  auto args = m["argv"].get<std::vector<std::string>>();
  if (out) {
    bool replaced = false;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--out") args[i + 1] = *out, replaced = true;
    for (auto& a : args)
      if (a.rfind("--out=", 0) == 0) a = "--out=" + *out, replaced = true;
    if (!replaced) {
      args.push_back("--out");
      args.push_back(*out);
    }
  }
  return dispatch(args);
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Quantum and grid detection for archaeological measurements and plans", "quanta"};
  app.set_version_flag("--version", tool::kVersion);
  app.require_subcommand(1);

  QuantogramCmd qcmd;
  PerpCmd pcmd;
  GridfitCmd gcmd;
  CleanCmd ccmd;
  std::string manifest;
  std::optional<std::string> replay_out;
  bool no_verify = false;
  qcmd.add(*app.add_subcommand("quantogram", "cosine quantogram with comparison boundary"));
  pcmd.add(*app.add_subcommand("perp", "perpendicular structure in a post-hole pattern"));
  gcmd.add(*app.add_subcommand("gridfit", "two-grid fitting from building corners"));
  ccmd.add(*app.add_subcommand("clean", "clump cleaning of a plan raster"));
  auto* rep = app.add_subcommand("replay", "re-run a command from its manifest");
  rep->add_option("manifest", manifest, "manifest.json of an earlier run")->required();
  rep->add_option("--out", replay_out, "output directory (default: the original one)");
  rep->add_flag("--no-verify", no_verify, "skip the input digest check");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ConfigError("").exit_code();
  }

  Run ctx;
  ctx.argv = args;
  try {
    if (app.got_subcommand("quantogram")) {
      ctx.command = "quantogram";
      return qcmd.run(ctx);
    }
    if (app.got_subcommand("perp")) {
      ctx.command = "perp";
      return pcmd.run(ctx);
    }
    if (app.got_subcommand("gridfit")) {
      ctx.command = "gridfit";
      return gcmd.run(ctx);
    }
    if (app.got_subcommand("clean")) {
      ctx.command = "clean";
      return ccmd.run(ctx);
    }
    return replay(manifest, replay_out, !no_verify);
  } catch (const Error& e) {
    std::cerr << "quanta: " << e.what() << "\n";
    if (ctx.dir) {
      try {
        ctx.dir->write_json("diagnostic.json", tool::with_manifest(Json{
                                                   {"command", ctx.command}, {"exit_code", e.exit_code()}, {"error", e.what()}}));
      } catch (const Error&) {
      }
    }
    return e.exit_code();
  }
}

} // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(args);
  } catch (const std::exception& e) {
    std::cerr << "quanta: " << e.what() << "\n";
    return 1;
  }
}
