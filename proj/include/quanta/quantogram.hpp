#pragma once

// Cosine quantogram over a frequency grid, Monte Carlo comparison boundary,
// peak search inside a region of interest, and bootstrap error range of the
// peak quantum.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quanta/error.hpp"
#include "quanta/random.hpp"

namespace quanta {

/// Pooled positive lengths (metres) with a provenance tag per value.
struct MeasurementSet {
  std::vector<double> values;
  std::vector<std::string> tags;

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }

  void add(double value, std::string tag = {}) {
    values.push_back(value);
    tags.push_back(std::move(tag));
  }

  void validate() const {
    if (tags.size() != values.size()) throw ValidationError("MeasurementSet: tag count does not match value count");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i]) || values[i] <= 0.0)
        throw ValidationError("MeasurementSet: value " + std::to_string(i) + " is not a positive finite length");
    }
  }
};

namespace quantogram {

/// Frequencies in m⁻¹ (ω = 1/q). Defaults cover quanta from ~0.83 m to 20 m
/// with a region of interest of 3 m to 6.5 m.
struct FrequencyGrid {
  double omega_min = 0.05;
  double omega_max = 1.2;
  double step = 0.001;
  double roi_min = 0.15;
  double roi_max = 0.33;

  void validate() const {
    if (!(omega_min > 0.0) || !(omega_max > omega_min) || !std::isfinite(omega_max))
      throw ConfigError("frequency grid: require 0 < omega-min < omega-max");
    if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("frequency grid: step must be positive");
    if (!(roi_min >= omega_min - 1e-12 && roi_max <= omega_max + 1e-12 && roi_min < roi_max))
      throw ConfigError("frequency grid: region of interest must lie inside [omega-min, omega-max]");
  }

  std::size_t size() const {
    return static_cast<std::size_t>(std::floor((omega_max - omega_min) / step + 1e-9)) + 1;
  }

  double frequency(std::size_t j) const noexcept { return omega_min + static_cast<double>(j) * step; }

  std::vector<double> frequencies() const {
    std::vector<double> f(size());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = frequency(j);
    return f;
  }

  bool in_roi(double omega) const noexcept { return omega >= roi_min - 1e-12 && omega <= roi_max + 1e-12; }
};

struct QuantogramCurve {
  std::vector<double> frequencies;
  std::vector<double> heights;
  std::size_t n = 0;
};

struct BoundaryCurve {
  std::vector<double> frequencies;
  std::vector<double> boundary_heights;
  std::size_t n_sims = 0;
  std::size_t rank = 0;
  double jitter_fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Reciprocal conversion between quantum (m) and frequency (m⁻¹).
inline double quantum_frequency_convert(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw InputError("quantum/frequency conversion requires a positive finite value");
  return 1.0 / x;
}

/// √(2/N) Σ cos(2π ω Xᵢ) at a single frequency, by direct evaluation.
inline double quantogram_height(std::span<const double> values, double omega) {
  if (values.empty()) throw InputError("quantogram: no measurements");
  double sum = 0.0;
  for (double x : values) sum += std::cos(2.0 * std::numbers::pi * omega * x);
  return std::sqrt(2.0 / static_cast<double>(values.size())) * sum;
}

/// Heights over the whole grid. Each value's phasor is advanced along the
/// grid by complex rotation and re-anchored every 64 steps to bound drift.
inline std::vector<double> quantogram_heights(std::span<const double> values, const FrequencyGrid& grid) {
  if (values.empty()) throw InputError("quantogram: no measurements");
  constexpr std::size_t kReanchor = 64;
  const std::size_t m = grid.size();
  std::vector<double> acc(m, 0.0);
  for (double x : values) {
    const double base = 2.0 * std::numbers::pi * x;
    const std::complex<double> rot = std::polar(1.0, base * grid.step);
    std::complex<double> z;
    for (std::size_t j = 0; j < m; ++j) {
      if (j % kReanchor == 0) z = std::polar(1.0, base * grid.frequency(j));
      acc[j] += z.real();
      z *= rot;
    }
  }
  const double scale = std::sqrt(2.0 / static_cast<double>(values.size()));
  for (double& a : acc) a *= scale;
  return acc;
}

inline QuantogramCurve cosine_quantogram(const MeasurementSet& data, const FrequencyGrid& grid) {
  if (data.size() < 2) throw InputError("quantogram: at least 2 measurements are required");
  data.validate();
  grid.validate();
  QuantogramCurve curve;
  curve.frequencies = grid.frequencies();
  curve.heights = quantogram_heights(data.values, grid);
  curve.n = data.size();
  return curve;
}

/// X' = X·(1 + jitter·U), U uniform on [-1, 1].
inline std::vector<double> perturb_values(std::span<const double> values, double jitter_fraction, Rng& rng) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = values[i] * (1.0 + jitter_fraction * rng.uniform(-1.0, 1.0));
  return out;
}

struct BoundaryOptions {
  std::size_t n_sims = 499;
  std::size_t rank = 5;
  double jitter_fraction = 0.15;
  std::uint64_t seed = kDefaultSeed;

  void validate() const {
    if (rank < 1 || n_sims < rank) throw ConfigError("boundary: require nSims >= rank >= 1");
    if (!(jitter_fraction > 0.0) || !(jitter_fraction < 1.0))
      throw ConfigError("boundary: jitter fraction must lie in (0, 1)");
  }
};

/// Pointwise rank-th largest quantogram height over perturbed replicates of
/// the data. Replicate s draws from substream (seed, s), so the result does
/// not depend on evaluation order.
inline BoundaryCurve simulate_boundary(const MeasurementSet& data, const FrequencyGrid& grid,
                                       const BoundaryOptions& opt = {}) {
  opt.validate();
  grid.validate();
  if (data.size() < 2) throw InputError("boundary: at least 2 measurements are required");
  data.validate();

  const std::size_t m = grid.size();
  const std::size_t k = opt.rank;
  // top[j*k .. j*k+k) holds the k largest heights seen so far, descending.
  std::vector<double> top(m * k, -std::numeric_limits<double>::infinity());
  for (std::size_t s = 0; s < opt.n_sims; ++s) {
    Rng rng = Rng::substream(opt.seed, s);
    const auto replicate = perturb_values(data.values, opt.jitter_fraction, rng);
    const auto h = quantogram_heights(replicate, grid);
    for (std::size_t j = 0; j < m; ++j) {
      double* slot = &top[j * k];
      if (h[j] <= slot[k - 1]) continue;
      std::size_t pos = k - 1;
      while (pos > 0 && slot[pos - 1] < h[j]) {
        slot[pos] = slot[pos - 1];
        --pos;
      }
      slot[pos] = h[j];
    }
  }

  BoundaryCurve b;
  b.frequencies = grid.frequencies();
  b.boundary_heights.resize(m);
  for (std::size_t j = 0; j < m; ++j) b.boundary_heights[j] = top[j * k + (k - 1)];
  b.n_sims = opt.n_sims;
  b.rank = opt.rank;
  b.jitter_fraction = opt.jitter_fraction;
  b.seed = opt.seed;
  return b;
}

// ---------------------------------------------------------------------------
// Peaks

struct Peak {
  double frequency = 0.0; ///< interpolated, m⁻¹
  double quantum = 0.0;   ///< 1 / frequency, m
  double height = 0.0;    ///< interpolated height
  std::size_t index = 0;  ///< grid index of the discrete extremum
  bool inside_roi = false;
};

struct PeakReport {
  std::optional<Peak> primary;
  bool exceeds_boundary = false;
  std::optional<double> boundary_height; ///< boundary at the grid point nearest the peak
  std::optional<double> error_range;     ///< ± metres
  std::vector<Peak> secondary;           ///< other local extrema, by height
  std::optional<Peak> dominant;          ///< highest extremum anywhere on the grid
  std::string diagnostic;

  bool dominant_outside_roi() const noexcept { return dominant && !dominant->inside_roi; }
};

enum class Polarity { Maximum, Minimum };

namespace detail {

inline Peak refine(const std::vector<double>& f, const std::vector<double>& h, std::size_t j, double sign) {
  const double a = sign * h[j - 1];
  const double b = sign * h[j];
  const double c = sign * h[j + 1];
  const double denom = a - 2.0 * b + c;
  double delta = denom < 0.0 ? 0.5 * (a - c) / denom : 0.0;
  delta = std::clamp(delta, -0.5, 0.5);
  const double spacing = delta >= 0.0 ? f[j + 1] - f[j] : f[j] - f[j - 1];
  Peak p;
  p.index = j;
  p.frequency = f[j] + delta * spacing;
  p.quantum = 1.0 / p.frequency;
  p.height = sign * (b - 0.25 * (a - c) * delta);
  return p;
}

} // namespace detail

/// Highest strict local maximum (or lowest local minimum) inside the region of
/// interest, refined by a parabola through the three surrounding grid points.
inline PeakReport find_peak(const QuantogramCurve& curve, const BoundaryCurve* boundary, const FrequencyGrid& grid,
                            Polarity polarity = Polarity::Maximum) {
  const auto& f = curve.frequencies;
  const auto& h = curve.heights;
  if (f.empty() || f.size() != h.size()) throw InputError("find_peak: empty or inconsistent curve");
  if (boundary) {
    const auto& bf = boundary->frequencies;
    if (bf.size() != f.size() || std::abs(bf.front() - f.front()) > 1e-12 || std::abs(bf.back() - f.back()) > 1e-12)
      throw ConfigError("find_peak: boundary is not on the curve's frequency grid");
  }
  const double sign = polarity == Polarity::Maximum ? 1.0 : -1.0;

  std::vector<Peak> peaks;
  for (std::size_t j = 1; j + 1 < h.size(); ++j) {
    if (sign * h[j] > sign * h[j - 1] && sign * h[j] > sign * h[j + 1]) {
      Peak p = detail::refine(f, h, j, sign);
      p.inside_roi = grid.in_roi(f[j]);
      peaks.push_back(p);
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [sign](const Peak& x, const Peak& y) { return sign * x.height > sign * y.height; });

  PeakReport report;
  if (!peaks.empty()) report.dominant = peaks.front();
  auto it = std::find_if(peaks.begin(), peaks.end(), [](const Peak& p) { return p.inside_roi; });
  if (it == peaks.end()) {
    report.diagnostic = "no local extremum inside the region of interest";
    report.secondary = std::move(peaks);
    return report;
  }
  report.primary = *it;
  peaks.erase(it);
  report.secondary = std::move(peaks);

  if (boundary) {
    const Peak& p = *report.primary;
    const double pos = (p.frequency - f.front()) / grid.step;
    const auto nearest = static_cast<std::size_t>(
        std::clamp(std::llround(pos), 0LL, static_cast<long long>(f.size() - 1)));
    report.boundary_height = boundary->boundary_heights[nearest];
    report.exceeds_boundary = sign * p.height > sign * *report.boundary_height;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Error range

struct BootstrapOptions {
  std::size_t n_boot = 199;
  double jitter_fraction = 0.0; ///< optional multiplicative jitter on resampled values
  std::uint64_t seed = kDefaultSeed;
};

struct ErrorRange {
  double half_width = 0.0; ///< ± metres
  double lower = 0.0;      ///< 2.5% quantile of replicate peak quanta
  double upper = 0.0;      ///< 97.5% quantile
  std::size_t n_used = 0;
  std::size_t n_dropped = 0;
};

namespace detail {

inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

} // namespace detail

/// Half-width of the central 95% interval of the ROI peak quantum over
/// nonparametric bootstrap resamples of the data.
inline ErrorRange estimate_error_range(const MeasurementSet& data, const FrequencyGrid& grid,
                                       const BootstrapOptions& opt = {}) {
  grid.validate();
  if (opt.n_boot < 2) throw ConfigError("error range: at least 2 bootstrap replicates are required");
  if (!(opt.jitter_fraction >= 0.0 && opt.jitter_fraction < 1.0))
    throw ConfigError("error range: jitter fraction must lie in [0, 1)");
  if (data.size() < 2) throw DegenerateError("error range: fewer than 2 measurements");
  data.validate();
  const auto base = find_peak(cosine_quantogram(data, grid), nullptr, grid);
  if (!base.primary) throw DegenerateError("error range: the data have no peak inside the region of interest");

  const std::size_t n = data.size();
  std::vector<double> quanta;
  quanta.reserve(opt.n_boot);
  std::vector<double> resample(n);
  for (std::size_t b = 0; b < opt.n_boot; ++b) {
    Rng rng = Rng::substream(opt.seed, b);
    for (std::size_t i = 0; i < n; ++i) resample[i] = data.values[static_cast<std::size_t>(rng.below(n))];
    if (opt.jitter_fraction > 0.0) resample = perturb_values(resample, opt.jitter_fraction, rng);
    QuantogramCurve c;
    c.frequencies = grid.frequencies();
    c.heights = quantogram_heights(resample, grid);
    c.n = n;
    const auto rep = find_peak(c, nullptr, grid);
    if (rep.primary) quanta.push_back(rep.primary->quantum);
  }

  ErrorRange out;
  out.n_used = quanta.size();
  out.n_dropped = opt.n_boot - quanta.size();
  if (out.n_dropped * 2 > opt.n_boot)
    throw DegenerateError("error range: more than half of the bootstrap replicates had no peak in the region of interest");
  std::sort(quanta.begin(), quanta.end());
  out.lower = detail::quantile_sorted(quanta, 0.025);
  out.upper = detail::quantile_sorted(quanta, 0.975);
  out.half_width = 0.5 * (out.upper - out.lower);
  if (!(out.half_width > 0.0)) throw DegenerateError("error range: bootstrap peak quanta have zero spread");
  return out;
}

} // namespace quantogram
} // namespace quanta
