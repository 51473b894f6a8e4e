#pragma once

// Circular statistics: angle folding, von Mises density and fitting, EM for
// uniform + von Mises and two-von-Mises mixtures, and the axiality check that
// separates perpendicular (four-fold) from collinear (two-fold) directions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quanta/error.hpp"
#include "quanta/random.hpp"

namespace quanta::circstats {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Concentrations above this are rejected outright.
inline constexpr double kMaxKappa = 1e5;

/// Default cap applied when a fitted concentration would be infinite.
inline constexpr double kDefaultKappaCap = 1e4;

/// Resultant lengths below this are treated as zero (mean direction undefined).
inline constexpr double kDegenerateResultant = 1e-9;

inline double deg_to_rad(double deg) noexcept { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) noexcept { return rad * 180.0 / std::numbers::pi; }

/// Mathematical modulo: result in [0, modulus).
inline double fold_angle(double angle, double modulus) {
  if (!std::isfinite(angle)) throw InputError("fold_angle: angle is not finite");
  if (!(modulus > 0.0) || !std::isfinite(modulus))
    throw ConfigError("fold_angle: modulus must be positive and finite");
  double r = std::fmod(angle, modulus);
  if (r < 0.0) r += modulus;
  // fmod of a tiny negative value can round up to exactly `modulus`.
  if (r >= modulus) r = 0.0;
  return r;
}

/// Wrap an angle in radians onto [0, 2π).
inline double wrap_radians(double angle) { return fold_angle(angle, kTwoPi); }

/// Map an orientation folded modulo `modulus` degrees onto the full circle.
inline double scale_to_circle(double folded, double modulus) {
  if (!(modulus > 0.0)) throw ConfigError("scale_to_circle: modulus must be positive");
  if (!(folded >= 0.0 && folded < modulus))
    throw InputError("scale_to_circle: folded value outside [0, modulus)");
  return folded * kTwoPi / modulus;
}

/// Inverse of scale_to_circle: radians on [0, 2π) back to [0, modulus).
inline double unscale_from_circle(double radians, double modulus) {
  return fold_angle(wrap_radians(radians) * modulus / kTwoPi, modulus);
}

/// Signed smallest difference a - b on the circle, in (-π, π].
inline double circular_difference(double a, double b) {
  double d = std::fmod(a - b, kTwoPi);
  if (d > std::numbers::pi) d -= kTwoPi;
  if (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

/// Angles on [0, 2π) with optional nonnegative weights.
class CircularSample {
public:
  explicit CircularSample(std::vector<double> angles, std::vector<double> weights = {})
      : angles_(std::move(angles)), weights_(std::move(weights)) {
    if (angles_.empty()) throw InputError("CircularSample: at least one angle is required");
    for (double a : angles_) {
      if (!std::isfinite(a) || a < 0.0 || a >= kTwoPi)
        throw InputError("CircularSample: angle outside [0, 2pi)");
    }
    if (!weights_.empty()) {
      if (weights_.size() != angles_.size())
        throw InputError("CircularSample: weight count does not match angle count");
      for (double w : weights_) {
        if (!std::isfinite(w) || w < 0.0) throw InputError("CircularSample: negative or non-finite weight");
      }
    }
  }

  /// Wraps arbitrary radians onto [0, 2π) first.
  static CircularSample wrapped(std::span<const double> radians, std::vector<double> weights = {}) {
    std::vector<double> a;
    a.reserve(radians.size());
    for (double r : radians) a.push_back(wrap_radians(r));
    return CircularSample(std::move(a), std::move(weights));
  }

  std::size_t size() const noexcept { return angles_.size(); }
  std::span<const double> angles() const noexcept { return angles_; }
  double angle(std::size_t i) const noexcept { return angles_[i]; }
  double weight(std::size_t i) const noexcept { return weights_.empty() ? 1.0 : weights_[i]; }
  bool weighted() const noexcept { return !weights_.empty(); }

  double total_weight() const noexcept {
    if (weights_.empty()) return static_cast<double>(angles_.size());
    double t = 0.0;
    for (double w : weights_) t += w;
    return t;
  }

private:
  std::vector<double> angles_;
  std::vector<double> weights_;
};

struct CircularMean {
  std::optional<double> mean; ///< empty when the resultant vanishes
  double rbar = 0.0;

  bool degenerate() const noexcept { return !mean.has_value(); }
};

namespace detail {

inline CircularMean resultant(std::span<const double> angles, std::span<const double> weights,
                              double multiple = 1.0) {
  double c = 0.0;
  double s = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    c += w * std::cos(multiple * angles[i]);
    s += w * std::sin(multiple * angles[i]);
    total += w;
  }
  if (!(total > 0.0)) throw InputError("circular mean: total weight must be positive");
  CircularMean out;
  out.rbar = std::min(1.0, std::hypot(c, s) / total);
  if (out.rbar >= kDegenerateResultant) out.mean = wrap_radians(std::atan2(s, c));
  return out;
}

} // namespace detail

inline CircularMean circular_mean_resultant(const CircularSample& sample) {
  std::vector<double> w;
  if (sample.weighted()) {
    w.reserve(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) w.push_back(sample.weight(i));
  }
  return detail::resultant(sample.angles(), w);
}

// ---------------------------------------------------------------------------
// Modified Bessel functions of the first kind, orders 0 and 1, returned with
// the exp(-x) scaling so that large concentrations never overflow. Power
// series up to x = 15, asymptotic (Hankel) expansion above.

inline constexpr double kBesselSeriesLimit = 15.0;

namespace detail {

inline double bessel_series(double x, int order) {
  const double q = 0.25 * x * x;
  double term = order == 0 ? 1.0 : 0.5 * x;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k + order));
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

inline double bessel_asymptotic_scaled(double x, int order) {
  const double mu = 4.0 * order * order;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum / std::sqrt(kTwoPi * x);
}

} // namespace detail

/// I0(x)·exp(-x) for x ≥ 0.
inline double bessel_i0_scaled(double x) {
  x = std::abs(x);
  if (x <= kBesselSeriesLimit) return detail::bessel_series(x, 0) * std::exp(-x);
  return detail::bessel_asymptotic_scaled(x, 0);
}

/// I1(x)·exp(-x) for x ≥ 0.
inline double bessel_i1_scaled(double x) {
  const double ax = std::abs(x);
  double v = ax <= kBesselSeriesLimit ? detail::bessel_series(ax, 1) * std::exp(-ax)
                                      : detail::bessel_asymptotic_scaled(ax, 1);
  return x < 0.0 ? -v : v;
}

inline double bessel_i0(double x) {
  x = std::abs(x);
  if (x <= kBesselSeriesLimit) return detail::bessel_series(x, 0);
  return detail::bessel_asymptotic_scaled(x, 0) * std::exp(x);
}

inline double bessel_i1(double x) {
  const double ax = std::abs(x);
  double v = ax <= kBesselSeriesLimit ? detail::bessel_series(ax, 1)
                                      : detail::bessel_asymptotic_scaled(ax, 1) * std::exp(ax);
  return x < 0.0 ? -v : v;
}

/// Mean resultant length of vM(κ): A1(κ) = I1(κ)/I0(κ).
inline double bessel_ratio_a1(double kappa) {
  if (kappa <= 0.0) return 0.0;
  return bessel_i1_scaled(kappa) / bessel_i0_scaled(kappa);
}

struct KappaSolution {
  double kappa = 0.0;
  bool saturated = false;
};

/// Solves A1(κ) = rbar for κ by safeguarded Newton iteration, seeded with the
/// Best-Fisher piecewise approximation. Returns `cap` (flagged) when the root
/// lies above it.
inline KappaSolution solve_kappa(double rbar, double cap = kDefaultKappaCap) {
  if (!(cap > 0.0) || cap > kMaxKappa) throw ConfigError("solve_kappa: kappa cap must lie in (0, 1e5]");
  if (!(rbar > 0.0)) return {0.0, false};
  if (rbar >= 1.0 || bessel_ratio_a1(cap) <= rbar) return {cap, true};

  double guess;
  if (rbar < 0.53) {
    guess = 2.0 * rbar + rbar * rbar * rbar + 5.0 * std::pow(rbar, 5) / 6.0;
  } else if (rbar < 0.85) {
    guess = -0.4 + 1.39 * rbar + 0.43 / (1.0 - rbar);
  } else {
    guess = 1.0 / (rbar * rbar * rbar - 4.0 * rbar * rbar + 3.0 * rbar);
  }

  // A1 is strictly increasing, so [lo, hi] always brackets the root.
  double lo = 0.0;
  double hi = cap;
  double kappa = std::clamp(guess, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double a = bessel_ratio_a1(kappa);
    const double f = a - rbar;
    if (f == 0.0) break;
    if (f > 0.0) hi = kappa; else lo = kappa;
    const double deriv = kappa > 0.0 ? 1.0 - a / kappa - a * a : 0.5;
    double next = deriv > 0.0 ? kappa - f / deriv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - kappa) <= 1e-15 * std::max(1.0, kappa) || hi - lo <= 1e-15 * std::max(1.0, hi)) {
      kappa = next;
      break;
    }
    kappa = next;
  }
  return {kappa, false};
}

// ---------------------------------------------------------------------------
// von Mises distribution

struct VonMisesParams {
  double mu = 0.0;    ///< mean direction, radians in [0, 2π)
  double kappa = 0.0; ///< concentration ≥ 0
};

inline void validate(const VonMisesParams& p) {
  if (!std::isfinite(p.kappa) || p.kappa < 0.0) throw ConfigError("von Mises: kappa must be finite and >= 0");
  if (p.kappa > kMaxKappa) throw ConfigError("von Mises: kappa exceeds the supported range (1e5)");
  if (!std::isfinite(p.mu)) throw ConfigError("von Mises: mu must be finite");
}

inline double vonmises_log_density(double theta, const VonMisesParams& p) {
  validate(p);
  if (p.kappa == 0.0) return -std::log(kTwoPi);
  return p.kappa * (std::cos(theta - p.mu) - 1.0) - std::log(kTwoPi * bessel_i0_scaled(p.kappa));
}

inline double vonmises_density(double theta, const VonMisesParams& p) {
  return std::exp(vonmises_log_density(theta, p));
}

/// Best & Fisher (1979) rejection sampler.
inline double sample_vonmises(const VonMisesParams& p, Rng& rng) {
  validate(p);
  if (p.kappa < 1e-8) return rng.uniform(0.0, kTwoPi);
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * p.kappa * p.kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * p.kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double u1 = rng.uniform();
    const double z = std::cos(std::numbers::pi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = p.kappa * (r - f);
    const double u2 = rng.uniform();
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double u3 = rng.uniform();
      const double theta = u3 > 0.5 ? p.mu + std::acos(f) : p.mu - std::acos(f);
      return wrap_radians(theta);
    }
  }
}

struct VonMisesFit {
  VonMisesParams params;
  double rbar = 0.0;
  bool saturated = false;  ///< κ hit the cap (all angles effectively equal)
  bool degenerate = false; ///< rbar = 0, μ undefined (reported as 0)
};

namespace detail {

inline VonMisesFit fit_from_resultant(const CircularMean& m, double cap) {
  VonMisesFit fit;
  fit.rbar = m.rbar;
  if (m.degenerate()) {
    fit.degenerate = true;
    return fit;
  }
  fit.params.mu = *m.mean;
  const KappaSolution k = solve_kappa(m.rbar, cap);
  fit.params.kappa = k.kappa;
  fit.saturated = k.saturated;
  return fit;
}

} // namespace detail

/// Maximum-likelihood von Mises fit: μ is the circular mean and κ solves
/// A1(κ) = rbar.
inline VonMisesFit fit_vonmises_mle(const CircularSample& sample, double kappa_cap = kDefaultKappaCap) {
  return detail::fit_from_resultant(circular_mean_resultant(sample), kappa_cap);
}

// ---------------------------------------------------------------------------
// Mixtures

enum class MixtureKind { UniformVonMises, TwoVonMises };

inline std::string to_string(MixtureKind k) {
  return k == MixtureKind::UniformVonMises ? "uniform+vonMises" : "vonMises+vonMises";
}

/// Starting point for EM. Weights follow the MixtureFit column convention.
struct MixtureStart {
  std::array<double, 2> weights{0.5, 0.5};
  std::vector<VonMisesParams> components;
};

struct MixtureOptions {
  std::size_t max_iter = 500;
  double tol = 1e-8;
  std::size_t n_starts = 10;
  std::uint64_t seed = kDefaultSeed;
  double kappa_cap = kDefaultKappaCap;
  std::optional<MixtureStart> init;
};

/// Threshold below which a component weight counts as collapsed.
inline constexpr double kCollapsedWeight = 1e-4;

struct MixtureFit {
  MixtureKind kind = MixtureKind::UniformVonMises;
  /// UniformVonMises: {uniform, von Mises}. TwoVonMises: {first, second},
  /// components ordered by ascending μ.
  std::array<double, 2> weights{0.0, 0.0};
  std::vector<VonMisesParams> components;
  /// Per-observation posterior probabilities, columns aligned with `weights`.
  std::vector<std::array<double, 2>> responsibilities;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  bool converged = false;
  std::size_t iterations = 0;
  bool degenerate_component = false;
  std::size_t restart = 0;                ///< index of the winning start
  std::vector<double> log_likelihood_trace; ///< one entry per E-step

  double vonmises_weight() const noexcept {
    return kind == MixtureKind::UniformVonMises ? weights[1] : 1.0;
  }

  /// log of the mixture density at θ.
  double log_density(double theta) const {
    std::array<double, 2> lp{};
    if (kind == MixtureKind::UniformVonMises) {
      lp[0] = std::log(weights[0]) - std::log(kTwoPi);
      lp[1] = std::log(weights[1]) + vonmises_log_density(theta, components[0]);
    } else {
      lp[0] = std::log(weights[0]) + vonmises_log_density(theta, components[0]);
      lp[1] = std::log(weights[1]) + vonmises_log_density(theta, components[1]);
    }
    const double m = std::max(lp[0], lp[1]);
    if (m == -std::numeric_limits<double>::infinity()) return m;
    return m + std::log(std::exp(lp[0] - m) + std::exp(lp[1] - m));
  }

  /// Posterior component probabilities at θ.
  std::array<double, 2> posterior(double theta) const {
    std::array<double, 2> lp{};
    if (kind == MixtureKind::UniformVonMises) {
      lp[0] = std::log(weights[0]) - std::log(kTwoPi);
      lp[1] = std::log(weights[1]) + vonmises_log_density(theta, components[0]);
    } else {
      lp[0] = std::log(weights[0]) + vonmises_log_density(theta, components[0]);
      lp[1] = std::log(weights[1]) + vonmises_log_density(theta, components[1]);
    }
    const double m = std::max(lp[0], lp[1]);
    const double e0 = std::exp(lp[0] - m);
    const double e1 = std::exp(lp[1] - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
  }
};

namespace detail {

struct EmState {
  std::array<double, 2> weights{};
  std::vector<VonMisesParams> components;
};

inline std::array<double, 2> log_terms(MixtureKind kind, const EmState& s, double theta) {
  std::array<double, 2> lp{};
  auto lw = [](double w) { return w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity(); };
  if (kind == MixtureKind::UniformVonMises) {
    lp[0] = lw(s.weights[0]) - std::log(kTwoPi);
    lp[1] = lw(s.weights[1]) + vonmises_log_density(theta, s.components[0]);
  } else {
    lp[0] = lw(s.weights[0]) + vonmises_log_density(theta, s.components[0]);
    lp[1] = lw(s.weights[1]) + vonmises_log_density(theta, s.components[1]);
  }
  return lp;
}

inline double e_step(MixtureKind kind, const EmState& s, const CircularSample& sample,
                     std::vector<std::array<double, 2>>& resp) {
  resp.resize(sample.size());
  double ll = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto lp = log_terms(kind, s, sample.angle(i));
    const double m = std::max(lp[0], lp[1]);
    const double e0 = std::exp(lp[0] - m);
    const double e1 = std::exp(lp[1] - m);
    const double tot = e0 + e1;
    resp[i] = {e0 / tot, e1 / tot};
    ll += sample.weight(i) * (m + std::log(tot));
  }
  return ll;
}

inline EmState m_step(MixtureKind kind, const EmState& prev, const CircularSample& sample,
                      const std::vector<std::array<double, 2>>& resp, double cap) {
  EmState next = prev;
  const double total = sample.total_weight();
  std::array<double, 2> mass{0.0, 0.0};
  std::array<double, 2> c{0.0, 0.0};
  std::array<double, 2> s{0.0, 0.0};
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double w = sample.weight(i);
    const double ci = std::cos(sample.angle(i));
    const double si = std::sin(sample.angle(i));
    for (int k = 0; k < 2; ++k) {
      const double wk = w * resp[i][k];
      mass[k] += wk;
      c[k] += wk * ci;
      s[k] += wk * si;
    }
  }
  next.weights = {mass[0] / total, mass[1] / total};
  const int first_vm = kind == MixtureKind::UniformVonMises ? 1 : 0;
  for (int k = first_vm; k < 2; ++k) {
    if (!(mass[k] > 1e-300)) continue;
    const double rbar = std::min(1.0, std::hypot(c[k], s[k]) / mass[k]);
    VonMisesParams& p = next.components[static_cast<std::size_t>(k - first_vm)];
    if (rbar >= kDegenerateResultant) {
      p.mu = wrap_radians(std::atan2(s[k], c[k]));
      p.kappa = solve_kappa(rbar, cap).kappa;
    } else {
      p.kappa = 0.0;
    }
  }
  return next;
}

inline MixtureFit run_em(MixtureKind kind, EmState state, const CircularSample& sample,
                         const MixtureOptions& opt) {
  MixtureFit fit;
  fit.kind = kind;
  std::vector<std::array<double, 2>> resp;
  double ll = e_step(kind, state, sample, resp);
  fit.log_likelihood_trace.push_back(ll);
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    EmState next = m_step(kind, state, sample, resp, opt.kappa_cap);
    std::vector<std::array<double, 2>> next_resp;
    const double next_ll = e_step(kind, next, sample, next_resp);
    fit.log_likelihood_trace.push_back(next_ll);
    const double improvement = next_ll - ll;
    state = std::move(next);
    resp = std::move(next_resp);
    ll = next_ll;
    fit.iterations = it;
    if (improvement < opt.tol) {
      fit.converged = true;
      break;
    }
  }
  fit.weights = state.weights;
  fit.components = std::move(state.components);
  fit.responsibilities = std::move(resp);
  fit.log_likelihood = ll;
  return fit;
}

inline EmState moment_start(MixtureKind kind, const CircularSample& sample, double cap) {
  const CircularMean m = circular_mean_resultant(sample);
  const double mu = m.mean.value_or(0.0);
  const double kappa = std::max(1.0, solve_kappa(m.rbar, cap).kappa);
  EmState s;
  if (kind == MixtureKind::UniformVonMises) {
    s.weights = {0.5, 0.5};
    s.components = {{mu, std::min(cap, 2.0 * kappa)}};
  } else {
    // Split the pooled mean by half a circular standard deviation either side.
    const double sd = m.rbar > 0.0 ? std::sqrt(-2.0 * std::log(m.rbar)) : std::numbers::pi;
    const double half = std::clamp(0.5 * sd, 0.1, std::numbers::pi / 2.0);
    s.weights = {0.5, 0.5};
    s.components = {{wrap_radians(mu - half), std::min(cap, 4.0 * kappa)},
                    {wrap_radians(mu + half), std::min(cap, 4.0 * kappa)}};
  }
  return s;
}

inline EmState random_start(MixtureKind kind, const CircularSample& sample, Rng& rng, double cap) {
  auto pick = [&] { return sample.angle(static_cast<std::size_t>(rng.below(sample.size()))); };
  EmState s;
  if (kind == MixtureKind::UniformVonMises) {
    const double w = rng.uniform(0.2, 0.8);
    s.weights = {1.0 - w, w};
    s.components = {{pick(), std::min(cap, rng.uniform(1.0, 20.0))}};
  } else {
    s.weights = {0.5, 0.5};
    s.components = {{pick(), std::min(cap, rng.uniform(1.0, 20.0))},
                    {pick(), std::min(cap, rng.uniform(1.0, 20.0))}};
  }
  return s;
}

inline void canonicalize(MixtureFit& fit) {
  if (fit.kind != MixtureKind::TwoVonMises) return;
  if (fit.components[0].mu <= fit.components[1].mu) return;
  std::swap(fit.components[0], fit.components[1]);
  std::swap(fit.weights[0], fit.weights[1]);
  for (auto& r : fit.responsibilities) std::swap(r[0], r[1]);
}

} // namespace detail

/// Fits a two-component circular mixture by EM from several starts (one
/// moment-based or user-supplied, the rest seeded random) and keeps the one
/// with the highest log-likelihood, preferring converged runs; ties go to the
/// lowest start index.
inline MixtureFit fit_mixture(const CircularSample& sample, MixtureKind kind, const MixtureOptions& opt = {}) {
  if (sample.size() < 5) throw InputError("fit_mixture: at least 5 angles are required");
  if (opt.max_iter < 1) throw ConfigError("fit_mixture: maxIter must be >= 1");
  if (opt.n_starts < 1) throw ConfigError("fit_mixture: at least one start is required");
  if (!(opt.tol >= 0.0)) throw ConfigError("fit_mixture: tolerance must be >= 0");
  if (!(sample.total_weight() > 0.0)) throw InputError("fit_mixture: total weight must be positive");

  const std::size_t n_vm = kind == MixtureKind::UniformVonMises ? 1 : 2;
  std::optional<MixtureFit> best;
  for (std::size_t start = 0; start < opt.n_starts; ++start) {
    detail::EmState state;
    if (start == 0 && opt.init) {
      if (opt.init->components.size() != n_vm) throw ConfigError("fit_mixture: initial start has the wrong component count");
      state.weights = opt.init->weights;
      state.components = opt.init->components;
      if (std::abs(state.weights[0] + state.weights[1] - 1.0) > 1e-9 || state.weights[0] < 0.0 || state.weights[1] < 0.0)
        throw ConfigError("fit_mixture: initial weights must be a probability vector");
      for (const auto& c : state.components) validate(c);
    } else if (start == 0) {
      state = detail::moment_start(kind, sample, opt.kappa_cap);
    } else {
      Rng rng = Rng::substream(opt.seed, start);
      state = detail::random_start(kind, sample, rng, opt.kappa_cap);
    }
    MixtureFit fit = detail::run_em(kind, std::move(state), sample, opt);
    fit.restart = start;
    const bool better = !best || (fit.converged && !best->converged) ||
                        (fit.converged == best->converged && fit.log_likelihood > best->log_likelihood);
    if (better) best = std::move(fit);
  }
  MixtureFit out = std::move(*best);
  detail::canonicalize(out);
  out.degenerate_component = out.weights[0] < kCollapsedWeight || out.weights[1] < kCollapsedWeight;
  return out;
}

// ---------------------------------------------------------------------------
// Axiality

enum class Axiality { Perpendicular, Collinear, Neither };

inline std::string to_string(Axiality a) {
  switch (a) {
    case Axiality::Perpendicular: return "perpendicular";
    case Axiality::Collinear: return "collinear";
    case Axiality::Neither: return "neither";
  }
  return "neither";
}

struct AxialityThresholds {
  double r4 = 0.5;
  double r2 = 0.5;
};

struct AxialityVerdict {
  Axiality classification = Axiality::Neither;
  double r2 = 0.0; ///< resultant length of doubled angles
  double r4 = 0.0; ///< resultant length of quadrupled angles
};

/// Four-fold clustering shows up in the quadrupled angles; if the doubled
/// angles are also concentrated the directions are only two-fold.
inline AxialityVerdict axiality_test(const CircularSample& directions, const AxialityThresholds& th = {}) {
  if (directions.size() < 5) throw InputError("axiality_test: at least 5 directions are required");
  std::vector<double> w;
  if (directions.weighted()) {
    for (std::size_t i = 0; i < directions.size(); ++i) w.push_back(directions.weight(i));
  }
  AxialityVerdict v;
  v.r2 = detail::resultant(directions.angles(), w, 2.0).rbar;
  v.r4 = detail::resultant(directions.angles(), w, 4.0).rbar;
  if (v.r4 >= th.r4) {
    v.classification = v.r2 >= th.r2 ? Axiality::Collinear : Axiality::Perpendicular;
  }
  return v;
}

} // namespace quanta::circstats
