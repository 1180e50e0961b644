#pragma once

// Empirical point spectrum: grid sweep, scale-stability screening, local
// refinement, and the sampled uniform-vanishing test.

#include <algorithm>
#include <array>
#include <numbers>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "averaging.hpp"
#include "detail/parallel.hpp"
#include "signal.hpp"
#include "types.hpp"

namespace ww {

struct EigenvalueCandidate {
  Frequency theta;
  double amplitude = 0.0;  // |a_theta| on the largest window
  double phase = 0.0;      // arg a_theta
  double stability = 0.0;  // (max - min) / max of |a_theta| over the top scales
  bool operator==(const EigenvalueCandidate&) const = default;

  Complex coefficient() const { return std::polar(amplitude, phase); }
};

struct SpectrumReport {
  std::vector<EigenvalueCandidate> candidates;  // descending amplitude
  double mean_power = 0.0;
  double bessel_sum = 0.0;
  double pp_defect = 0.0;
  double threshold = 0.0;
  std::size_t grid = 0;
  std::vector<std::int64_t> scales;  // scales the detector looked at
  bool operator==(const SpectrumReport&) const = default;
};

struct DetectionParams {
  std::size_t grid = 0;              // 0: smallest power of two >= largest window
  std::optional<double> threshold;   // default 0.05 * sqrt(mean_power)
  double max_instability = 0.2;
  std::size_t top_scales = 3;
  std::size_t max_candidates = 0;    // 0: keep all
  /// Bin-level screening allowance for scalloping loss between grid points
  /// (a peak halfway between bins of a grid M = N keeps 2/pi of its height).
  double screen_factor = 0.6;
  double screen_ratio = 0.5;
  double fine_ratio = 0.7;           // min/max over the unscalloped lower scales
};

struct RefinedFrequency {
  Frequency theta;
  bool warning = false;  // no interior maximum in the bracket; theta is the input guess
};

namespace detail {

inline double amplitude_sq(const OrbitSignal& signal, const Window& window, double theta) {
  return std::norm(fourier_bohr_at(signal, window, Frequency(theta)));
}

inline constexpr std::size_t kMaxTaylorOrder = 12;

/// Fast evaluation of |a_theta|^2 for theta within `radius` of `center`.
///
/// The signal is demodulated at `center` once and reduced to Taylor moments
/// M[b][m] = sum_u g(bB + u) (u/B)^m over blocks of B samples, so that
/// a(center + d) = (1/n) sum_b e^{-2 pi i d (t0 + bB)} sum_m (-2 pi i d B)^m / m! M[b][m].
/// B and the truncation order K keep the Taylor remainder below 1e-16 of
/// the l1 mass of the signal.
class LocalSpectrum {
 public:
  LocalSpectrum(std::span<const Complex> values, std::int64_t t0, double center, double radius)
      : t0_(t0), n_(values.size()), center_(center) {
    for (block_ = 64;; block_ /= 2) {
      order_ = taylor_order(2.0 * std::numbers::pi * radius * static_cast<double>(block_));
      if (block_ == 1 || order_ <= kMaxTaylorOrder) break;
    }
    if (block_ == 1) order_ = 1;
    blocks_ = (n_ + block_ - 1) / block_;
    moments_.assign(blocks_ * order_, Complex{});
    dispatch([&]<std::size_t K>() { build<K>(values); });
  }

  double amplitude_sq(double theta) const {
    Complex sum{};
    dispatch([&]<std::size_t K>() { sum = evaluate<K>(theta - center_); });
    return std::norm(sum / static_cast<double>(n_));
  }

 private:
  static std::size_t taylor_order(double x) {
    std::size_t order = 1;
    for (double term = x; term > 1e-16 && order <= kMaxTaylorOrder; term *= x / static_cast<double>(order)) ++order;
    return order;
  }

  template <class Fn>
  void dispatch(Fn&& fn) const {
    [&]<std::size_t... I>(std::index_sequence<I...>) {
      ((order_ == I + 1 ? (fn.template operator()<I + 1>(), true) : false) || ...);
    }(std::make_index_sequence<kMaxTaylorOrder>{});
  }

  template <std::size_t K>
  void build(std::span<const Complex> values) {
    std::vector<std::array<double, K>> powers(block_);
    for (std::size_t u = 0; u < block_; ++u) {
      double p = 1.0;
      for (std::size_t m = 0; m < K; ++m) {
        powers[u][m] = p;
        p *= static_cast<double>(u) / static_cast<double>(block_);
      }
    }
    std::array<Complex, kPhaseBlock> step{};
    for (std::size_t j = 0; j < kPhaseBlock; ++j) step[j] = conj_character(center_, static_cast<std::int64_t>(j));
    Complex base{};
    for (std::size_t b = 0; b < blocks_; ++b) {
      const std::size_t start = b * block_;
      if (start % kPhaseBlock == 0) base = conj_character(center_, t0_ + static_cast<std::int64_t>(start));
      std::array<double, K> re{}, im{};
      const std::size_t end = std::min(n_, start + block_);
      for (std::size_t i = start; i < end; ++i) {
        const Complex h = mul(values[i], step[i % kPhaseBlock]);
        const auto& pw = powers[i - start];
        for (std::size_t m = 0; m < K; ++m) {
          re[m] += h.real() * pw[m];
          im[m] += h.imag() * pw[m];
        }
      }
      for (std::size_t m = 0; m < K; ++m) moments_[b * K + m] = mul(Complex(re[m], im[m]), base);
    }
  }

  template <std::size_t K>
  Complex evaluate(double d) const {
    std::array<Complex, K> coeff{};
    const Complex factor(0.0, -2.0 * std::numbers::pi * d * static_cast<double>(block_));
    Complex c(1.0, 0.0);
    for (std::size_t m = 0; m < K; ++m) {
      coeff[m] = c;
      c = mul(c, factor) / static_cast<double>(m + 1);
    }
    std::array<Complex, kLeafSize> step{};
    for (std::size_t j = 0; j < kLeafSize; ++j) step[j] = conj_character(d, static_cast<std::int64_t>(j * block_));
    return pairwise_reduce<Complex>(0, blocks_, [&](std::size_t b, std::size_t e) {
      double acc_re = 0.0, acc_im = 0.0;
      for (std::size_t k = b; k < e; ++k) {
        const Complex* mk = moments_.data() + k * K;
        double in_re = 0.0, in_im = 0.0;
        for (std::size_t m = 0; m < K; ++m) {
          in_re += coeff[m].real() * mk[m].real() - coeff[m].imag() * mk[m].imag();
          in_im += coeff[m].real() * mk[m].imag() + coeff[m].imag() * mk[m].real();
        }
        const Complex& w = step[k - b];
        acc_re += in_re * w.real() - in_im * w.imag();
        acc_im += in_re * w.imag() + in_im * w.real();
      }
      return mul(Complex(acc_re, acc_im), conj_character(d, t0_ + static_cast<std::int64_t>(b * block_)));
    });
  }

  std::int64_t t0_;
  std::size_t n_;
  double center_;
  std::size_t block_ = 1, order_ = 1, blocks_ = 0;
  std::vector<Complex> moments_;
};

}  // namespace detail

/// Local maximizer of |a_theta| on [theta0 - radius, theta0 + radius]:
/// a parabola through the three bracket amplitudes, then golden-section search.
inline RefinedFrequency refine_frequency(const OrbitSignal& signal, const Window& window, Frequency theta0, double radius) {
  if (radius * static_cast<double>(window.size()) < 1.0 - 1e-12) {
    throw RangeError("refinement radius must be at least 1/|window|");
  }
  const detail::LocalSpectrum local(signal.slice(window), window.lo, theta0.value(), radius);
  auto f = [&](double th) { return local.amplitude_sq(th); };

  const double c0 = theta0.value();
  const double fa = f(c0 - radius), fm = f(c0), fc = f(c0 + radius);
  if (!(fm > fa && fm > fc)) return {theta0, true};

  double lo = c0 - radius, hi = c0 + radius;
  double best = c0, fbest = fm;

  const double denom = fa - 2.0 * fm + fc;
  if (denom < 0.0) {
    const double vertex = std::clamp(c0 + 0.5 * radius * (fa - fc) / denom, lo, hi);
    const double h = radius / 4.0;
    if (vertex - h > lo && vertex + h < hi) {
      const double fv = f(vertex);
      if (fv > fbest) {
        best = vertex;
        fbest = fv;
      }
      if (fv >= f(vertex - h) && fv >= f(vertex + h)) {
        lo = vertex - h;
        hi = vertex + h;
      }
    }
  }

  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 30 && hi - lo > 1e-10; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    }
  }
  const double mid = 0.5 * (lo + hi);
  const double fmid = f(mid);
  for (const auto& [x, fx] : {std::pair{x1, f1}, std::pair{x2, f2}, std::pair{mid, fmid}}) {
    if (fx > fbest) {
      best = x;
      fbest = fx;
    }
  }
  return {Frequency(best), false};
}

inline void finalize_powers(SpectrumReport& report) {
  report.bessel_sum = 0.0;
  for (const auto& c : report.candidates) report.bessel_sum += c.amplitude * c.amplitude;
  report.pp_defect = report.mean_power - report.bessel_sum;
}

inline SpectrumReport detect_point_spectrum(const SignalFn& materialize, const FolnerSchedule& schedule, const DetectionParams& params,
                                            Parallelism par = {}) {
  const auto top = schedule.top_indices(params.top_scales);
  std::vector<Window> windows;
  for (auto i : top) windows.push_back(schedule.window(i));
  const Window largest = windows.back();
  Window hull = windows.front();
  for (const auto& w : windows) hull = Window(std::min(hull.lo, w.lo), std::max(hull.hi, w.hi));

  const std::size_t grid = params.grid == 0 ? std::bit_ceil(static_cast<std::size_t>(largest.size())) : params.grid;
  if (static_cast<std::int64_t>(grid) < largest.size()) {
    throw RangeError("grid " + std::to_string(grid) + " is smaller than the largest window size " + std::to_string(largest.size()));
  }

  const OrbitSignal signal = materialize(hull);
  SpectrumReport report;
  report.grid = grid;
  for (auto i : top) report.scales.push_back(schedule.scales()[i]);
  report.mean_power = mean_power(signal, largest);
  report.threshold = params.threshold.value_or(0.05 * std::sqrt(report.mean_power));
  if (params.threshold && *params.threshold <= 0.0) throw RangeError("detection threshold must be positive");
  if (report.threshold <= 0.0) {
    finalize_powers(report);
    return report;
  }

  const std::size_t levels = windows.size();
  std::vector<std::vector<double>> amps(levels);
  detail::parallel_for(levels, par, [&](std::size_t s) {
    const auto sweep = fourier_bohr_sweep(signal, windows[s], grid);
    amps[s].resize(grid);
    for (std::size_t k = 0; k < grid; ++k) amps[s][k] = std::abs(sweep[k]);
  });

  // Bin screen. The top scale may lose up to ~36% to scalloping, so it only
  // needs screen_factor * threshold. Scales whose window is at most a quarter
  // of the grid lose at most the half-bin Dirichlet factor and must come close
  // to the threshold and agree with each other.
  const double screen = params.screen_factor * report.threshold;
  std::vector<double> fine_screen(levels, 0.0);
  for (std::size_t s = 0; s + 1 < levels; ++s) {
    const double n = static_cast<double>(windows[s].size());
    if (4.0 * n > static_cast<double>(grid)) continue;
    const double x = std::numbers::pi * n / (2.0 * static_cast<double>(grid));
    fine_screen[s] = 0.9 * report.threshold * std::sin(x) / x;
  }
  const auto& at_top = amps.back();
  std::vector<std::size_t> bins;
  for (std::size_t k = 0; k < grid; ++k) {
    const double v = at_top[k];
    if (v < screen) continue;
    if (grid > 1 && (v < at_top[(k + grid - 1) % grid] || v <= at_top[(k + 1) % grid])) continue;
    double lo = v, hi = v, fine_lo = 0.0, fine_hi = 0.0;
    bool fine_ok = true;
    for (std::size_t s = 0; s < levels; ++s) {
      const double a = amps[s][k];
      lo = std::min(lo, a);
      hi = std::max(hi, a);
      if (fine_screen[s] > 0.0) {
        fine_ok = fine_ok && a >= fine_screen[s];
        fine_lo = fine_lo == 0.0 ? a : std::min(fine_lo, a);
        fine_hi = std::max(fine_hi, a);
      }
    }
    if (fine_hi > 0.0 && fine_lo < params.fine_ratio * fine_hi) fine_ok = false;
    if (fine_ok && lo >= screen && lo >= params.screen_ratio * hi) bins.push_back(k);
  }

  const double radius = 1.0 / static_cast<double>(largest.size());
  std::vector<std::optional<EigenvalueCandidate>> refined(bins.size());
  detail::parallel_for(bins.size(), par, [&](std::size_t j) {
    const std::size_t k = bins[j];
    const Frequency guess(static_cast<double>(k) / static_cast<double>(grid));
    if (levels > 1 && grid > 2) {
      // Pre-check at the parabolic vertex of the top-scale bins: the lower
      // scales, evaluated exactly there, must already come close to the final
      // criteria. The refined point moves by at most a fraction of a bin.
      const double l = at_top[(k + grid - 1) % grid], c = at_top[k], r = at_top[(k + 1) % grid];
      const double curv = l - 2.0 * c + r;
      const double delta = curv < 0.0 ? std::clamp(0.5 * (l - r) / curv, -0.5, 0.5) : 0.0;
      const Frequency vertex((static_cast<double>(k) + delta) / static_cast<double>(grid));
      double lo = 0.0, hi = 0.0;
      for (std::size_t s = 0; s + 1 < levels; ++s) {
        const double m = std::abs(fourier_bohr_at(signal, windows[s], vertex));
        if (m < 0.85 * report.threshold) return;
        lo = s == 0 ? m : std::min(lo, m);
        hi = std::max(hi, m);
      }
      if (hi - lo > 0.35 * hi) return;
      // Refinement recovers at most the half-bin scalloping loss at the top scale.
      if (std::max({l, c, r}) / 0.6 < 0.72 * hi) return;
      const double m_top = std::abs(fourier_bohr_at(signal, largest, vertex));
      if (m_top < 0.85 * report.threshold || std::max(hi, m_top) - std::min(lo, m_top) > 0.35 * std::max(hi, m_top)) return;
    }
    const RefinedFrequency r = refine_frequency(signal, largest, guess, std::max(radius, 1.0 / static_cast<double>(grid)));
    double lo = 0.0, hi = 0.0;
    Complex top_value{};
    for (std::size_t s = 0; s < levels; ++s) {
      const Complex a = fourier_bohr_at(signal, windows[s], r.theta);
      const double m = std::abs(a);
      if (s == 0) lo = hi = m;
      lo = std::min(lo, m);
      hi = std::max(hi, m);
      if (s + 1 == levels) top_value = a;
    }
    const double stability = hi > 0.0 ? (hi - lo) / hi : 1.0;
    if (lo > report.threshold && stability < params.max_instability) {
      refined[j] = EigenvalueCandidate{r.theta, std::abs(top_value), std::arg(top_value), stability};
    }
  });

  std::vector<EigenvalueCandidate> pool;
  for (auto& c : refined)
    if (c) pool.push_back(*c);
  std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
    return a.amplitude != b.amplitude ? a.amplitude > b.amplitude : a.theta < b.theta;
  });
  const double merge = 2.0 / static_cast<double>(largest.size());
  for (const auto& c : pool) {
    const bool close = std::any_of(report.candidates.begin(), report.candidates.end(),
                                   [&](const auto& kept) { return circular_distance(kept.theta, c.theta) < merge; });
    if (!close) report.candidates.push_back(c);
    if (params.max_candidates && report.candidates.size() == params.max_candidates) break;
  }
  finalize_powers(report);
  return report;
}

inline SpectrumReport detect_point_spectrum(const PointSource& source, const CylinderObservable& obs, const FolnerSchedule& schedule,
                                            const DetectionParams& params, Parallelism par = {}) {
  return detect_point_spectrum(signal_fn(obs, source), schedule, params, par);
}

/// Mean power minus Bessel sum; rounding-level negatives (>= -1e-9) clamp to 0.
inline double bessel_gap(const SpectrumReport& report) {
  const double gap = report.mean_power - report.bessel_sum;
  return gap >= -1e-9 ? std::max(gap, 0.0) : gap;
}

/// Keeps the first n candidates (by amplitude) and recomputes the power sums.
inline SpectrumReport truncate(const SpectrumReport& report, std::size_t n) {
  SpectrumReport out = report;
  if (out.candidates.size() > n) out.candidates.resize(n);
  finalize_powers(out);
  return out;
}

struct FrequencyBand {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double theta) const { return lo <= theta && theta <= hi; }
  double distance(Frequency theta) const {
    if (contains(theta.value())) return 0.0;
    return std::min(circular_distance(theta, Frequency(lo)), circular_distance(theta, Frequency(hi)));
  }
  bool operator==(const FrequencyBand&) const = default;
};

struct VanishingTrace {
  FrequencyBand band;
  std::size_t grid = 0;
  std::vector<std::int64_t> scales;
  std::vector<std::string> sources;
  std::vector<std::vector<double>> per_source;  // [scale][source] sup over grid ∩ band
  std::vector<double> sup;                      // max over sources, per scale
  bool nonincreasing = true;
  bool strictly_decreasing = true;
  bool sampled = true;  // supremum over the listed sources only, not over all points
  bool operator==(const VanishingTrace&) const = default;
};

/// Sampled sup over grid ∩ band of |a_theta|, per scale, maximized over the
/// supplied orbit points.
inline VanishingTrace uniform_vanishing_check(std::span<const PointSource> sources, const CylinderObservable& obs,
                                              const FolnerSchedule& schedule, FrequencyBand band, std::size_t grid,
                                              std::span<const Frequency> avoid = {}, Parallelism par = {}) {
  if (!(0.0 <= band.lo && band.lo <= band.hi && band.hi < 1.0)) throw RangeError("frequency band must satisfy 0 <= lo <= hi < 1");
  if (sources.empty()) throw RangeError("uniform_vanishing_check needs at least one source");
  const Window largest = schedule.largest_window();
  const double margin = 2.0 / static_cast<double>(largest.size());
  for (const auto& th : avoid) {
    if (band.distance(th) < margin) {
      throw RangeError("band comes within 2/N of detected frequency " + std::to_string(th.value()));
    }
  }
  VanishingTrace out;
  out.band = band;
  out.grid = grid;
  out.scales = schedule.scales();
  for (const auto& s : sources) out.sources.push_back(s.identity());
  out.per_source.assign(schedule.size(), std::vector<double>(sources.size(), 0.0));

  detail::parallel_for(sources.size(), par, [&](std::size_t j) {
    const OrbitSignal signal = orbit_signal(obs, sources[j], schedule.hull());
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      const auto sweep = fourier_bohr_sweep(signal, schedule.window(i), grid);
      double m = 0.0;
      for (std::size_t k = 0; k < grid; ++k) {
        if (band.contains(static_cast<double>(k) / static_cast<double>(grid))) m = std::max(m, std::abs(sweep[k]));
      }
      out.per_source[i][j] = m;
    }
  });
  for (const auto& row : out.per_source) out.sup.push_back(*std::max_element(row.begin(), row.end()));
  for (std::size_t i = 1; i < out.sup.size(); ++i) {
    out.nonincreasing = out.nonincreasing && out.sup[i] <= out.sup[i - 1];
    out.strictly_decreasing = out.strictly_decreasing && out.sup[i] < out.sup[i - 1];
  }
  return out;
}

}  // namespace ww
