#pragma once

// Weighted Dirac combs on Z: translation bounds, finite-window
// autocorrelation, Bragg intensities as squared Fourier–Bohr amplitudes,
// and the consistent-phase comparison against the autocorrelation.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "averaging.hpp"
#include "detail/fft.hpp"
#include "spectrum.hpp"

namespace ww {

namespace detail {

inline double sliding_max_mass(const std::vector<Complex>& w, std::int64_t u) {
  // prefix[i] = sum_{j<i} |w_j|; positions outside the window carry zero mass.
  const auto n = static_cast<std::int64_t>(w.size());
  std::vector<double> prefix(w.size() + 1, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) prefix[i + 1] = prefix[i] + std::abs(w[i]);
  double best = 0.0;
  for (std::int64_t t = 0; t < n; ++t) {
    const std::int64_t a = std::max<std::int64_t>(0, t - u);
    const std::int64_t b = std::min<std::int64_t>(n, t + u + 1);
    best = std::max(best, prefix[static_cast<std::size_t>(b)] - prefix[static_cast<std::size_t>(a)]);
  }
  return best;
}

}  // namespace detail

/// Weights w_t on a window (zero outside), with ||mu||_U cached for one radius.
class WeightedComb {
 public:
  WeightedComb(Window window, std::vector<Complex> weights, std::int64_t u_radius = 0)
      : window_(window), weights_(std::move(weights)), u_radius_(u_radius) {
    if (static_cast<std::int64_t>(weights_.size()) != window_.size()) throw RangeError("comb weights do not match window size");
    if (u_radius_ < 0) throw RangeError("U-radius must be nonnegative");
    norm_u_ = detail::sliding_max_mass(weights_, u_radius_);
  }

  const Window& window() const { return window_; }
  const std::vector<Complex>& weights() const { return weights_; }
  std::int64_t u_radius() const { return u_radius_; }
  double norm_u() const { return norm_u_; }

  Complex at(std::int64_t t) const { return window_.contains(t) ? weights_[static_cast<std::size_t>(t - window_.lo)] : Complex{}; }

  WeightedComb scaled(Complex c) const {
    std::vector<Complex> w = weights_;
    for (auto& v : w) v *= c;
    return WeightedComb(window_, std::move(w), u_radius_);
  }

  OrbitSignal as_signal() const { return OrbitSignal(window_, weights_, "comb", "weights"); }

  bool operator==(const WeightedComb&) const = default;

 private:
  Window window_;
  std::vector<Complex> weights_;
  std::int64_t u_radius_ = 0;
  double norm_u_ = 0.0;
};

inline WeightedComb comb_from_symbols(const Symbols& symbols, const std::map<char, Complex>& weight_map, const Window& window) {
  if (static_cast<std::int64_t>(symbols.size()) != window.size()) throw RangeError("symbol count does not match window size");
  std::vector<Complex> w(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const auto it = weight_map.find(symbols[i]);
    if (it == weight_map.end()) throw ParseError(std::string("no weight for symbol '") + symbols[i] + "'");
    w[i] = it->second;
  }
  return WeightedComb(window, std::move(w));
}

/// Reads rows "position,re,im" (an optional header row starting with
/// "position" is skipped). The window spans the smallest to largest position.
inline WeightedComb comb_from_csv(std::istream& in) {
  std::map<std::int64_t, Complex> atoms;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    if (lineno == 1 && line.rfind("position", 0) == 0) continue;
    const auto cols = detail::split(line, ',');
    if (cols.size() != 3) throw ParseError("comb CSV line " + std::to_string(lineno) + ": expected position,re,im");
    const auto pos = detail::parse_integer(cols[0], "position");
    if (atoms.count(pos)) throw ParseError("comb CSV line " + std::to_string(lineno) + ": duplicate position " + cols[0]);
    atoms[pos] = Complex(detail::parse_real(cols[1], "re"), detail::parse_real(cols[2], "im"));
  }
  if (atoms.empty()) throw ParseError("comb CSV has no rows");
  const Window w(atoms.begin()->first, atoms.rbegin()->first + 1);
  std::vector<Complex> weights(static_cast<std::size_t>(w.size()));
  for (const auto& [p, v] : atoms) weights[static_cast<std::size_t>(p - w.lo)] = v;
  return WeightedComb(w, std::move(weights));
}

/// sup_t sum_{|s-t| <= U} |w_s| over t in the window.
inline double translation_bound(const WeightedComb& comb, std::int64_t u_radius) {
  if (u_radius < 0) throw RangeError("U-radius must be nonnegative");
  return detail::sliding_max_mass(comb.weights(), u_radius);
}

struct Autocorrelation {
  std::int64_t max_lag = 0;
  std::int64_t scale = 0;      // N = window size
  std::vector<Complex> values; // eta(s) at index s + max_lag

  Complex at(std::int64_t s) const {
    if (s < -max_lag || s > max_lag) throw RangeError("lag " + std::to_string(s) + " outside [-S, S]");
    return values[static_cast<std::size_t>(s + max_lag)];
  }
  bool operator==(const Autocorrelation&) const = default;
};

/// eta(s) = (1/N) sum_{t, t+s in window} w_{t+s} conj(w_t) for |s| <= S,
/// via one zero-padded FFT of length >= N + S.
inline Autocorrelation autocorrelation(const WeightedComb& comb, std::int64_t max_lag) {
  const std::int64_t n = comb.window().size();
  if (max_lag < 0 || 4 * max_lag > n) throw RangeError("max lag must satisfy 0 <= S <= N/4");
  const std::size_t len = std::bit_ceil(static_cast<std::size_t>(n + max_lag));
  std::vector<Complex> data(len);
  std::copy(comb.weights().begin(), comb.weights().end(), data.begin());
  detail::fft_inplace(data, -1);
  for (auto& v : data) v = Complex(std::norm(v), 0.0);
  detail::fft_inplace(data, +1);

  Autocorrelation out;
  out.max_lag = max_lag;
  out.scale = n;
  out.values.resize(static_cast<std::size_t>(2 * max_lag + 1));
  const double norm = static_cast<double>(len) * static_cast<double>(n);
  out.values[static_cast<std::size_t>(max_lag)] = Complex(mean_power(comb.weights()), 0.0);
  for (std::int64_t s = 1; s <= max_lag; ++s) {
    const Complex v = data[static_cast<std::size_t>(s)] / norm;
    out.values[static_cast<std::size_t>(max_lag + s)] = v;
    out.values[static_cast<std::size_t>(max_lag - s)] = std::conj(v);
  }
  return out;
}

/// Fejér-weighted coefficient of the autocorrelation at theta,
///   sum_{|s|<=S} (1 - |s|/(S+1)) eta~(s) e^{-2 pi i theta s} / (S+1),
/// where eta~(s) = eta(s) N / (N - |s|) undoes the overlap shrinkage.
inline Complex autocorrelation_coefficient(const Autocorrelation& eta, Frequency theta) {
  const std::int64_t big_s = eta.max_lag;
  Complex acc{};
  for (std::int64_t s = -big_s; s <= big_s; ++s) {
    const double fejer = 1.0 - static_cast<double>(std::abs(s)) / static_cast<double>(big_s + 1);
    const double overlap = static_cast<double>(eta.scale) / static_cast<double>(eta.scale - std::abs(s));
    acc += fejer * overlap * eta.at(s) * detail::conj_character(theta.value(), s);
  }
  return acc / static_cast<double>(big_s + 1);
}

/// Minimum over the grid k/G, G = bit_ceil(4S+2), of the Fejér-weighted
/// transform of eta (1/N normalization). Nonnegative up to rounding.
inline double fejer_transform_minimum(const Autocorrelation& eta) {
  const std::int64_t big_s = eta.max_lag;
  const std::size_t g = std::bit_ceil(static_cast<std::size_t>(4 * big_s + 2));
  std::vector<Complex> data(g);
  for (std::int64_t s = -big_s; s <= big_s; ++s) {
    const double fejer = 1.0 - static_cast<double>(std::abs(s)) / static_cast<double>(big_s + 1);
    const auto idx = static_cast<std::size_t>((s % static_cast<std::int64_t>(g) + static_cast<std::int64_t>(g)) % static_cast<std::int64_t>(g));
    data[idx] = fejer * eta.at(s);
  }
  detail::fft_inplace(data, -1);
  double m = data[0].real();
  for (const auto& v : data) m = std::min(m, v.real());
  return m;
}

struct BraggPeak {
  Frequency theta;
  double intensity = 0.0;         // |a_theta(mu)|^2
  double phase = 0.0;             // arg a_theta(mu)
  Complex autocorrelation_coefficient{};
  double consistent_phase_residual = 0.0;  // |intensity - a_theta(eta)|
  bool operator==(const BraggPeak&) const = default;
};

struct DiffractionParams {
  DetectionParams detection{};
  std::int64_t max_lag = 4096;
  int kernel_radius = 0;  // convolve with the uniform average over [-r, r]
};

struct DiffractionReport {
  SpectrumReport spectrum;
  std::vector<BraggPeak> peaks;
  std::int64_t max_lag = 0;
  std::int64_t scale = 0;
  int kernel_radius = 0;
  double total_intensity = 0.0;
  double positivity_minimum = 0.0;
  std::string lag_weighting = "fejer";
  bool operator==(const DiffractionReport&) const = default;
};

/// Local mean of a weight map over [-r, r]; the comb mu * phi for the
/// uniform kernel phi of radius r, as a cylinder observable.
inline CylinderObservable smoothed_weights(const std::string& alphabet, const std::map<char, Complex>& weights, int kernel_radius) {
  const CylinderObservable base = CylinderObservable::letter_map(alphabet, weights);
  if (kernel_radius == 0) return base;
  const int r = kernel_radius;
  return CylinderObservable::from_function(
      alphabet, r,
      [&](std::string_view w) {
        Complex acc{};
        for (char c : w) acc += weights.at(c);
        return acc / static_cast<double>(2 * r + 1);
      },
      base.name() + "*avg" + std::to_string(r));
}

inline DiffractionReport diffraction_report(const SignalFn& materialize, const FolnerSchedule& schedule, const DiffractionParams& params,
                                            Parallelism par = {}) {
  DiffractionReport rep;
  rep.max_lag = params.max_lag;
  rep.kernel_radius = params.kernel_radius;
  rep.spectrum = detect_point_spectrum(materialize, schedule, params.detection, par);
  const Window top = schedule.largest_window();
  rep.scale = top.size();
  const OrbitSignal signal = materialize(top);
  const WeightedComb comb(top, signal.values());
  const Autocorrelation eta = autocorrelation(comb, params.max_lag);
  rep.positivity_minimum = fejer_transform_minimum(eta);
  rep.peaks.resize(rep.spectrum.candidates.size());
  detail::parallel_for(rep.peaks.size(), par, [&](std::size_t j) {
    const auto& c = rep.spectrum.candidates[j];
    BraggPeak p;
    p.theta = c.theta;
    p.intensity = c.amplitude * c.amplitude;
    p.phase = c.phase;
    p.autocorrelation_coefficient = autocorrelation_coefficient(eta, c.theta);
    p.consistent_phase_residual = std::abs(Complex(p.intensity) - p.autocorrelation_coefficient);
    rep.peaks[j] = p;
  });
  for (const auto& p : rep.peaks) rep.total_intensity += p.intensity;
  return rep;
}

inline DiffractionReport diffraction_report(const PointSource& source, const std::map<char, Complex>& weights, const FolnerSchedule& schedule,
                                            const DiffractionParams& params, Parallelism par = {}) {
  const CylinderObservable obs = smoothed_weights(source.alphabet(), weights, params.kernel_radius);
  return diffraction_report(signal_fn(obs, source), schedule, params, par);
}

/// Nested windows [lo, lo + N/16), [lo, lo + N/4), [lo, hi) inside a single
/// ingested comb, for running the multiscale detector on it.
inline FolnerSchedule comb_schedule(const WeightedComb& comb) {
  const Window w = comb.window();
  const std::int64_t n = w.size();
  if (n < 64) throw RangeError("comb too short for a multiscale schedule (need >= 64 sites)");
  return FolnerSchedule::custom({Window(w.lo, w.lo + n / 16), Window(w.lo, w.lo + n / 4), w});
}

inline SignalFn comb_signal_fn(const WeightedComb& comb) {
  return [comb](const Window& w) {
    comb.as_signal().require(w);
    return OrbitSignal::from_function(w, [&](std::int64_t t) { return comb.at(t); }, "comb");
  };
}

}  // namespace ww
