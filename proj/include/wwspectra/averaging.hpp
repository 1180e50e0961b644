#pragma once

// Birkhoff / Wiener–Wintner averages over finite windows.
//
//   a_theta^A(h) = (1/|A|) sum_{t in A} h(t) e^{-2 pi i theta t}
//
// Every sum goes through the fixed pairwise tree in detail/summation.hpp.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "detail/fft.hpp"
#include "detail/parallel.hpp"
#include "detail/phase.hpp"
#include "detail/summation.hpp"
#include "folner.hpp"
#include "signal.hpp"
#include "types.hpp"

namespace ww {

namespace detail {

/// Plain complex product without the C99 Annex G inf/nan recovery path.
inline Complex mul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

inline constexpr std::size_t kPhaseBlock = 256;
static_assert(kPhaseBlock % kLeafSize == 0);

/// Sum of values[i] * e^{-2 pi i theta (t0 + i)}. Each block of kPhaseBlock
/// samples gets an exactly evaluated base phase; inside the block the phase
/// comes from a table of powers, each one rounding away from exact. Leaves
/// use four fixed accumulator lanes.
inline Complex twisted_sum(std::span<const Complex> values, std::int64_t t0, double theta) {
  std::array<Complex, 16> coarse{}, fine{};
  for (std::int64_t j = 0; j < 16; ++j) {
    coarse[static_cast<std::size_t>(j)] = conj_character(theta, 16 * j);
    fine[static_cast<std::size_t>(j)] = conj_character(theta, j);
  }
  std::array<double, kPhaseBlock> step_re{}, step_im{};
  for (std::size_t j = 0; j < kPhaseBlock; ++j) {
    const Complex w = mul(coarse[j / 16], fine[j % 16]);
    step_re[j] = w.real();
    step_im[j] = w.imag();
  }
  std::size_t cached_block = static_cast<std::size_t>(-1);
  Complex cached_base{};
  return pairwise_reduce<Complex>(0, values.size(), [&](std::size_t b, std::size_t e) {
    const std::size_t block = b / kPhaseBlock;
    if (block != cached_block) {
      cached_block = block;
      cached_base = conj_character(theta, t0 + static_cast<std::int64_t>(block * kPhaseBlock));
    }
    const double* v = reinterpret_cast<const double*>(values.data() + b);
    const double* sr = step_re.data() + (b - block * kPhaseBlock);
    const double* si = step_im.data() + (b - block * kPhaseBlock);
    const std::size_t n = e - b;
    double r0 = 0, r1 = 0, r2 = 0, r3 = 0, i0 = 0, i1 = 0, i2 = 0, i3 = 0;
    bool real = true;
    for (std::size_t j = 0; j < n; ++j) real &= v[2 * j + 1] == 0.0;
    std::size_t i = 0;
    if (real) {
      for (; i + 4 <= n; i += 4) {
        r0 += v[2 * i] * sr[i];
        i0 += v[2 * i] * si[i];
        r1 += v[2 * i + 2] * sr[i + 1];
        i1 += v[2 * i + 2] * si[i + 1];
        r2 += v[2 * i + 4] * sr[i + 2];
        i2 += v[2 * i + 4] * si[i + 2];
        r3 += v[2 * i + 6] * sr[i + 3];
        i3 += v[2 * i + 6] * si[i + 3];
      }
    }
    for (; i + 4 <= n; i += 4) {
      r0 += v[2 * i] * sr[i] - v[2 * i + 1] * si[i];
      i0 += v[2 * i] * si[i] + v[2 * i + 1] * sr[i];
      r1 += v[2 * i + 2] * sr[i + 1] - v[2 * i + 3] * si[i + 1];
      i1 += v[2 * i + 2] * si[i + 1] + v[2 * i + 3] * sr[i + 1];
      r2 += v[2 * i + 4] * sr[i + 2] - v[2 * i + 5] * si[i + 2];
      i2 += v[2 * i + 4] * si[i + 2] + v[2 * i + 5] * sr[i + 2];
      r3 += v[2 * i + 6] * sr[i + 3] - v[2 * i + 7] * si[i + 3];
      i3 += v[2 * i + 6] * si[i + 3] + v[2 * i + 7] * sr[i + 3];
    }
    for (; i < n; ++i) {
      r0 += v[2 * i] * sr[i] - v[2 * i + 1] * si[i];
      i0 += v[2 * i] * si[i] + v[2 * i + 1] * sr[i];
    }
    return mul(Complex((r0 + r1) + (r2 + r3), (i0 + i1) + (i2 + i3)), cached_base);
  });
}

/// out[i] += coeff * e^{+2 pi i theta (t0 + i)}, blocked like twisted_sum.
inline void accumulate_character(std::span<Complex> out, std::int64_t t0, double theta, Complex coeff) {
  std::array<Complex, kLeafSize> step{};
  for (std::size_t j = 0; j < kLeafSize; ++j) step[j] = character(theta, static_cast<std::int64_t>(j));
  for (std::size_t b = 0; b < out.size(); b += kLeafSize) {
    const Complex base = mul(coeff, character(theta, t0 + static_cast<std::int64_t>(b)));
    const std::size_t e = std::min(out.size(), b + kLeafSize);
    for (std::size_t i = b; i < e; ++i) out[i] += mul(base, step[i - b]);
  }
}

}  // namespace detail

/// Coefficient of raw values sampled at t0, t0 + 1, ...
inline Complex fourier_bohr_at(std::span<const Complex> values, std::int64_t t0, Frequency theta) {
  const auto n = static_cast<double>(values.size());
  if (theta.value() == 0.0) return detail::pairwise_sum(values) / n;
  return detail::twisted_sum(values, t0, theta.value()) / n;
}

inline Complex fourier_bohr_at(const OrbitSignal& signal, const Window& window, Frequency theta) {
  return fourier_bohr_at(signal.slice(window), window.lo, theta);
}

/// a_{k/M} for k = 0..M-1 via one zero-padded FFT of length M >= |window|.
inline std::vector<Complex> fourier_bohr_sweep(const OrbitSignal& signal, const Window& window, std::size_t grid) {
  if (!std::has_single_bit(grid)) throw RangeError("sweep grid must be a power of two");
  if (static_cast<std::int64_t>(grid) < window.size()) {
    throw RangeError("sweep grid " + std::to_string(grid) + " is smaller than the window size " + std::to_string(window.size()));
  }
  const auto v = signal.slice(window);
  std::vector<Complex> data(grid);
  std::copy(v.begin(), v.end(), data.begin());
  detail::fft_inplace(data, -1);
  const auto m = static_cast<std::int64_t>(grid);
  const std::int64_t lo_mod = ((window.lo % m) + m) % m;
  const double inv_n = 1.0 / static_cast<double>(window.size());
  for (std::int64_t k = 0; k < m; ++k) {
    // e^{-2 pi i k lo / M}, reduced exactly in integers.
    const std::int64_t r = static_cast<std::int64_t>((static_cast<unsigned __int128>(k) * static_cast<unsigned __int128>(lo_mod)) %
                                                     static_cast<unsigned __int128>(m));
    const double a = -2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(m);
    data[static_cast<std::size_t>(k)] *= Complex(std::cos(a), std::sin(a)) * inv_n;
  }
  return data;
}

/// (1/|A|) sum f(t) conj(g(t))
inline Complex correlation_average(const OrbitSignal& f, const OrbitSignal& g, const Window& window) {
  const auto fv = f.slice(window);
  const auto gv = g.slice(window);
  const Complex s = detail::pairwise_reduce<Complex>(0, fv.size(), [&](std::size_t b, std::size_t e) {
    Complex acc{};
    for (std::size_t i = b; i < e; ++i) acc += detail::mul(fv[i], std::conj(gv[i]));
    return acc;
  });
  return s / static_cast<double>(window.size());
}

inline double mean_power(std::span<const Complex> v) {
  const double s = detail::pairwise_reduce<double>(0, v.size(), [&](std::size_t b, std::size_t e) {
    double acc = 0.0;
    for (std::size_t i = b; i < e; ++i) acc += v[i].real() * v[i].real() + v[i].imag() * v[i].imag();
    return acc;
  });
  return s / static_cast<double>(v.size());
}

/// (1/|A|) sum |h(t)|^2
inline double mean_power(const OrbitSignal& signal, const Window& window) { return mean_power(signal.slice(window)); }

enum class TraceVerdict { converged, vanishing, undecided };

inline const char* to_string(TraceVerdict v) {
  switch (v) {
    case TraceVerdict::converged: return "converged";
    case TraceVerdict::vanishing: return "vanishing";
    case TraceVerdict::undecided: return "undecided";
  }
  return "?";
}

struct TraceTolerances {
  double converge = 1e-3;  // pairwise agreement of the last three estimates
  double vanish = 2e-2;    // |e_k| below this, with |e_i| nonincreasing over the last three
  bool operator==(const TraceTolerances&) const = default;
};

struct CoefficientTrace {
  Frequency theta;
  std::vector<std::int64_t> scales;
  std::vector<Complex> estimates;
  std::vector<double> deltas;  // |e_i - e_{i-1}|, first entry 0
  TraceVerdict verdict = TraceVerdict::undecided;
  Complex value{};             // estimate at the largest scale when converged, else 0
  TraceTolerances tolerances;
  bool operator==(const CoefficientTrace&) const = default;
};

/// Verdict policy on a sequence of estimates over growing scales.
/// Vanishing is checked first: a vanishing sequence also agrees with itself.
inline TraceVerdict classify_estimates(const std::vector<Complex>& e, const TraceTolerances& tol) {
  const std::size_t k = e.size();
  if (k < 3) return TraceVerdict::undecided;
  const double a0 = std::abs(e[k - 3]), a1 = std::abs(e[k - 2]), a2 = std::abs(e[k - 1]);
  if (a2 < tol.vanish && a1 <= a0 && a2 <= a1) return TraceVerdict::vanishing;
  const double d = std::max({std::abs(e[k - 1] - e[k - 2]), std::abs(e[k - 2] - e[k - 3]), std::abs(e[k - 1] - e[k - 3])});
  if (d < tol.converge) return TraceVerdict::converged;
  return TraceVerdict::undecided;
}

inline CoefficientTrace coefficient_trace(const SignalFn& materialize, const FolnerSchedule& schedule, Frequency theta,
                                          const TraceTolerances& tol = {}) {
  CoefficientTrace trace;
  trace.theta = theta;
  trace.tolerances = tol;
  const OrbitSignal signal = materialize(schedule.hull());
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const Window w = schedule.window(i);
    trace.scales.push_back(schedule.scales()[i]);
    trace.estimates.push_back(fourier_bohr_at(signal, w, theta));
    trace.deltas.push_back(i == 0 ? 0.0 : std::abs(trace.estimates[i] - trace.estimates[i - 1]));
  }
  trace.verdict = classify_estimates(trace.estimates, tol);
  if (trace.verdict == TraceVerdict::converged) trace.value = trace.estimates.back();
  return trace;
}

inline CoefficientTrace coefficient_trace(const PointSource& source, const CylinderObservable& obs, const FolnerSchedule& schedule,
                                          Frequency theta, const TraceTolerances& tol = {}) {
  return coefficient_trace(signal_fn(obs, source), schedule, theta, tol);
}

struct SeminormEstimate {
  std::vector<std::int64_t> scales;
  std::vector<double> values;  // sqrt of the windowed quadratic means
  double limsup = 0.0;         // max over the last ceil(k/2) values
  bool operator==(const SeminormEstimate&) const = default;
};

inline SeminormEstimate besicovitch_seminorm(const OrbitSignal& signal, const FolnerSchedule& schedule) {
  SeminormEstimate est;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    est.scales.push_back(schedule.scales()[i]);
    est.values.push_back(std::sqrt(mean_power(signal, schedule.window(i))));
  }
  const std::size_t tail = (est.values.size() + 1) / 2;
  est.limsup = *std::max_element(est.values.end() - static_cast<std::ptrdiff_t>(tail), est.values.end());
  return est;
}

inline SeminormEstimate besicovitch_seminorm(const PointSource& source, const CylinderObservable& obs, const FolnerSchedule& schedule) {
  return besicovitch_seminorm(orbit_signal(obs, source, schedule.hull()), schedule);
}

}  // namespace ww
