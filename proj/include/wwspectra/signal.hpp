#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "observable.hpp"
#include "source.hpp"
#include "types.hpp"

namespace ww {

/// Finite-window coding t -> f(t.x), values[i] at t = window.lo + i.
class OrbitSignal {
 public:
  OrbitSignal(Window window, std::vector<Complex> values, std::string source_id = {}, std::string observable_id = {})
      : window_(window), values_(std::move(values)), source_id_(std::move(source_id)), observable_id_(std::move(observable_id)) {
    if (static_cast<std::int64_t>(values_.size()) != window_.size()) {
      throw RangeError("signal length does not match window size");
    }
  }

  /// Samples fn(t) on the window.
  static OrbitSignal from_function(Window window, const std::function<Complex(std::int64_t)>& fn, std::string id = "synthetic") {
    std::vector<Complex> v(static_cast<std::size_t>(window.size()));
    for (std::int64_t t = window.lo; t < window.hi; ++t) v[static_cast<std::size_t>(t - window.lo)] = fn(t);
    return OrbitSignal(window, std::move(v), std::move(id), "");
  }

  const Window& window() const { return window_; }
  const std::vector<Complex>& values() const { return values_; }
  const std::string& source_id() const { return source_id_; }
  const std::string& observable_id() const { return observable_id_; }

  bool covers(const Window& w) const { return window_.contains(w); }

  void require(const Window& w) const {
    if (!covers(w)) {
      throw CoverageError("signal on " + to_string(window_) + " does not cover " + to_string(w));
    }
  }

  Complex at(std::int64_t t) const {
    if (!window_.contains(t)) throw CoverageError("signal has no value at t=" + std::to_string(t));
    return values_[static_cast<std::size_t>(t - window_.lo)];
  }

  /// Values on a sub-window.
  std::span<const Complex> slice(const Window& w) const {
    require(w);
    return std::span<const Complex>(values_).subspan(static_cast<std::size_t>(w.lo - window_.lo), static_cast<std::size_t>(w.size()));
  }

 private:
  Window window_;
  std::vector<Complex> values_;
  std::string source_id_;
  std::string observable_id_;
};

/// Materializes the window of a signal; lets spectral routines run on
/// orbit codings and synthetic signals alike.
using SignalFn = std::function<OrbitSignal(const Window&)>;

/// values[i] = obs(local word of x around lo + i), i.e. f((lo+i).x).
inline OrbitSignal orbit_signal(const CylinderObservable& obs, const PointSource& source, const Window& window) {
  const int r = obs.radius();
  const Symbols sym = source.symbols(window.inflated(r));
  const std::size_t a = obs.alphabet().size();
  const std::size_t len = static_cast<std::size_t>(obs.word_length());
  std::size_t modulus = 1;
  for (std::size_t i = 0; i + 1 < len; ++i) modulus *= a;  // a^(len-1)

  std::vector<std::size_t> idx(sym.size());
  for (std::size_t i = 0; i < sym.size(); ++i) {
    const int k = obs.letter_index(sym[i]);
    if (k < 0) {
      throw ParseError(std::string("symbol '") + sym[i] + "' from " + source.identity() + " is outside the alphabet of " + obs.name());
    }
    idx[i] = static_cast<std::size_t>(k);
  }

  std::vector<Complex> values(static_cast<std::size_t>(window.size()));
  std::size_t code = 0;
  for (std::size_t i = 0; i + 1 < len; ++i) code = code * a + idx[i];
  for (std::size_t i = 0; i < values.size(); ++i) {
    code = code * a + idx[i + len - 1];
    values[i] = obs.at_code(code);
    code %= modulus;
  }
  return OrbitSignal(window, std::move(values), source.identity(), obs.name());
}

inline SignalFn signal_fn(const CylinderObservable& obs, const PointSource& source) {
  return [obs, source](const Window& w) { return orbit_signal(obs, source, w); };
}

}  // namespace ww
