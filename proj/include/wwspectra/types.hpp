#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ww {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed descriptor, flag, or input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A signal or symbol array does not cover the requested window.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// Index, scale, grid, or parameter outside its admissible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A point source that cannot be built as described (non-primitive rules,
/// illegal seed, empty word, ...).
class SourceError : public Error {
 public:
  using Error::Error;
};

/// A point of the circle [0,1), standing for the character t -> e^{2 pi i theta t}.
class Frequency {
 public:
  constexpr Frequency() = default;
  explicit Frequency(double theta) : theta_(wrap(theta)) {}

  double value() const { return theta_; }

  Frequency operator+(Frequency o) const { return Frequency(theta_ + o.theta_); }
  Frequency operator-(Frequency o) const { return Frequency(theta_ - o.theta_); }
  Frequency operator-() const { return Frequency(-theta_); }
  bool operator==(const Frequency&) const = default;
  auto operator<=>(const Frequency&) const = default;

  static double wrap(double x) {
    double r = x - std::floor(x);
    return r >= 1.0 ? 0.0 : r;
  }

 private:
  double theta_ = 0.0;
};

/// Distance on the circle R/Z.
inline double circular_distance(Frequency a, Frequency b) {
  const double d = std::abs(a.value() - b.value());
  return std::min(d, 1.0 - d);
}

/// Half-open integer interval [lo, hi).
struct Window {
  std::int64_t lo = 0;
  std::int64_t hi = 1;

  Window() = default;
  Window(std::int64_t lo_, std::int64_t hi_) : lo(lo_), hi(hi_) {
    if (lo >= hi) {
      throw RangeError("empty window [" + std::to_string(lo) + "," + std::to_string(hi) + ")");
    }
  }

  /// The closed interval [a, b].
  static Window closed(std::int64_t a, std::int64_t b) { return Window(a, b + 1); }

  std::int64_t size() const { return hi - lo; }
  bool contains(std::int64_t t) const { return lo <= t && t < hi; }
  bool contains(const Window& w) const { return lo <= w.lo && w.hi <= hi; }
  Window shifted(std::int64_t s) const { return Window(lo + s, hi + s); }
  Window inflated(std::int64_t r) const { return Window(lo - r, hi + r); }
  bool operator==(const Window&) const = default;
};

inline std::string to_string(const Window& w) {
  return "[" + std::to_string(w.lo) + "," + std::to_string(w.hi) + ")";
}

enum class ScheduleKind { symmetric, one_sided, custom };

inline const char* to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::symmetric: return "symmetric";
    case ScheduleKind::one_sided: return "one-sided";
    case ScheduleKind::custom: return "custom";
  }
  return "?";
}

/// Nested averaging windows A_1, A_2, ... of strictly increasing size.
///
/// symmetric: A_n = [-N_n, N_n];  one-sided: A_n = [0, N_n);  custom: explicit
/// windows, whose scales are their sizes. Indices are 0-based.
class FolnerSchedule {
 public:
  static FolnerSchedule symmetric(std::vector<std::int64_t> scales) {
    return FolnerSchedule(ScheduleKind::symmetric, std::move(scales));
  }
  static FolnerSchedule one_sided(std::vector<std::int64_t> scales) {
    return FolnerSchedule(ScheduleKind::one_sided, std::move(scales));
  }
  static FolnerSchedule custom(std::vector<Window> windows) {
    if (windows.empty()) throw RangeError("custom schedule needs at least one window");
    FolnerSchedule s;
    s.kind_ = ScheduleKind::custom;
    for (std::size_t i = 0; i < windows.size(); ++i) {
      if (i > 0 && windows[i].size() <= windows[i - 1].size()) {
        throw RangeError("custom schedule window sizes must be strictly increasing");
      }
      s.scales_.push_back(windows[i].size());
    }
    s.windows_ = std::move(windows);
    return s;
  }

  /// One-sided windows [0, 2^e) for e = first, first+step, ..., last.
  static FolnerSchedule dyadic_one_sided(int first, int last, int step = 1) {
    return one_sided(dyadic(first, last, step));
  }
  /// Symmetric windows [-2^e, 2^e].
  static FolnerSchedule dyadic_symmetric(int first, int last, int step = 1) {
    return symmetric(dyadic(first, last, step));
  }

  /// {2^12, 2^14, ..., 2^20}, one-sided.
  static FolnerSchedule default_one_sided() { return dyadic_one_sided(12, 20, 2); }
  /// {2^11, 2^13, ..., 2^19}, symmetric (window sizes 2^12+1, ..., 2^20+1).
  static FolnerSchedule default_symmetric() { return dyadic_symmetric(11, 19, 2); }

  ScheduleKind kind() const { return kind_; }
  const std::vector<std::int64_t>& scales() const { return scales_; }
  std::size_t size() const { return scales_.size(); }

  Window window(std::size_t index) const {
    if (index >= scales_.size()) {
      throw RangeError("schedule index " + std::to_string(index) + " out of range (size " +
                       std::to_string(scales_.size()) + ")");
    }
    const std::int64_t n = scales_[index];
    switch (kind_) {
      case ScheduleKind::symmetric: return Window::closed(-n, n);
      case ScheduleKind::one_sided: return Window(0, n);
      case ScheduleKind::custom: return windows_[index];
    }
    return windows_[index];
  }

  Window largest_window() const { return window(size() - 1); }

  /// Indices of the last min(count, size()) scales, ascending.
  std::vector<std::size_t> top_indices(std::size_t count) const {
    std::vector<std::size_t> out;
    const std::size_t k = std::min(count, size());
    for (std::size_t i = size() - k; i < size(); ++i) out.push_back(i);
    return out;
  }

  /// Smallest window containing every A_n.
  Window hull() const {
    Window h = window(0);
    for (std::size_t i = 1; i < size(); ++i) {
      const Window w = window(i);
      h = Window(std::min(h.lo, w.lo), std::max(h.hi, w.hi));
    }
    return h;
  }

  bool operator==(const FolnerSchedule&) const = default;

 private:
  FolnerSchedule() = default;
  FolnerSchedule(ScheduleKind kind, std::vector<std::int64_t> scales)
      : kind_(kind), scales_(std::move(scales)) {
    if (scales_.empty()) throw RangeError("schedule needs at least one scale");
    for (std::size_t i = 0; i < scales_.size(); ++i) {
      if (scales_[i] <= 0) throw RangeError("schedule scales must be positive");
      if (i > 0 && scales_[i] <= scales_[i - 1]) {
        throw RangeError("schedule scales must be strictly increasing");
      }
    }
  }

  static std::vector<std::int64_t> dyadic(int first, int last, int step) {
    if (step <= 0 || first < 0 || last > 40 || first > last) {
      throw RangeError("invalid dyadic scale range");
    }
    std::vector<std::int64_t> out;
    for (int e = first; e <= last; e += step) out.push_back(std::int64_t{1} << e);
    return out;
  }

  ScheduleKind kind_ = ScheduleKind::one_sided;
  std::vector<std::int64_t> scales_;
  std::vector<Window> windows_;
};

}  // namespace ww
