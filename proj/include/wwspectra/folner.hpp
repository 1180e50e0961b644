#pragma once

// Følner audits on Z: symmetric-difference defects, the Shulman
// (temperedness) ratio, intersection/union schedules, boundary energy.
// All set arithmetic is exact integer interval arithmetic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "signal.hpp"
#include "types.hpp"

namespace ww {

/// Finite union of half-open integer intervals, kept sorted, disjoint and
/// non-adjacent.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(const Window& w) { parts_.push_back(w); }

  void insert(const Window& w) {
    std::vector<Window> out;
    Window cur = w;
    bool placed = false;
    for (const auto& p : parts_) {
      if (p.hi < cur.lo) {
        out.push_back(p);
      } else if (cur.hi < p.lo) {
        if (!placed) {
          out.push_back(cur);
          placed = true;
        }
        out.push_back(p);
      } else {
        cur = Window(std::min(cur.lo, p.lo), std::max(cur.hi, p.hi));
      }
    }
    if (!placed) out.push_back(cur);
    parts_ = std::move(out);
  }

  std::int64_t cardinality() const {
    std::int64_t n = 0;
    for (const auto& p : parts_) n += p.size();
    return n;
  }

  const std::vector<Window>& parts() const { return parts_; }

 private:
  std::vector<Window> parts_;
};

/// {a - b : a in A, b in B}
inline Window difference_set(const Window& a, const Window& b) { return Window(a.lo - b.hi + 1, a.hi - b.lo); }

/// |A ∩ B| for intervals.
inline std::int64_t overlap(const Window& a, const Window& b) {
  return std::max<std::int64_t>(0, std::min(a.hi, b.hi) - std::max(a.lo, b.lo));
}

/// |A △ (t + A)| / |A_n|
inline double folner_defect(const FolnerSchedule& schedule, std::int64_t t, std::size_t index) {
  const Window a = schedule.window(index);
  const std::int64_t sym = 2 * (a.size() - overlap(a, a.shifted(t)));
  return static_cast<double>(sym) / static_cast<double>(a.size());
}

enum class TemperedVerdict { tempered_up_to_range, ratio_diverging };

inline const char* to_string(TemperedVerdict v) {
  return v == TemperedVerdict::tempered_up_to_range ? "tempered-up-to-range" : "ratio-diverging";
}

struct ShulmanRow {
  std::size_t n = 0;             // 1-based scale index
  std::int64_t window_size = 0;  // |A_n|
  std::int64_t union_size = 0;   // |U_{k<n} (A_n - A_k)|
  double ratio = 0.0;            // rho_n
  bool operator==(const ShulmanRow&) const = default;
};

struct TemperednessReport {
  std::vector<ShulmanRow> rows;  // n = 2 .. n_max
  double constant = 0.0;         // max rho_n
  TemperedVerdict verdict = TemperedVerdict::tempered_up_to_range;
  bool operator==(const TemperednessReport&) const = default;
};

/// Shulman ratios rho_n = |U_{k=1}^{n-1} (A_n - A_k)| / |A_n| for n = 2..n_max.
///
/// The verdict is ratio-diverging when rho_n rises strictly over the last
/// ceil(n_max/2) scales and rho_{n_max} > 2 rho_{ceil(n_max/2)}.
inline TemperednessReport shulman_trace(const FolnerSchedule& schedule, std::size_t n_max) {
  if (n_max < 2) throw RangeError("shulman_trace needs n_max >= 2");
  if (n_max > schedule.size()) throw RangeError("n_max exceeds schedule length");
  TemperednessReport report;
  for (std::size_t n = 2; n <= n_max; ++n) {
    const Window an = schedule.window(n - 1);
    IntervalSet u;
    for (std::size_t k = 1; k < n; ++k) u.insert(difference_set(an, schedule.window(k - 1)));
    ShulmanRow row{n, an.size(), u.cardinality(), 0.0};
    row.ratio = static_cast<double>(row.union_size) / static_cast<double>(row.window_size);
    report.constant = std::max(report.constant, row.ratio);
    report.rows.push_back(row);
  }
  const std::size_t half = (n_max + 1) / 2;
  auto rho = [&](std::size_t n) { return report.rows[n - 2].ratio; };
  bool rising = true;
  for (std::size_t n = std::max<std::size_t>(3, n_max - half + 1); n <= n_max; ++n) rising = rising && rho(n) > rho(n - 1);
  if (rising && half >= 2 && rho(n_max) > 2.0 * rho(half)) report.verdict = TemperedVerdict::ratio_diverging;
  return report;
}

/// B_n = A_n ∩ (s + A_n) and C_n = A_n ∪ (s + A_n).
inline std::pair<FolnerSchedule, FolnerSchedule> derived_sequences(const FolnerSchedule& schedule, std::int64_t s) {
  std::vector<Window> inter;
  std::vector<Window> uni;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const Window a = schedule.window(i);
    const Window b = a.shifted(s);
    if (overlap(a, b) == 0) {
      throw RangeError("A_" + std::to_string(i + 1) + " ∩ (" + std::to_string(s) + " + A_" + std::to_string(i + 1) +
                       ") is empty");
    }
    inter.emplace_back(std::max(a.lo, b.lo), std::min(a.hi, b.hi));
    uni.emplace_back(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
  }
  return {FolnerSchedule::custom(std::move(inter)), FolnerSchedule::custom(std::move(uni))};
}

/// (1/|A_n|) sum over A_n △ (A_n + s) of |signal|^2
inline double boundary_energy(const OrbitSignal& signal, const FolnerSchedule& schedule, std::int64_t s, std::size_t index) {
  const Window a = schedule.window(index);
  const Window b = a.shifted(s);
  signal.require(Window(std::min(a.lo, b.lo), std::max(a.hi, b.hi)));
  double acc = 0.0;
  auto add_range = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t t = lo; t < hi; ++t) acc += std::norm(signal.at(t));
  };
  if (overlap(a, b) == 0) {
    add_range(a.lo, a.hi);
    add_range(b.lo, b.hi);
  } else {
    add_range(std::min(a.lo, b.lo), std::max(a.lo, b.lo));
    add_range(std::min(a.hi, b.hi), std::max(a.hi, b.hi));
  }
  return acc / static_cast<double>(a.size());
}

}  // namespace ww
