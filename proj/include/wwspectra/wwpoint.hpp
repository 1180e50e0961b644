#pragma once

// Wiener–Wintner point certification at finite scale: genericity residuals,
// two-way Parseval defects, Besicovitch almost-periodicity distances, and
// phase consistency across orbit translates.
//
// Eigenfunctions are never built; everything is read off coefficient
// amplitudes and phases along the orbit.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "averaging.hpp"
#include "detail/parallel.hpp"
#include "folner.hpp"
#include "spectrum.hpp"

namespace ww {

struct TrigTerm {
  Frequency theta;
  Complex coeff;
  bool operator==(const TrigTerm&) const = default;
};

/// p(t) = sum_j c_j e^{2 pi i theta_j t}
class TrigPolynomial {
 public:
  TrigPolynomial() = default;
  explicit TrigPolynomial(std::vector<TrigTerm> terms) {
    for (const auto& t : terms) add(t.theta, t.coeff);
  }

  /// Top n candidates of a report, coefficient a_theta = amplitude e^{i phase}.
  static TrigPolynomial from_spectrum(const SpectrumReport& report, std::size_t n) {
    if (n > report.candidates.size()) {
      throw RangeError("requested " + std::to_string(n) + " terms but the spectrum has " +
                       std::to_string(report.candidates.size()) + " candidates");
    }
    TrigPolynomial p;
    for (std::size_t j = 0; j < n; ++j) p.add(report.candidates[j].theta, report.candidates[j].coefficient());
    return p;
  }

  void add(Frequency theta, Complex coeff) {
    for (const auto& t : terms_) {
      if (t.theta == theta) throw RangeError("trigonometric polynomial frequencies must be distinct");
    }
    terms_.push_back({theta, coeff});
  }

  const std::vector<TrigTerm>& terms() const { return terms_; }

  Complex operator()(std::int64_t t) const {
    Complex acc{};
    for (const auto& term : terms_) acc += term.coeff * detail::character(term.theta.value(), t);
    return acc;
  }

  /// Values on a window.
  std::vector<Complex> sample(const Window& w) const {
    std::vector<Complex> out(static_cast<std::size_t>(w.size()));
    for (const auto& term : terms_) detail::accumulate_character(out, w.lo, term.theta.value(), term.coeff);
    return out;
  }

 private:
  std::vector<TrigTerm> terms_;
};

// --- genericity ---------------------------------------------------------

struct PairResidual {
  std::size_t f = 0;
  std::size_t g = 0;
  std::vector<std::vector<Complex>> averages;  // [point][top scale]
  std::vector<double> per_scale;               // spread across points (+ drift from the previous scale)
  double residual = 0.0;                       // value at the top scale
  double threshold = 0.0;
  bool operator==(const PairResidual&) const = default;
};

struct BoundaryProbe {
  std::size_t f = 0;
  std::size_t point = 0;
  std::int64_t shift = 0;
  double energy = 0.0;
  bool operator==(const BoundaryProbe&) const = default;
};

struct GenericityTable {
  std::vector<std::string> points;
  std::vector<std::string> observables;
  std::vector<std::int64_t> scales;  // top scales used
  std::vector<PairResidual> pairs;   // f <= g
  std::vector<BoundaryProbe> boundary;
  double max_residual = 0.0;         // max pair residual / its threshold scale (sup f * sup g)
  double max_boundary = 0.0;
  bool operator==(const GenericityTable&) const = default;
};

struct GenericityParams {
  std::vector<std::int64_t> probe_shifts{1, 2, 5};
  std::size_t top_scales = 3;
  double tolerance = 5e-3;  // multiplied by sup|f| sup|g|
};

/// Correlation averages of every core pair from each base point; the
/// residual at a scale is the spread across points, combined with the drift
/// from the previous top scale.
inline GenericityTable genericity_check(std::span<const PointSource> points, std::span<const CylinderObservable> core,
                                        const FolnerSchedule& schedule, const GenericityParams& params = {}, Parallelism par = {}) {
  if (core.empty()) throw RangeError("genericity_check needs a nonempty core");
  if (points.empty()) throw RangeError("genericity_check needs at least one base point");
  GenericityTable table;
  for (const auto& p : points) table.points.push_back(p.identity());
  for (const auto& f : core) table.observables.push_back(f.name());
  const auto top = schedule.top_indices(params.top_scales);
  for (auto i : top) table.scales.push_back(schedule.scales()[i]);

  std::int64_t reach = 0;
  for (auto s : params.probe_shifts) reach = std::max(reach, std::abs(s));
  const Window hull = schedule.hull().inflated(reach);

  const std::size_t nf = core.size();
  for (std::size_t f = 0; f < nf; ++f)
    for (std::size_t g = f; g < nf; ++g) {
      PairResidual pr;
      pr.f = f;
      pr.g = g;
      pr.threshold = params.tolerance * core[f].sup_norm() * core[g].sup_norm();
      pr.averages.assign(points.size(), std::vector<Complex>(top.size()));
      table.pairs.push_back(std::move(pr));
    }

  std::vector<std::vector<BoundaryProbe>> probes(points.size());
  detail::parallel_for(points.size(), par, [&](std::size_t p) {
    std::vector<OrbitSignal> signals;
    signals.reserve(nf);
    for (const auto& f : core) signals.push_back(orbit_signal(f, points[p], hull));
    for (auto& pr : table.pairs) {
      for (std::size_t s = 0; s < top.size(); ++s) {
        pr.averages[p][s] = correlation_average(signals[pr.f], signals[pr.g], schedule.window(top[s]));
      }
    }
    for (std::size_t f = 0; f < nf; ++f) {
      for (auto shift : params.probe_shifts) {
        probes[p].push_back({f, p, shift, boundary_energy(signals[f], schedule, shift, top.back())});
      }
    }
  });

  for (auto& pr : table.pairs) {
    for (std::size_t s = 0; s < top.size(); ++s) {
      double r = 0.0;
      for (std::size_t a = 0; a < points.size(); ++a) {
        for (std::size_t b = a + 1; b < points.size(); ++b) r = std::max(r, std::abs(pr.averages[a][s] - pr.averages[b][s]));
        if (s > 0) r = std::max(r, std::abs(pr.averages[a][s] - pr.averages[a][s - 1]));
      }
      pr.per_scale.push_back(r);
    }
    pr.residual = pr.per_scale.back();
    const double scale = core[pr.f].sup_norm() * core[pr.g].sup_norm();
    if (scale > 0.0) table.max_residual = std::max(table.max_residual, pr.residual / scale);
  }
  for (auto& list : probes)
    for (auto& b : list) {
      const double s2 = core[b.f].sup_norm() * core[b.f].sup_norm();
      if (s2 > 0.0) table.max_boundary = std::max(table.max_boundary, b.energy / s2);
      table.boundary.push_back(b);
    }
  return table;
}

inline GenericityTable genericity_check(const PointSource& source, std::span<const CylinderObservable> core, const FolnerSchedule& schedule,
                                        std::span<const std::int64_t> offsets, const GenericityParams& params = {}, Parallelism par = {}) {
  if (std::find(offsets.begin(), offsets.end(), 0) == offsets.end()) throw RangeError("offsets must include 0");
  std::vector<PointSource> points;
  for (auto s : offsets) points.push_back(source.with_offset(s));
  return genericity_check(points, core, schedule, params, par);
}

// --- Parseval ------------------------------------------------------------

struct ParsevalRow {
  std::int64_t scale = 0;
  double d1 = 0.0;  // mean |f - P_N|^2
  double d2 = 0.0;  // mean power - sum |a_j|^2
  double residual = 0.0;
  bool operator==(const ParsevalRow&) const = default;
};

struct ParsevalTrace {
  std::size_t terms = 0;
  std::vector<ParsevalRow> rows;
  bool operator==(const ParsevalTrace&) const = default;
};

inline ParsevalTrace parseval_defect(const SignalFn& materialize, const SpectrumReport& spectrum, const FolnerSchedule& schedule,
                                     std::size_t n_terms) {
  const TrigPolynomial p = TrigPolynomial::from_spectrum(spectrum, n_terms);
  double bessel = 0.0;
  for (std::size_t j = 0; j < n_terms; ++j) bessel += spectrum.candidates[j].amplitude * spectrum.candidates[j].amplitude;

  const Window hull = schedule.hull();
  const OrbitSignal f = materialize(hull);
  const auto pv = p.sample(hull);
  std::vector<Complex> diff(pv.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = f.values()[i] - pv[i];
  const OrbitSignal residual(hull, std::move(diff));

  ParsevalTrace trace;
  trace.terms = n_terms;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const Window w = schedule.window(i);
    ParsevalRow row{schedule.scales()[i], mean_power(residual, w), mean_power(f, w) - bessel, 0.0};
    row.residual = std::abs(row.d1 - row.d2);
    trace.rows.push_back(row);
  }
  return trace;
}

inline ParsevalTrace parseval_defect(const PointSource& source, const CylinderObservable& obs, const SpectrumReport& spectrum,
                                     const FolnerSchedule& schedule, std::size_t n_terms) {
  return parseval_defect(signal_fn(obs, source), spectrum, schedule, n_terms);
}

// --- Besicovitch almost periodicity -------------------------------------

enum class ApVerdict { almost_periodic, not_almost_periodic };

inline const char* to_string(ApVerdict v) { return v == ApVerdict::almost_periodic ? "AP" : "not-AP"; }

struct ApResult {
  std::string observable;
  ApVerdict verdict = ApVerdict::not_almost_periodic;
  double mean_power = 0.0;
  std::vector<std::int64_t> scales;        // top scales
  std::vector<Frequency> frequencies;      // in the order terms were added
  /// distances[s][n] = sqrt(D1) at top scale s after fitting the first n
  /// frequencies; n = 0 .. frequencies.size()
  std::vector<std::vector<double>> distances;
  std::size_t terms_used = 0;              // smallest n achieving the verdict, or all
  double ap_defect = 0.0;                  // sqrt(D1) at the top scale with terms_used terms
  bool exceeded_stably = false;            // every top scale ends >= 5 eps
  bool operator==(const ApResult&) const = default;
};

struct ApParams {
  double eps = 5e-2;
  std::size_t max_terms = 150;
  std::size_t top_scales = 3;
  DetectionParams detection{};  // threshold defaults to eps / 12.5 when unset
};

/// Distances from f_x to the span of the first n detected characters,
/// refitting each coefficient on the current residual so the distance never
/// grows with n.
inline std::vector<double> greedy_distances(const OrbitSignal& signal, const Window& window, std::span<const Frequency> thetas) {
  const auto src = signal.slice(window);
  std::vector<Complex> r(src.begin(), src.end());
  std::vector<double> out{std::sqrt(mean_power(r))};
  for (const auto& th : thetas) {
    const Complex c = fourier_bohr_at(r, window.lo, th);
    detail::accumulate_character(r, window.lo, th.value(), -c);
    out.push_back(std::sqrt(mean_power(r)));
  }
  return out;
}

inline ApResult besicovitch_ap_test(const SignalFn& materialize, const std::string& name, const SpectrumReport& spectrum,
                                    const FolnerSchedule& schedule, const ApParams& params) {
  if (!(params.eps > 0.0)) throw RangeError("eps must be positive");
  ApResult res;
  res.observable = name;
  res.mean_power = spectrum.mean_power;
  const auto top = schedule.top_indices(params.top_scales);
  for (auto i : top) res.scales.push_back(schedule.scales()[i]);
  const std::size_t n = std::min(params.max_terms, spectrum.candidates.size());
  for (std::size_t j = 0; j < n; ++j) res.frequencies.push_back(spectrum.candidates[j].theta);

  Window hull = schedule.window(top.front());
  for (auto i : top) {
    const Window w = schedule.window(i);
    hull = Window(std::min(hull.lo, w.lo), std::max(hull.hi, w.hi));
  }
  const OrbitSignal signal = materialize(hull);
  for (auto i : top) res.distances.push_back(greedy_distances(signal, schedule.window(i), res.frequencies));

  res.terms_used = n;
  for (std::size_t k = 0; k <= n; ++k) {
    bool all_below = true;
    for (const auto& d : res.distances) all_below = all_below && d[k] < params.eps;
    if (all_below) {
      res.verdict = ApVerdict::almost_periodic;
      res.terms_used = k;
      break;
    }
  }
  res.ap_defect = res.distances.back()[res.terms_used];
  res.exceeded_stably = std::all_of(res.distances.begin(), res.distances.end(), [&](const auto& d) { return d[n] >= 5.0 * params.eps; });
  return res;
}

inline DetectionParams ap_detection(const ApParams& params) {
  DetectionParams d = params.detection;
  if (!d.threshold) d.threshold = params.eps / 12.5;
  d.top_scales = params.top_scales;
  return d;
}

/// Runs the detector per observable, then the distance trace.
inline std::vector<ApResult> besicovitch_ap_test(const PointSource& source, std::span<const CylinderObservable> core,
                                                 const FolnerSchedule& schedule, const ApParams& params = {}, Parallelism par = {}) {
  std::vector<ApResult> out;
  for (const auto& f : core) {
    const auto fn = signal_fn(f, source);
    const SpectrumReport spec = detect_point_spectrum(fn, schedule, ap_detection(params), par);
    out.push_back(besicovitch_ap_test(fn, f.name(), spec, schedule, params));
  }
  return out;
}

// --- certification -------------------------------------------------------

enum class CertificationVerdict { certified_ww, refuted, inconclusive };

inline const char* to_string(CertificationVerdict v) {
  switch (v) {
    case CertificationVerdict::certified_ww: return "certified-WW";
    case CertificationVerdict::refuted: return "refuted";
    case CertificationVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct PhaseCheck {
  std::size_t observable = 0;
  Frequency theta;
  std::int64_t offset = 0;
  Complex base{};      // a_theta(f_x) on the top window
  Complex shifted{};   // a_theta(f_{s.x}) on the same window
  std::vector<double> per_scale;  // |shifted - e^{2 pi i theta s} base| per top scale
  double residual = 0.0;
  double amplitude_residual = 0.0;  // | |shifted| - |base| |
  double threshold = 0.0;
  bool operator==(const PhaseCheck&) const = default;
};

struct CheckOutcome {
  std::string check;    // genericity | boundary | parseval | almost-periodicity | phase
  std::string subject;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
  bool exceeded_stably = false;
  bool operator==(const CheckOutcome&) const = default;
};

struct CertifyParams {
  std::vector<std::int64_t> offsets{0, 1001, 65537};
  double tol_phase = 1e-2;        // times sup|f|
  double tol_genericity = 5e-3;   // times sup|f| sup|g|
  double tol_parseval = 1e-3;     // times sup|f|^2
  std::size_t parseval_terms = 20;
  ApParams ap{};
  GenericityParams genericity{};
  bool operator==(const CertifyParams& o) const {
    return offsets == o.offsets && tol_phase == o.tol_phase && tol_genericity == o.tol_genericity &&
           tol_parseval == o.tol_parseval && parseval_terms == o.parseval_terms && ap.eps == o.ap.eps &&
           ap.max_terms == o.ap.max_terms;
  }
};

struct CertificationReport {
  std::string source;
  std::vector<std::string> core;
  std::vector<std::int64_t> scales;
  std::vector<std::int64_t> offsets;
  GenericityTable genericity;
  std::vector<SpectrumReport> spectra;   // per observable, base point
  std::vector<ApResult> almost_periodicity;
  std::vector<ParsevalTrace> parseval;
  std::vector<PhaseCheck> phase;
  std::vector<CheckOutcome> checks;
  double ap_defect = 0.0;                // max over observables
  CertificationVerdict verdict = CertificationVerdict::inconclusive;
  bool operator==(const CertificationReport&) const = default;
};

inline bool is_constant(const CylinderObservable& f) {
  const auto& t = f.table();
  return std::all_of(t.begin(), t.end(), [&](const Complex& v) { return v == t.front(); }) && t.front() != Complex{};
}

inline CertificationReport ww_certify(const PointSource& source, std::span<const CylinderObservable> core, const FolnerSchedule& schedule,
                                      const CertifyParams& params = {}, Parallelism par = {}) {
  if (std::none_of(core.begin(), core.end(), is_constant)) throw RangeError("certification core must contain a constant observable");
  CertificationReport rep;
  rep.source = source.identity();
  for (const auto& f : core) rep.core.push_back(f.name());
  const auto top = schedule.top_indices(params.ap.top_scales);
  for (auto i : top) rep.scales.push_back(schedule.scales()[i]);
  rep.offsets = params.offsets;

  GenericityParams gp = params.genericity;
  gp.tolerance = params.tol_genericity;
  gp.top_scales = params.ap.top_scales;
  rep.genericity = genericity_check(source, core, schedule, params.offsets, gp, par);

  const Window top_window = schedule.window(top.back());
  rep.spectra.resize(core.size());
  rep.almost_periodicity.resize(core.size());
  rep.parseval.resize(core.size());
  std::vector<std::vector<PhaseCheck>> phases(core.size());

  for (std::size_t j = 0; j < core.size(); ++j) {
    const auto& f = core[j];
    const auto fn = signal_fn(f, source);
    const SpectrumReport spec = detect_point_spectrum(fn, schedule, ap_detection(params.ap), par);
    rep.spectra[j] = spec;
    rep.almost_periodicity[j] = besicovitch_ap_test(fn, f.name(), spec, schedule, params.ap);
    rep.parseval[j] = parseval_defect(fn, spec, schedule, std::min(params.parseval_terms, spec.candidates.size()));

    // Converged peaks: those clearing the default detector threshold.
    const double peak_floor = 0.05 * std::sqrt(spec.mean_power);
    std::vector<Frequency> peaks;
    for (const auto& c : spec.candidates)
      if (c.amplitude > peak_floor) peaks.push_back(c.theta);
    std::vector<std::int64_t> shifts;
    for (auto s : params.offsets)
      if (s != 0) shifts.push_back(s);

    std::vector<OrbitSignal> shifted_signals;
    const OrbitSignal base = orbit_signal(f, source, schedule.hull());
    for (auto s : shifts) shifted_signals.push_back(orbit_signal(f, source.with_offset(s), schedule.hull()));
    phases[j].resize(peaks.size() * shifts.size());
    detail::parallel_for(phases[j].size(), par, [&](std::size_t q) {
      const std::size_t pi = q / shifts.size(), si = q % shifts.size();
      PhaseCheck pc;
      pc.observable = j;
      pc.theta = peaks[pi];
      pc.offset = shifts[si];
      pc.threshold = params.tol_phase * f.sup_norm();
      const Complex rot = detail::character(pc.theta.value(), pc.offset);
      for (auto i : top) {
        const Window w = schedule.window(i);
        const Complex b = fourier_bohr_at(base, w, pc.theta);
        const Complex sh = fourier_bohr_at(shifted_signals[si], w, pc.theta);
        pc.per_scale.push_back(std::abs(sh - rot * b));
        if (w == top_window) {
          pc.base = b;
          pc.shifted = sh;
        }
      }
      pc.residual = pc.per_scale.back();
      pc.amplitude_residual = std::abs(std::abs(pc.shifted) - std::abs(pc.base));
      phases[j][q] = pc;
    });
  }
  for (auto& list : phases)
    for (auto& pc : list) rep.phase.push_back(pc);

  auto stably_above = [](const std::vector<double>& v, double thr) {
    return !v.empty() && std::all_of(v.begin(), v.end(), [&](double x) { return x > 5.0 * thr; });
  };
  for (const auto& pr : rep.genericity.pairs) {
    rep.checks.push_back({"genericity", rep.core[pr.f] + " x " + rep.core[pr.g], pr.residual, pr.threshold, pr.residual <= pr.threshold,
                          stably_above(pr.per_scale, pr.threshold)});
  }
  for (const auto& b : rep.genericity.boundary) {
    const double thr = params.tol_genericity * core[b.f].sup_norm() * core[b.f].sup_norm();
    rep.checks.push_back({"boundary", rep.core[b.f] + " @" + rep.genericity.points[b.point] + " s=" + std::to_string(b.shift), b.energy, thr,
                          b.energy <= thr, false});
  }
  for (std::size_t j = 0; j < core.size(); ++j) {
    const auto& ap = rep.almost_periodicity[j];
    rep.ap_defect = std::max(rep.ap_defect, ap.ap_defect);
    rep.checks.push_back({"almost-periodicity", ap.observable, ap.ap_defect, params.ap.eps, ap.verdict == ApVerdict::almost_periodic,
                          ap.exceeded_stably});
    const double s2 = core[j].sup_norm() * core[j].sup_norm();
    const double thr = params.tol_parseval * s2;
    std::vector<double> per;
    for (auto i : top) per.push_back(rep.parseval[j].rows[i].residual);
    rep.checks.push_back({"parseval", ap.observable, per.back(), thr, per.back() <= thr, stably_above(per, thr)});
  }
  for (const auto& pc : rep.phase) {
    rep.checks.push_back({"phase", rep.core[pc.observable] + " theta=" + std::to_string(pc.theta.value()) + " s=" + std::to_string(pc.offset),
                          pc.residual, pc.threshold, pc.residual <= pc.threshold, stably_above(pc.per_scale, pc.threshold)});
  }

  const bool all_passed = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return c.passed; });
  const bool any_refuting = std::any_of(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return c.exceeded_stably; });
  rep.verdict = all_passed ? CertificationVerdict::certified_ww : any_refuting ? CertificationVerdict::refuted : CertificationVerdict::inconclusive;
  return rep;
}

}  // namespace ww
