#pragma once

// JSON and CSV serialization of the report types.
//
// JSON uses nlohmann::json. Doubles are written with round-trip precision,
// complex numbers as [re, im], frequencies as plain numbers in [0, 1),
// enums by their display names. CSV numbers use the shortest round-trip
// representation, so identical reports give identical bytes.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "averaging.hpp"
#include "diffraction.hpp"
#include "folner.hpp"
#include "spectrum.hpp"
#include "types.hpp"
#include "wwpoint.hpp"

namespace nlohmann {

template <>
struct adl_serializer<std::complex<double>> {
  static void to_json(json& j, const std::complex<double>& z) { j = json::array({z.real(), z.imag()}); }
  static void from_json(const json& j, std::complex<double>& z) { z = {j.at(0).get<double>(), j.at(1).get<double>()}; }
};

template <>
struct adl_serializer<ww::Frequency> {
  static void to_json(json& j, const ww::Frequency& f) { j = f.value(); }
  static void from_json(const json& j, ww::Frequency& f) { f = ww::Frequency(j.get<double>()); }
};

template <>
struct adl_serializer<ww::Window> {
  static void to_json(json& j, const ww::Window& w) { j = json{{"lo", w.lo}, {"hi", w.hi}}; }
  static void from_json(const json& j, ww::Window& w) { w = ww::Window(j.at("lo").get<std::int64_t>(), j.at("hi").get<std::int64_t>()); }
};

}  // namespace nlohmann

namespace ww {

using Json = nlohmann::json;

NLOHMANN_JSON_SERIALIZE_ENUM(TemperedVerdict, {{TemperedVerdict::tempered_up_to_range, "tempered-up-to-range"},
                                               {TemperedVerdict::ratio_diverging, "ratio-diverging"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TraceVerdict, {{TraceVerdict::converged, "converged"},
                                            {TraceVerdict::vanishing, "vanishing"},
                                            {TraceVerdict::undecided, "undecided"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ApVerdict, {{ApVerdict::almost_periodic, "AP"}, {ApVerdict::not_almost_periodic, "not-AP"}})
NLOHMANN_JSON_SERIALIZE_ENUM(CertificationVerdict, {{CertificationVerdict::certified_ww, "certified-WW"},
                                                    {CertificationVerdict::refuted, "refuted"},
                                                    {CertificationVerdict::inconclusive, "inconclusive"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ShulmanRow, n, window_size, union_size, ratio)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TemperednessReport, rows, constant, verdict)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TraceTolerances, converge, vanish)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CoefficientTrace, theta, scales, estimates, deltas, verdict, value, tolerances)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SeminormEstimate, scales, values, limsup)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EigenvalueCandidate, theta, amplitude, phase, stability)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SpectrumReport, candidates, mean_power, bessel_sum, pp_defect, threshold, grid, scales)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FrequencyBand, lo, hi)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(VanishingTrace, band, grid, scales, sources, per_source, sup, nonincreasing, strictly_decreasing,
                                   sampled)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TrigTerm, theta, coeff)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PairResidual, f, g, averages, per_scale, residual, threshold)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BoundaryProbe, f, point, shift, energy)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GenericityTable, points, observables, scales, pairs, boundary, max_residual, max_boundary)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ParsevalRow, scale, d1, d2, residual)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ParsevalTrace, terms, rows)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ApResult, observable, verdict, mean_power, scales, frequencies, distances, terms_used, ap_defect,
                                   exceeded_stably)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PhaseCheck, observable, theta, offset, base, shifted, per_scale, residual, amplitude_residual,
                                   threshold)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CheckOutcome, check, subject, value, threshold, passed, exceeded_stably)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CertificationReport, source, core, scales, offsets, genericity, spectra, almost_periodicity,
                                   parseval, phase, checks, ap_defect, verdict)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Autocorrelation, max_lag, scale, values)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BraggPeak, theta, intensity, phase, autocorrelation_coefficient, consistent_phase_residual)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DiffractionReport, spectrum, peaks, max_lag, scale, kernel_radius, total_intensity,
                                   positivity_minimum, lag_weighting)

/// Parses a report back from JSON; throws ParseError on a shape mismatch.
template <class Report>
Report report_from_json(const Json& j) {
  try {
    return j.get<Report>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed report JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------- CSV

namespace detail {

inline std::string format_number(double x) {
  if (x == 0.0) return "0";  // folds -0
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::int64_t x) { return std::to_string(x); }
inline std::string format_number(std::size_t x) { return std::to_string(x); }

template <class... T>
void csv_row(std::ostream& out, const T&... cells) {
  std::string line;
  ((line += format_number(cells), line += ','), ...);
  line.back() = '\n';
  out << line;
}

}  // namespace detail

/// theta,amplitude,phase sorted by theta.
inline void write_csv(std::ostream& out, const SpectrumReport& r) {
  std::vector<std::size_t> order(r.candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return r.candidates[a].theta < r.candidates[b].theta; });
  out << "theta,amplitude,phase\n";
  for (auto i : order) {
    const auto& c = r.candidates[i];
    detail::csv_row(out, c.theta.value(), c.amplitude, c.phase);
  }
}

inline void write_csv(std::ostream& out, const CoefficientTrace& t) {
  out << "scale,re,im,abs,delta\n";
  for (std::size_t i = 0; i < t.scales.size(); ++i) {
    const Complex e = t.estimates[i];
    detail::csv_row(out, t.scales[i], e.real(), e.imag(), std::abs(e), t.deltas[i]);
  }
}

/// 2S + 1 rows, lags -S .. S.
inline void write_csv(std::ostream& out, const Autocorrelation& eta) {
  out << "lag,re,im\n";
  for (std::int64_t s = -eta.max_lag; s <= eta.max_lag; ++s) {
    const Complex v = eta.at(s);
    detail::csv_row(out, s, v.real(), v.imag());
  }
}

inline void write_csv(std::ostream& out, const TemperednessReport& r) {
  out << "n,window_size,union_size,ratio\n";
  for (const auto& row : r.rows) detail::csv_row(out, row.n, row.window_size, row.union_size, row.ratio);
}

inline void write_csv(std::ostream& out, const VanishingTrace& v) {
  out << "scale,value\n";
  for (std::size_t i = 0; i < v.scales.size(); ++i) detail::csv_row(out, v.scales[i], v.sup[i]);
}

inline void write_csv(std::ostream& out, const ParsevalTrace& p) {
  out << "scale,d1,d2,residual\n";
  for (const auto& row : p.rows) detail::csv_row(out, row.scale, row.d1, row.d2, row.residual);
}

/// terms,<one distance column per top scale>
inline void write_csv(std::ostream& out, const ApResult& ap) {
  out << "terms";
  for (auto s : ap.scales) out << ",dist_" << s;
  out << '\n';
  const std::size_t rows = ap.distances.empty() ? 0 : ap.distances.front().size();
  for (std::size_t n = 0; n < rows; ++n) {
    std::string line = std::to_string(n);
    for (const auto& per_scale : ap.distances) line += ',' + detail::format_number(per_scale[n]);
    out << line << '\n';
  }
}

inline void write_csv(std::ostream& out, const DiffractionReport& d) {
  out << "theta,intensity,phase,residual\n";
  std::vector<BraggPeak> peaks = d.peaks;
  std::sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) { return a.theta < b.theta; });
  for (const auto& p : peaks) detail::csv_row(out, p.theta.value(), p.intensity, p.phase, p.consistent_phase_residual);
}

/// One row per certification check; the subject column is always quoted.
inline void write_csv(std::ostream& out, const CertificationReport& r) {
  out << "check,subject,value,threshold,passed,exceeded_stably\n";
  for (const auto& c : r.checks) {
    std::string subject;
    for (char ch : c.subject) subject += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    out << c.check << ",\"" << subject << "\"," << detail::format_number(c.value) << ',' << detail::format_number(c.threshold) << ','
        << (c.passed ? "true" : "false") << ',' << (c.exceeded_stably ? "true" : "false") << '\n';
  }
}

/// Raw sweep: theta,abs,re,im with theta = k / M.
inline void write_sweep_csv(std::ostream& out, std::span<const Complex> sweep) {
  out << "theta,abs,re,im\n";
  const double m = static_cast<double>(sweep.size());
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    detail::csv_row(out, static_cast<double>(k) / m, std::abs(sweep[k]), sweep[k].real(), sweep[k].imag());
  }
}

/// Writes the CSV form of a report to a file.
template <class Report>
void export_plot_data(const Report& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  write_csv(out, report);
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace ww
