#pragma once

// The ww-spectra command line: configuration, dispatch, report envelope.
//
//   ww-spectra orbit    --system fibonacci --obs ind:a --window 0..64 [--theta 0.618]
//   ww-spectra scan     --system fibonacci --obs cyl1:a --scales 12..20 --grid 65536
//   ww-spectra certify  --system rotation --eps 0.05
//   ww-spectra diffract --system fibonacci --weights a=1,b=0 --max-lag 4096
//   ww-spectra folner   --kind symmetric --nmax 20 --probe-shifts 1,3
//
// Exit status: 0 success, 2 refuted certification, 1 error.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "io.hpp"
#include "observable.hpp"
#include "source.hpp"
#include "wwspectra.hpp"

namespace ww::app {

struct RunConfig {
  std::string command;
  std::string system = "fibonacci";
  std::vector<std::string> observables;  // empty: command default
  std::string kind = "one-sided";        // one-sided | symmetric | squares (folner only)
  std::string scales;                    // "a..b[:step]" exponents; empty: module default
  std::size_t grid = 0;                  // 0: automatic
  std::optional<double> threshold;
  double eps = 5e-2;
  std::size_t max_terms = 150;
  std::vector<std::int64_t> offsets{0, 1001, 65537};
  double tol_phase = 1e-2;
  double tol_genericity = 5e-3;
  double tol_parseval = 1e-3;
  int core_radius = 2;
  std::string window = "0..64";  // orbit
  std::vector<double> thetas;    // orbit coefficient traces
  std::string weights;           // diffract: letter=value list; empty: indicator of the first letter
  std::string comb;              // diffract: comb CSV instead of a system
  std::int64_t max_lag = 4096;
  int kernel_radius = 0;
  std::size_t nmax = 20;
  std::vector<std::int64_t> probe_shifts{1};
  unsigned threads = 0;  // 0: WW_SPECTRA_THREADS, else hardware concurrency
  std::string out;       // JSON envelope path; empty or "-": stdout
  std::string csv;       // CSV sidecar
  std::string aux_csv;   // second sidecar: orbit trace / diffract autocorrelation
};

struct RunResult {
  Json envelope;
  int exit_code = 0;
};

namespace detail {

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::pair<std::int64_t, std::int64_t> parse_range(const std::string& text, const std::string& flag) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw ParseError(flag + ": expected <lo>..<hi>, got '" + text + "'");
  try {
    return {ww::detail::parse_integer(text.substr(0, dots), "lo"), ww::detail::parse_integer(text.substr(dots + 2), "hi")};
  } catch (const Error& e) {
    throw ParseError(flag + ": " + e.what());
  }
}

inline Parallelism parallelism(const RunConfig& c) {
  if (c.threads > 0) return {c.threads};
  return Parallelism::from_env(std::max(1u, std::thread::hardware_concurrency()));
}

/// Averaging schedule from --kind and --scales ("a..b" or "a..b:step",
/// exponents of two; symmetric windows are [-2^e, 2^e]).
inline FolnerSchedule averaging_schedule(const RunConfig& c) {
  if (c.kind != "one-sided" && c.kind != "symmetric") {
    throw ParseError("--kind: '" + c.kind + "' is not an averaging schedule (use one-sided or symmetric)");
  }
  const bool sym = c.kind == "symmetric";
  if (c.scales.empty()) return sym ? FolnerSchedule::default_symmetric() : FolnerSchedule::default_one_sided();
  std::string range = c.scales;
  std::int64_t step = 1;
  if (const auto colon = range.find(':'); colon != std::string::npos) {
    try {
      step = ww::detail::parse_integer(range.substr(colon + 1), "step");
    } catch (const Error& e) {
      throw ParseError(std::string("--scales: ") + e.what());
    }
    range = range.substr(0, colon);
  }
  const auto [a, b] = parse_range(range, "--scales");
  if (step <= 0 || a < 0 || b < a || b > 40) throw ParseError("--scales: need 0 <= lo <= hi <= 40 and a positive step");
  try {
    return sym ? FolnerSchedule::dyadic_symmetric(static_cast<int>(a), static_cast<int>(b), static_cast<int>(step))
               : FolnerSchedule::dyadic_one_sided(static_cast<int>(a), static_cast<int>(b), static_cast<int>(step));
  } catch (const Error& e) {
    throw ParseError(std::string("--scales: ") + e.what());
  }
}

inline PointSource source(const RunConfig& c) {
  try {
    return make_source(c.system);
  } catch (const Error& e) {
    throw ParseError(std::string("--system: ") + e.what());
  }
}

inline CylinderObservable observable(const std::string& desc, const std::string& alphabet) {
  try {
    return make_observable(desc, alphabet);
  } catch (const Error& e) {
    throw ParseError(std::string("--obs: ") + e.what());
  }
}

inline std::string default_observable(const PointSource& src) { return std::string("ind:") + src.alphabet().front(); }

/// Grid actually used: the requested one promoted to cover the largest window.
inline std::size_t effective_grid(std::size_t requested, const FolnerSchedule& schedule) {
  const auto need = std::bit_ceil(static_cast<std::size_t>(schedule.largest_window().size()));
  if (requested == 0) return need;
  return std::max(std::bit_ceil(requested), need);
}

inline std::map<char, Complex> weight_map(const RunConfig& c, const std::string& alphabet) {
  std::map<char, Complex> w;
  for (char a : alphabet) w[a] = 0.0;
  if (c.weights.empty()) {
    w[alphabet.front()] = 1.0;
    return w;
  }
  for (const auto& item : ww::detail::split(c.weights, ',')) {
    const auto eq = item.find('=');
    if (eq != 1 || alphabet.find(item[0]) == std::string::npos) {
      throw ParseError("--weights: expected <letter>=<value> with a letter of '" + alphabet + "', got '" + item + "'");
    }
    try {
      w[item[0]] = ww::detail::parse_real(item.substr(2), "weight");
    } catch (const Error& e) {
      throw ParseError(std::string("--weights: ") + e.what());
    }
  }
  return w;
}

template <class Report>
void write_sidecar(const std::string& path, const Report& r) {
  if (!path.empty()) export_plot_data(r, path);
}

inline Json schedule_json(const FolnerSchedule& s) {
  Json windows = Json::array();
  for (std::size_t i = 0; i < s.size(); ++i) windows.push_back(s.window(i));
  return Json{{"kind", to_string(s.kind())}, {"scales", s.scales()}, {"windows", windows}};
}

// ------------------------------------------------------------ commands

inline Json run_orbit(const RunConfig& c, Json& echo) {
  const PointSource src = source(c);
  const std::string obs_desc = c.observables.empty() ? default_observable(src) : c.observables.front();
  const CylinderObservable obs = observable(obs_desc, src.alphabet());
  const auto [lo, hi] = parse_range(c.window, "--window");
  if (hi <= lo) throw ParseError("--window: empty window " + c.window);
  const Window w(lo, hi);
  const OrbitSignal sig = orbit_signal(obs, src, w);
  const Symbols symbols = src.symbols(w);

  Json payload{{"source", src.identity()}, {"observable", obs.name()}, {"window", w}, {"symbols", symbols}, {"values", sig.values()}};
  echo["observable"] = obs.name();
  echo["window"] = w;
  if (!c.thetas.empty()) {
    const FolnerSchedule sched = averaging_schedule(c);
    echo["schedule"] = schedule_json(sched);
    Json traces = Json::array();
    std::vector<CoefficientTrace> list;
    for (double th : c.thetas) list.push_back(coefficient_trace(src, obs, sched, Frequency(th)));
    for (const auto& t : list) traces.push_back(t);
    payload["traces"] = traces;
    write_sidecar(c.aux_csv, list.front());
  }
  if (!c.csv.empty()) {
    std::ofstream out(c.csv, std::ios::binary);
    if (!out) throw Error("cannot write '" + c.csv + "'");
    out << "t,symbol,re,im\n";
    for (std::int64_t t = w.lo; t < w.hi; ++t) {
      const Complex v = sig.at(t);
      out << t << ',' << symbols[static_cast<std::size_t>(t - w.lo)] << ',' << ww::detail::format_number(v.real()) << ','
          << ww::detail::format_number(v.imag()) << '\n';
    }
  }
  return payload;
}

inline Json run_scan(const RunConfig& c, Json& echo) {
  const PointSource src = source(c);
  const std::string obs_desc = c.observables.empty() ? default_observable(src) : c.observables.front();
  const CylinderObservable obs = observable(obs_desc, src.alphabet());
  const FolnerSchedule sched = averaging_schedule(c);
  DetectionParams p;
  p.grid = effective_grid(c.grid, sched);
  p.threshold = c.threshold;
  const SpectrumReport rep = detect_point_spectrum(src, obs, sched, p, parallelism(c));
  echo["observable"] = obs.name();
  echo["schedule"] = schedule_json(sched);
  echo["grid"] = rep.grid;
  echo["threshold"] = rep.threshold;
  write_sidecar(c.csv, rep);
  return rep;
}

inline Json run_certify(const RunConfig& c, Json& echo, int& exit_code) {
  const PointSource src = source(c);
  const FolnerSchedule sched = averaging_schedule(c);
  const Window top = sched.largest_window();
  std::vector<CylinderObservable> core =
      default_core(src.alphabet(), src.symbols(Window(top.lo, top.lo + std::min<std::int64_t>(top.size(), 1 << 16))), c.core_radius);
  for (const auto& d : c.observables) core.push_back(observable(d, src.alphabet()));
  CertifyParams p;
  p.offsets = c.offsets;
  if (std::find(p.offsets.begin(), p.offsets.end(), 0) == p.offsets.end()) throw ParseError("--offsets: must include 0");
  p.tol_phase = c.tol_phase;
  p.tol_genericity = c.tol_genericity;
  p.tol_parseval = c.tol_parseval;
  if (!(c.eps > 0.0)) throw ParseError("--eps: must be positive");
  p.ap.eps = c.eps;
  p.ap.max_terms = c.max_terms;
  p.ap.detection.grid = effective_grid(c.grid, sched);
  p.ap.detection.threshold = c.threshold;
  const CertificationReport rep = ww_certify(src, core, sched, p, parallelism(c));
  echo["schedule"] = schedule_json(sched);
  echo["core"] = rep.core;
  echo["grid"] = p.ap.detection.grid;
  echo["threshold"] = c.threshold ? *c.threshold : c.eps / 12.5;
  write_sidecar(c.csv, rep);
  if (rep.verdict == CertificationVerdict::refuted) exit_code = 2;
  return rep;
}

inline Json run_diffract(const RunConfig& c, Json& echo) {
  DiffractionParams p;
  p.max_lag = c.max_lag;
  p.kernel_radius = c.kernel_radius;
  p.detection.threshold = c.threshold;
  const Parallelism par = parallelism(c);
  DiffractionReport rep;
  std::optional<OrbitSignal> top_signal;
  if (!c.comb.empty()) {
    std::ifstream in(c.comb);
    if (!in) throw ParseError("--comb: cannot open '" + c.comb + "'");
    const WeightedComb comb = comb_from_csv(in);
    const FolnerSchedule sched = comb_schedule(comb);
    p.detection.grid = effective_grid(c.grid, sched);
    rep = diffraction_report(comb_signal_fn(comb), sched, p, par);
    if (!c.aux_csv.empty()) top_signal = comb.as_signal();
    echo["comb"] = c.comb;
    echo["schedule"] = schedule_json(sched);
  } else {
    const PointSource src = source(c);
    const FolnerSchedule sched = averaging_schedule(c);
    const auto weights = weight_map(c, src.alphabet());
    p.detection.grid = effective_grid(c.grid, sched);
    rep = diffraction_report(src, weights, sched, p, par);
    if (!c.aux_csv.empty()) {
      top_signal = orbit_signal(smoothed_weights(src.alphabet(), weights, c.kernel_radius), src, sched.largest_window());
    }
    Json w;
    for (const auto& [k, v] : weights) w[std::string(1, k)] = v;
    echo["weights"] = w;
    echo["schedule"] = schedule_json(sched);
  }
  echo["grid"] = p.detection.grid;
  echo["threshold"] = rep.spectrum.threshold;
  write_sidecar(c.csv, rep);
  if (top_signal) write_sidecar(c.aux_csv, autocorrelation(WeightedComb(top_signal->window(), top_signal->values()), c.max_lag));
  return rep;
}

inline Json run_folner(const RunConfig& c, Json& echo) {
  if (c.nmax < 2) throw ParseError("--nmax: must be at least 2");
  std::vector<std::int64_t> ns;
  for (std::size_t n = 1; n <= c.nmax; ++n) ns.push_back(static_cast<std::int64_t>(n));
  FolnerSchedule sched = FolnerSchedule::symmetric(ns);
  if (c.kind == "one-sided") {
    sched = FolnerSchedule::one_sided(ns);
  } else if (c.kind == "squares") {
    std::vector<Window> ws;
    for (auto n : ns) ws.emplace_back(n * n, n * n + n);
    sched = FolnerSchedule::custom(ws);
  } else if (c.kind != "symmetric") {
    throw ParseError("--kind: unknown schedule kind '" + c.kind + "'");
  }
  const TemperednessReport rep = shulman_trace(sched, c.nmax);
  Json defects = Json::array();
  for (const auto& row : rep.rows) {
    Json values = Json::array();
    for (auto t : c.probe_shifts) values.push_back(folner_defect(sched, t, row.n - 1));
    defects.push_back(Json{{"n", row.n}, {"values", values}});
  }
  echo["schedule"] = schedule_json(sched);
  if (!c.csv.empty()) {
    std::ofstream out(c.csv, std::ios::binary);
    if (!out) throw Error("cannot write '" + c.csv + "'");
    out << "n,window_size,union_size,ratio";
    for (auto t : c.probe_shifts) out << ",defect_" << t;
    out << '\n';
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      const auto& row = rep.rows[i];
      out << row.n << ',' << row.window_size << ',' << row.union_size << ',' << ww::detail::format_number(row.ratio);
      for (const auto& v : defects[i]["values"]) out << ',' << ww::detail::format_number(v.get<double>());
      out << '\n';
    }
  }
  return Json{{"tempered", rep}, {"probe_shifts", c.probe_shifts}, {"defects", defects}};
}

inline Json config_echo(const RunConfig& c) {
  Json j{{"command", c.command}, {"threads", parallelism(c).threads}};
  if (c.command != "folner" && c.comb.empty()) j["system"] = c.system;
  if (c.command == "folner") {
    j["kind"] = c.kind;
    j["nmax"] = c.nmax;
    j["probe_shifts"] = c.probe_shifts;
  }
  if (c.command == "certify") {
    j["eps"] = c.eps;
    j["max_terms"] = c.max_terms;
    j["offsets"] = c.offsets;
    j["tol_phase"] = c.tol_phase;
    j["tol_genericity"] = c.tol_genericity;
    j["tol_parseval"] = c.tol_parseval;
    j["core_radius"] = c.core_radius;
  }
  if (c.command == "diffract") {
    j["max_lag"] = c.max_lag;
    j["kernel_radius"] = c.kernel_radius;
  }
  if (c.command == "orbit" && !c.thetas.empty()) j["thetas"] = c.thetas;
  if (!c.out.empty()) j["out"] = c.out;
  if (!c.csv.empty()) j["csv"] = c.csv;
  if (!c.aux_csv.empty()) j["aux_csv"] = c.aux_csv;
  return j;
}

}  // namespace detail

/// Runs one command. Writes the envelope to config.out when it names a file
/// and any requested CSV sidecars; throws ww::Error on failure.
inline RunResult run(const RunConfig& c) {
  RunResult result;
  Json echo = detail::config_echo(c);
  const std::string started = detail::utc_now();
  Json payload;
  if (c.command == "orbit") payload = detail::run_orbit(c, echo);
  else if (c.command == "scan") payload = detail::run_scan(c, echo);
  else if (c.command == "certify") payload = detail::run_certify(c, echo, result.exit_code);
  else if (c.command == "diffract") payload = detail::run_diffract(c, echo);
  else if (c.command == "folner") payload = detail::run_folner(c, echo);
  else throw ParseError("unknown command '" + c.command + "'");

  result.envelope = Json{{"tool", "ww-spectra"},
                         {"version", kVersion},
                         {"schema", std::string("ww-spectra/v1/") + c.command},
                         {"config", echo},
                         {"started", started},
                         {"finished", detail::utc_now()},
                         {"payload", payload}};
  if (!c.out.empty() && c.out != "-") {
    std::ofstream out(c.out, std::ios::binary);
    if (!out) throw Error("cannot write '" + c.out + "'");
    out << result.envelope.dump(2) << '\n';
  }
  return result;
}

/// Builds a RunConfig from argv. Returns nullopt when help was printed.
inline std::optional<RunConfig> parse_command_line(int argc, const char* const* argv) {
  RunConfig c;
  CLI::App app{"Wiener-Wintner averages, point spectra and diffraction for Z-actions", "ww-spectra"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--threads", c.threads, "worker threads (default: $WW_SPECTRA_THREADS, else all cores)")->check(CLI::PositiveNumber);
    sub->add_option("--out,-o", c.out, "JSON envelope path (default: stdout)");
    sub->add_option("--csv", c.csv, "CSV sidecar path");
  };
  auto system = [&](CLI::App* sub) {
    sub->add_option("--system,-s", c.system, "point source, e.g. fibonacci, rotation:alpha=golden, bernoulli:0.5, periodic:ab")
        ->capture_default_str();
  };
  auto schedule = [&](CLI::App* sub) {
    sub->add_option("--scales", c.scales, "window exponents a..b[:step] (default: 12..20:2, symmetric 11..19:2)");
    sub->add_option("--kind", c.kind, "schedule kind: one-sided | symmetric")->capture_default_str();
  };

  auto* orbit = app.add_subcommand("orbit", "materialize an orbit and optional coefficient traces");
  common(orbit);
  system(orbit);
  schedule(orbit);
  orbit->add_option("--obs", c.observables, "observable, e.g. ind:a, sign:a, value, cyl2:ab, ccyl:aba")->expected(1);
  orbit->add_option("--window", c.window, "half-open window lo..hi")->capture_default_str();
  orbit->add_option("--theta", c.thetas, "frequency for a coefficient trace (repeatable)");
  orbit->add_option("--trace-csv", c.aux_csv, "CSV of the first coefficient trace");

  auto* scan = app.add_subcommand("scan", "detect the empirical point spectrum");
  common(scan);
  system(scan);
  schedule(scan);
  scan->add_option("--obs", c.observables, "observable")->expected(1);
  scan->add_option("--grid", c.grid, "sweep grid size M (promoted to cover the largest window)");
  scan->add_option("--threshold", c.threshold, "amplitude threshold (default 0.05 sqrt(mean power))")->check(CLI::PositiveNumber);

  auto* certify = app.add_subcommand("certify", "certify a Wiener-Wintner point");
  common(certify);
  system(certify);
  schedule(certify);
  certify->add_option("--obs", c.observables, "extra core observable (repeatable)");
  certify->add_option("--core-radius", c.core_radius, "largest cylinder radius in the default core")->capture_default_str()->check(CLI::NonNegativeNumber);
  certify->add_option("--eps", c.eps, "almost-periodicity tolerance")->capture_default_str();
  certify->add_option("--max-terms", c.max_terms, "trigonometric polynomial size limit")->capture_default_str();
  certify->add_option("--offsets", c.offsets, "orbit offsets, must include 0")->delimiter(',')->capture_default_str();
  certify->add_option("--tol-phase", c.tol_phase, "phase-consistency tolerance (times sup|f|)")->capture_default_str();
  certify->add_option("--tol-genericity", c.tol_genericity, "genericity tolerance (times sup|f| sup|g|)")->capture_default_str();
  certify->add_option("--tol-parseval", c.tol_parseval, "Parseval tolerance (times sup|f|^2)")->capture_default_str();
  certify->add_option("--grid", c.grid, "sweep grid size M");
  certify->add_option("--threshold", c.threshold, "detection threshold (default eps/12.5)")->check(CLI::PositiveNumber);

  auto* diffract = app.add_subcommand("diffract", "diffraction of a weighted Dirac comb");
  common(diffract);
  system(diffract);
  schedule(diffract);
  diffract->add_option("--weights", c.weights, "letter weights, e.g. a=1,b=0 (default: first letter 1)");
  diffract->add_option("--comb", c.comb, "comb CSV (position,re,im) instead of --system");
  diffract->add_option("--max-lag", c.max_lag, "autocorrelation lag range S")->capture_default_str();
  diffract->add_option("--kernel-radius", c.kernel_radius, "uniform smoothing radius")->capture_default_str()->check(CLI::NonNegativeNumber);
  diffract->add_option("--grid", c.grid, "sweep grid size M");
  diffract->add_option("--threshold", c.threshold, "peak threshold")->check(CLI::PositiveNumber);
  diffract->add_option("--eta-csv", c.aux_csv, "CSV of the autocorrelation lag,re,im");

  auto* folner = app.add_subcommand("folner", "Shulman temperedness and Folner defects");
  common(folner);
  folner->add_option("--kind", c.kind, "symmetric | one-sided | squares")->required();
  folner->add_option("--nmax", c.nmax, "number of windows")->capture_default_str();
  folner->add_option("--probe-shifts", c.probe_shifts, "shifts t for the defect |A triangle (t+A)|/|A|")->delimiter(',')->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name());
    return std::nullopt;
  } catch (const CLI::CallForVersion&) {
    std::cout << kVersion << '\n';
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ParseError(e.what());
  }
  for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
  return c;
}

/// Process entry point: parse, run, print, map errors to exit status 1.
inline int main(int argc, const char* const* argv) {
  try {
    const auto config = parse_command_line(argc, argv);
    if (!config) return 0;
    const RunResult r = run(*config);
    if (config->out.empty() || config->out == "-") std::cout << r.envelope.dump(2) << '\n';
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "ww-spectra: error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ww::app
