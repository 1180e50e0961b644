#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "wwspectra/wwspectra.hpp"

using namespace ww;

namespace {

std::vector<Complex> random_values(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<Complex> v(n);
  for (auto& z : v) z = {g(rng), g(rng)};
  return v;
}

OrbitSignal character_signal(Window w, double theta) {
  return OrbitSignal::from_function(w, [theta](std::int64_t t) { return detail::character(theta, t); });
}

}  // namespace

TEST(FourierBohr, ConstantAndMatchingCharacter) {
  const auto one = OrbitSignal::from_function(Window(-37, 1000), [](std::int64_t) { return Complex(1.0); });
  EXPECT_EQ(fourier_bohr_at(one, Window(-37, 1000), Frequency(0.0)), Complex(1.0));
  for (double th : {0.1, 0.25, 0.3141592, 0.7}) {
    const auto sig = character_signal(Window(0, 4096), th);
    const Complex a = fourier_bohr_at(sig, Window(0, 4096), Frequency(th));
    EXPECT_NEAR(a.real(), 1.0, 1e-13);
    EXPECT_NEAR(a.imag(), 0.0, 1e-13);
  }
}

TEST(FourierBohr, PeriodicHalfFrequency) {
  const auto ab = make_source("periodic:ab");
  const auto sig = orbit_signal(CylinderObservable::indicator("ab", 'a'), ab, Window(0, 2000));
  const Complex a = fourier_bohr_at(sig, Window(0, 2000), Frequency(0.5));
  EXPECT_EQ(a, Complex(0.5));
}

TEST(FourierBohr, MatchesLongDoubleOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto v = random_values(rng, 3000 + 97 * static_cast<std::size_t>(trial));
    const std::int64_t t0 = static_cast<std::int64_t>(rng() % 200001) - 100000;
    const double th = u(rng);
    const Complex got = fourier_bohr_at(std::span<const Complex>(v), t0, Frequency(th));
    const Complex want = oracle::dft(v, t0, th);
    EXPECT_LT(std::abs(got - want), 1e-13) << "trial " << trial;
  }
}

TEST(FourierBohr, FarOffsetsKeepPhaseExact) {
  // Large t0 must not lose phase accuracy.
  std::mt19937_64 rng(5);
  const auto v = random_values(rng, 2048);
  for (std::int64_t t0 : {std::int64_t{1} << 40, -(std::int64_t{1} << 35) + 3}) {
    const double th = 0.123456789;
    EXPECT_LT(std::abs(fourier_bohr_at(std::span<const Complex>(v), t0, Frequency(th)) - oracle::dft(v, t0, th)), 1e-12);
  }
}

TEST(FourierBohr, Linearity) {
  std::mt19937_64 rng(3);
  const auto f = random_values(rng, 5000);
  const auto g = random_values(rng, 5000);
  const Complex c(0.3, -1.7);
  std::vector<Complex> h(f.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = f[i] + c * g[i];
  const Frequency th(0.41);
  const Complex lhs = fourier_bohr_at(std::span<const Complex>(h), 7, th);
  const Complex rhs = fourier_bohr_at(std::span<const Complex>(f), 7, th) + c * fourier_bohr_at(std::span<const Complex>(g), 7, th);
  EXPECT_LT(std::abs(lhs - rhs), 1e-14);
}

TEST(FourierBohr, ShiftCovariance) {
  // a_theta(f_{s.x}) on A equals e^{2 pi i theta s} a_theta(f_x) on A + s.
  const auto fib = make_source("fibonacci");
  const auto obs = CylinderObservable::indicator(fib.alphabet(), 'a');
  const auto base = orbit_signal(obs, fib, Window(0, 20000));
  const std::int64_t s = 1001;
  const auto shifted = orbit_signal(obs, fib.with_offset(s), Window(0, 8192));
  for (double th : {0.0, 0.381966, 0.2, 0.618034}) {
    const Complex lhs = fourier_bohr_at(shifted, Window(0, 8192), Frequency(th));
    const Complex rhs = detail::character(th, s) * fourier_bohr_at(base, Window(s, s + 8192), Frequency(th));
    EXPECT_LT(std::abs(lhs - rhs), 1e-12);
  }
}

TEST(Sweep, AllOnesIsDirichletKernel) {
  const std::int64_t n = 1000;
  const std::size_t m = 2048;
  const auto one = OrbitSignal::from_function(Window(0, n), [](std::int64_t) { return Complex(1.0); });
  const auto sw = fourier_bohr_sweep(one, Window(0, n), m);
  EXPECT_NEAR(std::abs(sw[0] - Complex(1.0)), 0.0, 1e-14);
  for (std::size_t k = 1; k < m; ++k) {
    const double x = std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
    const double dirichlet = std::abs(std::sin(x * static_cast<double>(n)) / std::sin(x)) / static_cast<double>(n);
    EXPECT_NEAR(std::abs(sw[k]), dirichlet, 1e-12);
  }
}

TEST(Sweep, PeriodicEightPoint) {
  const auto ab = make_source("periodic:ab");
  const auto sig = orbit_signal(CylinderObservable::indicator("ab", 'a'), ab, Window(0, 8));
  const auto sw = fourier_bohr_sweep(sig, Window(0, 8), 8);
  for (std::size_t k = 0; k < 8; ++k) {
    const double want = (k == 0 || k == 4) ? 0.5 : 0.0;
    EXPECT_NEAR(std::abs(sw[k] - Complex(want)), 0.0, 1e-15) << k;
  }
}

TEST(Sweep, MatchesDirectEvaluation) {
  std::mt19937_64 rng(17);
  for (std::int64_t lo : {0, -300, 12345}) {
    const Window w(lo, lo + 1000);
    const auto sig = OrbitSignal(w, random_values(rng, 1000));
    const auto sw = fourier_bohr_sweep(sig, w, 1024);
    for (std::size_t k = 0; k < 1024; k += 7) {
      const double th = static_cast<double>(k) / 1024.0;
      EXPECT_LT(std::abs(sw[k] - fourier_bohr_at(sig, w, Frequency(th))), 1e-12);
    }
  }
}

TEST(Sweep, RejectsBadGrid) {
  const auto one = OrbitSignal::from_function(Window(0, 100), [](std::int64_t) { return Complex(1.0); });
  EXPECT_THROW(fourier_bohr_sweep(one, Window(0, 100), 96), RangeError);
  EXPECT_THROW(fourier_bohr_sweep(one, Window(0, 100), 64), RangeError);
  EXPECT_THROW(fourier_bohr_sweep(one, Window(0, 101), 128), CoverageError);
}

TEST(Trace, StepSymmetricExactRationals) {
  const auto step = make_source("step");
  const auto obs = CylinderObservable::value(step.alphabet());
  const auto sched = FolnerSchedule::symmetric({10, 100, 1000, 10000, 100000});
  const auto tr = coefficient_trace(step, obs, sched, Frequency(0.0));
  for (std::size_t i = 0; i < sched.size(); ++i) {
    const auto n = static_cast<double>(sched.scales()[i]);
    EXPECT_EQ(tr.estimates[i], Complex((n + 1) / (2 * n + 1)));
  }
  EXPECT_EQ(tr.verdict, TraceVerdict::converged);
  EXPECT_NEAR(tr.value.real(), 0.5, 1e-3);
}

TEST(Trace, ThueMorseMeanVanishes) {
  const auto tm = make_source("thue-morse");
  const auto tr = coefficient_trace(tm, CylinderObservable::sign(tm.alphabet(), 'a'), FolnerSchedule::default_one_sided(), Frequency(0.0));
  EXPECT_EQ(tr.verdict, TraceVerdict::vanishing);
}

TEST(Trace, RotationEigenvalue) {
  const double alpha = (std::sqrt(5.0) - 1.0) / 2.0;
  const auto rot = make_source("rotation");
  const auto obs = CylinderObservable::letter_map(rot.alphabet(), {{'a', 1.0 - alpha}, {'b', -alpha}});
  const auto sched = FolnerSchedule::dyadic_one_sided(14, 18, 2);
  const auto tr = coefficient_trace(rot, obs, sched, Frequency(alpha));
  EXPECT_EQ(tr.verdict, TraceVerdict::converged);
  EXPECT_GT(std::abs(tr.value), 0.1);
  const auto v = orbit_signal(obs, rot, Window(0, 1 << 18)).values();
  EXPECT_LT(std::abs(tr.estimates.back() - oracle::dft(v, 0, alpha)), 1e-12);
}

TEST(Correlation, ClosedForms) {
  const auto fib = make_source("fibonacci");
  const Window w(0, 1 << 18);
  const auto one = orbit_signal(CylinderObservable::constant(fib.alphabet(), 1.0), fib, w);
  EXPECT_EQ(correlation_average(one, one, w), Complex(1.0));
  const auto ia = orbit_signal(CylinderObservable::indicator(fib.alphabet(), 'a'), fib, w);
  const auto ib = orbit_signal(CylinderObservable::indicator(fib.alphabet(), 'b'), fib, w);
  EXPECT_EQ(correlation_average(ia, ib, w), Complex(0.0));
  const double freq = oracle::letter_frequency(fib.symbols(w), 'a');
  EXPECT_NEAR(correlation_average(ia, ia, w).real(), freq, 1e-15);
  EXPECT_NEAR(freq, 0.61803, 2e-3);
}

TEST(Seminorm, ClosedForms) {
  const auto tm = make_source("thue-morse");
  const auto est = besicovitch_seminorm(tm, CylinderObservable::sign(tm.alphabet(), 'a'), FolnerSchedule::dyadic_one_sided(8, 16, 2));
  for (double v : est.values) EXPECT_EQ(v, 1.0);

  const auto c = OrbitSignal::from_function(Window(0, 4096), [](std::int64_t) { return Complex(3.0, 4.0); });
  for (double v : besicovitch_seminorm(c, FolnerSchedule::dyadic_one_sided(4, 12, 4)).values) EXPECT_NEAR(v, 5.0, 1e-14);

  const auto step = make_source("step");
  const auto sched = FolnerSchedule::symmetric({10, 1000, 100000});
  const auto st = besicovitch_seminorm(step, CylinderObservable::value(step.alphabet()), sched);
  for (std::size_t i = 0; i < sched.size(); ++i) {
    const auto n = static_cast<double>(sched.scales()[i]);
    EXPECT_NEAR(st.values[i], std::sqrt((n + 1) / (2 * n + 1)), 1e-15);
  }
  EXPECT_NEAR(st.values.back(), std::sqrt(0.5), 1e-5);
}

TEST(Reduction, IndependentOfThreadsAndRepeatable) {
  std::mt19937_64 rng(23);
  const auto v = random_values(rng, 100003);
  const Complex a = fourier_bohr_at(std::span<const Complex>(v), -5, Frequency(0.377));
  const Complex b = fourier_bohr_at(std::span<const Complex>(v), -5, Frequency(0.377));
  EXPECT_EQ(a, b);
}
