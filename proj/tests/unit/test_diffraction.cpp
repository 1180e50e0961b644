#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "wwspectra/wwspectra.hpp"

using namespace ww;

namespace {

WeightedComb lattice(std::int64_t n) { return WeightedComb(Window(0, n), std::vector<Complex>(static_cast<std::size_t>(n), 1.0)); }

}  // namespace

TEST(Comb, FromSymbols) {
  const auto fib = make_source("fibonacci");
  const Window w(0, 1000);
  const auto sym = fib.symbols(w);
  const auto comb = comb_from_symbols(sym, {{'a', 1.0}, {'b', 0.0}}, w);
  for (std::int64_t t = 0; t < 1000; ++t) EXPECT_EQ(comb.at(t).real(), sym[static_cast<std::size_t>(t)] == 'a' ? 1.0 : 0.0);
  EXPECT_EQ(comb.at(-1), Complex());
  const auto tm = make_source("thue-morse");
  const auto pm = comb_from_symbols(tm.symbols(w), {{'a', 1.0}, {'b', -1.0}}, w);
  for (const auto& v : pm.weights()) EXPECT_EQ(std::abs(v), 1.0);
  EXPECT_THROW(comb_from_symbols(sym, {{'a', 1.0}}, w), ParseError);
}

TEST(Comb, TranslationBound) {
  EXPECT_EQ(translation_bound(lattice(100), 3), 7.0);
  const auto fib = make_source("fibonacci");
  const Window w(0, 1000);
  EXPECT_EQ(translation_bound(comb_from_symbols(fib.symbols(w), {{'a', 1.0}, {'b', 0.0}}, w), 0), 1.0);
  std::vector<Complex> single(21, 0.0);
  single[10] = 5.0;
  EXPECT_EQ(translation_bound(WeightedComb(Window(-10, 11), single), 2), 5.0);
}

TEST(Comb, CsvIngestion) {
  std::istringstream in("position,re,im\n-2,1,0\n0,0.5,-0.5\n3,2,0\n");
  const auto comb = comb_from_csv(in);
  EXPECT_EQ(comb.window(), Window(-2, 4));
  EXPECT_EQ(comb.at(0), Complex(0.5, -0.5));
  EXPECT_EQ(comb.at(1), Complex());
  std::istringstream dup("1,1,0\n1,2,0\n");
  EXPECT_THROW(comb_from_csv(dup), ParseError);
  std::istringstream bad("1,1\n");
  EXPECT_THROW(comb_from_csv(bad), ParseError);
}

TEST(Autocorrelation, LatticeCountsOverlaps) {
  const std::int64_t n = 4096;
  const auto eta = autocorrelation(lattice(n), 100);
  for (std::int64_t s = -100; s <= 100; ++s) {
    EXPECT_NEAR(eta.at(s).real(), static_cast<double>(n - std::abs(s)) / static_cast<double>(n), 1e-12);
    EXPECT_NEAR(eta.at(s).imag(), 0.0, 1e-12);
  }
  EXPECT_THROW(eta.at(101), RangeError);
  EXPECT_THROW(autocorrelation(lattice(100), 26), RangeError);
}

TEST(Autocorrelation, MatchesDirectSum) {
  const auto fib = make_source("fibonacci");
  const Window w(0, 3000);
  std::vector<Complex> weights;
  for (char c : fib.symbols(w)) weights.emplace_back(c == 'a' ? 1.0 : -0.5, c == 'a' ? 0.25 : 0.0);
  const WeightedComb comb(w, weights);
  const auto eta = autocorrelation(comb, 700);
  for (std::int64_t s = -700; s <= 700; s += 13) EXPECT_LT(std::abs(eta.at(s) - oracle::autocorrelation(weights, s)), 1e-12);
}

TEST(Autocorrelation, FibonacciAndBernoulli) {
  const Window w(0, 1 << 18);
  const auto fib = make_source("fibonacci");
  const auto sym = fib.symbols(w);
  const auto eta = autocorrelation(comb_from_symbols(sym, {{'a', 1.0}, {'b', 0.0}}, w), 64);
  EXPECT_NEAR(eta.at(0).real(), oracle::letter_frequency(sym, 'a'), 1e-14);
  EXPECT_NEAR(eta.at(0).real(), 0.6180, 2e-3);

  const auto b = make_source("bernoulli:p=0.5,seed=3");
  const auto beta = autocorrelation(comb_from_symbols(b.symbols(w), {{'a', 1.0}, {'b', -1.0}}, w), 100);
  EXPECT_NEAR(beta.at(0).real(), 1.0, 1e-14);
  for (std::int64_t s = 1; s <= 100; ++s) EXPECT_LE(std::abs(beta.at(s)), 4.0 / std::sqrt(static_cast<double>(w.size())));
}

TEST(Autocorrelation, FejerTransformNonnegative) {
  const auto fib = make_source("fibonacci");
  const Window w(0, 1 << 14);
  const auto eta = autocorrelation(comb_from_symbols(fib.symbols(w), {{'a', 1.0}, {'b', 0.0}}, w), 512);
  EXPECT_GE(fejer_transform_minimum(eta), -1e-9);
}

TEST(Diffraction, LatticeSinglePeak) {
  const auto comb = lattice(1 << 16);
  const auto rep = diffraction_report(comb_signal_fn(comb), comb_schedule(comb), DiffractionParams{});
  ASSERT_EQ(rep.peaks.size(), 1u);
  EXPECT_EQ(rep.peaks[0].theta, Frequency(0.0));
  EXPECT_NEAR(rep.peaks[0].intensity, 1.0, 1e-12);
  EXPECT_LE(rep.peaks[0].consistent_phase_residual, 1e-3);
}

TEST(Diffraction, ThueMorseSignsHaveNoPeaks) {
  const auto tm = make_source("thue-morse");
  DiffractionParams p;
  p.detection.threshold = 0.05;
  const auto rep = diffraction_report(tm, {{'a', 1.0}, {'b', -1.0}}, FolnerSchedule::dyadic_one_sided(12, 16, 2), p);
  EXPECT_TRUE(rep.peaks.empty());
}

TEST(Diffraction, WeightScalingIsExact) {
  const auto fib = make_source("fibonacci");
  const auto sched = FolnerSchedule::dyadic_one_sided(10, 14, 2);
  DiffractionParams p;
  p.max_lag = 512;
  p.detection.threshold = 0.02;
  const auto base = diffraction_report(fib, {{'a', 1.0}, {'b', 0.0}}, sched, p);
  p.detection.threshold = 0.04;
  const auto twice = diffraction_report(fib, {{'a', 2.0}, {'b', 0.0}}, sched, p);
  ASSERT_EQ(base.peaks.size(), twice.peaks.size());
  for (std::size_t j = 0; j < base.peaks.size(); ++j) {
    EXPECT_EQ(base.peaks[j].theta, twice.peaks[j].theta);
    EXPECT_EQ(4.0 * base.peaks[j].intensity, twice.peaks[j].intensity);
  }
}

TEST(Diffraction, KernelSmoothingKeepsMean) {
  const auto fib = make_source("fibonacci");
  const auto obs = smoothed_weights(fib.alphabet(), {{'a', 1.0}, {'b', 0.0}}, 2);
  EXPECT_EQ(obs.radius(), 2);
  EXPECT_NEAR(obs.evaluate("aabaa").real(), 0.8, 1e-15);
}

TEST(Diffraction, CombScheduleNeedsLength) {
  EXPECT_THROW(comb_schedule(lattice(32)), RangeError);
  const auto s = comb_schedule(lattice(1024));
  EXPECT_EQ(s.scales(), (std::vector<std::int64_t>{64, 256, 1024}));
}
