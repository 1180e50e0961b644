#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wwspectra/wwspectra.hpp"

using namespace ww;

namespace {

std::vector<std::pair<std::int64_t, std::int64_t>> bounds(const FolnerSchedule& s) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.emplace_back(s.window(i).lo, s.window(i).hi);
  return out;
}

FolnerSchedule squares(std::int64_t n_max) {
  std::vector<Window> w;
  for (std::int64_t n = 1; n <= n_max; ++n) w.emplace_back(n * n, n * n + n);
  return FolnerSchedule::custom(w);
}

std::vector<std::int64_t> range(std::int64_t a, std::int64_t b) {
  std::vector<std::int64_t> v;
  for (std::int64_t i = a; i <= b; ++i) v.push_back(i);
  return v;
}

}  // namespace

TEST(FolnerDefect, IntervalClosedForms) {
  const auto one_sided = FolnerSchedule::one_sided(range(1, 40));
  const auto symmetric = FolnerSchedule::symmetric(range(1, 40));
  for (std::size_t i = 0; i < 40; ++i) {
    const auto n = static_cast<double>(i + 1);
    EXPECT_DOUBLE_EQ(folner_defect(one_sided, 1, i), 2.0 / n);
    EXPECT_DOUBLE_EQ(folner_defect(symmetric, 3, i), std::min(6.0, 2.0 * (2 * n + 1)) / (2 * n + 1));
  }
  const auto sq = squares(30);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_DOUBLE_EQ(folner_defect(sq, 1, i), 2.0 / static_cast<double>(i + 1));
}

TEST(FolnerDefect, MatchesSetComputation) {
  const auto s = FolnerSchedule::custom({Window(-3, 4), Window(-5, 9), Window(-20, 11)});
  for (std::int64_t t : {-25, -7, -1, 0, 2, 13, 40}) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Window w = s.window(i);
      EXPECT_DOUBLE_EQ(folner_defect(s, t, i),
                       static_cast<double>(oracle::symmetric_difference_size(w.lo, w.hi, t)) / static_cast<double>(w.size()));
    }
  }
}

TEST(FolnerDefect, VanishesForGrowingIntervals) {
  const auto s = FolnerSchedule::dyadic_symmetric(1, 20);
  for (std::int64_t t : {1, 5, 100}) {
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LE(folner_defect(s, t, i), folner_defect(s, t, i - 1));
    EXPECT_LT(folner_defect(s, t, s.size() - 1), 1e-3);
  }
}

TEST(Shulman, SymmetricClosedForm) {
  const auto rep = shulman_trace(FolnerSchedule::symmetric(range(1, 20)), 20);
  ASSERT_EQ(rep.rows.size(), 19u);
  for (const auto& row : rep.rows) {
    const auto n = static_cast<std::int64_t>(row.n);
    EXPECT_EQ(row.window_size, 2 * n + 1);
    EXPECT_EQ(row.union_size, 4 * n - 1);
    EXPECT_EQ(row.ratio, static_cast<double>(4 * n - 1) / static_cast<double>(2 * n + 1));
  }
  EXPECT_EQ(rep.verdict, TemperedVerdict::tempered_up_to_range);
  EXPECT_LT(rep.constant, 2.0);
}

TEST(Shulman, OneSidedDyadicTendsToThreeHalves) {
  const auto rep = shulman_trace(FolnerSchedule::dyadic_one_sided(0, 20), 21);
  for (const auto& row : rep.rows) {
    const std::int64_t half = row.window_size / 2;
    EXPECT_EQ(row.union_size, half + row.window_size - 1);
  }
  EXPECT_NEAR(rep.rows.back().ratio, 1.5, 1e-5);
  EXPECT_EQ(rep.verdict, TemperedVerdict::tempered_up_to_range);
}

TEST(Shulman, UnionsMatchSetComputation) {
  for (const auto& s : {FolnerSchedule::symmetric(range(1, 12)), FolnerSchedule::dyadic_one_sided(0, 8), squares(12),
                        FolnerSchedule::custom({Window(0, 3), Window(-4, 2), Window(5, 15), Window(-9, 9)})}) {
    const auto rep = shulman_trace(s, s.size());
    for (const auto& row : rep.rows) EXPECT_EQ(static_cast<std::size_t>(row.union_size), oracle::shulman_union_size(bounds(s), row.n));
  }
}

TEST(Shulman, SquaresDiverge) {
  const auto rep = shulman_trace(squares(20), 20);
  EXPECT_EQ(rep.verdict, TemperedVerdict::ratio_diverging);
  EXPECT_GT(rep.rows.back().ratio, 10.0);
}

TEST(Shulman, RejectsBadRange) {
  EXPECT_THROW(shulman_trace(FolnerSchedule::symmetric({1, 2}), 1), RangeError);
  EXPECT_THROW(shulman_trace(FolnerSchedule::symmetric({1, 2}), 3), RangeError);
}

TEST(DerivedSequences, IntersectionsAndUnions) {
  auto [b, c] = derived_sequences(FolnerSchedule::one_sided(range(4, 10)), 3);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const std::int64_t n = 4 + static_cast<std::int64_t>(i);
    EXPECT_EQ(b.window(i), Window(3, n));
    EXPECT_EQ(c.window(i), Window(0, n + 3));
  }
  auto [b0, c0] = derived_sequences(FolnerSchedule::symmetric(range(1, 5)), 0);
  for (std::size_t i = 0; i < b0.size(); ++i) {
    EXPECT_EQ(b0.window(i), Window::closed(-static_cast<std::int64_t>(i + 1), static_cast<std::int64_t>(i + 1)));
    EXPECT_EQ(c0.window(i), b0.window(i));
  }
  auto [b2, c2] = derived_sequences(FolnerSchedule::symmetric(range(2, 6)), 2);
  for (std::size_t i = 0; i < b2.size(); ++i) {
    const std::int64_t n = 2 + static_cast<std::int64_t>(i);
    EXPECT_EQ(b2.window(i), Window::closed(-n + 2, n));
    EXPECT_EQ(c2.window(i), Window::closed(-n, n + 2));
  }
  EXPECT_THROW(derived_sequences(FolnerSchedule::one_sided({2, 3}), 5), RangeError);
}

TEST(DerivedSequences, StayTemperedWithinFourC) {
  const auto a = FolnerSchedule::symmetric(range(1, 20));
  const double ca = shulman_trace(a, 20).constant;
  for (std::int64_t s : {0, 1, 2, -2}) {
    auto [b, c] = derived_sequences(a, s);
    const auto rb = shulman_trace(b, b.size());
    const auto rc = shulman_trace(c, c.size());
    for (const auto& row : rc.rows) EXPECT_LE(row.ratio, 4.0 * ca);
    for (const auto& row : rc.rows) EXPECT_EQ(static_cast<std::size_t>(row.union_size), oracle::shulman_union_size(bounds(c), row.n));
    for (const auto& row : rb.rows) EXPECT_EQ(static_cast<std::size_t>(row.union_size), oracle::shulman_union_size(bounds(b), row.n));
  }
  EXPECT_THROW(derived_sequences(a, 3), RangeError);  // A_1 ∩ (3 + A_1) is empty
}

TEST(BoundaryEnergy, ClosedForms) {
  const auto one = OrbitSignal::from_function(Window(-5, 200), [](std::int64_t) { return Complex(1.0); });
  const auto sched = FolnerSchedule::one_sided(range(1, 100));
  for (std::size_t i = 0; i < sched.size(); ++i) EXPECT_DOUBLE_EQ(boundary_energy(one, sched, 1, i), 2.0 / static_cast<double>(i + 1));

  const auto zero = OrbitSignal::from_function(Window(-5, 200), [](std::int64_t) { return Complex(); });
  EXPECT_EQ(boundary_energy(zero, sched, 3, 50), 0.0);

  const auto step = make_source("step");
  const auto sym = FolnerSchedule::symmetric(range(1, 50));
  const auto u = orbit_signal(CylinderObservable::value(step.alphabet()), step, sym.hull().inflated(1));
  for (std::size_t i = 0; i < sym.size(); ++i) {
    const auto n = static_cast<double>(i + 1);
    EXPECT_DOUBLE_EQ(boundary_energy(u, sym, 1, i), 1.0 / (2 * n + 1));
  }
  EXPECT_THROW(boundary_energy(u, sym, 5, sym.size() - 1), CoverageError);
}
