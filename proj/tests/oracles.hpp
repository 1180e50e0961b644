#pragma once

// Brute-force reference computations, written without the library's kernels.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using LComplex = std::complex<long double>;

/// frac(theta * t) from the exact integer product of the mantissa and t.
inline long double frac_exact(long double theta, std::int64_t t) {
  theta -= std::floor(theta);
  if (theta == 0.0L || t == 0) return 0.0L;
  int e = 0;
  const long double f = std::frexp(theta, &e);
  const int shift = 64 - e;  // theta = m / 2^shift
  if (shift >= 128) {
    long double x = theta * static_cast<long double>(t);
    return x - std::floor(x);
  }
  const auto m = static_cast<std::uint64_t>(std::ldexp(f, 64));
  const auto mag = static_cast<unsigned __int128>(t < 0 ? -static_cast<__int128>(t) : t);
  const unsigned __int128 mask = (static_cast<unsigned __int128>(1) << shift) - 1;
  const unsigned __int128 r = (static_cast<unsigned __int128>(m) * mag) & mask;
  long double x = std::ldexp(static_cast<long double>(r), -shift);
  if (t < 0 && x != 0.0L) x = 1.0L - x;
  return x;
}

/// e^{-2 pi i theta t} with the phase reduced exactly.
inline LComplex conj_char(long double theta, std::int64_t t) {
  const long double x = frac_exact(theta, t);
  const long double a = -2.0L * std::numbers::pi_v<long double> * x;
  return {std::cos(a), std::sin(a)};
}

/// (1/n) sum_i v[i] e^{-2 pi i theta (t0 + i)}
inline std::complex<double> dft(const std::vector<std::complex<double>>& v, std::int64_t t0, long double theta) {
  LComplex acc{};
  for (std::size_t i = 0; i < v.size(); ++i) acc += LComplex(v[i].real(), v[i].imag()) * conj_char(theta, t0 + static_cast<std::int64_t>(i));
  acc /= static_cast<long double>(v.size());
  return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

inline long double mean_power(const std::vector<std::complex<double>>& v) {
  long double s = 0;
  for (const auto& z : v) s += static_cast<long double>(std::norm(z));
  return s / static_cast<long double>(v.size());
}

/// Prefix of the fixed point obtained by iterating the rules from one letter.
inline std::string substitution_prefix(const std::map<char, std::string>& rules, char start, std::size_t length) {
  std::string w(1, start);
  while (w.size() < length) {
    std::string next;
    for (char c : w) next += rules.at(c);
    w = next;
  }
  return w.substr(0, length);
}

inline std::string fibonacci_prefix(std::size_t length) { return substitution_prefix({{'a', "ab"}, {'b', "a"}}, 'a', length); }

/// Thue-Morse by the binary digit sum: 'a' when popcount(n) is even.
inline std::string thue_morse_prefix(std::size_t length) {
  std::string w;
  for (std::size_t n = 0; n < length; ++n) w += (__builtin_popcountll(n) % 2 == 0) ? 'a' : 'b';
  return w;
}

/// frac(k alpha + intercept) < cutpoint, evaluated in long double.
/// Symbols 1_{[0, cut)}(frac(k alpha + intercept)) decided in exact integer
/// arithmetic on the binary values of the parameters.
inline std::string rotation_word(double alpha, double intercept, double cutpoint, std::int64_t lo, std::int64_t hi) {
  // Each parameter in [0, 1] as m / 2^shift with shift <= 64.
  auto split = [](double x) {
    int e = 0;
    const double f = std::frexp(x, &e);
    return std::pair{static_cast<__int128>(std::ldexp(f, 53)), 53 - e};
  };
  const auto [ma, sa] = split(alpha);
  const auto [mc, sc] = split(intercept);
  const auto [mk, sk] = split(cutpoint);
  const int shift = std::max({sa, sc, sk});
  const __int128 one = static_cast<__int128>(1) << shift;
  const __int128 a = ma << (shift - sa), c = mc << (shift - sc), cut = mk << (shift - sk);
  std::string w;
  for (std::int64_t k = lo; k < hi; ++k) {
    __int128 y = (static_cast<__int128>(k) * a + c) % one;
    if (y < 0) y += one;
    w += y < cut ? 'a' : 'b';
  }
  return w;
}

/// |A △ (t + A)| by explicit sets.
inline std::size_t symmetric_difference_size(std::int64_t lo, std::int64_t hi, std::int64_t t) {
  std::set<std::int64_t> a, b;
  for (std::int64_t x = lo; x < hi; ++x) {
    a.insert(x);
    b.insert(x + t);
  }
  std::size_t n = 0;
  for (auto x : a) n += !b.count(x);
  for (auto x : b) n += !a.count(x);
  return n;
}

/// |U_{k<n} (A_n - A_k)| by explicit sets; windows are [lo, hi).
inline std::size_t shulman_union_size(const std::vector<std::pair<std::int64_t, std::int64_t>>& windows, std::size_t n) {
  std::set<std::int64_t> u;
  const auto [lo_n, hi_n] = windows[n - 1];
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const auto [lo_k, hi_k] = windows[k];
    for (std::int64_t a = lo_n; a < hi_n; ++a)
      for (std::int64_t b = lo_k; b < hi_k; ++b) u.insert(a - b);
  }
  return u.size();
}

/// eta(s) = (1/N) sum_{t, t+s in [0,N)} w[t+s] conj(w[t])
inline std::complex<double> autocorrelation(const std::vector<std::complex<double>>& w, std::int64_t s) {
  const auto n = static_cast<std::int64_t>(w.size());
  LComplex acc{};
  for (std::int64_t t = 0; t < n; ++t) {
    if (t + s < 0 || t + s >= n) continue;
    const auto a = w[static_cast<std::size_t>(t + s)];
    const auto b = std::conj(w[static_cast<std::size_t>(t)]);
    acc += LComplex(a.real(), a.imag()) * LComplex(b.real(), b.imag());
  }
  acc /= static_cast<long double>(n);
  return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

inline double letter_frequency(const std::string& w, char c) {
  std::size_t n = 0;
  for (char x : w) n += x == c;
  return static_cast<double>(n) / static_cast<double>(w.size());
}

inline std::vector<std::complex<double>> indicator(const std::string& w, char c) {
  std::vector<std::complex<double>> v;
  for (char x : w) v.emplace_back(x == c ? 1.0 : 0.0);
  return v;
}

inline std::vector<std::complex<double>> signs(const std::string& w, char plus) {
  std::vector<std::complex<double>> v;
  for (char x : w) v.emplace_back(x == plus ? 1.0 : -1.0);
  return v;
}

/// Largest |dft| over theta = k / grid inside [lo, hi].
inline double band_sup(const std::vector<std::complex<double>>& v, std::int64_t t0, std::size_t grid, double lo, double hi) {
  double m = 0.0;
  for (std::size_t k = 0; k < grid; ++k) {
    const long double th = static_cast<long double>(k) / static_cast<long double>(grid);
    if (th < lo || th > hi) continue;
    m = std::max(m, std::abs(dft(v, t0, th)));
  }
  return m;
}

}  // namespace oracle
