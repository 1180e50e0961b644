#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "source.hpp"
#include "types.hpp"

namespace ww {

using Complex = std::complex<double>;

/// A function of the local word x[-r..r] seen from the origin, stored as a
/// dense table over alphabet^(2r+1). Words are indexed in base |alphabet|,
/// leftmost letter most significant.
class CylinderObservable {
 public:
  using WordFn = std::function<Complex(std::string_view)>;

  static constexpr std::size_t kMaxTableSize = std::size_t{1} << 22;

  static CylinderObservable from_function(std::string alphabet, int radius, const WordFn& fn, std::string name) {
    CylinderObservable obs(std::move(alphabet), radius, std::move(name));
    std::string word(static_cast<std::size_t>(obs.word_length()), obs.alphabet_.front());
    for (std::size_t code = 0; code < obs.table_.size(); ++code) {
      obs.decode(code, word);
      obs.table_[code] = fn(word);
    }
    return obs;
  }

  static CylinderObservable constant(std::string alphabet, Complex c) {
    return from_function(std::move(alphabet), 0, [c](std::string_view) { return c; }, "const:" + format_complex(c));
  }

  /// 1_letter(x(0))
  static CylinderObservable indicator(std::string alphabet, char letter) {
    require_letter(alphabet, letter);
    return from_function(
        std::move(alphabet), 0, [letter](std::string_view w) { return Complex(w[0] == letter ? 1.0 : 0.0); },
        std::string("ind:") + letter);
  }

  /// +1 on letter, -1 elsewhere.
  static CylinderObservable sign(std::string alphabet, char letter) {
    require_letter(alphabet, letter);
    return from_function(
        std::move(alphabet), 0, [letter](std::string_view w) { return Complex(w[0] == letter ? 1.0 : -1.0); },
        std::string("sign:") + letter);
  }

  /// Numeric value of a digit symbol at the origin.
  static CylinderObservable value(std::string alphabet) {
    for (char c : alphabet) {
      if (c < '0' || c > '9') throw ParseError(std::string("value observable needs digit symbols, got '") + c + "'");
    }
    return from_function(
        std::move(alphabet), 0, [](std::string_view w) { return Complex(w[0] - '0'); }, "value");
  }

  /// Letter -> weight at the origin; must be total on the alphabet.
  static CylinderObservable letter_map(std::string alphabet, const std::map<char, Complex>& weights, std::string name = "") {
    for (char c : alphabet) {
      if (!weights.count(c)) throw ParseError(std::string("weight map has no entry for symbol '") + c + "'");
    }
    if (name.empty()) {
      name = "map:";
      bool first = true;
      for (const auto& [c, w] : weights) {
        name += (first ? "" : ";") + std::string(1, c) + "=" + format_complex(w);
        first = false;
      }
    }
    return from_function(std::move(alphabet), 0, [weights](std::string_view w) { return weights.at(w[0]); }, name);
  }

  /// Indicator that x[0 .. |word|) equals word.
  static CylinderObservable cylinder(std::string alphabet, std::string word) {
    if (word.empty()) throw ParseError("cylinder word is empty");
    for (char c : word) require_letter(alphabet, c);
    const int r = static_cast<int>(word.size()) - 1;
    return from_function(
        std::move(alphabet), r,
        [word, r](std::string_view w) { return Complex(w.substr(static_cast<std::size_t>(r), word.size()) == word ? 1.0 : 0.0); },
        "cyl" + std::to_string(word.size()) + ":" + word);
  }

  /// Indicator that the centered local word x[-r..r] equals word (odd length).
  static CylinderObservable centered_cylinder(std::string alphabet, std::string word) {
    if (word.size() % 2 == 0) throw ParseError("centered cylinder word must have odd length");
    for (char c : word) require_letter(alphabet, c);
    const int r = static_cast<int>(word.size() / 2);
    return from_function(
        std::move(alphabet), r, [word](std::string_view w) { return Complex(w == word ? 1.0 : 0.0); },
        "ccyl:" + word);
  }

  const std::string& alphabet() const { return alphabet_; }
  int radius() const { return radius_; }
  int word_length() const { return 2 * radius_ + 1; }
  const std::string& name() const { return name_; }
  const std::vector<Complex>& table() const { return table_; }

  double sup_norm() const {
    double m = 0.0;
    for (const auto& v : table_) m = std::max(m, std::abs(v));
    return m;
  }

  bool is_real() const {
    return std::all_of(table_.begin(), table_.end(), [](const Complex& v) { return v.imag() == 0.0; });
  }

  /// Letter index, or -1 if the letter is outside the alphabet.
  int letter_index(char c) const { return index_[static_cast<unsigned char>(c)]; }

  Complex evaluate(std::string_view word) const {
    if (static_cast<int>(word.size()) != word_length()) throw RangeError("local word has wrong length");
    std::size_t code = 0;
    for (char c : word) {
      const int i = letter_index(c);
      if (i < 0) throw ParseError(std::string("symbol '") + c + "' outside observable alphabet");
      code = code * alphabet_.size() + static_cast<std::size_t>(i);
    }
    return table_[code];
  }

  Complex at_code(std::size_t code) const { return table_[code]; }

  /// The same function viewed through a larger radius.
  CylinderObservable with_radius(int r) const {
    if (r < radius_) throw RangeError("cannot shrink observable radius");
    if (r == radius_) return *this;
    const int cut = r - radius_;
    return from_function(
        alphabet_, r, [this, cut](std::string_view w) { return evaluate(w.substr(static_cast<std::size_t>(cut), static_cast<std::size_t>(word_length()))); },
        name_);
  }

  CylinderObservable conj() const {
    CylinderObservable out = *this;
    for (auto& v : out.table_) v = std::conj(v);
    out.name_ = "conj(" + name_ + ")";
    return out;
  }

  friend CylinderObservable operator+(const CylinderObservable& a, const CylinderObservable& b) {
    return combine(a, b, [](Complex x, Complex y) { return x + y; }, "(" + a.name_ + "+" + b.name_ + ")");
  }
  friend CylinderObservable operator*(const CylinderObservable& a, const CylinderObservable& b) {
    return combine(a, b, [](Complex x, Complex y) { return x * y; }, "(" + a.name_ + "*" + b.name_ + ")");
  }
  friend CylinderObservable operator*(Complex c, const CylinderObservable& a) {
    CylinderObservable out = a;
    for (auto& v : out.table_) v *= c;
    out.name_ = format_complex(c) + "*" + a.name_;
    return out;
  }
  friend CylinderObservable operator-(const CylinderObservable& a, const CylinderObservable& b) {
    return a + Complex(-1.0) * b;
  }

  bool operator==(const CylinderObservable& o) const {
    return alphabet_ == o.alphabet_ && radius_ == o.radius_ && table_ == o.table_;
  }

  static std::string format_complex(Complex c) {
    auto fmt = [](double x) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      return std::string(buf);
    };
    return c.imag() == 0.0 ? fmt(c.real()) : fmt(c.real()) + "," + fmt(c.imag());
  }

 private:
  CylinderObservable(std::string alphabet, int radius, std::string name)
      : alphabet_(std::move(alphabet)), radius_(radius), name_(std::move(name)) {
    std::sort(alphabet_.begin(), alphabet_.end());
    alphabet_.erase(std::unique(alphabet_.begin(), alphabet_.end()), alphabet_.end());
    if (alphabet_.empty()) throw ParseError("observable alphabet is empty");
    if (radius_ < 0) throw RangeError("observable radius must be nonnegative");
    std::size_t size = 1;
    for (int i = 0; i < word_length(); ++i) {
      size *= alphabet_.size();
      if (size > kMaxTableSize) throw RangeError("observable table too large");
    }
    table_.assign(size, Complex{});
    index_.fill(-1);
    for (std::size_t i = 0; i < alphabet_.size(); ++i) index_[static_cast<unsigned char>(alphabet_[i])] = static_cast<int>(i);
  }

  void decode(std::size_t code, std::string& word) const {
    for (std::size_t i = word.size(); i-- > 0;) {
      word[i] = alphabet_[code % alphabet_.size()];
      code /= alphabet_.size();
    }
  }

  static void require_letter(const std::string& alphabet, char c) {
    if (alphabet.find(c) == std::string::npos) {
      throw ParseError(std::string("letter '") + c + "' is not in alphabet '" + alphabet + "'");
    }
  }

  template <class Op>
  static CylinderObservable combine(const CylinderObservable& a, const CylinderObservable& b, Op op, std::string name) {
    if (a.alphabet_ != b.alphabet_) throw ParseError("observables over different alphabets");
    const int r = std::max(a.radius_, b.radius_);
    const auto wa = a.with_radius(r);
    const auto wb = b.with_radius(r);
    CylinderObservable out = wa;
    for (std::size_t i = 0; i < out.table_.size(); ++i) out.table_[i] = op(wa.table_[i], wb.table_[i]);
    out.name_ = std::move(name);
    return out;
  }

  std::string alphabet_;
  int radius_ = 0;
  std::string name_;
  std::vector<Complex> table_;
  std::array<int, 256> index_{};
};

/// Parses an observable descriptor against an alphabet:
///   const:<re>[,<im>] | ind:<c> | sign:<c> | value | cyl<k>:<word> | ccyl:<word>
///   map:<c>=<re>[,<im>];<c>=...
inline CylinderObservable make_observable(std::string_view descriptor, const std::string& alphabet) {
  const std::string text = detail::trim(descriptor);
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string body = colon == std::string::npos ? std::string() : text.substr(colon + 1);
  auto parse_complex = [](const std::string& s) {
    const auto parts = detail::split(s, ',');
    if (parts.size() > 2) throw ParseError("bad complex value '" + s + "'");
    return Complex(detail::parse_real(parts[0], "value"), parts.size() == 2 ? detail::parse_real(parts[1], "value") : 0.0);
  };
  auto single_letter = [&](const std::string& s) {
    if (s.size() != 1) throw ParseError("observable '" + text + "' needs a single letter");
    return s[0];
  };
  if (head == "const") return CylinderObservable::constant(alphabet, body.empty() ? Complex(1.0) : parse_complex(body));
  if (head == "ind") return CylinderObservable::indicator(alphabet, single_letter(body));
  if (head == "sign") return CylinderObservable::sign(alphabet, single_letter(body));
  if (head == "value") return CylinderObservable::value(alphabet);
  if (head == "ccyl") return CylinderObservable::centered_cylinder(alphabet, body);
  if (head == "map") {
    std::map<char, Complex> weights;
    for (const auto& item : detail::split(body, ';')) {
      const auto eq = item.find('=');
      if (eq != 1) throw ParseError("bad weight entry '" + item + "'");
      weights[item[0]] = parse_complex(item.substr(2));
    }
    return CylinderObservable::letter_map(alphabet, weights, text);
  }
  if (head.rfind("cyl", 0) == 0 && head.size() > 3) {
    const auto len = detail::parse_integer(head.substr(3), "cylinder length");
    if (len != static_cast<std::int64_t>(body.size())) {
      throw ParseError("cylinder length " + std::to_string(len) + " does not match word '" + body + "'");
    }
    return CylinderObservable::cylinder(alphabet, body);
  }
  throw ParseError("unknown observable '" + text + "'");
}

/// Constant observable plus the indicators of every centered word of radius
/// <= max_radius that occurs in the probe symbols.
/// A radius level is only added when the whole level fits within
/// max_observables, so high-complexity sources get a shallower core.
inline std::vector<CylinderObservable> default_core(const std::string& alphabet, const Symbols& probe, int max_radius,
                                                    std::size_t max_observables = 16) {
  std::vector<CylinderObservable> core{CylinderObservable::constant(alphabet, 1.0)};
  for (int r = 0; r <= max_radius; ++r) {
    const std::size_t len = static_cast<std::size_t>(2 * r + 1);
    std::set<std::string> seen;
    for (std::size_t i = 0; i + len <= probe.size(); ++i) seen.insert(probe.substr(i, len));
    if (r > 0 && core.size() + seen.size() > max_observables) break;
    for (const auto& w : seen) core.push_back(CylinderObservable::centered_cylinder(alphabet, w));
  }
  return core;
}

}  // namespace ww
