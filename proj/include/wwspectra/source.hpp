#pragma once

// Point sources: explicit two-sided sequences x : Z -> alphabet, realized
// lazily on finite windows.
//
// Shift convention: (t.x)(k) = x(k + t). A source with base offset s stands
// for the translated point s.x, so its symbol at k is x(k + s).

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "types.hpp"

namespace ww {

using Symbols = std::string;

struct SubstitutionKind {
  std::string name;
  std::map<char, std::string> rules;
  char left = 'a';   // x(-1)
  char right = 'a';  // x(0)
  int power = 1;     // sigma^power fixes the seed pair
  bool operator==(const SubstitutionKind&) const = default;
};

struct RotationKind {
  double alpha = 0.0;
  double intercept = 0.0;
  double cutpoint = 0.5;
  bool operator==(const RotationKind&) const = default;
};

struct PeriodicKind {
  std::string word;
  bool operator==(const PeriodicKind&) const = default;
};

/// u(n) = 0 for n < 0 and 1 for n >= 0, over the alphabet {'0','1'}.
struct StepKind {
  bool operator==(const StepKind&) const = default;
};

struct ExplicitKind {
  std::int64_t offset = 0;  // index of symbols[0]
  std::string symbols;
  bool operator==(const ExplicitKind&) const = default;
};

/// i.i.d. letters: 'a' with probability p, else 'b'.
struct BernoulliKind {
  double p = 0.5;
  std::uint64_t seed = 0;
  bool operator==(const BernoulliKind&) const = default;
};

using SourceKind =
    std::variant<SubstitutionKind, RotationKind, PeriodicKind, StepKind, ExplicitKind, BernoulliKind>;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0,1) attached to (seed, k); random access in k.
inline double hashed_uniform(std::uint64_t seed, std::int64_t k) {
  const std::uint64_t h = splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(k));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline std::string apply_substitution(const std::map<char, std::string>& rules, std::string_view w) {
  std::string out;
  for (char c : w) out += rules.at(c);
  return out;
}

inline std::string apply_power(const std::map<char, std::string>& rules, std::string w, int power) {
  for (int i = 0; i < power; ++i) w = apply_substitution(rules, w);
  return w;
}

/// Primitive iff some power of the incidence matrix is strictly positive;
/// Wielandt bounds the exponent by (d-1)^2 + 1.
inline bool is_primitive(const std::map<char, std::string>& rules) {
  std::vector<char> letters;
  for (const auto& [c, _] : rules) letters.push_back(c);
  const std::size_t d = letters.size();
  auto index_of = [&](char c) {
    return static_cast<std::size_t>(std::find(letters.begin(), letters.end(), c) - letters.begin());
  };
  std::vector<std::vector<bool>> m(d, std::vector<bool>(d, false));
  for (std::size_t i = 0; i < d; ++i) {
    for (char c : rules.at(letters[i])) m[i][index_of(c)] = true;
  }
  auto p = m;
  const std::size_t bound = (d - 1) * (d - 1) + 1;
  for (std::size_t step = 1; step <= bound; ++step) {
    bool positive = true;
    for (const auto& row : p) positive = positive && std::all_of(row.begin(), row.end(), [](bool b) { return b; });
    if (positive) return true;
    std::vector<std::vector<bool>> next(d, std::vector<bool>(d, false));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k)
        if (p[i][k])
          for (std::size_t j = 0; j < d; ++j) next[i][j] = next[i][j] || m[k][j];
    p = std::move(next);
  }
  return false;
}

}  // namespace detail

class PointSource {
 public:
  PointSource(SourceKind kind, std::string descriptor, std::int64_t base_offset = 0)
      : kind_(std::move(kind)), descriptor_(std::move(descriptor)), base_offset_(base_offset) {
    validate();
  }

  const SourceKind& kind() const { return kind_; }
  const std::string& descriptor() const { return descriptor_; }
  std::int64_t base_offset() const { return base_offset_; }

  /// The translated point (s + base_offset).x
  PointSource with_offset(std::int64_t s) const {
    PointSource copy = *this;
    copy.base_offset_ += s;
    return copy;
  }

  /// Descriptor plus "@offset" when the offset is nonzero.
  std::string identity() const {
    return base_offset_ == 0 ? descriptor_ : descriptor_ + "@" + std::to_string(base_offset_);
  }

  bool is_two_sided() const {
    return std::holds_alternative<StepKind>(kind_) || std::holds_alternative<ExplicitKind>(kind_);
  }

  /// Sorted letters the source can emit.
  std::string alphabet() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          std::set<char> letters;
          if constexpr (std::is_same_v<K, SubstitutionKind>) {
            for (const auto& [c, _] : k.rules) letters.insert(c);
          } else if constexpr (std::is_same_v<K, PeriodicKind>) {
            letters.insert(k.word.begin(), k.word.end());
          } else if constexpr (std::is_same_v<K, ExplicitKind>) {
            letters.insert(k.symbols.begin(), k.symbols.end());
          } else if constexpr (std::is_same_v<K, StepKind>) {
            letters = {'0', '1'};
          } else {
            letters = {'a', 'b'};
          }
          return std::string(letters.begin(), letters.end());
        },
        kind_);
  }

  /// Symbols x(k + base_offset) for k in the window.
  Symbols symbols(const Window& w) const {
    const Window abs = w.shifted(base_offset_);
    return std::visit([&](const auto& k) { return materialize(k, abs); }, kind_);
  }

  bool operator==(const PointSource&) const = default;

 private:
  void validate() {
    std::visit([](auto& k) { check(k); }, kind_);
  }

  static void check(SubstitutionKind& k) {
    if (k.rules.empty()) throw SourceError("substitution has no rules");
    for (const auto& [c, img] : k.rules) {
      if (img.empty()) throw SourceError(std::string("substitution image of '") + c + "' is empty");
      for (char d : img) {
        if (!k.rules.count(d)) {
          throw SourceError(std::string("substitution letter '") + d + "' has no rule");
        }
      }
    }
    if (!k.rules.count(k.left) || !k.rules.count(k.right)) {
      throw SourceError("seed letters must belong to the substitution alphabet");
    }
    if (!detail::is_primitive(k.rules)) throw SourceError("substitution is not primitive");
    bool expands = false;
    for (const auto& [c, img] : k.rules) expands = expands || img.size() >= 2;
    if (!expands) throw SourceError("substitution does not expand");

    // The seed must occur in the language ...
    const std::string seed{k.left, k.right};
    std::string word(1, k.rules.begin()->first);
    bool legal = false;
    for (int i = 0; i < 64 && word.size() < (1u << 16); ++i) {
      word = detail::apply_substitution(k.rules, word);
      if (word.find(seed) != std::string::npos) {
        legal = true;
        break;
      }
    }
    if (!legal) throw SourceError("seed pair " + std::string{k.left} + "|" + k.right + " is not a legal word");

    // ... and one expansion round of some power sigma^p must reproduce it
    // around the origin: sigma^p(left) ends in left, sigma^p(right) starts with right.
    for (int p = 1; p <= 24; ++p) {
      const std::string l = detail::apply_power(k.rules, std::string(1, k.left), p);
      const std::string r = detail::apply_power(k.rules, std::string(1, k.right), p);
      if (l.back() == k.left && r.front() == k.right) {
        k.power = p;
        return;
      }
      if (l.size() + r.size() > (1u << 20)) break;
    }
    throw SourceError("seed pair " + std::string{k.left} + "|" + k.right + " is not extendable");
  }
  static void check(RotationKind& k) {
    if (!std::isfinite(k.alpha) || !std::isfinite(k.intercept)) throw SourceError("rotation parameters must be finite");
    if (!(k.cutpoint > 0.0 && k.cutpoint <= 1.0)) throw SourceError("rotation cutpoint must lie in (0,1]");
  }
  static void check(PeriodicKind& k) {
    if (k.word.empty()) throw SourceError("periodic word is empty");
  }
  static void check(StepKind&) {}
  static void check(ExplicitKind& k) {
    if (k.symbols.empty()) throw SourceError("explicit source has no symbols");
  }
  static void check(BernoulliKind& k) {
    if (!(k.p > 0.0 && k.p < 1.0)) throw SourceError("bernoulli p must lie in (0,1)");
  }

  static Symbols materialize(const SubstitutionKind& k, const Window& w) {
    Symbols out;
    out.reserve(static_cast<std::size_t>(w.size()));
    // Left half-line: sigma^{pm}(left) occupies [-len, -1].
    std::string left;
    if (w.lo < 0) {
      left.assign(1, k.left);
      while (static_cast<std::int64_t>(left.size()) < -w.lo) left = detail::apply_power(k.rules, left, k.power);
    }
    std::string right;
    if (w.hi > 0) {
      right.assign(1, k.right);
      while (static_cast<std::int64_t>(right.size()) < w.hi) right = detail::apply_power(k.rules, right, k.power);
    }
    const auto llen = static_cast<std::int64_t>(left.size());
    for (std::int64_t i = w.lo; i < w.hi; ++i) {
      out.push_back(i < 0 ? left[static_cast<std::size_t>(llen + i)] : right[static_cast<std::size_t>(i)]);
    }
    return out;
  }
  static Symbols materialize(const RotationKind& k, const Window& w) {
    Symbols out;
    out.reserve(static_cast<std::size_t>(w.size()));
    for (std::int64_t i = w.lo; i < w.hi; ++i) {
      // i * alpha + intercept = s + e carried in two parts, so the comparison
      // with the cutpoint is decided on the exact value up to O(2^-106).
      const double t = static_cast<double>(i);
      const double hi = k.alpha * t;
      const double lo = std::fma(k.alpha, t, -hi);
      const double s = hi + k.intercept;
      const double bb = s - hi;
      const double e = ((hi - (s - bb)) + (k.intercept - bb)) + lo;
      const double f = s - std::floor(s);
      bool in;
      if (f + e < 0.0) in = ((f + 1.0) - k.cutpoint) + e < 0.0;
      else if ((f - 1.0) + e >= 0.0) in = true;
      else in = (f - k.cutpoint) + e < 0.0;
      out.push_back(in ? 'a' : 'b');
    }
    return out;
  }
  static Symbols materialize(const PeriodicKind& k, const Window& w) {
    Symbols out;
    out.reserve(static_cast<std::size_t>(w.size()));
    const auto p = static_cast<std::int64_t>(k.word.size());
    for (std::int64_t i = w.lo; i < w.hi; ++i) out.push_back(k.word[static_cast<std::size_t>(((i % p) + p) % p)]);
    return out;
  }
  static Symbols materialize(const StepKind&, const Window& w) {
    Symbols out;
    out.reserve(static_cast<std::size_t>(w.size()));
    for (std::int64_t i = w.lo; i < w.hi; ++i) out.push_back(i < 0 ? '0' : '1');
    return out;
  }
  static Symbols materialize(const ExplicitKind& k, const Window& w) {
    const Window have(k.offset, k.offset + static_cast<std::int64_t>(k.symbols.size()));
    if (!have.contains(w)) {
      throw CoverageError("explicit source covers " + to_string(have) + " but " + to_string(w) + " was requested");
    }
    return k.symbols.substr(static_cast<std::size_t>(w.lo - k.offset), static_cast<std::size_t>(w.size()));
  }
  static Symbols materialize(const BernoulliKind& k, const Window& w) {
    Symbols out;
    out.reserve(static_cast<std::size_t>(w.size()));
    for (std::int64_t i = w.lo; i < w.hi; ++i) out.push_back(detail::hashed_uniform(k.seed, i) < k.p ? 'a' : 'b');
    return out;
  }

  SourceKind kind_;
  std::string descriptor_;
  std::int64_t base_offset_ = 0;
};

inline Symbols orbit_symbols(const PointSource& source, const Window& window) { return source.symbols(window); }

/// Parses the plain-text explicit format: a header line "offset=<integer>"
/// followed by one line of single-character symbols.
inline ExplicitKind parse_explicit_text(std::istream& in) {
  std::string header;
  std::string body;
  if (!std::getline(in, header)) throw ParseError("explicit source: missing offset header");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header.rfind("offset=", 0) != 0) throw ParseError("explicit source: expected 'offset=<integer>' header");
  ExplicitKind k;
  try {
    std::size_t used = 0;
    k.offset = std::stoll(header.substr(7), &used);
    if (used != header.size() - 7) throw ParseError("trailing characters");
  } catch (const std::exception&) {
    throw ParseError("explicit source: bad offset '" + header.substr(7) + "'");
  }
  if (!std::getline(in, body)) throw ParseError("explicit source: missing symbol line");
  if (!body.empty() && body.back() == '\r') body.pop_back();
  if (body.empty()) throw ParseError("explicit source: empty symbol line");
  k.symbols = body;
  return k;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t == "golden") return (std::sqrt(5.0) - 1.0) / 2.0;
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw ParseError("");
    return v;
  } catch (const std::exception&) {
    throw ParseError("cannot parse " + what + " '" + text + "'");
  }
}

inline std::int64_t parse_integer(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(t, &used);
    if (used != t.size()) throw ParseError("");
    return v;
  } catch (const std::exception&) {
    throw ParseError("cannot parse " + what + " '" + text + "'");
  }
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// "key=value,key=value" or bare positional values.
inline std::map<std::string, std::string> parse_params(std::string_view body, const std::vector<std::string>& positional) {
  std::map<std::string, std::string> out;
  if (trim(body).empty()) return out;
  std::size_t pos = 0;
  for (const auto& item : split(body, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      if (pos >= positional.size()) throw ParseError("unexpected parameter '" + item + "'");
      out[positional[pos++]] = trim(item);
    } else {
      out[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
  }
  return out;
}

inline SubstitutionKind parse_substitution(std::string_view body) {
  // name(a->ab,b->a;seed=a|a)   (the arrow may also be written as the UTF-8 '→')
  const auto open = body.find('(');
  const auto close = body.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw ParseError("substitution descriptor must look like name(a->ab,b->a;seed=a|a)");
  }
  SubstitutionKind k;
  k.name = trim(body.substr(0, open));
  std::string inner(body.substr(open + 1, close - open - 1));
  for (std::string arrow : {"\xE2\x86\x92", "->"}) {
    for (auto p = inner.find(arrow); p != std::string::npos; p = inner.find(arrow)) inner.replace(p, arrow.size(), ">");
  }
  const auto parts = split(inner, ';');
  bool seed_given = false;
  for (const auto& rule : split(parts[0], ',')) {
    const std::string r = trim(rule);
    const auto gt = r.find('>');
    if (gt != 1 || r.size() < 3) throw ParseError("bad substitution rule '" + r + "'");
    if (k.rules.count(r[0])) throw ParseError(std::string("duplicate rule for '") + r[0] + "'");
    k.rules[r[0]] = r.substr(2);
  }
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::string opt = trim(parts[i]);
    if (opt.rfind("seed=", 0) == 0) {
      const std::string s = opt.substr(5);
      if (s.size() != 3 || s[1] != '|') throw ParseError("seed must look like 'seed=a|b'");
      k.left = s[0];
      k.right = s[2];
      seed_given = true;
    } else {
      throw ParseError("unknown substitution option '" + opt + "'");
    }
  }
  if (!seed_given) throw ParseError("substitution descriptor needs seed=<l>|<r>");
  return k;
}

}  // namespace detail

/// Builds a validated source from a textual descriptor.
///
///   periodic:<word>
///   step
///   substitution:<name>(<c>-><word>,...;seed=<l>|<r>)
///   rotation[:alpha=..,intercept=..,cutpoint=..]   (alpha, cutpoint default to golden)
///   bernoulli[:p=..,seed=..]                       (positional p, seed also accepted)
///   explicit:<path>
///   fibonacci | thue-morse | period-doubling       (named substitutions)
///
/// A trailing "@<integer>" sets the base offset.
inline PointSource make_source(std::string_view descriptor) {
  std::string text = detail::trim(descriptor);
  std::int64_t offset = 0;
  if (const auto at = text.rfind('@'); at != std::string::npos && text.rfind("explicit:", 0) != 0) {
    offset = detail::parse_integer(text.substr(at + 1), "base offset");
    text = detail::trim(text.substr(0, at));
  }
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string body = colon == std::string::npos ? std::string() : text.substr(colon + 1);

  static const std::map<std::string, std::string> named = {
      {"fibonacci", "fib(a->ab,b->a;seed=a|a)"},
      {"thue-morse", "tm(a->ab,b->ba;seed=a|a)"},
      {"period-doubling", "pd(a->ab,b->aa;seed=a|a)"},
  };
  if (const auto it = named.find(head); it != named.end()) {
    if (!body.empty()) throw ParseError("'" + head + "' takes no parameters");
    return PointSource(detail::parse_substitution(it->second), head, offset);
  }

  if (head == "periodic") {
    if (body.empty()) throw SourceError("periodic word is empty");
    return PointSource(PeriodicKind{body}, text, offset);
  }
  if (head == "step") {
    if (!body.empty()) throw ParseError("step takes no parameters");
    return PointSource(StepKind{}, text, offset);
  }
  if (head == "substitution") return PointSource(detail::parse_substitution(body), text, offset);
  if (head == "rotation") {
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    auto params = detail::parse_params(body, {"alpha", "intercept", "cutpoint"});
    RotationKind k{golden, 0.0, golden};
    for (const auto& [key, value] : params) {
      if (key == "alpha") k.alpha = detail::parse_real(value, "alpha");
      else if (key == "intercept") k.intercept = detail::parse_real(value, "intercept");
      else if (key == "cutpoint") k.cutpoint = detail::parse_real(value, "cutpoint");
      else throw ParseError("unknown rotation parameter '" + key + "'");
    }
    if (!params.count("cutpoint")) k.cutpoint = k.alpha - std::floor(k.alpha);
    return PointSource(k, text, offset);
  }
  if (head == "bernoulli") {
    auto params = detail::parse_params(body, {"p", "seed"});
    BernoulliKind k;
    for (const auto& [key, value] : params) {
      if (key == "p") k.p = detail::parse_real(value, "p");
      else if (key == "seed") k.seed = static_cast<std::uint64_t>(detail::parse_integer(value, "seed"));
      else throw ParseError("unknown bernoulli parameter '" + key + "'");
    }
    return PointSource(k, text, offset);
  }
  if (head == "explicit") {
    std::ifstream in(body);
    if (!in) throw ParseError("cannot open explicit source file '" + body + "'");
    return PointSource(parse_explicit_text(in), text, offset);
  }
  throw ParseError("unknown source kind '" + head + "'");
}

}  // namespace ww
