#pragma once

// Finite discrete probability: alphabets, pmfs with exact rational masses,
// entropies in bits, pushforwards and the maximal coupling of two marginals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "kamac/error.hpp"

namespace kamac {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline constexpr double kMassTolerance = 1e-12;
inline constexpr std::size_t kMaxRank = 4;
inline constexpr std::size_t kMaxAlphabet = 16;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string to_string(const Rational& r) {
  if (boost::multiprecision::denominator(r) == 1) {
    return boost::multiprecision::numerator(r).str();
  }
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

// Parses "3", "-3", "1/3", "0.125", "2.5e-3" into an exact rational.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw ValidationError("not a rational number: '" + std::string(text) + "'");
  };
  if (text.empty()) return fail();

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_rational(text.substr(0, slash));
    Rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) return fail();
    return num / den;
  }

  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = text[pos] == '-';
    ++pos;
  }
  Integer digits = 0;
  long scale = 0;
  bool any_digit = false;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (c >= '0' && c <= '9') {
      digits = digits * 10 + (c - '0');
      any_digit = true;
      if (seen_point) --scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) return fail();
  if (pos < text.size()) {
    if (text[pos] != 'e' && text[pos] != 'E') return fail();
    ++pos;
    bool exp_negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      exp_negative = text[pos] == '-';
      ++pos;
    }
    if (pos >= text.size()) return fail();
    long exponent = 0;
    for (; pos < text.size(); ++pos) {
      char c = text[pos];
      if (c < '0' || c > '9' || exponent > 10000) return fail();
      exponent = exponent * 10 + (c - '0');
    }
    scale += exp_negative ? -exponent : exponent;
  }
  Rational value(digits);
  Integer ten_power = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(std::labs(scale)));
  if (scale >= 0) {
    value *= ten_power;
  } else {
    value /= ten_power;
  }
  return negative ? -value : value;
}

// Sorted, duplicate-free list of real symbols. -inf is admitted as the
// sentinel image of zero under a logarithmic inner map.
class Alphabet {
 public:
  explicit Alphabet(std::vector<double> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.empty()) throw ValidationError("alphabet must be non-empty");
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (std::isnan(symbols_[i])) throw ValidationError("alphabet symbol is NaN");
      if (i > 0 && !(symbols_[i - 1] < symbols_[i])) {
        throw ValidationError("alphabet symbols must be strictly increasing");
      }
    }
  }

  // {lo, lo+1, ..., hi}
  static Alphabet range(int lo, int hi) {
    std::vector<double> s;
    for (int v = lo; v <= hi; ++v) s.push_back(v);
    return Alphabet(std::move(s));
  }

  std::size_t size() const noexcept { return symbols_.size(); }
  double operator[](std::size_t i) const { return symbols_[i]; }
  const std::vector<double>& symbols() const noexcept { return symbols_; }

  std::optional<std::size_t> index_of(double symbol) const {
    auto it = std::lower_bound(symbols_.begin(), symbols_.end(), symbol);
    if (it == symbols_.end() || *it != symbol) return std::nullopt;
    return static_cast<std::size_t>(it - symbols_.begin());
  }

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::vector<double> symbols_;
};

namespace detail {

inline void check_masses(std::span<const Rational> probs) {
  Rational total = 0;
  for (const auto& p : probs) {
    if (p < 0) throw ValidationError("probabilities must be non-negative");
    total += p;
  }
  if (std::abs(to_double(total - 1)) > kMassTolerance) {
    throw ValidationError("probabilities sum to " + to_string(total) + ", expected 1");
  }
}

inline std::vector<double> to_doubles(std::span<const Rational> probs) {
  std::vector<double> out;
  out.reserve(probs.size());
  for (const auto& p : probs) out.push_back(to_double(p));
  return out;
}

}  // namespace detail

// Shannon entropy in bits of a mass vector; 0 log 0 = 0. Summation order is
// the vector order, so results are reproducible bit for bit.
inline double entropy_bits(std::span<const double> masses) {
  double h = 0.0;
  for (double p : masses) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

inline double binary_entropy(double p) {
  const double masses[] = {p, 1.0 - p};
  return entropy_bits(masses);
}

class Pmf {
 public:
  Pmf(Alphabet alphabet, std::vector<Rational> probs)
      : alphabet_(std::move(alphabet)), probs_(std::move(probs)) {
    if (probs_.size() != alphabet_.size()) {
      throw ValidationError("pmf length does not match its alphabet");
    }
    detail::check_masses(probs_);
    probs_d_ = detail::to_doubles(probs_);
  }

  static Pmf uniform(Alphabet alphabet) {
    std::vector<Rational> probs(alphabet.size(), Rational(1, static_cast<long>(alphabet.size())));
    return Pmf(std::move(alphabet), std::move(probs));
  }

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  const std::vector<Rational>& probs() const noexcept { return probs_; }
  const std::vector<double>& probs_double() const noexcept { return probs_d_; }
  std::size_t size() const noexcept { return probs_.size(); }

  friend bool operator==(const Pmf& a, const Pmf& b) {
    return a.alphabet_ == b.alphabet_ && a.probs_ == b.probs_;
  }

 private:
  Alphabet alphabet_;
  std::vector<Rational> probs_;
  std::vector<double> probs_d_;
};

inline double entropy(const Pmf& p) { return entropy_bits(p.probs_double()); }

// Dense n-dimensional table over a product of alphabets. Row-major: the last
// coordinate varies fastest.
class JointPmf {
 public:
  JointPmf(std::vector<Alphabet> alphabets, std::vector<Rational> table)
      : alphabets_(std::move(alphabets)), table_(std::move(table)) {
    if (alphabets_.empty()) throw ValidationError("joint pmf needs at least one coordinate");
    std::size_t cells = 1;
    for (const auto& a : alphabets_) cells *= a.size();
    if (cells != table_.size()) {
      throw ValidationError("joint table size " + std::to_string(table_.size()) +
                            " does not match alphabet product " + std::to_string(cells));
    }
    detail::check_masses(table_);
    table_d_ = detail::to_doubles(table_);
    strides_.assign(alphabets_.size(), 1);
    for (std::size_t i = alphabets_.size() - 1; i > 0; --i) {
      strides_[i - 1] = strides_[i] * alphabets_[i].size();
    }
  }

  static JointPmf product(std::span<const Pmf> marginals) {
    std::vector<Alphabet> alphabets;
    std::vector<Rational> table{Rational(1)};
    for (const auto& m : marginals) {
      alphabets.push_back(m.alphabet());
      std::vector<Rational> next;
      next.reserve(table.size() * m.size());
      for (const auto& t : table) {
        for (const auto& p : m.probs()) next.push_back(t * p);
      }
      table = std::move(next);
    }
    return JointPmf(std::move(alphabets), std::move(table));
  }

  static JointPmf product(std::initializer_list<Pmf> marginals) {
    std::vector<Pmf> v(marginals);
    return product(std::span<const Pmf>(v));
  }

  std::size_t rank() const noexcept { return alphabets_.size(); }
  std::size_t cells() const noexcept { return table_.size(); }
  const std::vector<Alphabet>& alphabets() const noexcept { return alphabets_; }
  const Alphabet& alphabet(std::size_t coord) const { return alphabets_.at(coord); }
  const std::vector<Rational>& table() const noexcept { return table_; }
  const std::vector<double>& table_double() const noexcept { return table_d_; }

  std::size_t flat_index(std::span<const std::size_t> index) const {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < index.size(); ++i) flat += index[i] * strides_[i];
    return flat;
  }

  void unravel(std::size_t flat, std::span<std::size_t> index) const {
    for (std::size_t i = 0; i < alphabets_.size(); ++i) {
      index[i] = flat / strides_[i];
      flat %= strides_[i];
    }
  }

  const Rational& at(std::span<const std::size_t> index) const { return table_[flat_index(index)]; }
  double at_double(std::span<const std::size_t> index) const { return table_d_[flat_index(index)]; }

  // Calls fn(index, symbols, mass) for every cell with positive mass, in
  // row-major order.
  template <typename Fn>
  void for_each_support(Fn&& fn) const {
    std::vector<std::size_t> index(rank());
    std::vector<double> symbols(rank());
    for (std::size_t flat = 0; flat < table_.size(); ++flat) {
      if (table_[flat] == 0) continue;
      unravel(flat, index);
      for (std::size_t i = 0; i < rank(); ++i) symbols[i] = alphabets_[i][index[i]];
      fn(std::span<const std::size_t>(index), std::span<const double>(symbols), table_[flat]);
    }
  }

  // Joint law of the listed coordinates, in the listed order.
  JointPmf marginal(std::span<const std::size_t> coords) const {
    if (coords.empty()) throw ValidationError("marginal needs at least one coordinate");
    std::vector<Alphabet> alphabets;
    for (auto c : coords) {
      if (c >= rank()) throw ValidationError("coordinate index out of range");
      alphabets.push_back(alphabets_[c]);
    }
    std::vector<std::size_t> out_strides(coords.size(), 1);
    std::size_t out_cells = 1;
    for (std::size_t i = coords.size(); i-- > 0;) {
      out_strides[i] = out_cells;
      out_cells *= alphabets[i].size();
    }
    std::vector<Rational> out(out_cells, Rational(0));
    std::vector<std::size_t> index(rank());
    for (std::size_t flat = 0; flat < table_.size(); ++flat) {
      if (table_[flat] == 0) continue;
      unravel(flat, index);
      std::size_t target = 0;
      for (std::size_t i = 0; i < coords.size(); ++i) target += index[coords[i]] * out_strides[i];
      out[target] += table_[flat];
    }
    return JointPmf(std::move(alphabets), std::move(out));
  }

  Pmf marginal_pmf(std::size_t coord) const {
    const std::size_t coords[] = {coord};
    auto m = marginal(coords);
    return Pmf(m.alphabet(0), m.table());
  }

  friend bool operator==(const JointPmf& a, const JointPmf& b) {
    return a.alphabets_ == b.alphabets_ && a.table_ == b.table_;
  }

 private:
  std::vector<Alphabet> alphabets_;
  std::vector<Rational> table_;
  std::vector<double> table_d_;
  std::vector<std::size_t> strides_;
};

inline double joint_entropy(const JointPmf& j) { return entropy_bits(j.table_double()); }

// H(X_target | X_given) in bits. An empty `given` yields the joint entropy of
// the target coordinates.
inline double conditional_entropy(const JointPmf& j, std::span<const std::size_t> target,
                                  std::span<const std::size_t> given) {
  if (target.empty()) return 0.0;
  std::vector<bool> used(j.rank(), false);
  std::vector<std::size_t> both;
  for (auto c : given) {
    if (c >= j.rank()) throw ValidationError("coordinate index out of range");
    if (used[c]) throw ValidationError("duplicate coordinate in conditioning set");
    used[c] = true;
    both.push_back(c);
  }
  for (auto c : target) {
    if (c >= j.rank()) throw ValidationError("coordinate index out of range");
    if (used[c]) throw ValidationError("target and conditioning sets overlap");
    used[c] = true;
    both.push_back(c);
  }
  double h_both = joint_entropy(j.marginal(both));
  double h_given = given.empty() ? 0.0 : joint_entropy(j.marginal(given));
  return h_both - h_given;
}

inline double conditional_entropy(const JointPmf& j, std::initializer_list<std::size_t> target,
                                  std::initializer_list<std::size_t> given) {
  std::vector<std::size_t> t(target), g(given);
  return conditional_entropy(j, std::span<const std::size_t>(t), std::span<const std::size_t>(g));
}

using RealizationFunction = std::function<double(std::span<const double>)>;

namespace detail {

inline bool same_image(double a, double b) {
  if (a == b) return true;
  if (std::isinf(a) || std::isinf(b)) return false;
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Sorts (value, mass) pairs and merges values that agree to 1e-9 relative,
// keeping the smallest representative.
inline Pmf collect_images(std::vector<std::pair<double, Rational>> images) {
  std::sort(images.begin(), images.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> symbols;
  std::vector<Rational> probs;
  for (auto& [value, mass] : images) {
    if (!symbols.empty() && same_image(symbols.back(), value)) {
      probs.back() += mass;
    } else {
      symbols.push_back(value);
      probs.push_back(std::move(mass));
    }
  }
  return Pmf(Alphabet(std::move(symbols)), std::move(probs));
}

}  // namespace detail

// Exact pmf of f(X). The output alphabet is the sorted set of distinct images
// of support points; images within 1e-9 relative are identified.
inline Pmf pushforward(const JointPmf& j, const RealizationFunction& f) {
  std::vector<std::pair<double, Rational>> images;
  j.for_each_support([&](auto, std::span<const double> x, const Rational& mass) {
    double value = f(x);
    if (std::isnan(value)) throw DomainError("function undefined on a support point");
    images.emplace_back(value, mass);
  });
  return detail::collect_images(std::move(images));
}

// Joint law of (g_1(X_1), ..., g_n(X_n)); coordinate alphabets become the
// distinct images, and colliding symbols merge their mass.
inline JointPmf map_coordinates(const JointPmf& j,
                                std::span<const std::function<double(double)>> maps) {
  if (maps.size() != j.rank()) throw ValidationError("one coordinate map per source required");
  std::vector<std::vector<std::size_t>> relabel(j.rank());
  std::vector<Alphabet> alphabets;
  for (std::size_t c = 0; c < j.rank(); ++c) {
    const auto& in = j.alphabet(c);
    std::vector<std::pair<double, std::size_t>> images;
    for (std::size_t i = 0; i < in.size(); ++i) {
      double v = maps[c](in[i]);
      if (std::isnan(v)) throw DomainError("coordinate map undefined on an alphabet symbol");
      images.emplace_back(v, i);
    }
    std::sort(images.begin(), images.end());
    std::vector<double> symbols;
    relabel[c].assign(in.size(), 0);
    for (auto& [v, i] : images) {
      if (symbols.empty() || !detail::same_image(symbols.back(), v)) symbols.push_back(v);
      relabel[c][i] = symbols.size() - 1;
    }
    alphabets.emplace_back(std::move(symbols));
  }
  std::size_t cells = 1;
  for (const auto& a : alphabets) cells *= a.size();
  std::vector<Rational> table(cells, Rational(0));
  std::vector<std::size_t> out_index(j.rank());
  j.for_each_support([&](std::span<const std::size_t> index, auto, const Rational& mass) {
    std::size_t flat = 0;
    for (std::size_t c = 0; c < j.rank(); ++c) flat = flat * alphabets[c].size() + relabel[c][index[c]];
    table[flat] += mass;
  });
  return JointPmf(std::move(alphabets), std::move(table));
}

inline Rational total_variation(const Pmf& p, const Pmf& q) {
  if (!(p.alphabet() == q.alphabet())) throw ValidationError("pmfs live on different alphabets");
  Rational sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += abs(p.probs()[i] - q.probs()[i]);
  return sum / 2;
}

// Y_1 = U T + (1-U) V, Y_2 = U T + (1-U) W with U ~ Bern(1 - delta).
struct MaximalCoupling {
  Rational delta;
  std::optional<Pmf> common;   // T, absent when delta == 1
  std::optional<Pmf> excess_first;   // V, absent when delta == 0
  std::optional<Pmf> excess_second;  // W, absent when delta == 0
  JointPmf joint;
};

inline MaximalCoupling maximal_coupling(const Pmf& p, const Pmf& q) {
  Rational delta = total_variation(p, q);
  const auto& alphabet = p.alphabet();
  const std::size_t k = p.size();

  std::vector<Rational> overlap(k), excess_p(k), excess_q(k);
  for (std::size_t i = 0; i < k; ++i) {
    overlap[i] = std::min(p.probs()[i], q.probs()[i]);
    excess_p[i] = p.probs()[i] - overlap[i];
    excess_q[i] = q.probs()[i] - overlap[i];
  }

  std::vector<Rational> table(k * k, Rational(0));
  for (std::size_t i = 0; i < k; ++i) {
    table[i * k + i] += overlap[i];
    if (delta != 0) {
      for (std::size_t j = 0; j < k; ++j) table[i * k + j] += excess_p[i] * excess_q[j] / delta;
    }
  }

  auto scaled = [&](std::vector<Rational> v, const Rational& mass) {
    for (auto& x : v) x /= mass;
    return Pmf(alphabet, std::move(v));
  };

  MaximalCoupling out{delta, std::nullopt, std::nullopt, std::nullopt,
                      JointPmf({alphabet, alphabet}, std::move(table))};
  if (delta != 1) out.common = scaled(overlap, 1 - delta);
  if (delta != 0) {
    out.excess_first = scaled(excess_p, delta);
    out.excess_second = scaled(excess_q, delta);
  }
  return out;
}

// h(delta) + (1-delta) H(T) + delta (H(V) + H(W)).
inline double coupling_mixture_entropy(const MaximalCoupling& c) {
  if (c.delta <= 0 || c.delta >= 1) {
    throw DomainError("mixture entropy needs 0 < delta < 1");
  }
  double d = to_double(c.delta);
  return binary_entropy(d) + (1.0 - d) * entropy(*c.common) +
         d * (entropy(*c.excess_first) + entropy(*c.excess_second));
}

// True when the branch U is a function of (Y_1, Y_2): the diagonal carries
// only the common part and the excess parts never land on the diagonal.
inline bool coupling_branch_determined(const MaximalCoupling& c) {
  if (!c.excess_first || !c.excess_second) return true;
  const auto& v = c.excess_first->probs();
  const auto& w = c.excess_second->probs();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0 && w[i] > 0) return false;
  }
  return true;
}

}  // namespace kamac
