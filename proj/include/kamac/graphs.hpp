#pragma once

// Characteristic graphs of a source for a target function, OR-powers,
// maximal independent sets and exact minimum-entropy colorings.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kamac/error.hpp"
#include "kamac/prob.hpp"

namespace kamac {

inline constexpr std::size_t kMaxPowerVertices = 4096;
inline constexpr std::size_t kMaxMisVertices = 24;
inline constexpr std::size_t kMaxColoringVertices = 12;
inline constexpr std::size_t kMaxChromaticVertices = 16;
inline constexpr std::size_t kMaxMaskVertices = 64;

using VertexLabel = std::vector<double>;  // one symbol per power coordinate
using VertexMask = std::uint64_t;

struct GraphProvenance {
  std::string pmf;
  std::string function;
  std::string conditioning;  // empty when unconditional
};

class CharGraph {
 public:
  CharGraph(std::size_t source_index, std::vector<VertexLabel> labels,
            std::span<const std::pair<std::size_t, std::size_t>> edges, GraphProvenance provenance = {})
      : source_(source_index), labels_(std::move(labels)), provenance_(std::move(provenance)) {
    const std::size_t n = labels_.size();
    words_ = (n + 63) / 64;
    rows_.assign(n * words_, 0);
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) throw ValidationError("edge endpoint out of range");
      if (u == v) throw ValidationError("characteristic graphs have no self-loops");
      set(u, v);
      set(v, u);
    }
  }

  std::size_t source_index() const noexcept { return source_; }
  std::size_t vertex_count() const noexcept { return labels_.size(); }
  const VertexLabel& label(std::size_t v) const { return labels_.at(v); }
  const std::vector<VertexLabel>& labels() const noexcept { return labels_; }
  const GraphProvenance& provenance() const noexcept { return provenance_; }
  std::size_t power() const noexcept { return labels_.empty() ? 1 : labels_.front().size(); }

  bool adjacent(std::size_t u, std::size_t v) const {
    return (rows_[u * words_ + v / 64] >> (v % 64)) & 1u;
  }

  // Neighbourhood as a bit mask; only for graphs with at most 64 vertices.
  VertexMask neighbors(std::size_t v) const {
    if (vertex_count() > kMaxMaskVertices) throw SizeCapError("neighbour masks need at most 64 vertices");
    return rows_[v * words_];
  }

  std::vector<std::pair<std::size_t, std::size_t>> edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t u = 0; u < vertex_count(); ++u) {
      for (std::size_t v = u + 1; v < vertex_count(); ++v) {
        if (adjacent(u, v)) out.emplace_back(u, v);
      }
    }
    return out;
  }

  std::size_t edge_count() const {
    std::size_t twice = 0;
    for (auto w : rows_) twice += std::popcount(w);
    return twice / 2;
  }

  std::string label_text(std::size_t v) const {
    std::ostringstream os;
    const auto& l = labels_.at(v);
    if (l.size() != 1) os << '(';
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (i) os << ',';
      os << l[i];
    }
    if (l.size() != 1) os << ')';
    return os.str();
  }

 private:
  void set(std::size_t u, std::size_t v) { rows_[u * words_ + v / 64] |= VertexMask{1} << (v % 64); }

  std::size_t source_;
  std::vector<VertexLabel> labels_;
  GraphProvenance provenance_;
  std::size_t words_ = 0;
  std::vector<VertexMask> rows_;
};

// Vertex weights aligned with the graph's vertex order, looked up by symbol
// in `p`. Symbols missing from p get weight zero.
inline std::vector<double> vertex_weights(const CharGraph& g, const Pmf& p) {
  if (g.power() != 1) throw ValidationError("use power_weights for OR-power graphs");
  std::vector<double> w(g.vertex_count(), 0.0);
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (auto i = p.alphabet().index_of(g.label(v)[0])) w[v] = p.probs_double()[*i];
  }
  return w;
}

// i.i.d. product weights on k-tuples, in the lexicographic order or_power uses.
inline std::vector<double> power_weights(std::span<const double> base, std::size_t k) {
  std::vector<double> w{1.0};
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> next;
    next.reserve(w.size() * base.size());
    for (double a : w) {
      for (double b : base) next.push_back(a * b);
    }
    w = std::move(next);
  }
  return w;
}

// Edge (u, v) iff some assignment of the other coordinates has positive mass
// together with both u and v and separates them under f.
inline CharGraph build_char_graph(const JointPmf& j, const RealizationFunction& f, std::size_t p,
                                  GraphProvenance provenance = {}) {
  if (p >= j.rank()) throw ValidationError("source index out of range");
  const auto& alphabet = j.alphabet(p);
  // rest key -> (vertex, f value) for support cells
  std::map<std::size_t, std::vector<std::pair<std::size_t, double>>> groups;
  j.for_each_support([&](std::span<const std::size_t> index, std::span<const double> x, const Rational&) {
    std::vector<std::size_t> rest(index.begin(), index.end());
    rest[p] = 0;
    double value = f(x);
    if (std::isnan(value)) throw DomainError("function undefined on a support point");
    groups[j.flat_index(rest)].emplace_back(index[p], value);
  });
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& [key, members] : groups) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        if (members[a].second != members[b].second) edges.emplace_back(members[a].first, members[b].first);
      }
    }
  }
  std::vector<VertexLabel> labels;
  for (double s : alphabet.symbols()) labels.push_back({s});
  return CharGraph(p, std::move(labels), edges, std::move(provenance));
}

enum class ConditionalEdgeRule {
  pointwise,  // fixed coordinates pinned when testing f-differences
  global,     // unconditional edges restricted to the conditional support
};

using Assignment = std::vector<std::pair<std::size_t, double>>;  // (coordinate, symbol)

namespace detail {

inline std::vector<std::optional<std::size_t>> resolve_assignment(const JointPmf& j, std::size_t p,
                                                                  const Assignment& fixed) {
  std::vector<std::optional<std::size_t>> pinned(j.rank());
  for (auto [coord, symbol] : fixed) {
    if (coord >= j.rank()) throw ValidationError("conditioning coordinate out of range");
    if (coord == p) throw ValidationError("cannot condition on the graph's own source");
    if (pinned[coord]) throw ValidationError("coordinate conditioned twice");
    auto idx = j.alphabet(coord).index_of(symbol);
    if (!idx) throw ValidationError("conditioning symbol not in the alphabet");
    pinned[coord] = *idx;
  }
  return pinned;
}

inline bool matches(std::span<const std::size_t> index, const std::vector<std::optional<std::size_t>>& pinned) {
  for (std::size_t c = 0; c < pinned.size(); ++c) {
    if (pinned[c] && index[c] != *pinned[c]) return false;
  }
  return true;
}

inline std::string describe_assignment(const Assignment& fixed) {
  std::ostringstream os;
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (i) os << ',';
    os << 'X' << fixed[i].first + 1 << '=' << fixed[i].second;
  }
  return os.str();
}

}  // namespace detail

// Law of X_p given the fixed coordinates, on its conditional support.
inline Pmf conditional_marginal(const JointPmf& j, std::size_t p, const Assignment& fixed) {
  auto pinned = detail::resolve_assignment(j, p, fixed);
  std::vector<Rational> mass(j.alphabet(p).size(), Rational(0));
  Rational total = 0;
  j.for_each_support([&](std::span<const std::size_t> index, auto, const Rational& m) {
    if (!detail::matches(index, pinned)) return;
    mass[index[p]] += m;
    total += m;
  });
  if (total == 0) throw ValidationError("conditioning event has probability zero");
  std::vector<double> symbols;
  std::vector<Rational> probs;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] > 0) {
      symbols.push_back(j.alphabet(p)[i]);
      probs.push_back(mass[i] / total);
    }
  }
  return Pmf(Alphabet(std::move(symbols)), std::move(probs));
}

inline CharGraph build_conditional_char_graph(const JointPmf& j, const RealizationFunction& f, std::size_t p,
                                              const Assignment& fixed,
                                              ConditionalEdgeRule rule = ConditionalEdgeRule::pointwise,
                                              GraphProvenance provenance = {}) {
  if (p >= j.rank()) throw ValidationError("source index out of range");
  auto pinned = detail::resolve_assignment(j, p, fixed);
  Pmf support = conditional_marginal(j, p, fixed);
  const auto& vertices = support.alphabet();

  if (provenance.conditioning.empty()) provenance.conditioning = detail::describe_assignment(fixed);
  std::vector<VertexLabel> labels;
  for (double s : vertices.symbols()) labels.push_back({s});

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  if (rule == ConditionalEdgeRule::global) {
    CharGraph full = build_char_graph(j, f, p);
    for (std::size_t a = 0; a < vertices.size(); ++a) {
      for (std::size_t b = a + 1; b < vertices.size(); ++b) {
        auto ia = j.alphabet(p).index_of(vertices[a]);
        auto ib = j.alphabet(p).index_of(vertices[b]);
        if (full.adjacent(*ia, *ib)) edges.emplace_back(a, b);
      }
    }
  } else {
    std::map<std::size_t, std::vector<std::pair<std::size_t, double>>> groups;
    j.for_each_support([&](std::span<const std::size_t> index, std::span<const double> x, const Rational&) {
      if (!detail::matches(index, pinned)) return;
      std::vector<std::size_t> rest(index.begin(), index.end());
      rest[p] = 0;
      double value = f(x);
      if (std::isnan(value)) throw DomainError("function undefined on a support point");
      groups[j.flat_index(rest)].emplace_back(*vertices.index_of(x[p]), value);
    });
    for (const auto& [key, members] : groups) {
      for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
          if (members[a].second != members[b].second) edges.emplace_back(members[a].first, members[b].first);
        }
      }
    }
  }
  return CharGraph(p, std::move(labels), edges, std::move(provenance));
}

// OR-product power on k-tuples in lexicographic order: tuples are adjacent
// when some coordinate pair is an edge of g.
inline CharGraph or_power(const CharGraph& g, std::size_t k) {
  if (k == 0) throw ValidationError("power must be at least 1");
  const std::size_t base = g.vertex_count();
  std::size_t count = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (count > kMaxPowerVertices / std::max<std::size_t>(base, 1)) {
      throw SizeCapError("OR-power would exceed " + std::to_string(kMaxPowerVertices) + " vertices");
    }
    count *= base;
  }
  std::vector<std::vector<std::size_t>> tuples(count, std::vector<std::size_t>(k));
  std::vector<VertexLabel> labels(count);
  for (std::size_t t = 0; t < count; ++t) {
    std::size_t rem = t;
    for (std::size_t i = k; i-- > 0;) {
      tuples[t][i] = rem % base;
      rem /= base;
    }
    for (std::size_t i = 0; i < k; ++i) {
      const auto& l = g.label(tuples[t][i]);
      labels[t].insert(labels[t].end(), l.begin(), l.end());
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t u = 0; u < count; ++u) {
    for (std::size_t v = u + 1; v < count; ++v) {
      for (std::size_t i = 0; i < k; ++i) {
        if (g.adjacent(tuples[u][i], tuples[v][i])) {
          edges.emplace_back(u, v);
          break;
        }
      }
    }
  }
  GraphProvenance prov = g.provenance();
  prov.function += "^" + std::to_string(k);
  return CharGraph(g.source_index(), std::move(labels), edges, std::move(prov));
}

namespace detail {

inline VertexMask full_mask(std::size_t n) { return n >= 64 ? ~VertexMask{0} : (VertexMask{1} << n) - 1; }

// Maximal independent sets of the subgraph induced on `within`, via
// Bron-Kerbosch with pivoting on the complement graph.
inline void maximal_independent_sets_in(const std::vector<VertexMask>& adj, VertexMask within,
                                        std::vector<VertexMask>& out) {
  auto recurse = [&](auto& self, VertexMask r, VertexMask p, VertexMask x) -> void {
    if (p == 0 && x == 0) {
      out.push_back(r);
      return;
    }
    // pivot maximizing the number of non-neighbours left in p
    VertexMask px = p | x;
    int best = -1;
    VertexMask pivot_nonadj = 0;
    while (px) {
      int u = std::countr_zero(px);
      px &= px - 1;
      VertexMask nonadj = within & ~adj[u] & ~(VertexMask{1} << u);
      int score = std::popcount(p & nonadj);
      if (score > best) {
        best = score;
        pivot_nonadj = nonadj;
      }
    }
    VertexMask candidates = p & ~pivot_nonadj;
    while (candidates) {
      int v = std::countr_zero(candidates);
      VertexMask bit = VertexMask{1} << v;
      candidates &= candidates - 1;
      VertexMask nonadj = within & ~adj[v] & ~bit;
      self(self, r | bit, p & nonadj, x & nonadj);
      p &= ~bit;
      x |= bit;
    }
  };
  recurse(recurse, 0, within, 0);
}

inline std::vector<VertexMask> adjacency_masks(const CharGraph& g) {
  std::vector<VertexMask> adj(g.vertex_count());
  for (std::size_t v = 0; v < g.vertex_count(); ++v) adj[v] = g.neighbors(v);
  return adj;
}

inline double mass_of(VertexMask set, std::span<const double> w) {
  double m = 0.0;
  while (set) {
    m += w[std::countr_zero(set)];
    set &= set - 1;
  }
  return m;
}

inline double plogp(double m) { return m > 0.0 ? -m * std::log2(m) : 0.0; }

inline void check_weights(const CharGraph& g, std::span<const double> w) {
  if (w.size() != g.vertex_count()) throw ValidationError("one weight per vertex required");
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw ValidationError("vertex weights must be non-negative");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("vertex weights must sum to 1");
}

}  // namespace detail

struct IndSetFamily {
  std::vector<VertexMask> sets;

  std::size_t size() const noexcept { return sets.size(); }

  std::vector<std::size_t> members(std::size_t i) const {
    std::vector<std::size_t> out;
    for (VertexMask m = sets.at(i); m; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
  }
};

// Every maximal independent set, ordered lexicographically by sorted member list.
inline IndSetFamily maximal_independent_sets(const CharGraph& g) {
  if (g.vertex_count() > kMaxMisVertices) {
    throw SizeCapError("maximal independent set enumeration is capped at " + std::to_string(kMaxMisVertices) +
                       " vertices");
  }
  IndSetFamily family;
  if (g.vertex_count() == 0) return family;
  detail::maximal_independent_sets_in(detail::adjacency_masks(g), detail::full_mask(g.vertex_count()), family.sets);
  auto key = [](VertexMask m) {
    std::vector<int> v;
    for (; m; m &= m - 1) v.push_back(std::countr_zero(m));
    return v;
  };
  std::sort(family.sets.begin(), family.sets.end(), [&](VertexMask a, VertexMask b) { return key(a) < key(b); });
  return family;
}

struct Coloring {
  std::vector<std::size_t> assignment;  // vertex -> color id
  std::size_t num_colors = 0;
};

// Relabels colors 0, 1, ... in order of first occurrence.
inline Coloring canonical_coloring(std::span<const std::size_t> raw) {
  Coloring c;
  std::map<std::size_t, std::size_t> relabel;
  for (auto color : raw) {
    auto [it, inserted] = relabel.emplace(color, relabel.size());
    c.assignment.push_back(it->second);
  }
  c.num_colors = relabel.size();
  return c;
}

inline bool is_proper(const CharGraph& g, const Coloring& c) {
  if (c.assignment.size() != g.vertex_count()) return false;
  for (auto [u, v] : g.edges()) {
    if (c.assignment[u] == c.assignment[v]) return false;
  }
  return true;
}

inline double coloring_entropy(const Coloring& c, std::span<const double> weights) {
  std::vector<double> mass(c.num_colors, 0.0);
  for (std::size_t v = 0; v < c.assignment.size(); ++v) mass[c.assignment[v]] += weights[v];
  return entropy_bits(mass);
}

struct ColoringResult {
  Coloring coloring;
  double entropy = 0.0;
};

// Exhaustive search over partitions of the vertices into independent sets
// (restricted growth strings, visited in lexicographic order). Ties within
// 1e-12 bits go to fewer colors, then to the lexicographically first string.
inline ColoringResult min_entropy_coloring(const CharGraph& g, std::span<const double> weights) {
  const std::size_t n = g.vertex_count();
  if (n > kMaxColoringVertices) {
    throw SizeCapError("exhaustive coloring is capped at " + std::to_string(kMaxColoringVertices) + " vertices");
  }
  detail::check_weights(g, weights);
  if (n == 0) return {};
  const auto adj = detail::adjacency_masks(g);

  std::vector<std::size_t> current(n, 0), best_assign;
  std::vector<VertexMask> blocks;
  std::vector<double> block_mass;
  double best_h = std::numeric_limits<double>::infinity();
  std::size_t best_k = 0;

  auto recurse = [&](auto& self, std::size_t v) -> void {
    if (v == n) {
      double h = 0.0;
      for (double m : block_mass) h += detail::plogp(m);
      bool better = h < best_h - 1e-12 || (std::abs(h - best_h) <= 1e-12 && blocks.size() < best_k);
      if (better) {
        best_h = h;
        best_k = blocks.size();
        best_assign = current;
      }
      return;
    }
    const VertexMask bit = VertexMask{1} << v;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (blocks[b] & adj[v]) continue;
      blocks[b] |= bit;
      block_mass[b] += weights[v];
      current[v] = b;
      self(self, v + 1);
      blocks[b] &= ~bit;
      block_mass[b] -= weights[v];
    }
    blocks.push_back(bit);
    block_mass.push_back(weights[v]);
    current[v] = blocks.size() - 1;
    self(self, v + 1);
    blocks.pop_back();
    block_mass.pop_back();
  };
  recurse(recurse, 0);

  ColoringResult r{canonical_coloring(best_assign), 0.0};
  r.entropy = coloring_entropy(r.coloring, weights);
  return r;
}

inline ColoringResult min_entropy_coloring(const CharGraph& g, const Pmf& p) {
  auto w = vertex_weights(g, p);
  return min_entropy_coloring(g, w);
}

// Exact minimum-entropy coloring for graphs of up to 64 vertices.
//
// Some optimal coloring lists its classes S_1, S_2, ... with non-increasing
// mass, each S_i maximal independent in the graph left after removing the
// earlier classes: extending the i-th heaviest class by vertices of lighter
// ones never raises entropy and raises the sorted mass vector
// lexicographically, so repeating it terminates in that form. Hence
//   best(R, c) = min over maximal independent S of G[R] with w(S) <= c
//                of h(S) + best(R \ S, w(S)),
// searched by branch and bound with a per-vertex mass bound and memoized per
// (residual, cap). `work_cap` bounds the number of node expansions.
inline ColoringResult min_entropy_coloring_by_residuals(const CharGraph& g, std::span<const double> weights,
                                                        std::size_t work_cap = 2'000'000) {
  const std::size_t n = g.vertex_count();
  if (n > kMaxMaskVertices) throw SizeCapError("residual coloring search is capped at 64 vertices");
  detail::check_weights(g, weights);
  if (n == 0) return {};
  const auto adj = detail::adjacency_masks(g);
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr double slack = 1e-12;

  // Entropy charged per vertex is w_v log2(1/m) with m its class mass, and m
  // never exceeds the heaviest independent set through v nor the cap.
  auto vertex_bound = [&](VertexMask set, const std::vector<double>& through, double cap) {
    double lb = 0.0;
    for (VertexMask m = set; m; m &= m - 1) {
      int v = std::countr_zero(m);
      if (weights[v] > 0.0) lb -= weights[v] * std::log2(std::min(cap, through[v]));
    }
    return lb;
  };

  struct Entry {
    double cap;
    double value;  // exact when `exact`, else a lower bound
    bool exact;
    VertexMask choice;
  };
  std::unordered_map<VertexMask, std::vector<Entry>> memo;
  std::size_t expansions = 0;

  // Exact best(R, cap) when it is below `budget`; otherwise a value >= budget.
  auto solve = [&](auto& self, VertexMask residual, double cap, double budget) -> double {
    if (residual == 0) return 0.0;
    auto& entries = memo[residual];
    for (const auto& e : entries) {
      if (e.cap == cap && (e.exact || e.value >= budget)) return e.value;
    }
    if (++expansions > work_cap) throw SizeCapError("residual coloring search exceeded its work cap");
    std::vector<VertexMask> options;
    detail::maximal_independent_sets_in(adj, residual, options);
    std::vector<std::pair<double, VertexMask>> ranked;
    std::vector<double> through(n, 0.0);
    for (VertexMask s : options) {
      double w = detail::mass_of(s, weights);
      for (VertexMask m = s; m; m &= m - 1) through[std::countr_zero(m)] = std::max(through[std::countr_zero(m)], w);
      if (w <= cap + slack) ranked.emplace_back(w, s);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    double best = inf;
    VertexMask choice = 0;
    if (vertex_bound(residual, through, cap) < budget - slack) {
      for (auto [w, s] : ranked) {
        const double limit = std::min(best, budget);
        const double h = detail::plogp(w);
        if (h + vertex_bound(residual & ~s, through, w) >= limit - slack) continue;
        const double child_budget = limit - h;
        const double rest = self(self, residual & ~s, w, child_budget);
        if (rest >= child_budget) continue;  // pruned below; not exact
        if (h + rest < best - slack) {
          best = h + rest;
          choice = s;
        }
      }
    }
    auto& slot = memo[residual];  // `entries` may dangle after recursion
    std::erase_if(slot, [&](const Entry& e) { return e.cap == cap; });
    if (choice != 0 && best < budget) {
      slot.push_back({cap, best, true, choice});
      return best;
    }
    slot.push_back({cap, budget, false, 0});
    return budget;
  };

  // Greedy heaviest-class chain as the opening upper bound.
  const VertexMask all = detail::full_mask(n);
  double greedy = 0.0;
  for (VertexMask r = all; r;) {
    std::vector<VertexMask> options;
    detail::maximal_independent_sets_in(adj, r, options);
    VertexMask pick = options.front();
    for (VertexMask o : options) {
      if (detail::mass_of(o, weights) > detail::mass_of(pick, weights)) pick = o;
    }
    greedy += detail::plogp(detail::mass_of(pick, weights));
    r &= ~pick;
  }
  solve(solve, all, inf, greedy + 1e-9);

  std::vector<std::size_t> raw(n, 0);
  std::size_t color = 0;
  double cap = inf;
  for (VertexMask r = all; r;) {
    const auto& entries = memo.at(r);
    auto it = std::find_if(entries.begin(), entries.end(), [&](const Entry& e) { return e.cap == cap && e.exact; });
    if (it == entries.end()) throw std::logic_error("residual coloring search lost its optimal path");
    VertexMask s = it->choice;
    for (VertexMask m = s; m; m &= m - 1) raw[std::countr_zero(m)] = color;
    ++color;
    cap = detail::mass_of(s, weights);
    r &= ~s;
  }
  ColoringResult out{canonical_coloring(raw), 0.0};
  out.entropy = coloring_entropy(out.coloring, weights);
  return out;
}

// Exact chromatic number by dynamic programming over vertex subsets.
inline std::size_t chromatic_number(const CharGraph& g) {
  const std::size_t n = g.vertex_count();
  if (n > kMaxChromaticVertices) {
    throw SizeCapError("chromatic number is capped at " + std::to_string(kMaxChromaticVertices) + " vertices");
  }
  if (n == 0) return 0;
  const auto adj = detail::adjacency_masks(g);
  const std::size_t states = std::size_t{1} << n;
  std::vector<bool> independent(states, false);
  independent[0] = true;
  for (std::size_t m = 1; m < states; ++m) {
    int v = std::countr_zero(m);
    std::size_t rest = m & (m - 1);
    independent[m] = independent[rest] && (adj[v] & rest) == 0;
  }
  std::vector<std::uint8_t> dp(states, 0xff);
  dp[0] = 0;
  for (std::size_t m = 1; m < states; ++m) {
    const std::size_t low = m & (~m + 1);
    const std::size_t rest = m & ~low;
    // independent subsets of m containing its lowest vertex
    for (std::size_t sub = rest;; sub = (sub - 1) & rest) {
      std::size_t s = sub | low;
      if (independent[s]) dp[m] = std::min<std::uint8_t>(dp[m], dp[m & ~s] + 1);
      if (sub == 0) break;
    }
  }
  return dp[states - 1];
}

// Graphviz DOT: vertices in graph order labelled by symbol, undirected edges.
inline std::string to_dot(const CharGraph& g, const std::string& name = "G") {
  std::ostringstream os;
  os << "graph " << name << " {\n";
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    os << "  v" << v << " [label=\"" << g.label_text(v) << "\"];\n";
  }
  for (auto [u, v] : g.edges()) os << "  v" << u << " -- v" << v << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace kamac
