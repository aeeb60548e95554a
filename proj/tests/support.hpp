#pragma once

// Shared generators and oracles for the test suites. Oracles here are
// written against definitions, never against the library's solver paths.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "kamac/graphs.hpp"
#include "kamac/prob.hpp"

namespace kamac::test {

// Rational pmf with integer weights in [0, max_weight], at least one positive.
inline Pmf random_pmf(std::mt19937& rng, const Alphabet& alphabet, int max_weight = 9, bool strictly_positive = false) {
  std::uniform_int_distribution<int> pick(strictly_positive ? 1 : 0, max_weight);
  std::vector<long> w(alphabet.size());
  long total = 0;
  while (total == 0) {
    total = 0;
    for (auto& x : w) total += (x = pick(rng));
  }
  std::vector<Rational> probs;
  for (long x : w) probs.emplace_back(x, total);
  return Pmf(alphabet, std::move(probs));
}

inline JointPmf random_joint(std::mt19937& rng, const std::vector<Alphabet>& alphabets, int max_weight = 9,
                             bool strictly_positive = false) {
  std::size_t cells = 1;
  for (const auto& a : alphabets) cells *= a.size();
  std::uniform_int_distribution<int> pick(strictly_positive ? 1 : 0, max_weight);
  std::vector<long> w(cells);
  long total = 0;
  while (total == 0) {
    total = 0;
    for (auto& x : w) total += (x = pick(rng));
  }
  std::vector<Rational> table;
  for (long x : w) table.emplace_back(x, total);
  return JointPmf(alphabets, std::move(table));
}

inline std::vector<double> random_weights(std::mt19937& rng, std::size_t n) {
  std::uniform_int_distribution<int> pick(1, 9);
  std::vector<double> w(n);
  double total = 0;
  for (auto& x : w) total += (x = pick(rng));
  for (auto& x : w) x /= total;
  return w;
}

inline CharGraph labelled_graph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<VertexLabel> labels;
  for (std::size_t v = 0; v < n; ++v) labels.push_back({static_cast<double>(v)});
  return CharGraph(0, std::move(labels), edges);
}

inline CharGraph complete_graph(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) e.emplace_back(u, v);
  return labelled_graph(n, e);
}

inline CharGraph random_graph(std::mt19937& rng, std::size_t n, double density) {
  std::bernoulli_distribution coin(density);
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (coin(rng)) e.emplace_back(u, v);
  return labelled_graph(n, e);
}

// Independent-set test straight from the definition.
inline bool independent(const CharGraph& g, const std::vector<std::size_t>& set) {
  for (std::size_t a = 0; a < set.size(); ++a)
    for (std::size_t b = a + 1; b < set.size(); ++b)
      if (g.adjacent(set[a], set[b])) return false;
  return true;
}

inline double plain_entropy(const std::vector<double>& p) {
  double h = 0;
  for (double x : p)
    if (x > 0) h -= x * std::log2(x);
  return h;
}

// Minimum over all proper colorings by brute force over color vectors
// (n^n assignments); only for n <= 6.
inline double brute_force_min_coloring_entropy(const CharGraph& g, const std::vector<double>& w) {
  const std::size_t n = g.vertex_count();
  std::vector<std::size_t> c(n, 0);
  double best = INFINITY;
  while (true) {
    bool proper = true;
    for (auto [u, v] : g.edges())
      if (c[u] == c[v]) proper = false;
    if (proper) {
      std::vector<double> mass(n, 0.0);
      for (std::size_t v = 0; v < n; ++v) mass[c[v]] += w[v];
      best = std::min(best, plain_entropy(mass));
    }
    std::size_t i = 0;
    while (i < n && ++c[i] == n) c[i++] = 0;
    if (i == n) break;
  }
  return best;
}

// Graph entropy by grid search over mixture weights of the given independent
// sets (two or three sets), straight from min sum_x p_x log2 1/a_x.
inline double grid_graph_entropy(const std::vector<std::vector<std::size_t>>& sets, const std::vector<double>& p,
                                 int steps = 2000) {
  double best = INFINITY;
  auto eval = [&](const std::vector<double>& lambda) {
    std::vector<double> a(p.size(), 0.0);
    for (std::size_t s = 0; s < sets.size(); ++s)
      for (auto x : sets[s]) a[x] += lambda[s];
    double v = 0;
    for (std::size_t x = 0; x < p.size(); ++x)
      if (p[x] > 0) v -= p[x] * std::log2(a[x]);
    best = std::min(best, v);
  };
  if (sets.size() == 2) {
    for (int i = 0; i <= steps; ++i) eval({double(i) / steps, 1.0 - double(i) / steps});
  } else {
    for (int i = 0; i <= steps; i += 4)
      for (int k = 0; i + k <= steps; k += 4) eval({double(i) / steps, double(k) / steps, 1.0 - double(i + k) / steps});
  }
  return best;
}

}  // namespace kamac::test
