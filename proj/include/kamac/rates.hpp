#pragma once

// Graph entropy, conditional graph entropy, chromatic-rate estimates and the
// three rate regions: direct Slepian-Wolf, inner-image compression and
// characteristic-graph coloring.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kamac/error.hpp"
#include "kamac/graphs.hpp"
#include "kamac/ka.hpp"
#include "kamac/prob.hpp"

namespace kamac {

// ---------------------------------------------------------------------------
// Graph entropy
// ---------------------------------------------------------------------------

struct GraphEntropyResult {
  double value = 0.0;            // bits
  IndSetFamily family;           // maximal independent sets
  std::vector<double> weights;   // mixture weights over `family`
  std::vector<double> packing;   // a_x = sum_S weight(S) 1[x in S]
  double duality_gap = 0.0;      // bits
  std::size_t iterations = 0;
};

struct GraphEntropyOptions {
  double gap_tolerance = 1e-8;
  double fail_gap = 1e-6;
  std::size_t max_iterations = 100'000;
};

namespace detail {

inline double packing_objective(std::span<const double> p, std::span<const double> a) {
  double v = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] > 0.0) v -= p[x] * std::log2(a[x]);
  }
  return v;
}

// Minimizes phi(g) = -sum p_x log2(a_x + g d_x) over [0, g_max] by bisection
// on the derivative.
inline double packing_line_search(std::span<const double> p, std::span<const double> a,
                                  std::span<const double> d, double g_max) {
  auto slope = [&](double g) {
    double s = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) {
      if (p[x] <= 0.0 || d[x] == 0.0) continue;
      double ax = a[x] + g * d[x];
      if (ax <= 0.0) return std::numeric_limits<double>::infinity();
      s -= p[x] * d[x] / ax;
    }
    return s;
  };
  if (slope(g_max) <= 0.0) return g_max;
  double lo = 0.0, hi = g_max;
  for (int it = 0; it < 100 && hi - lo > 1e-17; ++it) {
    double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? hi : lo) = mid;
  }
  return lo;
}

}  // namespace detail

// Koerner graph entropy min_{a in VP(G)} sum_x p_x log2(1/a_x) by away-step
// conditional gradient over the simplex of maximal independent sets. The
// linear subproblem is solved exactly by scanning the family; the Frank-Wolfe
// gap (max_S sum_{x in S} p_x/a_x - 1)/ln 2 certifies the value.
inline GraphEntropyResult graph_entropy(const CharGraph& g, std::span<const double> p,
                                        const GraphEntropyOptions& opt = {}) {
  detail::check_weights(g, p);
  GraphEntropyResult r;
  r.family = maximal_independent_sets(g);
  const std::size_t n = g.vertex_count(), m = r.family.size();
  if (n == 0) return r;

  std::vector<double> lambda(m, 1.0 / static_cast<double>(m));
  std::vector<double> a(n, 0.0), d(n, 0.0);
  auto rebuild = [&] {
    std::fill(a.begin(), a.end(), 0.0);
    for (std::size_t s = 0; s < m; ++s) {
      if (lambda[s] == 0.0) continue;
      for (VertexMask mask = r.family.sets[s]; mask; mask &= mask - 1) a[std::countr_zero(mask)] += lambda[s];
    }
  };
  // score(S) = sum_{x in S} p_x / a_x = -ln2 <grad, 1_S>
  auto score = [&](std::size_t s) {
    double v = 0.0;
    for (VertexMask mask = r.family.sets[s]; mask; mask &= mask - 1) {
      int x = std::countr_zero(mask);
      if (p[x] > 0.0) v += p[x] / a[x];
    }
    return v;
  };

  rebuild();
  double gap = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (; it < opt.max_iterations; ++it) {
    std::size_t fw = 0, away = m;
    double fw_score = -1.0, away_score = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < m; ++s) {
      double sc = score(s);
      if (sc > fw_score) {
        fw_score = sc;
        fw = s;
      }
      if (lambda[s] > 0.0 && sc < away_score) {
        away_score = sc;
        away = s;
      }
    }
    // <grad, a> = -1/ln2 because sum_x p_x = 1 on the support
    gap = (fw_score - 1.0) / std::numbers::ln2;
    if (gap <= opt.gap_tolerance) break;
    const double away_gap = (1.0 - away_score) / std::numbers::ln2;

    if (gap >= away_gap || away == m) {
      for (std::size_t x = 0; x < n; ++x) d[x] = -a[x];
      for (VertexMask mask = r.family.sets[fw]; mask; mask &= mask - 1) d[std::countr_zero(mask)] += 1.0;
      double step = detail::packing_line_search(p, a, d, 1.0);
      for (auto& l : lambda) l *= 1.0 - step;
      lambda[fw] += step;
    } else {
      const double g_max = lambda[away] / (1.0 - lambda[away]);
      for (std::size_t x = 0; x < n; ++x) d[x] = a[x];
      for (VertexMask mask = r.family.sets[away]; mask; mask &= mask - 1) d[std::countr_zero(mask)] -= 1.0;
      double step = detail::packing_line_search(p, a, d, g_max);
      for (auto& l : lambda) l *= 1.0 + step;
      lambda[away] -= step;
      if (step >= g_max || lambda[away] < 1e-15) lambda[away] = 0.0;
    }
    rebuild();
  }
  r.iterations = it;
  r.duality_gap = std::max(gap, 0.0);
  if (!(gap <= opt.fail_gap)) {
    throw ConvergenceError("graph entropy solver stopped with duality gap " + std::to_string(gap));
  }
  r.weights = lambda;
  r.packing = a;
  r.value = detail::packing_objective(p, a);
  return r;
}

inline GraphEntropyResult graph_entropy(const CharGraph& g, const Pmf& p, const GraphEntropyOptions& opt = {}) {
  auto w = vertex_weights(g, p);
  return graph_entropy(g, w, opt);
}

// ---------------------------------------------------------------------------
// Conditional graph entropy
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxConditioningSupport = 64;

struct ConditionalGraphEntropyOptions {
  std::size_t restarts = 16;
  std::uint32_t seed = 0;
  std::size_t max_iterations = 20'000;
  double tolerance = 1e-13;
};

struct ConditionalGraphEntropyResult {
  double value = 0.0;  // bits
  IndSetFamily family;
  std::vector<std::vector<double>> channel;  // q(w | x), rows indexed by vertex
  std::size_t converged_restarts = 0;
};

// Candidate channel: deterministic W from a proper coloring, each color class
// extended to a maximal independent set containing it.
inline std::vector<std::vector<double>> channel_from_coloring(const IndSetFamily& family, const Coloring& c) {
  const std::size_t n = c.assignment.size();
  std::vector<VertexMask> classes(c.num_colors, 0);
  for (std::size_t v = 0; v < n; ++v) classes[c.assignment[v]] |= VertexMask{1} << v;
  std::vector<std::vector<double>> q(n, std::vector<double>(family.size(), 0.0));
  for (std::size_t v = 0; v < n; ++v) {
    VertexMask cls = classes[c.assignment[v]];
    for (std::size_t s = 0; s < family.size(); ++s) {
      if ((family.sets[s] & cls) == cls) {
        q[v][s] = 1.0;
        break;
      }
    }
  }
  return q;
}

// min I(W; X_p | X_given) over channels q(w | x_p) supported on the maximal
// independent sets of g containing x_p (W - X_p - X_given Markov). Alternating
// minimization over (q, r(w | z)); 16 restarts (the first from the uniform
// channel, the rest random with a fixed seed) plus any supplied candidate
// channels, best value kept.
inline ConditionalGraphEntropyResult conditional_graph_entropy(
    const CharGraph& g, const JointPmf& j, std::size_t p, std::span<const std::size_t> given,
    const ConditionalGraphEntropyOptions& opt = {},
    std::span<const std::vector<std::vector<double>>> candidates = {}) {
  if (g.vertex_count() > kMaxColoringVertices) {
    throw SizeCapError("conditional graph entropy is capped at " + std::to_string(kMaxColoringVertices) + " vertices");
  }
  if (g.power() != 1) throw ValidationError("conditional graph entropy needs a base graph");
  if (p >= j.rank()) throw ValidationError("source index out of range");
  for (auto c : given) {
    if (c >= j.rank() || c == p) throw ValidationError("invalid conditioning coordinate");
  }

  const std::size_t nx = g.vertex_count();
  std::vector<std::size_t> graph_vertex(j.alphabet(p).size(), nx);
  for (std::size_t v = 0; v < nx; ++v) {
    auto idx = j.alphabet(p).index_of(g.label(v)[0]);
    if (idx) graph_vertex[*idx] = v;
  }

  // joint p(x, z) with z enumerated over the support of X_given
  std::map<std::vector<std::size_t>, std::size_t> z_ids;
  std::vector<std::vector<double>> pxz(nx);
  j.for_each_support([&](std::span<const std::size_t> index, auto, const Rational& mass) {
    std::size_t v = graph_vertex[index[p]];
    if (v == nx) throw ValidationError("source symbol with positive mass is not a graph vertex");
    std::vector<std::size_t> key;
    for (auto c : given) key.push_back(index[c]);
    auto [it, inserted] = z_ids.emplace(key, z_ids.size());
    if (inserted) {
      if (z_ids.size() > kMaxConditioningSupport) throw SizeCapError("conditioning support exceeds 64 values");
      for (auto& row : pxz) row.push_back(0.0);
    }
    pxz[v][it->second] += to_double(mass);
  });
  const std::size_t nz = z_ids.size();

  ConditionalGraphEntropyResult result;
  result.family = maximal_independent_sets(g);
  const std::size_t nw = result.family.size();
  std::vector<double> px(nx, 0.0), pz(nz, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t z = 0; z < nz; ++z) {
      px[x] += pxz[x][z];
      pz[z] += pxz[x][z];
    }
  }
  std::vector<std::vector<std::size_t>> options(nx);  // sets containing x
  for (std::size_t s = 0; s < nw; ++s) {
    for (VertexMask m = result.family.sets[s]; m; m &= m - 1) options[std::countr_zero(m)].push_back(s);
  }

  using Channel = std::vector<std::vector<double>>;
  std::vector<std::vector<double>> r(nw, std::vector<double>(nz, 0.0));
  auto update_r = [&](const Channel& q) {
    for (auto& row : r) std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      for (auto w : options[x]) {
        if (q[x][w] == 0.0) continue;
        for (std::size_t z = 0; z < nz; ++z) r[w][z] += pxz[x][z] * q[x][w];
      }
    }
    for (std::size_t w = 0; w < nw; ++w) {
      for (std::size_t z = 0; z < nz; ++z) {
        if (pz[z] > 0.0) r[w][z] /= pz[z];
      }
    }
  };
  // I(W; X | Z) = sum_{x,z} p(x,z) sum_w q(w|x) log2(q(w|x) / r(w|z))
  auto objective = [&](const Channel& q) {
    update_r(q);
    double v = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
      for (auto w : options[x]) {
        if (q[x][w] <= 0.0) continue;
        for (std::size_t z = 0; z < nz; ++z) {
          if (pxz[x][z] > 0.0) v += pxz[x][z] * q[x][w] * std::log2(q[x][w] / r[w][z]);
        }
      }
    }
    return v;
  };
  auto update_q = [&](Channel& q) {
    for (std::size_t x = 0; x < nx; ++x) {
      if (px[x] <= 0.0) continue;
      double best_log = -std::numeric_limits<double>::infinity();
      std::vector<double> logs(options[x].size(), -std::numeric_limits<double>::infinity());
      for (std::size_t k = 0; k < options[x].size(); ++k) {
        auto w = options[x][k];
        if (q[x][w] == 0.0) continue;
        double acc = 0.0;
        for (std::size_t z = 0; z < nz; ++z) {
          if (pxz[x][z] > 0.0) acc += pxz[x][z] / px[x] * std::log(r[w][z]);
        }
        logs[k] = acc;
        best_log = std::max(best_log, acc);
      }
      double total = 0.0;
      for (std::size_t k = 0; k < options[x].size(); ++k) {
        auto w = options[x][k];
        q[x][w] = std::isinf(logs[k]) ? 0.0 : std::exp(logs[k] - best_log);
        total += q[x][w];
      }
      for (auto w : options[x]) q[x][w] /= total;
    }
  };

  auto run = [&](Channel q, bool& converged) {
    double value = objective(q);
    converged = false;
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
      update_q(q);
      double next = objective(q);
      if (value - next <= opt.tolerance) {
        value = std::min(value, next);
        converged = true;
        break;
      }
      value = next;
    }
    return std::pair{value, q};
  };

  std::mt19937 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  result.value = std::numeric_limits<double>::infinity();
  auto consider = [&](Channel q) {
    bool converged = false;
    auto [value, final_q] = run(std::move(q), converged);
    if (converged) ++result.converged_restarts;
    if (value < result.value) {
      result.value = value;
      result.channel = std::move(final_q);
    }
  };
  for (std::size_t restart = 0; restart < opt.restarts; ++restart) {
    Channel q(nx, std::vector<double>(nw, 0.0));
    for (std::size_t x = 0; x < nx; ++x) {
      double total = 0.0;
      for (auto w : options[x]) {
        q[x][w] = restart == 0 ? 1.0 : unit(rng);
        total += q[x][w];
      }
      for (auto w : options[x]) q[x][w] /= total;
    }
    consider(std::move(q));
  }
  for (const auto& c : candidates) consider(c);
  if (result.converged_restarts == 0) {
    throw ConvergenceError("conditional graph entropy did not converge in any restart");
  }
  result.value = std::max(result.value, 0.0);
  return result;
}

// ---------------------------------------------------------------------------
// Chromatic entropy of OR-powers
// ---------------------------------------------------------------------------

// H^chi(G^k)/k for k = 1..k_max under the i.i.d. product weights. k = 1 uses
// the exhaustive partition search when the graph is small enough; powers use
// the residual search (at most 64 power vertices).
inline std::vector<double> chromatic_rate_estimate(const CharGraph& g, std::span<const double> weights,
                                                   std::size_t k_max) {
  if (k_max == 0) throw ValidationError("k_max must be at least 1");
  std::vector<double> out;
  for (std::size_t k = 1; k <= k_max; ++k) {
    double count = std::pow(static_cast<double>(g.vertex_count()), static_cast<double>(k));
    if (count > static_cast<double>(kMaxMaskVertices)) {
      throw SizeCapError("OR-power G^" + std::to_string(k) + " has more than 64 vertices");
    }
    CharGraph power = or_power(g, k);
    auto w = power_weights(weights, k);
    double h = power.vertex_count() <= kMaxColoringVertices ? min_entropy_coloring(power, w).entropy
                                                            : min_entropy_coloring_by_residuals(power, w).entropy;
    out.push_back(h / static_cast<double>(k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rate regions
// ---------------------------------------------------------------------------

using SubsetMask = std::uint32_t;               // bit p set <=> source p+1 in S
using RateMap = std::map<SubsetMask, double>;   // nonempty subsets only

inline std::vector<std::size_t> subset_members(SubsetMask s) {
  std::vector<std::size_t> out;
  for (; s; s &= s - 1) out.push_back(std::countr_zero(s));
  return out;
}

inline std::string subset_name(SubsetMask s) {
  std::string out = "{";
  bool first = true;
  for (auto p : subset_members(s)) {
    if (!first) out += ',';
    out += std::to_string(p + 1);
    first = false;
  }
  return out + "}";
}

// H(X_S | X_{S^c}) for every nonempty S.
inline RateMap sw_region(const JointPmf& j) {
  const std::size_t n = j.rank();
  const SubsetMask all = (SubsetMask{1} << n) - 1;
  RateMap out;
  for (SubsetMask s = 1; s <= all; ++s) {
    auto target = subset_members(s);
    auto given = subset_members(all & ~s);
    out[s] = std::max(0.0, conditional_entropy(j, target, given));
  }
  return out;
}

inline RateMap inner_region(const KaSystem& s, const JointPmf& j) {
  return sw_region(inner_image_distribution(s, j));
}

struct GraphRegion {
  RateMap lower;                        // singleton bounds; sums of them elsewhere
  std::map<SubsetMask, bool> surrogate;  // true where `lower` is the sum-of-singletons surrogate
  RateMap coloring_achievable;          // Slepian-Wolf region of the joint color law
  std::vector<CharGraph> graphs;
  std::vector<ColoringResult> colorings;
  std::vector<double> graph_entropies;  // unconditional, per source
};

// Per-source characteristic graphs, their minimum-entropy colorings and
// conditional graph entropies given all other sources.
inline GraphRegion graph_region(const RealizationFunction& f, const JointPmf& j,
                                const std::string& function_id = {},
                                const ConditionalGraphEntropyOptions& opt = {}) {
  const std::size_t n = j.rank();
  GraphRegion out;
  std::vector<std::function<double(double)>> color_maps;
  std::vector<double> singleton(n, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    CharGraph g = build_char_graph(j, f, p, {"scenario", function_id, ""});
    if (g.vertex_count() > kMaxColoringVertices) {
      throw SizeCapError("source " + std::to_string(p + 1) + " has more than " +
                         std::to_string(kMaxColoringVertices) + " symbols");
    }
    Pmf marginal = j.marginal_pmf(p);
    auto weights = vertex_weights(g, marginal);
    ColoringResult coloring = min_entropy_coloring(g, weights);
    out.graph_entropies.push_back(graph_entropy(g, weights).value);

    std::vector<std::size_t> others;
    for (std::size_t r = 0; r < n; ++r) {
      if (r != p) others.push_back(r);
    }
    auto family = maximal_independent_sets(g);
    std::vector<std::vector<std::vector<double>>> candidates{channel_from_coloring(family, coloring.coloring)};
    singleton[p] = conditional_graph_entropy(g, j, p, others, opt, candidates).value;

    std::map<double, double> color_of;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
      color_of[g.label(v)[0]] = static_cast<double>(coloring.coloring.assignment[v]);
    }
    color_maps.emplace_back([color_of](double x) { return color_of.at(x); });
    out.graphs.push_back(std::move(g));
    out.colorings.push_back(std::move(coloring));
  }
  out.coloring_achievable = sw_region(map_coordinates(j, color_maps));
  for (const auto& [s, _] : out.coloring_achievable) {
    double sum = 0.0;
    for (auto p : subset_members(s)) sum += singleton[p];
    out.lower[s] = sum;
    out.surrogate[s] = std::popcount(s) > 1;
  }
  return out;
}

// Graph region over the transmitted inner images with the receiver computing
// Phi of their sum.
inline GraphRegion graph_region_on_images(const KaSystem& s, const JointPmf& j,
                                          const ConditionalGraphEntropyOptions& opt = {}) {
  return graph_region(outer_of_images(s), inner_image_distribution(s, j), s.name(), opt);
}

struct PaperAnnotation {
  std::string quantity;
  std::string location;
  double paper_value = 0.0;
  double oracle_value = 0.0;
  bool agree = false;
};

struct RateRow {
  SubsetMask subset = 0;
  double sw_bound = 0.0;
  std::optional<double> inner_bound;
  double graph_lower = 0.0;
  bool graph_lower_surrogate = false;
  double coloring_achievable = 0.0;
  bool inner_within_sw = true;          // inner <= sw + 1e-9
  bool inner_strictly_below_sw = false;
  bool graph_within_coloring = true;    // graph_lower <= coloring + 1e-6
};

struct RateReport {
  std::vector<RateRow> rows;
  std::vector<PaperAnnotation> annotations;

  const RateRow& row(SubsetMask s) const {
    for (const auto& r : rows) {
      if (r.subset == s) return r;
    }
    throw ValidationError("no row for subset " + subset_name(s));
  }
};

inline RateReport compare(const RateMap& sw, const std::optional<RateMap>& inner, const GraphRegion& graph) {
  auto same_keys = [](const RateMap& a, const RateMap& b) {
    if (a.size() != b.size()) return false;
    for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
      if (ia->first != ib->first) return false;
    }
    return true;
  };
  if ((inner && !same_keys(sw, *inner)) || !same_keys(sw, graph.lower) ||
      !same_keys(sw, graph.coloring_achievable)) {
    throw ValidationError("rate regions describe different source sets");
  }
  RateReport report;
  for (const auto& [s, sw_value] : sw) {
    RateRow row;
    row.subset = s;
    row.sw_bound = sw_value;
    if (inner) {
      row.inner_bound = inner->at(s);
      row.inner_within_sw = *row.inner_bound <= sw_value + 1e-9;
      row.inner_strictly_below_sw = *row.inner_bound < sw_value - 1e-9;
    }
    row.graph_lower = graph.lower.at(s);
    row.graph_lower_surrogate = graph.surrogate.at(s);
    row.coloring_achievable = graph.coloring_achievable.at(s);
    row.graph_within_coloring = row.graph_lower <= row.coloring_achievable + 1e-6;
    report.rows.push_back(row);
  }
  return report;
}

inline PaperAnnotation annotate(std::string quantity, std::string location, double paper, double oracle,
                                double tolerance = 1e-3) {
  return {std::move(quantity), std::move(location), paper, oracle, std::abs(paper - oracle) <= tolerance};
}

}  // namespace kamac
