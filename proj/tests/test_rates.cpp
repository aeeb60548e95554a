#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kamac/rates.hpp"
#include "support.hpp"

using namespace kamac;
using kamac::test::complete_graph;
using kamac::test::labelled_graph;

namespace {

JointPmf uniform_product(int lo1, int hi1, int lo2, int hi2) {
  return JointPmf::product({Pmf::uniform(Alphabet::range(lo1, hi1)), Pmf::uniform(Alphabet::range(lo2, hi2))});
}

RealizationFunction direct(FunctionSpec f) {
  return [f](std::span<const double> x) { return evaluate_direct(f, x); };
}

CharGraph xor_graph() {
  return build_char_graph(uniform_product(0, 3, 0, 3), direct({Family::binary_xor, 1, {}}), 0);
}

std::vector<double> uniform_weights(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

}  // namespace

TEST(GraphEntropy, SpecExamples) {
  std::vector<double> p{0.5, 0.25, 0.125, 0.125};
  auto complete = graph_entropy(complete_graph(4), p);
  EXPECT_NEAR(complete.value, 1.75, 1e-9);
  EXPECT_EQ(graph_entropy(labelled_graph(4, {}), p).value, 0.0);

  auto x = graph_entropy(xor_graph(), uniform_weights(4));
  EXPECT_NEAR(x.value, 1.0, 1e-9);
  EXPECT_NEAR(x.weights[0], 0.5, 1e-6);
  EXPECT_LE(x.duality_gap, 1e-8);
  EXPECT_NEAR(test::grid_graph_entropy({{0, 2}, {1, 3}}, uniform_weights(4)), 1.0, 1e-9);
}

TEST(GraphEntropy, MatchesGridSearchOnSmallFamilies) {
  // Path 0-1-2: sets {0,2},{1}. Path 0-1-2-3: sets {0,2},{0,3},{1,3}.
  std::mt19937 rng(17);
  auto path3 = labelled_graph(3, {{0, 1}, {1, 2}});
  auto path4 = labelled_graph(4, {{0, 1}, {1, 2}, {2, 3}});
  for (int trial = 0; trial < 20; ++trial) {
    auto w3 = test::random_weights(rng, 3);
    EXPECT_NEAR(graph_entropy(path3, w3).value, test::grid_graph_entropy({{0, 2}, {1}}, w3, 20000), 1e-6);
    auto w4 = test::random_weights(rng, 4);
    double grid = test::grid_graph_entropy({{0, 2}, {0, 3}, {1, 3}}, w4, 2000);
    double solved = graph_entropy(path4, w4).value;
    EXPECT_LE(solved, grid + 1e-9);
    EXPECT_NEAR(solved, grid, 2e-4);
  }
}

TEST(GraphEntropy, PackingIsAConvexCombination) {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = test::random_graph(rng, 7, 0.5);
    auto r = graph_entropy(g, test::random_weights(rng, 7));
    double total = 0;
    for (double l : r.weights) {
      EXPECT_GE(l, 0.0);
      total += l;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (double a : r.packing) {
      EXPECT_GT(a, 0.0);
      EXPECT_LE(a, 1.0 + 1e-12);
    }
  }
}

TEST(GraphEntropy, PropertiesOnRandomGraphs) {
  std::mt19937 rng(29);
  std::uniform_int_distribution<std::size_t> size(1, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = size(rng);
    auto g = test::random_graph(rng, n, 0.4);
    auto w = test::random_weights(rng, n);
    const double h = test::plain_entropy(w);
    auto r = graph_entropy(g, w);
    EXPECT_LE(r.duality_gap, 1e-6);
    EXPECT_GE(r.value, -1e-12);
    EXPECT_LE(r.value, min_entropy_coloring(g, w).entropy + 1e-6);
    EXPECT_LE(min_entropy_coloring(g, w).entropy, h + 1e-9);
    EXPECT_NEAR(graph_entropy(complete_graph(n), w).value, h, 1e-6);
    EXPECT_EQ(graph_entropy(labelled_graph(n, {}), w).value, 0.0);

    auto edges = g.edges();
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (g.adjacent(u, v)) continue;
        auto more = edges;
        more.emplace_back(u, v);
        EXPECT_GE(graph_entropy(labelled_graph(n, more), w).value, r.value - 1e-6);
        u = v = n;  // one added edge per instance
      }
    }
  }
}

TEST(GraphEntropy, ConvergenceFailureIsReported) {
  GraphEntropyOptions opt;
  opt.max_iterations = 1;
  opt.fail_gap = 1e-12;
  auto path = labelled_graph(4, {{0, 1}, {1, 2}, {2, 3}});
  EXPECT_THROW(graph_entropy(path, std::vector<double>{0.4, 0.1, 0.2, 0.3}, opt), ConvergenceError);
}

TEST(ConditionalGraphEntropy, SpecExamples) {
  std::mt19937 rng(31);
  auto j = JointPmf::product({test::random_pmf(rng, Alphabet::range(0, 3), 9, true),
                              test::random_pmf(rng, Alphabet::range(0, 2), 9, true)});
  const std::size_t given[] = {1};
  auto complete = conditional_graph_entropy(complete_graph(4), j, 0, given);
  EXPECT_NEAR(complete.value, entropy(j.marginal_pmf(0)), 1e-9);
  EXPECT_NEAR(conditional_graph_entropy(labelled_graph(4, {}), j, 0, given).value, 0.0, 1e-12);
}

TEST(ConditionalGraphEntropy, WithoutSideInformationEqualsGraphEntropy) {
  std::mt19937 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = test::random_graph(rng, 5, 0.5);
    auto px = test::random_pmf(rng, Alphabet::range(0, 4), 9, true);
    auto j = JointPmf::product({px, Pmf::uniform(Alphabet::range(0, 0))});
    const std::size_t none[] = {1};  // constant coordinate: no information
    double ba = conditional_graph_entropy(g, j, 0, none).value;
    double fw = graph_entropy(g, px.probs_double()).value;
    EXPECT_NEAR(ba, fw, 1e-5);
  }
}

TEST(ConditionalGraphEntropy, AffineEqualsConditionalEntropy) {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    auto j = test::random_joint(rng, {Alphabet::range(0, 2), Alphabet::range(0, 2)}, 9, true);
    auto f = direct({Family::affine, 1, {1, 2}});
    for (std::size_t p : {0u, 1u}) {
      auto g = build_char_graph(j, f, p);
      const std::size_t given[] = {1 - p};
      EXPECT_NEAR(conditional_graph_entropy(g, j, p, given).value, conditional_entropy(j, {p}, {1 - p}), 1e-3);
    }
  }
}

TEST(ConditionalGraphEntropy, SideInformationNeverHurts) {
  std::mt19937 rng(43);
  for (int trial = 0; trial < 15; ++trial) {
    auto j = test::random_joint(rng, {Alphabet::range(0, 3), Alphabet::range(0, 2)}, 9, true);
    auto g = test::random_graph(rng, 4, 0.5);
    const std::size_t given[] = {1};
    double cond = conditional_graph_entropy(g, j, 0, given).value;
    EXPECT_LE(cond, graph_entropy(g, j.marginal_pmf(0).probs_double()).value + 1e-3);
    EXPECT_GE(cond, -1e-12);
  }
}

TEST(ConditionalGraphEntropy, ValidatesInputs) {
  auto j = uniform_product(0, 3, 0, 1);
  const std::size_t self[] = {0};
  EXPECT_THROW(conditional_graph_entropy(complete_graph(4), j, 0, self), ValidationError);
  const std::size_t given[] = {1};
  EXPECT_THROW(conditional_graph_entropy(labelled_graph(13, {}), j, 0, given), SizeCapError);
  EXPECT_THROW(conditional_graph_entropy(or_power(complete_graph(2), 2), j, 0, given), ValidationError);
}

TEST(ChromaticRate, SpecExamples) {
  EXPECT_EQ(chromatic_rate_estimate(labelled_graph(4, {}), uniform_weights(4), 2), (std::vector<double>{0, 0}));
  auto k4 = chromatic_rate_estimate(complete_graph(4), uniform_weights(4), 2);
  EXPECT_NEAR(k4[0], 2.0, 1e-12);
  EXPECT_NEAR(k4[1], 2.0, 1e-12);
  auto x = chromatic_rate_estimate(xor_graph(), uniform_weights(4), 2);
  EXPECT_NEAR(x[0], 1.0, 1e-12);
  EXPECT_NEAR(x[1], 1.0, 1e-12);
  EXPECT_THROW(chromatic_rate_estimate(complete_graph(9), uniform_weights(9), 2), SizeCapError);
}

TEST(ChromaticRate, NonIncreasingAndAboveGraphEntropy) {
  std::mt19937 rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = test::random_graph(rng, 5 + trial % 3, 0.4);
    auto w = test::random_weights(rng, g.vertex_count());
    auto est = chromatic_rate_estimate(g, w, 2);
    double h = graph_entropy(g, w).value;
    EXPECT_LE(est[1], est[0] + 1e-9);
    for (double e : est) EXPECT_GE(e, h - 1e-6);
  }
}

TEST(SlepianWolf, SpecExamples) {
  auto sw = sw_region(uniform_product(0, 3, 0, 1));
  EXPECT_NEAR(sw.at(0b01), 2.0, 1e-12);
  EXPECT_NEAR(sw.at(0b10), 1.0, 1e-12);
  EXPECT_NEAR(sw.at(0b11), 3.0, 1e-12);

  for (int M : {1, 3}) {
    auto a = Alphabet::range(-M, M);
    auto j = JointPmf::product({Pmf::uniform(a), Pmf::uniform(a), Pmf::uniform(a)});
    for (const auto& [s, v] : sw_region(j)) EXPECT_NEAR(v, std::popcount(s) * std::log2(2 * M + 1), 1e-9);
  }

  JointPmf point({Alphabet::range(0, 1), Alphabet::range(0, 1)}, {0, 1, 0, 0});
  for (const auto& [s, v] : sw_region(point)) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(subset_name(0b101), "{1,3}");
}

TEST(InnerRegion, SpecExamples) {
  auto j = uniform_product(-2, 2, -2, 2);
  auto prod = inner_region(catalog({Family::product_abs_simple, 1, {}}, 2), j);
  EXPECT_NEAR(prod.at(0b01), 1.5219, 1e-4);
  EXPECT_NEAR(prod.at(0b01), std::log2(5.0) - 0.8, 1e-12);

  auto poly = inner_region(catalog({Family::polynomial, 2, {}}, 2), j);
  EXPECT_EQ(poly, sw_region(j));

  std::mt19937 rng(53);
  auto jj = JointPmf::product({test::random_pmf(rng, Alphabet::range(-2, 2)), test::random_pmf(rng, Alphabet::range(-2, 2))});
  auto s = catalog({Family::lm_norm, 2, {}}, 2);
  auto norm = inner_region(s, jj);
  auto images = inner_image_distribution(s, jj);
  EXPECT_NEAR(norm.at(0b11), entropy(images.marginal_pmf(0)) + entropy(images.marginal_pmf(1)), 1e-9);
}

TEST(GraphRegion, BinaryXorOnIndependentSources) {
  auto r = graph_region(direct({Family::binary_xor, 1, {}}), uniform_product(0, 3, 0, 3), "binary_xor");
  EXPECT_NEAR(r.lower.at(0b01), 1.0, 1e-6);
  EXPECT_NEAR(r.lower.at(0b10), 1.0, 1e-6);
  EXPECT_TRUE(r.surrogate.at(0b11));
  EXPECT_FALSE(r.surrogate.at(0b01));
  EXPECT_NEAR(r.coloring_achievable.at(0b11), 2.0, 1e-12);
  EXPECT_NEAR(r.graph_entropies[0], 1.0, 1e-9);
}

TEST(GraphRegion, ConstantFunctionNeedsNothing) {
  auto r = graph_region([](std::span<const double>) { return 4.0; }, uniform_product(0, 2, 0, 3));
  for (const auto& [s, v] : r.lower) EXPECT_NEAR(v, 0.0, 1e-12);
  for (const auto& [s, v] : r.coloring_achievable) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(GraphRegion, AffineMatchesSlepianWolf) {
  std::mt19937 rng(59);
  for (int trial = 0; trial < 5; ++trial) {
    auto j = test::random_joint(rng, {Alphabet::range(0, 2), Alphabet::range(0, 3)}, 9, true);
    auto r = graph_region(direct({Family::affine, 1, {1, 2}}), j);
    auto sw = sw_region(j);
    for (SubsetMask s : {0b01u, 0b10u}) EXPECT_NEAR(r.lower.at(s), sw.at(s), 1e-3);
    for (const auto& [s, v] : sw) EXPECT_NEAR(r.coloring_achievable.at(s), v, 1e-9);
  }
}

TEST(GraphRegion, ProductExampleHasCompleteGraphs) {
  // Both graphs are complete, so coloring is the identity and the coloring
  // scheme needs the full Slepian-Wolf sum of 3 bits.
  auto j = uniform_product(0, 3, 0, 1);
  auto r = graph_region([](std::span<const double> x) { return x[0] * x[1]; }, j, "product");
  EXPECT_EQ(r.graphs[0].edge_count(), 6u);
  EXPECT_EQ(r.graphs[1].edge_count(), 1u);
  EXPECT_NEAR(r.coloring_achievable.at(0b11), 3.0, 1e-12);
  EXPECT_NEAR(r.lower.at(0b01), 2.0, 1e-6);
  EXPECT_NEAR(r.lower.at(0b10), 1.0, 1e-6);
}

TEST(Compare, OrderingFlags) {
  auto j = uniform_product(-2, 2, -2, 2);
  auto prod = catalog({Family::product_abs_simple, 1, {}}, 2);
  auto report = compare(sw_region(j), inner_region(prod, j), graph_region_on_images(prod, j));
  for (const auto& row : report.rows) {
    EXPECT_TRUE(row.inner_within_sw);
    EXPECT_TRUE(row.inner_strictly_below_sw) << subset_name(row.subset);
    EXPECT_TRUE(row.graph_within_coloring);
    EXPECT_LE(row.graph_lower, *row.inner_bound + 1e-6);
  }

  auto poly = catalog({Family::polynomial, 2, {}}, 2);
  auto flat = compare(sw_region(j), inner_region(poly, j), graph_region(direct(poly.function), j));
  for (const auto& row : flat.rows) EXPECT_EQ(*row.inner_bound, row.sw_bound);
  EXPECT_THROW(flat.row(0b100), ValidationError);

  auto other = uniform_product(0, 1, 0, 1);
  EXPECT_THROW(compare(sw_region(JointPmf::product({Pmf::uniform(Alphabet::range(0, 1))})), std::nullopt,
                       graph_region(direct(poly.function), other)),
               ValidationError);
}

TEST(Annotations, CarryBothValues) {
  auto a = annotate("H_G(X1|X2)", "product example", 1.0, 2.0);
  EXPECT_FALSE(a.agree);
  EXPECT_EQ(a.paper_value, 1.0);
  EXPECT_EQ(a.oracle_value, 2.0);
  EXPECT_TRUE(annotate("H(T)", "coupling example", 1.571, 1.5710).agree);
}
