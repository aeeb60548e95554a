// Acceptance gate. `acceptance` runs every criterion, `acceptance N` runs one.
// Each criterion prints a single PASS/FAIL line; the exit status is non-zero
// when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kamac/graphs.hpp"
#include "kamac/ka.hpp"
#include "kamac/prob.hpp"
#include "kamac/rates.hpp"
#include "kamac/report.hpp"
#include "kamac/scenario.hpp"
#include "support.hpp"

using namespace kamac;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) detail << "; ";
      detail << what;
    }
    pass = pass && ok;
  }
};

std::string bundled(const std::string& name) { return std::string(KAMAC_SCENARIO_DIR) + "/" + name; }

double entropy_of_counts(const std::map<double, double>& mass) {
  double h = 0.0;
  for (auto [_, p] : mass)
    if (p > 0) h -= p * std::log2(p);
  return h;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Direct definitions, independent of the catalog.
double oracle_value(const FunctionSpec& f, const Vec& x) {
  switch (f.family) {
    case Family::product_abs_sprecher:
    case Family::product_abs_simple: {
      double p = 1;
      for (double v : x) p *= v;
      return std::abs(p);
    }
    case Family::lm_norm: {
      double s = 0;
      for (double v : x) s += std::pow(std::abs(v), f.m);
      return std::pow(s, 1.0 / f.m);
    }
    case Family::polynomial: {
      double s = 0;
      for (double v : x) s += v;
      return std::pow(s, f.m);
    }
    case Family::max: return *std::max_element(x.begin(), x.end());
    case Family::min: return *std::min_element(x.begin(), x.end());
    case Family::affine: {
      double s = 0;
      for (std::size_t i = 0; i < x.size(); ++i) s += f.alphas[i] * x[i];
      return s;
    }
    default: return NAN;
  }
}

struct Entry {
  FunctionSpec spec;
  std::size_t n;
};

std::vector<Entry> smooth_entries() {
  return {{{Family::product_abs_sprecher, 1, {}}, 3}, {{Family::product_abs_simple, 1, {}}, 3},
          {{Family::lm_norm, 1, {}}, 3},              {{Family::lm_norm, 2, {}}, 3},
          {{Family::lm_norm, 3, {}}, 3},              {{Family::polynomial, 2, {}}, 3},
          {{Family::polynomial, 4, {}}, 3},           {{Family::max, 1, {}}, 2},
          {{Family::min, 1, {}}, 2},                  {{Family::affine, 1, {1.0, -2.0, 0.5}}, 3}};
}

// 1. Pipeline exactness ------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  auto start = std::chrono::steady_clock::now();
  double worst = 0;
  for (const auto& e : smooth_entries()) {
    KaSystem s = catalog(e.spec, e.n);
    for (int i = 0; i < 1000; ++i) {
      Vec x(e.n);
      for (auto& v : x) v = u(rng);
      double direct = oracle_value(e.spec, x);
      double piped = pipeline_evaluate(s, x).output;
      double err = std::abs(piped - direct) / std::max(1.0, std::abs(direct));
      worst = std::max(worst, err);
      if (err > 1e-9) o.check(false, describe(e.spec) + " at a random point, error " + fmt(err));
      if (err > 1e-9) break;
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.check(secs < 1.0, "runtime " + fmt(secs) + " s");
  if (o.pass) o.detail << "10 entries x 1000 points, max rel err " << fmt(worst) << ", " << fmt(secs) << " s";
  return o;
}

// 2. Product example ---------------------------------------------------------

Outcome criterion2() {
  Outcome o;
  Scenario s = load_scenario(bundled("product.json"));
  double h1 = entropy(s.joint.marginal_pmf(0)), h2 = entropy(s.joint.marginal_pmf(1));
  double h12 = joint_entropy(s.joint);
  double hf = entropy(pushforward(s.joint, s.direct()));
  // f takes 0 with mass 5/8 and 1, 2, 3 with mass 1/8 each.
  double hf_oracle = entropy_of_counts({{0, 5.0 / 8}, {1, 1.0 / 8}, {2, 1.0 / 8}, {3, 1.0 / 8}});
  o.check(std::abs(h1 - 2) <= 1e-12 && std::abs(h2 - 1) <= 1e-12 && std::abs(h12 - 3) <= 1e-12,
          "source entropies");
  o.check(std::abs(hf - 1.5488) <= 1e-3 && std::abs(hf - hf_oracle) <= 1e-12, "H(f) = " + fmt(hf));
  Analysis a = analyze(s);
  double sw = a.rates.row(0b11).sw_bound;
  double coloring = a.rates.row(0b11).coloring_achievable;
  o.check(std::abs(sw - 3.0) <= 1e-6, "Slepian-Wolf sum " + fmt(sw));
  o.check(std::abs(coloring - 2.0) <= 1e-6, "coloring-achievable sum rate " + fmt(coloring) + ", expected 2");
  o.detail << " (H(X1)=" << fmt(h1) << ", H(X2)=" << fmt(h2) << ", H(f)=" << fmt(hf) << ", SW sum=" << fmt(sw)
           << ", coloring sum=" << fmt(coloring) << ")";
  return o;
}

// 3. Inner compression -------------------------------------------------------

Outcome criterion3() {
  Outcome o;
  for (int m : {1, 2, 5}) {
    auto x = Pmf::uniform(Alphabet::range(-m, m));
    JointPmf j = JointPmf::product({x, x});
    for (auto family : {Family::product_abs_simple, Family::product_abs_sprecher}) {
      KaSystem s = catalog({family, 1, {}}, 2);
      JointPmf y = inner_image_distribution(s, j);
      double k = 2.0 * m + 1;
      double closed = std::log2(k) - 2.0 * m / k;
      for (std::size_t p = 0; p < 2; ++p) {
        double h = entropy(y.marginal_pmf(p));
        o.check(std::abs(h - closed) <= 1e-9, "M=" + std::to_string(m) + " H(Y) = " + fmt(h));
        o.check(h < std::log2(k), "no gain at M=" + std::to_string(m));
      }
    }
  }
  std::mt19937 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    JointPmf j = test::random_joint(rng, {Alphabet::range(-2, 2), Alphabet::range(-1, 2)});
    for (int m : {2, 3}) {
      KaSystem s = catalog({Family::polynomial, m, {}}, 2);
      o.check(inner_region(s, j) == sw_region(j), "polynomial inner region differs from Slepian-Wolf");
    }
  }
  if (o.pass) o.detail << "closed form matched for M in {1,2,5}; polynomial inner region == SW on 10 joints";
  return o;
}

// 4. Maximal coupling --------------------------------------------------------

Outcome criterion4() {
  Outcome o;
  Alphabet a = Alphabet::range(0, 2);
  Pmf p(a, {Rational(1, 3), Rational(1, 3), Rational(1, 3)});
  Pmf q(a, {Rational(1, 2), Rational(1, 4), Rational(1, 4)});
  MaximalCoupling c = maximal_coupling(p, q);
  o.check(c.delta == Rational(1, 6), "delta = " + to_string(c.delta));
  o.check(c.common && c.common->probs() == std::vector<Rational>{Rational(2, 5), Rational(3, 10), Rational(3, 10)},
          "pT");
  double ht = c.common ? entropy(*c.common) : NAN;
  o.check(std::abs(ht - 1.571) <= 1e-3, "H(T) = " + fmt(ht));
  double mix = coupling_mixture_entropy(c);
  o.check(std::abs(mix - 2.13) <= 5e-3, "mixture entropy " + fmt(mix));
  // The coupled table, entered by hand.
  const double table[9] = {1.0 / 3, 0, 0, 1.0 / 12, 1.0 / 4, 0, 1.0 / 12, 0, 1.0 / 4};
  double h_table = 0;
  for (double t : table)
    if (t > 0) h_table -= t * std::log2(t);
  o.check(std::abs(mix - h_table) <= 1e-9, "mixture " + fmt(mix) + " vs table " + fmt(h_table));
  o.check(std::abs(joint_entropy(c.joint) - h_table) <= 1e-12, "library table differs from the hand table");
  if (o.pass) o.detail << "delta=1/6, pT=(2/5,3/10,3/10), H(T)=" << fmt(ht) << ", mixture=" << fmt(mix);
  return o;
}

// 5. Extremum entropies ------------------------------------------------------

Outcome criterion5() {
  Outcome o;
  JointPmf j = JointPmf::product({Pmf::uniform(Alphabet::range(0, 3)), Pmf::uniform(Alphabet::range(0, 1))});
  auto law = [&](std::function<double(double, double)> f) {
    std::map<double, double> m;
    for (int x1 = 0; x1 < 4; ++x1)
      for (int x2 = 0; x2 < 2; ++x2) m[f(x1, x2)] += 1.0 / 8;
    return entropy_of_counts(m);
  };
  double hmax = entropy(pushforward(j, [](std::span<const double> x) { return evaluate_direct({Family::max, 1, {}}, x); }));
  double hmin = entropy(pushforward(j, [](std::span<const double> x) { return evaluate_direct({Family::min, 1, {}}, x); }));
  double hsum = entropy(pushforward(j, [](std::span<const double> x) { return x[0] + x[1]; }));
  o.check(std::abs(hmax - 1.9056) <= 1e-3 && std::abs(hmax - law([](double a, double b) { return std::max(a, b); })) < 1e-12,
          "H(max) = " + fmt(hmax));
  o.check(std::abs(hmin - 0.9544) <= 1e-3 && std::abs(hmin - law([](double a, double b) { return std::min(a, b); })) < 1e-12,
          "H(min) = " + fmt(hmin));
  o.check(std::abs(hsum - 2.25) <= 1e-3 && std::abs(hsum - law([](double a, double b) { return a + b; })) < 1e-12,
          "H(sum) = " + fmt(hsum));
  o.detail << " (H(max)=" << fmt(hmax) << ", H(min)=" << fmt(hmin) << ", H(sum)=" << fmt(hsum) << ")";
  return o;
}

// 6. Parity graph facts ------------------------------------------------------

Outcome criterion6() {
  Outcome o;
  Scenario s = load_scenario(bundled("parity.json"));
  CharGraph g = build_char_graph(s.joint, s.direct(), 0);
  auto edge_list = g.edges();
  std::set<std::pair<std::size_t, std::size_t>> edges(edge_list.begin(), edge_list.end());
  std::set<std::pair<std::size_t, std::size_t>> expected;
  for (std::size_t u = 0; u < 4; ++u)
    for (std::size_t v = u + 1; v < 4; ++v)
      if (!((u == 0 && v == 2) || (u == 1 && v == 3))) expected.insert({u, v});
  o.check(edges == expected, "edge set");
  std::size_t chi = chromatic_number(g);
  std::size_t chi2 = chromatic_number(or_power(g, 2));
  o.check(chi == 2, "chromatic number " + std::to_string(chi));
  o.check(chi2 == 4, "OR-square chromatic number " + std::to_string(chi2));
  auto w = vertex_weights(g, s.joint.marginal_pmf(0));
  double hg = graph_entropy(g, w).value;
  double hc = min_entropy_coloring(g, w).entropy;
  o.check(std::abs(hg - 1.0) <= 1e-6, "graph entropy " + fmt(hg));
  o.check(std::abs(hc - 1.0) <= 1e-6, "coloring entropy " + fmt(hc));
  if (o.pass) o.detail << "edges = K4 minus {0,2},{1,3}; chi=2, chi(G^2)=4, H_G=" << fmt(hg) << ", H_chi=" << fmt(hc);
  return o;
}

// 7. Solver properties -------------------------------------------------------

Outcome criterion7() {
  Outcome o;
  std::mt19937 rng(7);
  double worst_gap = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 1 + trial % 8;
    auto w = test::random_pmf(rng, Alphabet::range(0, static_cast<int>(n) - 1)).probs_double();
    double hp = test::plain_entropy(w);
    auto g = test::random_graph(rng, n, 0.5);
    auto r = graph_entropy(g, w);
    double hc = min_entropy_coloring(g, w).entropy;
    worst_gap = std::max(worst_gap, r.duality_gap);
    o.check(r.duality_gap <= 1e-6, "duality gap " + fmt(r.duality_gap));
    o.check(r.value <= hc + 1e-6 && hc <= hp + 1e-9, "sandwich on trial " + std::to_string(trial));
    o.check(graph_entropy(test::labelled_graph(n, {}), w).value <= 1e-9, "empty graph");
    o.check(std::abs(graph_entropy(test::complete_graph(n), w).value - hp) <= 1e-6, "complete graph");
    // Add one missing edge, when there is one.
    auto edges = g.edges();
    for (std::size_t u = 0; u < n && edges.size() == g.edges().size(); ++u)
      for (std::size_t v = u + 1; v < n; ++v)
        if (!g.adjacent(u, v)) {
          edges.emplace_back(u, v);
          break;
        }
    if (edges.size() > g.edges().size()) {
      double bigger = graph_entropy(test::labelled_graph(n, edges), w).value;
      o.check(bigger >= r.value - 1e-6, "edge monotonicity on trial " + std::to_string(trial));
    }
    if (!o.pass) break;
  }
  if (o.pass) o.detail << "100 graphs, worst duality gap " << fmt(worst_gap);
  return o;
}

// 8. Affine equivalence ------------------------------------------------------

Outcome criterion8() {
  Outcome o;
  std::mt19937 rng(8);
  FunctionSpec f{Family::affine, 1, {1.0, 2.0}};
  auto fn = [&](std::span<const double> x) { return evaluate_direct(f, x); };
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    int hi = trial < 25 ? 2 : 3;
    JointPmf j = test::random_joint(rng, {Alphabet::range(0, hi), Alphabet::range(0, hi)}, 9, true);
    for (std::size_t p = 0; p < 2; ++p) {
      const std::size_t given[] = {1 - p};
      CharGraph g = build_char_graph(j, fn, p);
      double hg = conditional_graph_entropy(g, j, p, given).value;
      // H(X_p | X_r) from the table directly.
      double h_joint = 0, h_given = 0;
      std::vector<double> marg(j.alphabet(1 - p).size(), 0.0);
      for (std::size_t k = 0; k < j.cells(); ++k) {
        double t = j.table_double()[k];
        h_joint -= t * std::log2(t);
        std::size_t idx = p == 0 ? k % marg.size() : k / j.alphabet(1).size();
        marg[idx] += t;
      }
      for (double m : marg) h_given -= m * std::log2(m);
      double hc = h_joint - h_given;
      worst = std::max(worst, std::abs(hg - hc));
      o.check(std::abs(hg - hc) <= 1e-3, "trial " + std::to_string(trial) + ": " + fmt(hg) + " vs " + fmt(hc));
    }
    if (!o.pass) break;
  }
  if (o.pass) o.detail << "50 joints (3x3 and 4x4), worst |H_G - H| = " << fmt(worst);
  return o;
}

// 9. Calculus ----------------------------------------------------------------

Outcome criterion9() {
  Outcome o;
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> mag(0.3, 2.5);
  std::bernoulli_distribution sign(0.5);
  double worst_g = 0, worst_h = 0;
  for (const auto& e : smooth_entries()) {
    KaSystem s = catalog(e.spec, e.n);
    auto f = [&](const Vec& x) { return oracle_value(e.spec, x); };
    for (int i = 0; i < 50; ++i) {
      Vec x(e.n);
      do {
        for (auto& v : x) v = sign(rng) ? mag(rng) : -mag(rng);
      } while (e.n == 2 && std::abs(x[0] - x[1]) < 0.3);
      Vec g = gradient(s, x), h = hessian(s, x);
      const double h1 = 1e-5, h2 = 1e-3;
      double gscale = 1, hscale = 1, gerr = 0, herr = 0;
      Vec fdg(e.n), fdh(e.n * e.n);
      for (std::size_t p = 0; p < e.n; ++p) {
        Vec a = x, b = x;
        a[p] += h1;
        b[p] -= h1;
        fdg[p] = (f(a) - f(b)) / (2 * h1);
        gscale = std::max(gscale, std::abs(fdg[p]));
        for (std::size_t r = 0; r < e.n; ++r) {
          Vec pp = x, pm = x, mp = x, mm = x;
          pp[p] += h2, pp[r] += h2, pm[p] += h2, pm[r] -= h2;
          mp[p] -= h2, mp[r] += h2, mm[p] -= h2, mm[r] -= h2;
          fdh[p * e.n + r] = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h2 * h2);
          hscale = std::max(hscale, std::abs(fdh[p * e.n + r]));
        }
      }
      for (std::size_t k = 0; k < e.n; ++k) gerr = std::max(gerr, std::abs(g[k] - fdg[k]) / gscale);
      for (std::size_t k = 0; k < e.n * e.n; ++k) herr = std::max(herr, std::abs(h[k] - fdh[k]) / hscale);
      worst_g = std::max(worst_g, gerr);
      worst_h = std::max(worst_h, herr);
      if (gerr > 1e-5) o.check(false, describe(e.spec) + " gradient error " + fmt(gerr));
      if (herr > 1e-4) o.check(false, describe(e.spec) + " Hessian error " + fmt(herr));
      if (gerr > 1e-5 || herr > 1e-4) break;
    }
  }

  // Taylor-2 remainder halving for the product; the bivariate product is
  // bilinear (remainder 0), so three sources are used.
  double ratio = NAN;
  {
    FunctionSpec spec{Family::product_abs_simple, 1, {}};
    KaSystem s = catalog(spec, 3);
    Vec x{2, 3, 4};
    auto rem = [&](double step) {
      Vec dx(3, step), y = x;
      for (std::size_t p = 0; p < 3; ++p) y[p] += step;
      return std::abs(oracle_value(spec, y) - taylor2(s, x, dx));
    };
    ratio = rem(0.1) / rem(0.05);
    o.check(ratio >= 5.5 && ratio <= 10.5, "Taylor ratio " + fmt(ratio));
  }
  std::uniform_real_distribution<double> u(-3, 3), step(-1, 1);
  double worst_exact = 0;
  for (FunctionSpec spec : {FunctionSpec{Family::affine, 1, {1.5, -2.0}}, FunctionSpec{Family::polynomial, 2, {}}}) {
    KaSystem s = catalog(spec, 2);
    for (int i = 0; i < 50; ++i) {
      Vec x{u(rng), u(rng)}, dx{step(rng), step(rng)};
      Vec y{x[0] + dx[0], x[1] + dx[1]};
      double err = std::abs(oracle_value(spec, y) - taylor2(s, x, dx));
      worst_exact = std::max(worst_exact, err);
    }
  }
  o.check(worst_exact <= 1e-9, "Taylor-2 exactness " + fmt(worst_exact));
  if (o.pass) {
    o.detail << "worst gradient err " << fmt(worst_g) << ", Hessian err " << fmt(worst_h) << ", Taylor ratio "
             << fmt(ratio) << ", exact-case remainder " << fmt(worst_exact);
  }
  return o;
}

// 10. Discrepancy ledger -----------------------------------------------------

Outcome criterion10() {
  Outcome o;
  std::vector<double> printed;
  std::ostringstream seen;
  for (const char* name : {"product.json", "squared_sum.json", "min.json", "max.json"}) {
    Json r = full_report(load_scenario(bundled(name)));
    const Json& notes = r["paper_annotations"];
    o.check(notes.is_array() && !notes.empty(), std::string(name) + " has no annotations");
    for (const auto& n : notes) {
      o.check(n["paper_value"]["provenance"] == "paper-reported" && n["oracle_value"]["provenance"] == "oracle" &&
                  n["agree"].is_boolean() && n["location"].is_string(),
              "malformed annotation in " + std::string(name));
      printed.push_back(n["paper_value"]["value"].get<double>());
    }
  }
  for (double v : {1.0, 0.75, 2.16, 2.32, 0.5}) {
    bool found = std::any_of(printed.begin(), printed.end(), [&](double p) { return std::abs(p - v) < 1e-12; });
    o.check(found, "printed value " + fmt(v) + " not annotated");
  }
  if (o.pass) o.detail << printed.size() << " annotations emitted (report-only)";
  return o;
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> kCriteria = {
    {"pipeline exactness", criterion1},
    {"product example: entropies and sum rates", criterion2},
    {"inner-compression gain", criterion3},
    {"maximal coupling", criterion4},
    {"max/min entropies", criterion5},
    {"parity characteristic graph", criterion6},
    {"graph-entropy solver properties", criterion7},
    {"affine equivalence", criterion8},
    {"calculus and Taylor-2", criterion9},
    {"discrepancy annotations", criterion10},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    long k = std::strtol(argv[i], nullptr, 10);
    if (k < 1 || k > static_cast<long>(kCriteria.size())) {
      std::fprintf(stderr, "usage: acceptance [1..%zu ...]\n", kCriteria.size());
      return 2;
    }
    selected.push_back(static_cast<std::size_t>(k));
  }
  if (selected.empty())
    for (std::size_t k = 1; k <= kCriteria.size(); ++k) selected.push_back(k);

  int failures = 0;
  for (auto k : selected) {
    const auto& [name, run] = kCriteria[k - 1];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    std::printf("criterion %2zu  %-44s %s  %s\n", k, name, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    failures += !o.pass;
  }
  return failures ? 1 : 0;
}
