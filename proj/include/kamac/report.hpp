#pragma once

// Scenario analysis and the versioned JSON report. Every computed number is
// emitted as {"value": v, "provenance": tag}: "oracle" for values computed
// from the scenario's distribution (enumeration, solvers, finite
// differences), "closed-form" for values produced by the decomposition's
// analytic maps, "paper-reported" for printed values carried as annotations.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "kamac/graphs.hpp"
#include "kamac/ka.hpp"
#include "kamac/prob.hpp"
#include "kamac/rates.hpp"
#include "kamac/scenario.hpp"

namespace kamac {

inline constexpr const char* kReportSchema = "ka-mac/1";

enum class Provenance { oracle, closed_form, paper_reported };

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::oracle: return "oracle";
    case Provenance::closed_form: return "closed-form";
    case Provenance::paper_reported: return "paper-reported";
  }
  return "?";
}

inline Json tagged(double value, Provenance p) {
  Json out;
  out["value"] = value;
  out["provenance"] = provenance_name(p);
  return out;
}

inline Json tagged_list(std::span<const double> values, Provenance p) {
  Json out = Json::array();
  for (double v : values) out.push_back(tagged(v, p));
  return out;
}

// Symbol x of source p mapped to its transmitted image; the identity for
// vector inner maps and for functions without a decomposition.
inline double image_symbol(const KaSystem& s, std::size_t p, double x) {
  if (!s.decomposition || s.decomposition->inner.dim != 1) return x;
  return s.decomposition->alphas[p] * s.decomposition->inner.value(x)[0];
}

// Graphs and rates are computed over the transmitted inner images when the
// function has a decomposition, and over the raw symbols otherwise.
struct Analysis {
  const Scenario* scenario = nullptr;
  std::optional<JointPmf> images;
  RealizationFunction receiver;
  RateMap sw;
  std::optional<RateMap> inner;
  GraphRegion region;
  RateReport rates;

  const JointPmf& graph_joint() const { return images ? *images : scenario->joint; }

  double image_of(std::size_t p, double x) const { return image_symbol(scenario->system, p, x); }
};

inline ConditionalGraphEntropyOptions solver_options(const Scenario& s) {
  ConditionalGraphEntropyOptions o;
  o.restarts = s.options.restarts;
  o.seed = s.options.seed;
  return o;
}

inline Analysis analyze(const Scenario& s) {
  Analysis a;
  a.scenario = &s;
  a.sw = sw_region(s.joint);
  if (s.system.decomposition) {
    a.images = inner_image_distribution(s.system, s.joint);
    a.receiver = outer_of_images(s.system);
    a.inner = sw_region(*a.images);
  } else {
    a.receiver = s.direct();
  }
  a.region = graph_region(a.receiver, a.graph_joint(), s.system.name(), solver_options(s));
  a.rates = compare(a.sw, a.inner, a.region);
  return a;
}

namespace detail {

inline SubsetMask subset_mask(std::span<const std::size_t> one_based) {
  SubsetMask m = 0;
  for (auto p : one_based) m |= SubsetMask{1} << (p - 1);
  return m;
}

inline double conditional_graph_entropy_at(const Analysis& a, std::size_t p, std::size_t r, double image,
                                           ConditionalEdgeRule rule) {
  const JointPmf& j = a.graph_joint();
  Assignment fixed{{r, image}};
  CharGraph g = build_conditional_char_graph(j, a.receiver, p, fixed, rule);
  Pmf law = conditional_marginal(j, p, fixed);
  return graph_entropy(g, vertex_weights(g, law)).value;
}

inline double rate_lookup(const RateMap& m, const OracleSpec& o) {
  auto it = m.find(subset_mask(o.subset));
  if (it == m.end()) throw ValidationError("subset outside the scenario's sources");
  return it->second;
}

}  // namespace detail

inline double evaluate_oracle(const Analysis& a, const OracleSpec& o) {
  const Scenario& s = *a.scenario;
  const std::size_t p = o.source - 1, r = o.given - 1;
  const ConditionalEdgeRule rule = o.rule.value_or(s.options.edge_rule);
  auto pair_marginals = [&] {
    if (s.joint.rank() != 2 || !(s.joint.alphabet(0) == s.joint.alphabet(1))) {
      throw ValidationError("coupling quantities need two sources on one alphabet");
    }
    return maximal_coupling(s.joint.marginal_pmf(0), s.joint.marginal_pmf(1));
  };

  if (o.kind == "source_entropy") return entropy(s.joint.marginal_pmf(p));
  if (o.kind == "joint_entropy") return joint_entropy(s.joint);
  if (o.kind == "function_entropy") return entropy(pushforward(s.joint, s.direct()));
  if (o.kind == "graph_entropy") return a.region.graph_entropies.at(p);
  if (o.kind == "conditional_graph_entropy") return a.region.lower.at(SubsetMask{1} << p);
  if (o.kind == "conditional_graph_entropy_at") {
    return detail::conditional_graph_entropy_at(a, p, r, a.image_of(r, o.value), rule);
  }
  if (o.kind == "conditional_graph_entropy_average") {
    Pmf given = a.graph_joint().marginal_pmf(r);
    double avg = 0.0;
    for (std::size_t i = 0; i < given.size(); ++i) {
      double w = given.probs_double()[i];
      if (w > 0) avg += w * detail::conditional_graph_entropy_at(a, p, r, given.alphabet()[i], rule);
    }
    return avg;
  }
  if (o.kind == "sw_rate") return detail::rate_lookup(a.sw, o);
  if (o.kind == "inner_rate") {
    if (!a.inner) throw DomainError(s.system.name() + " has no inner region");
    return detail::rate_lookup(*a.inner, o);
  }
  if (o.kind == "graph_lower_rate") return detail::rate_lookup(a.region.lower, o);
  if (o.kind == "coloring_rate") return detail::rate_lookup(a.region.coloring_achievable, o);
  if (o.kind == "common_entropy") {
    auto c = pair_marginals();
    if (!c.common) throw DomainError("the marginals have disjoint supports");
    return entropy(*c.common);
  }
  if (o.kind == "mixture_entropy") return coupling_mixture_entropy(pair_marginals());
  if (o.kind == "independent_joint_entropy") {
    double h = 0.0;
    for (std::size_t c = 0; c < s.joint.rank(); ++c) h += entropy(s.joint.marginal_pmf(c));
    return h;
  }
  throw ValidationError("unknown oracle kind '" + o.kind + "'");
}

inline std::vector<PaperAnnotation> evaluate_annotations(const Analysis& a) {
  std::vector<PaperAnnotation> out;
  for (const auto& spec : a.scenario->annotations) {
    out.push_back(annotate(spec.quantity, spec.location, spec.paper_value, evaluate_oracle(a, spec.oracle),
                           spec.tolerance));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON sections
// ---------------------------------------------------------------------------

inline Json pmf_json(const Pmf& p) {
  Json out;
  out["symbols"] = p.alphabet().symbols();
  Json probs = Json::array();
  for (const auto& q : p.probs()) probs.push_back(to_string(q));
  out["probs"] = probs;
  return out;
}

inline Json entropy_table_json(const Analysis& a) {
  const Scenario& s = *a.scenario;
  Json rows = Json::array();
  auto row = [&](std::string quantity, double v) {
    Json r;
    r["quantity"] = std::move(quantity);
    r["bits"] = tagged(v, Provenance::oracle);
    rows.push_back(std::move(r));
  };
  for (std::size_t p = 0; p < s.joint.rank(); ++p) {
    row("H(X" + std::to_string(p + 1) + ")", entropy(s.joint.marginal_pmf(p)));
  }
  row("H(X)", joint_entropy(s.joint));
  row("H(f(X))", entropy(pushforward(s.joint, s.direct())));
  if (a.images) {
    for (std::size_t p = 0; p < s.joint.rank(); ++p) {
      row("H(Y" + std::to_string(p + 1) + ")", entropy(a.images->marginal_pmf(p)));
    }
    row("H(Y)", joint_entropy(*a.images));
  }
  return rows;
}

inline Json rate_report_json(const RateReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json j;
    j["subset"] = subset_name(row.subset);
    j["sw_bound"] = tagged(row.sw_bound, Provenance::oracle);
    j["inner_bound"] = row.inner_bound ? tagged(*row.inner_bound, Provenance::oracle) : Json(nullptr);
    j["graph_lower"] = tagged(row.graph_lower, Provenance::oracle);
    j["graph_lower_surrogate"] = row.graph_lower_surrogate;
    j["coloring_achievable"] = tagged(row.coloring_achievable, Provenance::oracle);
    j["inner_within_sw"] = row.inner_within_sw;
    j["inner_strictly_below_sw"] = row.inner_strictly_below_sw;
    j["graph_within_coloring"] = row.graph_within_coloring;
    rows.push_back(std::move(j));
  }
  Json out;
  out["rows"] = rows;
  return out;
}

inline Json graph_json(const CharGraph& g, const ColoringResult& c, double graph_h,
                       const std::vector<double>& chromatic_rates) {
  Json out;
  out["source"] = g.source_index() + 1;
  Json vertices = Json::array();
  for (std::size_t v = 0; v < g.vertex_count(); ++v) vertices.push_back(g.label(v)[0]);
  out["vertices"] = vertices;
  Json edges = Json::array();
  for (auto [u, v] : g.edges()) edges.push_back(Json::array({g.label(u)[0], g.label(v)[0]}));
  out["edges"] = edges;
  if (g.vertex_count() <= kMaxChromaticVertices) {
    out["chromatic_number"] = tagged(static_cast<double>(chromatic_number(g)), Provenance::oracle);
  }
  out["graph_entropy"] = tagged(graph_h, Provenance::oracle);
  Json col;
  col["assignment"] = c.coloring.assignment;
  col["entropy"] = tagged(c.entropy, Provenance::oracle);
  out["min_entropy_coloring"] = col;
  out["chromatic_rate_by_k"] = tagged_list(chromatic_rates, Provenance::oracle);
  return out;
}

inline Json graphs_json(const Analysis& a) {
  Json out = Json::array();
  const JointPmf& j = a.graph_joint();
  for (std::size_t p = 0; p < a.region.graphs.size(); ++p) {
    const CharGraph& g = a.region.graphs[p];
    auto w = vertex_weights(g, j.marginal_pmf(p));
    auto rates = chromatic_rate_estimate(g, w, a.scenario->options.k_max);
    out.push_back(graph_json(g, a.region.colorings[p], a.region.graph_entropies[p], rates));
  }
  return out;
}

inline std::vector<Vec> support_points(const JointPmf& j, std::size_t limit) {
  std::vector<Vec> out;
  j.for_each_support([&](auto, std::span<const double> x, const Rational&) {
    if (out.size() < limit) out.emplace_back(x.begin(), x.end());
  });
  return out;
}

inline Json pipeline_checks_json(const Scenario& s, std::size_t limit = 32) {
  Json out = Json::array();
  if (!s.system.decomposition) return out;
  for (const auto& x : support_points(s.joint, limit)) {
    double direct = evaluate_direct(s.system.function, x);
    double piped = pipeline_evaluate(s.system, x).output;
    Json c;
    c["x"] = x;
    c["direct"] = tagged(direct, Provenance::oracle);
    c["pipeline"] = tagged(piped, Provenance::closed_form);
    c["relative_error"] = tagged(std::abs(piped - direct) / std::max(1.0, std::abs(direct)), Provenance::oracle);
    out.push_back(std::move(c));
  }
  return out;
}

struct CalculusCheck {
  Vec x;
  Vec gradient, fd_gradient;
  Vec hessian, fd_hessian;
  double gradient_error = 0.0;  // max relative error
  double hessian_error = 0.0;
  double step = 0.0;
  double remainder = 0.0;       // |f(x+h) - taylor2(x, h)|
  double remainder_half = 0.0;  // same with h/2
};

inline double relative_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Closed-form derivatives against central differences of the direct
// function, and the second-order remainder at steps h and h/2 along (1,...,1).
inline CalculusCheck calculus_check(const KaSystem& s, std::span<const double> x, double step) {
  if (!(step > 0) || !std::isfinite(step)) throw ValidationError("step must be a positive number");
  CalculusCheck c;
  c.x.assign(x.begin(), x.end());
  c.step = step;
  c.gradient = gradient(s, x);
  c.hessian = hessian(s, x);
  const std::size_t n = s.n;
  auto f = [&](const Vec& y) { return evaluate_direct(s.function, y); };
  double scale = 1.0;
  for (double v : c.x) scale = std::max(scale, std::abs(v));
  const double h1 = 1e-5 * scale, h2 = 1e-3 * scale;
  c.fd_gradient.assign(n, 0.0);
  c.fd_hessian.assign(n * n, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    Vec up = c.x, down = c.x;
    up[p] += h1;
    down[p] -= h1;
    c.fd_gradient[p] = (f(up) - f(down)) / (2 * h1);
    for (std::size_t r = 0; r < n; ++r) {
      Vec pp = c.x, pm = c.x, mp = c.x, mm = c.x;
      pp[p] += h2, pp[r] += h2;
      pm[p] += h2, pm[r] -= h2;
      mp[p] -= h2, mp[r] += h2;
      mm[p] -= h2, mm[r] -= h2;
      c.fd_hessian[p * n + r] = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h2 * h2);
    }
  }
  for (std::size_t i = 0; i < n; ++i) c.gradient_error = std::max(c.gradient_error, relative_gap(c.gradient[i], c.fd_gradient[i]));
  for (std::size_t i = 0; i < n * n; ++i) c.hessian_error = std::max(c.hessian_error, relative_gap(c.hessian[i], c.fd_hessian[i]));

  auto remainder = [&](double h) {
    Vec dx(n, h), y = c.x;
    for (std::size_t p = 0; p < n; ++p) y[p] += h;
    return std::abs(f(y) - taylor2(s, x, dx));
  };
  c.remainder = remainder(step);
  c.remainder_half = remainder(step / 2);
  return c;
}

inline Json calculus_json(const CalculusCheck& c) {
  Json out;
  out["x"] = c.x;
  out["gradient"] = tagged_list(c.gradient, Provenance::closed_form);
  out["fd_gradient"] = tagged_list(c.fd_gradient, Provenance::oracle);
  out["gradient_max_relative_error"] = tagged(c.gradient_error, Provenance::oracle);
  out["hessian"] = tagged_list(c.hessian, Provenance::closed_form);
  out["fd_hessian"] = tagged_list(c.fd_hessian, Provenance::oracle);
  out["hessian_max_relative_error"] = tagged(c.hessian_error, Provenance::oracle);
  out["step"] = c.step;
  out["taylor_remainder"] = tagged(c.remainder, Provenance::oracle);
  out["taylor_remainder_half_step"] = tagged(c.remainder_half, Provenance::oracle);
  out["remainder_ratio"] = c.remainder > 1e-12 && c.remainder_half > 0
                               ? tagged(c.remainder / c.remainder_half, Provenance::oracle)
                               : Json(nullptr);
  return out;
}

// Up to `limit` support points at which the function is twice differentiable.
inline Json calculus_checks_json(const Scenario& s, std::size_t limit = 3, double step = 1e-2) {
  Json out = Json::array();
  if (!s.system.decomposition) return out;
  for (const auto& x : support_points(s.joint, 256)) {
    if (out.size() >= limit) break;
    try {
      out.push_back(calculus_json(calculus_check(s.system, x, step)));
    } catch (const DomainError&) {
    }
  }
  return out;
}

inline Json coupling_json(const MaximalCoupling& c) {
  Json out;
  out["delta"] = to_string(c.delta);
  out["delta_value"] = tagged(to_double(c.delta), Provenance::oracle);
  out["common"] = c.common ? pmf_json(*c.common) : Json(nullptr);
  out["excess_first"] = c.excess_first ? pmf_json(*c.excess_first) : Json(nullptr);
  out["excess_second"] = c.excess_second ? pmf_json(*c.excess_second) : Json(nullptr);
  Json table = Json::array();
  for (const auto& q : c.joint.table()) table.push_back(to_string(q));
  out["joint_table"] = table;
  out["branch_determined"] = coupling_branch_determined(c);
  if (c.common) out["common_entropy"] = tagged(entropy(*c.common), Provenance::oracle);
  if (c.delta > 0 && c.delta < 1) {
    out["mixture_entropy"] = tagged(coupling_mixture_entropy(c), Provenance::closed_form);
  }
  out["table_entropy"] = tagged(joint_entropy(c.joint), Provenance::oracle);
  out["independent_joint_entropy"] = tagged(
      entropy(c.joint.marginal_pmf(0)) + entropy(c.joint.marginal_pmf(1)), Provenance::oracle);
  return out;
}

inline Json annotations_json(const Scenario& s, const std::vector<PaperAnnotation>& notes) {
  Json out = Json::array();
  for (std::size_t i = 0; i < notes.size(); ++i) {
    const auto& n = notes[i];
    Json j;
    j["quantity"] = n.quantity;
    j["location"] = n.location;
    j["paper_value"] = tagged(n.paper_value, Provenance::paper_reported);
    j["oracle_value"] = tagged(n.oracle_value, Provenance::oracle);
    j["agree"] = n.agree;
    j["tolerance"] = s.annotations[i].tolerance;
    j["oracle_kind"] = s.annotations[i].oracle.kind;
    if (s.annotations[i].oracle.rule) j["edge_rule"] = rule_name(*s.annotations[i].oracle.rule);
    out.push_back(std::move(j));
  }
  return out;
}

inline Json header_json(const Scenario& s) {
  Json out;
  out["schema"] = kReportSchema;
  Json sc;
  sc["name"] = s.name;
  sc["function"] = s.system.name();
  sc["sources"] = s.joint.rank();
  sc["input"] = s.echo;
  out["scenario"] = sc;
  return out;
}

inline Json rates_json(const Scenario& s, const Analysis& a) {
  Json out = header_json(s);
  out["rate_report"] = rate_report_json(a.rates);
  return out;
}

inline Json full_report(const Scenario& s) {
  Analysis a = analyze(s);
  Json out = header_json(s);
  out["entropies"] = entropy_table_json(a);
  out["rate_report"] = rate_report_json(a.rates);
  out["graphs"] = graphs_json(a);
  if (s.kind == SourceKind::maximal_coupling) {
    out["coupling"] = coupling_json(maximal_coupling(s.marginals[0], s.marginals[1]));
  }
  out["pipeline_checks"] = pipeline_checks_json(s);
  out["calculus_checks"] = calculus_checks_json(s);
  out["paper_annotations"] = annotations_json(s, evaluate_annotations(a));
  return out;
}

}  // namespace kamac
