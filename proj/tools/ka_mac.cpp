// ka-mac: command-line front end over scenario files.
//
// Exit codes: 0 success, 1 solver failure, 2 usage or parse error,
// 3 validation error, 4 size cap exceeded, 5 domain error.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kamac/report.hpp"

using namespace kamac;

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string vec(std::span<const double> v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
  return out + ")";
}

std::string cell(double v, int width = 12) {
  std::ostringstream os;
  os << std::left << std::setw(width) << std::fixed << std::setprecision(6) << v;
  return os.str();
}

std::vector<double> parse_point(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParseError(std::string(flag) + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw ParseError(std::string(flag) + " needs a comma-separated list of numbers");
  return out;
}

void emit(const Json& j) { std::cout << j.dump(2) << '\n'; }

// --- rates -----------------------------------------------------------------

int cmd_rates(const Scenario& s, bool as_json) {
  Analysis a = analyze(s);
  if (as_json) {
    emit(rates_json(s, a));
    return 0;
  }
  std::cout << "scenario: " << (s.name.empty() ? "(unnamed)" : s.name) << "  function: " << s.system.name() << "\n\n";
  std::cout << std::left << std::setw(12) << "subset" << std::setw(12) << "sw" << std::setw(12) << "inner"
            << std::setw(14) << "graph_lower" << "coloring\n";
  bool any_surrogate = false;
  for (const auto& r : a.rates.rows) {
    std::cout << std::setw(12) << subset_name(r.subset) << cell(r.sw_bound)
              << (r.inner_bound ? cell(*r.inner_bound) : std::string("-           "));
    std::string lower = cell(r.graph_lower, 0) + (r.graph_lower_surrogate ? "*" : "");
    std::cout << std::setw(14) << lower << cell(r.coloring_achievable, 0) << '\n';
    any_surrogate = any_surrogate || r.graph_lower_surrogate;
  }
  if (any_surrogate) std::cout << "\n* sum of the singleton conditional graph entropies\n";
  auto notes = evaluate_annotations(a);
  if (!notes.empty()) {
    std::cout << "\nprinted values (not asserted):\n";
    for (std::size_t i = 0; i < notes.size(); ++i) {
      const auto& n = notes[i];
      std::cout << "  " << std::setw(40) << n.quantity << std::setw(8) << n.location << " printed "
                << std::setw(8) << num(n.paper_value) << " oracle " << std::setw(10) << num(n.oracle_value)
                << (n.agree ? "agree" : "DISAGREE");
      if (s.annotations[i].oracle.rule) std::cout << "  [" << rule_name(*s.annotations[i].oracle.rule) << "]";
      std::cout << '\n';
    }
  }
  return 0;
}

// --- simulate --------------------------------------------------------------

int cmd_simulate(const Scenario& s, const std::string& point, bool as_json) {
  auto x = parse_point(point, "--x");
  double direct = evaluate_direct(s.system.function, x);
  PipelineTrace t = pipeline_evaluate(s.system, x);
  if (as_json) {
    Json out;
    out["schema"] = kReportSchema;
    out["x"] = x;
    Json channels = Json::array();
    for (std::size_t q = 0; q < t.y_q.size(); ++q) {
      Json c;
      c["q"] = q;
      Json inner = Json::array();
      for (std::size_t p = 0; p < t.y_pq.size(); ++p) inner.push_back(tagged_list(t.y_pq[p][q], Provenance::closed_form));
      c["inner"] = inner;
      c["channel_sum"] = tagged_list(t.y_q[q], Provenance::closed_form);
      channels.push_back(c);
    }
    out["channels"] = channels;
    out["output"] = tagged(t.output, Provenance::closed_form);
    out["direct"] = tagged(direct, Provenance::oracle);
    emit(out);
    return 0;
  }
  std::cout << "x = " << vec(x) << '\n';
  for (std::size_t q = 0; q < t.y_q.size(); ++q) {
    std::cout << "q=" << q << "  inner:";
    for (std::size_t p = 0; p < t.y_pq.size(); ++p) std::cout << ' ' << vec(t.y_pq[p][q]);
    std::cout << "  channel sum: " << vec(t.y_q[q]) << '\n';
  }
  std::cout << "output = " << num(t.output) << '\n' << "direct = " << num(direct) << '\n';
  return 0;
}

// --- graph -----------------------------------------------------------------

Assignment parse_conditioning(const Scenario& s, const std::vector<std::string>& items) {
  Assignment fixed;
  for (const auto& item : items) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("--conditional expects r=value, got '" + item + "'");
    std::size_t r = 0;
    double v = 0;
    try {
      r = std::stoul(item.substr(0, eq));
      v = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ParseError("--conditional expects r=value, got '" + item + "'");
    }
    if (r < 1 || r > s.joint.rank()) throw ValidationError("conditioning source out of range", "--conditional");
    fixed.emplace_back(r - 1, image_symbol(s.system, r - 1, v));
  }
  return fixed;
}

int cmd_graph(const Scenario& s, std::size_t source, std::size_t power, const std::vector<std::string>& conditional,
              const std::string& rule_text, bool dot_requested, const std::string& dot_path, bool as_json) {
  if (source < 1 || source > s.joint.rank()) throw ValidationError("source out of range", "--source");
  ConditionalEdgeRule rule = s.options.edge_rule;
  if (rule_text == "global") {
    rule = ConditionalEdgeRule::global;
  } else if (rule_text == "pointwise") {
    rule = ConditionalEdgeRule::pointwise;
  } else if (!rule_text.empty()) {
    throw ParseError("--rule must be pointwise or global");
  }
  const std::size_t p = source - 1;
  std::optional<JointPmf> images;
  RealizationFunction receiver = s.direct();
  if (s.system.decomposition) {
    images = inner_image_distribution(s.system, s.joint);
    receiver = outer_of_images(s.system);
  }
  const JointPmf& j = images ? *images : s.joint;

  Assignment fixed = parse_conditioning(s, conditional);
  CharGraph base = fixed.empty() ? build_char_graph(j, receiver, p, {"scenario", s.system.name(), ""})
                                 : build_conditional_char_graph(j, receiver, p, fixed, rule,
                                                                {"scenario", s.system.name(), ""});
  Pmf law = fixed.empty() ? j.marginal_pmf(p) : conditional_marginal(j, p, fixed);
  CharGraph g = or_power(base, power);
  auto w = power_weights(vertex_weights(base, law), power);

  if (dot_requested && (dot_path.empty() || dot_path == "-")) {
    std::cout << to_dot(g);
    return 0;
  }
  if (dot_requested) {
    std::ofstream out(dot_path);
    if (!out) throw ParseError("cannot write '" + dot_path + "'");
    out << to_dot(g);
  }

  std::optional<ColoringResult> coloring;
  if (g.vertex_count() <= kMaxColoringVertices) {
    coloring = min_entropy_coloring(g, w);
  } else if (g.vertex_count() <= kMaxMaskVertices) {
    coloring = min_entropy_coloring_by_residuals(g, w);
  }
  std::optional<std::size_t> chi;
  if (g.vertex_count() <= kMaxChromaticVertices) chi = chromatic_number(g);
  std::optional<GraphEntropyResult> h;
  if (g.vertex_count() <= kMaxMisVertices) h = graph_entropy(g, w);

  if (as_json) {
    Json out;
    out["schema"] = kReportSchema;
    out["source"] = source;
    out["power"] = power;
    out["conditioning"] = g.provenance().conditioning;
    if (!fixed.empty()) out["edge_rule"] = rule_name(rule);
    out["vertex_count"] = g.vertex_count();
    out["edge_count"] = g.edge_count();
    Json edges = Json::array();
    for (auto [u, v] : g.edges()) edges.push_back(Json::array({u, v}));
    out["edges"] = edges;
    if (chi) out["chromatic_number"] = tagged(static_cast<double>(*chi), Provenance::oracle);
    if (h) {
      out["graph_entropy"] = tagged(h->value, Provenance::oracle);
      out["duality_gap"] = tagged(h->duality_gap, Provenance::oracle);
      out["maximal_independent_sets"] = h->family.size();
    }
    if (coloring) {
      Json c;
      c["assignment"] = coloring->coloring.assignment;
      c["entropy"] = tagged(coloring->entropy, Provenance::oracle);
      c["entropy_per_symbol"] = tagged(coloring->entropy / static_cast<double>(power), Provenance::oracle);
      out["min_entropy_coloring"] = c;
    }
    if (dot_requested) out["dot_file"] = dot_path;
    emit(out);
    return 0;
  }
  std::cout << "characteristic graph of X" << source;
  if (power > 1) std::cout << " (OR-power " << power << ")";
  if (!fixed.empty()) std::cout << " given " << g.provenance().conditioning << " [" << rule_name(rule) << " rule]";
  std::cout << "\nvertices: " << g.vertex_count() << "  edges: " << g.edge_count() << '\n';
  if (chi) std::cout << "chromatic number: " << *chi << '\n';
  if (h) {
    std::cout << "maximal independent sets: " << h->family.size() << '\n'
              << "graph entropy: " << num(h->value) << " bits (duality gap " << num(h->duality_gap) << ")\n";
  }
  if (coloring) {
    std::cout << "minimum-entropy coloring: " << coloring->coloring.num_colors << " colors, "
              << num(coloring->entropy) << " bits";
    if (power > 1) std::cout << " (" << num(coloring->entropy / static_cast<double>(power)) << " per symbol)";
    std::cout << '\n';
  }
  if (!coloring) std::cout << "coloring and graph entropy skipped: more than " << kMaxMaskVertices << " vertices\n";
  if (dot_requested) std::cout << "DOT written to " << dot_path << '\n';
  return 0;
}

// --- coupling --------------------------------------------------------------

int cmd_coupling(const Scenario& s, bool as_json) {
  if (s.joint.rank() != 2 || !(s.joint.alphabet(0) == s.joint.alphabet(1))) {
    throw ValidationError("coupling needs two sources on one alphabet", "sources");
  }
  Pmf first = s.kind == SourceKind::maximal_coupling ? s.marginals[0] : s.joint.marginal_pmf(0);
  Pmf second = s.kind == SourceKind::maximal_coupling ? s.marginals[1] : s.joint.marginal_pmf(1);
  MaximalCoupling c = maximal_coupling(first, second);
  Json dump = coupling_json(c);
  if (as_json) {
    Json out;
    out["schema"] = kReportSchema;
    out["coupling"] = dump;
    emit(out);
    return 0;
  }
  auto pmf_line = [](const char* name, const std::optional<Pmf>& p) {
    std::cout << name << ": ";
    if (!p) {
      std::cout << "-\n";
      return;
    }
    for (std::size_t i = 0; i < p->size(); ++i) {
      std::cout << (i ? ", " : "") << num(p->alphabet()[i]) << "->" << to_string(p->probs()[i]);
    }
    std::cout << '\n';
  };
  std::cout << "delta = " << to_string(c.delta) << " (" << num(to_double(c.delta)) << ")\n";
  pmf_line("T", c.common);
  pmf_line("V", c.excess_first);
  pmf_line("W", c.excess_second);
  const auto& a = c.joint.alphabet(0);
  std::cout << "joint table (rows Y1, columns Y2):\n";
  for (std::size_t r = 0; r < a.size(); ++r) {
    std::cout << "  " << std::setw(6) << num(a[r]);
    for (std::size_t k = 0; k < a.size(); ++k) std::cout << ' ' << std::setw(8) << to_string(c.joint.table()[r * a.size() + k]);
    std::cout << '\n';
  }
  if (c.common) std::cout << "H(T) = " << num(entropy(*c.common)) << '\n';
  if (c.delta > 0 && c.delta < 1) std::cout << "mixture entropy = " << num(coupling_mixture_entropy(c)) << '\n';
  std::cout << "table entropy = " << num(joint_entropy(c.joint)) << '\n'
            << "independent joint entropy = "
            << num(entropy(c.joint.marginal_pmf(0)) + entropy(c.joint.marginal_pmf(1))) << '\n'
            << "branch determined by (Y1, Y2): " << (coupling_branch_determined(c) ? "yes" : "no") << '\n';
  return 0;
}

// --- calculus --------------------------------------------------------------

int cmd_calculus(const Scenario& s, const std::string& point, double dx, bool as_json) {
  auto x = parse_point(point, "--at");
  if (x.size() != s.system.n) throw ValidationError("--at needs one coordinate per source", "--at");
  CalculusCheck c = calculus_check(s.system, x, dx);
  if (as_json) {
    Json out;
    out["schema"] = kReportSchema;
    out["calculus"] = calculus_json(c);
    emit(out);
    return 0;
  }
  const std::size_t n = x.size();
  std::cout << "x = " << vec(x) << '\n'
            << "gradient     " << vec(c.gradient) << '\n'
            << "finite diff  " << vec(c.fd_gradient) << "  max rel err " << num(c.gradient_error) << '\n'
            << "hessian:\n";
  for (std::size_t p = 0; p < n; ++p) {
    std::cout << "  " << vec(std::span<const double>(c.hessian).subspan(p * n, n)) << "   fd "
              << vec(std::span<const double>(c.fd_hessian).subspan(p * n, n)) << '\n';
  }
  std::cout << "hessian max rel err " << num(c.hessian_error) << '\n'
            << "taylor-2 remainder at h=" << num(dx) << ": " << num(c.remainder) << ", at h/2: " << num(c.remainder_half);
  if (c.remainder > 1e-12 && c.remainder_half > 0) std::cout << ", ratio " << num(c.remainder / c.remainder_half);
  std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed function computation over a multiple-access channel"};
  app.name("ka-mac");
  app.require_subcommand(1);

  std::string path;
  bool as_json = false;
  auto with_scenario = [&](CLI::App* sub) {
    sub->add_option("--scenario", path, "scenario JSON file")->required();
  };

  auto* rates = app.add_subcommand("rates", "rate-region table");
  with_scenario(rates);
  rates->add_flag("--json", as_json, "emit JSON instead of a table");

  std::string point;
  auto* simulate = app.add_subcommand("simulate", "trace one realization through the decomposition");
  with_scenario(simulate);
  simulate->add_option("--x", point, "comma-separated source values")->required();
  simulate->add_flag("--json", as_json);

  std::size_t source = 1, power = 1;
  std::vector<std::string> conditional;
  std::string rule, dot_path;
  auto* graph = app.add_subcommand("graph", "characteristic graph of one source");
  with_scenario(graph);
  graph->add_option("--source", source, "1-based source index")->required();
  graph->add_option("--power", power, "OR-power k")->check(CLI::Range(1, 4));
  graph->add_option("--conditional", conditional, "fix sources, r=value (repeatable)");
  graph->add_option("--rule", rule, "conditional edge rule: pointwise or global");
  auto* dot = graph->add_option("--dot", dot_path, "write DOT to a file ('-' or no value: stdout)")->expected(0, 1);
  graph->add_flag("--json", as_json);

  auto* coupling = app.add_subcommand("coupling", "maximal coupling of the two marginals");
  with_scenario(coupling);
  coupling->add_flag("--json", as_json);

  double step = 1e-2;
  auto* calculus = app.add_subcommand("calculus", "closed-form derivatives against finite differences");
  with_scenario(calculus);
  calculus->add_option("--at", point, "comma-separated evaluation point")->required();
  calculus->add_option("--dx", step, "Taylor step along (1,...,1)");
  calculus->add_flag("--json", as_json);

  auto* report = app.add_subcommand("report", "full JSON report");
  with_scenario(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Scenario s = load_scenario(path);
    if (*rates) return cmd_rates(s, as_json);
    if (*simulate) return cmd_simulate(s, point, as_json);
    if (*graph) return cmd_graph(s, source, power, conditional, rule, dot->count() > 0, dot_path, as_json);
    if (*coupling) return cmd_coupling(s, as_json);
    if (*calculus) return cmd_calculus(s, point, step, as_json);
    if (*report) {
      emit(full_report(s));
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 3;
  } catch (const SizeCapError& e) {
    std::cerr << "size cap: " << e.what() << '\n';
    return 4;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
