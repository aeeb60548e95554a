#pragma once

// Scenario files: sources, target function and options as JSON.
//
//   {
//     "name": "...",
//     "sources": {"independent": [pmf, ...]}
//              | {"joint": {"alphabets": [[...], ...], "probs": [...]}}
//              | {"maximal_coupling": [pmf, pmf]},
//     "function": {"name": "lm_norm", "m": 2, "alphas": [...]},
//     "options": {"edge_rule": "pointwise", "k_max": 1, "restarts": 16, "seed": 0},
//     "paper_annotations": [{"quantity": ..., "location": ..., "paper_value": ..., "oracle": {...}}]
//   }
//
// A pmf is {"symbols": [numbers], "probs": ["1/3", 0.25, ...]}. Joint tables
// are flat and row-major (last coordinate fastest). Every validation failure
// names the offending field.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kamac/error.hpp"
#include "kamac/graphs.hpp"
#include "kamac/ka.hpp"
#include "kamac/prob.hpp"

namespace kamac {

using Json = nlohmann::ordered_json;

enum class SourceKind { independent, joint, maximal_coupling };

struct ScenarioOptions {
  ConditionalEdgeRule edge_rule = ConditionalEdgeRule::pointwise;
  std::size_t k_max = 1;
  std::size_t restarts = 16;
  std::uint32_t seed = 0;
};

// What the oracle side of an annotation computes. Sources and subsets are
// 1-based, as in the file.
struct OracleSpec {
  std::string kind;
  std::size_t source = 0;
  std::size_t given = 0;
  double value = 0.0;
  std::optional<ConditionalEdgeRule> rule;
  std::vector<std::size_t> subset;
};

struct AnnotationSpec {
  std::string quantity;
  std::string location;
  double paper_value = 0.0;
  double tolerance = 1e-3;
  OracleSpec oracle;
};

struct Scenario {
  std::string name;
  SourceKind kind;
  std::vector<Pmf> marginals;  // independent factors or the two coupled marginals
  JointPmf joint;
  KaSystem system;
  ScenarioOptions options;
  std::vector<AnnotationSpec> annotations;
  Json echo;  // the parsed file, for the report header

  RealizationFunction direct() const {
    FunctionSpec spec = system.function;
    return [spec](std::span<const double> x) { return evaluate_direct(spec, x); };
  }
};

inline std::string_view rule_name(ConditionalEdgeRule r) {
  return r == ConditionalEdgeRule::global ? "global" : "pointwise";
}

inline constexpr std::string_view kOracleKinds[] = {
    "source_entropy",    "joint_entropy",          "function_entropy",
    "graph_entropy",     "conditional_graph_entropy", "conditional_graph_entropy_at",
    "conditional_graph_entropy_average", "sw_rate", "inner_rate",
    "graph_lower_rate",  "coloring_rate",          "common_entropy",
    "mixture_entropy",   "independent_joint_entropy",
};

namespace detail {

inline std::string at_index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

inline std::string at_key(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError("expected an object", path);
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError("missing field", at_key(path, key));
  return *it;
}

inline void only_keys(const Json& obj, std::initializer_list<std::string_view> allowed, const std::string& path) {
  if (!obj.is_object()) throw ValidationError("expected an object", path);
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) throw ValidationError("unknown field", at_key(path, key));
  }
}

inline double number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError("expected a number", path);
  double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError("expected a finite number", path);
  return d;
}

inline std::size_t count(const Json& v, const std::string& path, std::size_t lo, std::size_t hi) {
  if (!v.is_number_integer()) throw ValidationError("expected an integer", path);
  auto i = v.get<std::int64_t>();
  if (i < static_cast<std::int64_t>(lo) || i > static_cast<std::int64_t>(hi)) {
    throw ValidationError("expected an integer in " + std::to_string(lo) + ".." + std::to_string(hi), path);
  }
  return static_cast<std::size_t>(i);
}

inline Rational probability(const Json& v, const std::string& path) {
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
    if (v.is_number()) return parse_rational(v.dump());
  } catch (const ValidationError& e) {
    throw ValidationError(e.what(), path);
  }
  throw ValidationError("expected a rational string or a number", path);
}

inline Alphabet alphabet(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ValidationError("expected a non-empty array of symbols", path);
  if (v.size() > kMaxAlphabet) {
    throw SizeCapError(path + ": alphabets are capped at " + std::to_string(kMaxAlphabet) + " symbols");
  }
  std::vector<double> symbols;
  for (std::size_t i = 0; i < v.size(); ++i) symbols.push_back(number(v[i], at_index(path, i)));
  try {
    return Alphabet(std::move(symbols));
  } catch (const ValidationError& e) {
    throw ValidationError(e.what(), path);
  }
}

inline std::vector<Rational> probabilities(const Json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError("expected an array of probabilities", path);
  std::vector<Rational> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(probability(v[i], at_index(path, i)));
  return out;
}

inline Pmf pmf(const Json& v, const std::string& path) {
  only_keys(v, {"symbols", "probs"}, path);
  Alphabet a = alphabet(require(v, "symbols", path), at_key(path, "symbols"));
  auto probs = probabilities(require(v, "probs", path), at_key(path, "probs"));
  try {
    return Pmf(std::move(a), std::move(probs));
  } catch (const ValidationError& e) {
    throw ValidationError(e.what(), path);
  }
}

inline std::vector<Pmf> pmf_list(const Json& v, const std::string& path, std::size_t lo, std::size_t hi) {
  if (!v.is_array() || v.size() < lo || v.size() > hi) {
    throw ValidationError("expected between " + std::to_string(lo) + " and " + std::to_string(hi) + " pmfs", path);
  }
  std::vector<Pmf> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(pmf(v[i], at_index(path, i)));
  return out;
}

inline FunctionSpec function_spec(const Json& v, const std::string& path) {
  only_keys(v, {"name", "m", "alphas"}, path);
  const Json& name = require(v, "name", path);
  if (!name.is_string()) throw ValidationError("expected a string", at_key(path, "name"));
  FunctionSpec spec;
  try {
    spec.family = parse_family(name.get<std::string>());
  } catch (const ValidationError& e) {
    throw ValidationError(e.what(), at_key(path, "name"));
  }
  if (v.contains("m")) spec.m = static_cast<int>(count(v["m"], at_key(path, "m"), 1, 16));
  if (v.contains("alphas")) {
    const Json& a = v["alphas"];
    std::string apath = at_key(path, "alphas");
    if (!a.is_array()) throw ValidationError("expected an array of weights", apath);
    for (std::size_t i = 0; i < a.size(); ++i) spec.alphas.push_back(number(a[i], at_index(apath, i)));
  }
  return spec;
}

inline ScenarioOptions options(const Json& v, const std::string& path) {
  only_keys(v, {"edge_rule", "k_max", "restarts", "seed"}, path);
  ScenarioOptions o;
  if (v.contains("edge_rule")) {
    const Json& r = v["edge_rule"];
    if (r == "pointwise") {
      o.edge_rule = ConditionalEdgeRule::pointwise;
    } else if (r == "global") {
      o.edge_rule = ConditionalEdgeRule::global;
    } else {
      throw ValidationError("expected \"pointwise\" or \"global\"", at_key(path, "edge_rule"));
    }
  }
  if (v.contains("k_max")) o.k_max = count(v["k_max"], at_key(path, "k_max"), 1, 3);
  if (v.contains("restarts")) o.restarts = count(v["restarts"], at_key(path, "restarts"), 1, 256);
  if (v.contains("seed")) o.seed = static_cast<std::uint32_t>(count(v["seed"], at_key(path, "seed"), 0, UINT32_MAX));
  return o;
}

inline OracleSpec oracle_spec(const Json& v, const std::string& path, std::size_t n) {
  only_keys(v, {"kind", "source", "given", "value", "rule", "subset"}, path);
  const Json& kind = require(v, "kind", path);
  bool known = false;
  for (auto k : kOracleKinds) known = known || (kind.is_string() && kind.get<std::string>() == k);
  if (!known) throw ValidationError("unknown oracle kind", at_key(path, "kind"));
  OracleSpec o;
  o.kind = kind.get<std::string>();
  if (v.contains("source")) o.source = count(v["source"], at_key(path, "source"), 1, n);
  if (v.contains("given")) o.given = count(v["given"], at_key(path, "given"), 1, n);
  if (v.contains("value")) o.value = number(v["value"], at_key(path, "value"));
  if (v.contains("rule")) {
    const Json& r = v["rule"];
    if (r == "pointwise") {
      o.rule = ConditionalEdgeRule::pointwise;
    } else if (r == "global") {
      o.rule = ConditionalEdgeRule::global;
    } else {
      throw ValidationError("expected \"pointwise\" or \"global\"", at_key(path, "rule"));
    }
  }
  if (v.contains("subset")) {
    const Json& s = v["subset"];
    std::string spath = at_key(path, "subset");
    if (!s.is_array() || s.empty()) throw ValidationError("expected a non-empty list of sources", spath);
    for (std::size_t i = 0; i < s.size(); ++i) o.subset.push_back(count(s[i], at_index(spath, i), 1, n));
  }

  bool needs_source = o.kind == "source_entropy" || o.kind == "graph_entropy" ||
                      o.kind.starts_with("conditional_graph_entropy");
  if (needs_source && o.source == 0) throw ValidationError("missing field", at_key(path, "source"));
  if (o.kind.starts_with("conditional_graph_entropy_")) {
    if (o.given == 0) throw ValidationError("missing field", at_key(path, "given"));
    if (o.given == o.source) throw ValidationError("cannot condition on the source itself", at_key(path, "given"));
  }
  if (o.kind == "conditional_graph_entropy_at" && !v.contains("value")) {
    throw ValidationError("missing field", at_key(path, "value"));
  }
  if (o.kind.ends_with("_rate") && o.subset.empty()) throw ValidationError("missing field", at_key(path, "subset"));
  return o;
}

inline std::vector<AnnotationSpec> annotations(const Json& v, const std::string& path, std::size_t n) {
  if (!v.is_array()) throw ValidationError("expected an array", path);
  std::vector<AnnotationSpec> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::string ipath = at_index(path, i);
    const Json& a = v[i];
    only_keys(a, {"quantity", "location", "paper_value", "tolerance", "oracle"}, ipath);
    AnnotationSpec spec;
    const Json& q = require(a, "quantity", ipath);
    const Json& l = require(a, "location", ipath);
    if (!q.is_string()) throw ValidationError("expected a string", at_key(ipath, "quantity"));
    if (!l.is_string()) throw ValidationError("expected a string", at_key(ipath, "location"));
    spec.quantity = q.get<std::string>();
    spec.location = l.get<std::string>();
    spec.paper_value = number(require(a, "paper_value", ipath), at_key(ipath, "paper_value"));
    if (a.contains("tolerance")) spec.tolerance = number(a["tolerance"], at_key(ipath, "tolerance"));
    spec.oracle = oracle_spec(require(a, "oracle", ipath), at_key(ipath, "oracle"), n);
    out.push_back(std::move(spec));
  }
  return out;
}

inline void check_domain(const FunctionSpec& f, const JointPmf& j) {
  if (f.family != Family::xor_bits && f.family != Family::binary_xor) return;
  for (std::size_t p = 0; p < j.rank(); ++p) {
    for (double s : j.alphabet(p).symbols()) {
      if (s < 0 || s != std::floor(s)) {
        throw ValidationError(std::string(family_name(f.family)) + " needs non-negative integer symbols", "sources");
      }
    }
  }
}

}  // namespace detail

inline Scenario scenario_from_json(const Json& root) {
  using namespace detail;
  only_keys(root, {"name", "description", "sources", "function", "options", "paper_annotations"}, "");
  std::string name;
  if (root.contains("name")) {
    if (!root["name"].is_string()) throw ValidationError("expected a string", "name");
    name = root["name"].get<std::string>();
  }

  const Json& sources = require(root, "sources", "");
  if (!sources.is_object() || sources.size() != 1) {
    throw ValidationError("expected exactly one of independent, joint, maximal_coupling", "sources");
  }
  SourceKind kind;
  std::vector<Pmf> marginals;
  std::optional<JointPmf> joint;
  if (sources.contains("independent")) {
    kind = SourceKind::independent;
    marginals = pmf_list(sources["independent"], "sources.independent", 1, kMaxRank);
    joint = JointPmf::product(std::span<const Pmf>(marginals));
  } else if (sources.contains("maximal_coupling")) {
    kind = SourceKind::maximal_coupling;
    marginals = pmf_list(sources["maximal_coupling"], "sources.maximal_coupling", 2, 2);
    if (!(marginals[0].alphabet() == marginals[1].alphabet())) {
      throw ValidationError("coupled marginals must share one alphabet", "sources.maximal_coupling[1].symbols");
    }
    joint = maximal_coupling(marginals[0], marginals[1]).joint;
  } else if (sources.contains("joint")) {
    kind = SourceKind::joint;
    const std::string path = "sources.joint";
    const Json& spec = sources["joint"];
    only_keys(spec, {"alphabets", "probs"}, path);
    const Json& as = require(spec, "alphabets", path);
    if (!as.is_array() || as.empty() || as.size() > kMaxRank) {
      throw ValidationError("expected 1.." + std::to_string(kMaxRank) + " alphabets", path + ".alphabets");
    }
    std::vector<Alphabet> alphabets;
    for (std::size_t i = 0; i < as.size(); ++i) alphabets.push_back(alphabet(as[i], at_index(path + ".alphabets", i)));
    auto probs = probabilities(require(spec, "probs", path), path + ".probs");
    try {
      joint = JointPmf(std::move(alphabets), std::move(probs));
    } catch (const ValidationError& e) {
      throw ValidationError(e.what(), path);
    }
  } else {
    throw ValidationError("expected exactly one of independent, joint, maximal_coupling", "sources");
  }

  FunctionSpec f = function_spec(require(root, "function", ""), "function");
  KaSystem system = [&] {
    try {
      return catalog(f, joint->rank());
    } catch (const ValidationError& e) {
      throw ValidationError(e.what(), "function");
    }
  }();
  check_domain(f, *joint);

  ScenarioOptions opts = root.contains("options") ? options(root["options"], "options") : ScenarioOptions{};
  std::vector<AnnotationSpec> notes;
  if (root.contains("paper_annotations")) notes = annotations(root["paper_annotations"], "paper_annotations", joint->rank());

  return Scenario{std::move(name), kind, std::move(marginals), std::move(*joint), std::move(system), opts,
                  std::move(notes), root};
}

inline Scenario parse_scenario(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return scenario_from_json(root);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

}  // namespace kamac
