#pragma once

// Closed-form Kolmogorov-Arnold decompositions f(x) = sum_q Phi(sum_p a_p psi(x_p + q s) + q)
// for a small catalog of target functions, evaluated as a three-stage
// pipeline (inner maps at the sources, additive channel, outer map at the
// receiver), together with gradients and Hessians assembled through the
// same chain rule.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kamac/error.hpp"
#include "kamac/prob.hpp"

namespace kamac {

using Vec = std::vector<double>;

enum class Family {
  product_abs_sprecher,
  product_abs_simple,
  lm_norm,
  polynomial,
  max,
  min,
  affine,
  xor_bits,
  binary_xor,
};

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::product_abs_sprecher: return "product_abs_sprecher";
    case Family::product_abs_simple: return "product_abs_simple";
    case Family::lm_norm: return "lm_norm";
    case Family::polynomial: return "polynomial";
    case Family::max: return "max";
    case Family::min: return "min";
    case Family::affine: return "affine";
    case Family::xor_bits: return "xor";
    case Family::binary_xor: return "binary_xor";
  }
  return "?";
}

inline Family parse_family(std::string_view name) {
  for (Family f : {Family::product_abs_sprecher, Family::product_abs_simple, Family::lm_norm,
                   Family::polynomial, Family::max, Family::min, Family::affine, Family::xor_bits,
                   Family::binary_xor}) {
    if (family_name(f) == name) return f;
  }
  throw ValidationError("unknown catalog function '" + std::string(name) + "'");
}

// Target function and its parameters. `m` is the norm order or polynomial
// degree; `alphas` are the affine weights.
struct FunctionSpec {
  Family family = Family::product_abs_simple;
  int m = 1;
  std::vector<double> alphas;

  friend bool operator==(const FunctionSpec&, const FunctionSpec&) = default;
};

inline std::string describe(const FunctionSpec& spec) {
  std::string s(family_name(spec.family));
  if (spec.family == Family::lm_norm || spec.family == Family::polynomial) {
    s += "(m=" + std::to_string(spec.m) + ")";
  }
  return s;
}

namespace detail {

inline bool is_bit_pattern(double v) {
  return v >= 0 && v == std::floor(v) && v < 9007199254740992.0;
}

}  // namespace detail

// Literal formula evaluation; the ground truth the pipeline is checked against.
inline double evaluate_direct(const FunctionSpec& spec, std::span<const double> x) {
  switch (spec.family) {
    case Family::product_abs_sprecher:
    case Family::product_abs_simple: {
      double prod = 1.0;
      for (double v : x) prod *= std::abs(v);
      return prod;
    }
    case Family::lm_norm: {
      double sum = 0.0;
      for (double v : x) sum += std::pow(std::abs(v), spec.m);
      return std::pow(sum, 1.0 / spec.m);
    }
    case Family::polynomial: {
      double sum = 0.0;
      for (double v : x) sum += v;
      return std::pow(sum, spec.m);
    }
    case Family::max: return *std::max_element(x.begin(), x.end());
    case Family::min: return *std::min_element(x.begin(), x.end());
    case Family::affine: {
      if (spec.alphas.size() != x.size()) throw ValidationError("affine weights do not match the number of sources");
      double sum = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) sum += spec.alphas[i] * x[i];
      return sum;
    }
    case Family::xor_bits: {
      std::uint64_t acc = 0;
      for (double v : x) {
        if (!detail::is_bit_pattern(v)) throw DomainError("xor needs non-negative integer arguments");
        acc ^= static_cast<std::uint64_t>(v);
      }
      return static_cast<double>(acc);
    }
    case Family::binary_xor: {
      // one-bit xor of the least significant bits
      std::uint64_t acc = 0;
      for (double v : x) {
        if (!detail::is_bit_pattern(v)) throw DomainError("binary_xor needs non-negative integer arguments");
        acc ^= static_cast<std::uint64_t>(v) & 1u;
      }
      return static_cast<double>(acc);
    }
  }
  return std::nan("");
}

// Value and first two derivatives of a (possibly vector-valued) inner map.
struct InnerJet {
  Vec value, d1, d2;
};

// Value, gradient and row-major Hessian of an outer map.
struct OuterJet {
  double value = 0.0;
  Vec grad;
  Vec hess;
};

enum class InnerForm { log_abs, log2_abs, abs_power, identity, moments };
enum class OuterForm { scaled_exp, exp2, root, power, identity, sqrt_lower, sqrt_upper };

struct InnerMap {
  InnerForm form = InnerForm::identity;
  double exponent = 1.0;
  std::size_t dim = 1;
  std::string formula;

  friend bool operator==(const InnerMap&, const InnerMap&) = default;

  // Value only; zero under a logarithm maps to -inf.
  Vec value(double x) const {
    switch (form) {
      case InnerForm::log_abs: return {x == 0.0 ? -INFINITY : std::log(std::abs(x))};
      case InnerForm::log2_abs: return {x == 0.0 ? -INFINITY : std::log2(std::abs(x))};
      case InnerForm::abs_power: return {std::pow(std::abs(x), exponent)};
      case InnerForm::identity: return {x};
      case InnerForm::moments: return {1.0, x, x * x};
    }
    return {};
  }

  InnerJet jet(double x) const {
    InnerJet j{value(x), {}, {}};
    switch (form) {
      case InnerForm::log_abs:
        if (x == 0.0) throw DomainError("ln|x| is not differentiable at 0");
        j.d1 = {1.0 / x};
        j.d2 = {-1.0 / (x * x)};
        break;
      case InnerForm::log2_abs:
        if (x == 0.0) throw DomainError("log2|x| is not differentiable at 0");
        j.d1 = {1.0 / (x * std::numbers::ln2)};
        j.d2 = {-1.0 / (x * x * std::numbers::ln2)};
        break;
      case InnerForm::abs_power: {
        const double m = exponent;
        if (x == 0.0 && m < 2.0) throw DomainError("|x|^m is not twice differentiable at 0 for m < 2");
        double sign = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
        j.d1 = {m * std::pow(std::abs(x), m - 1.0) * sign};
        j.d2 = {m * (m - 1.0) * std::pow(std::abs(x), m - 2.0)};
        break;
      }
      case InnerForm::identity:
        j.d1 = {1.0};
        j.d2 = {0.0};
        break;
      case InnerForm::moments:
        j.d1 = {0.0, 1.0, 2.0 * x};
        j.d2 = {0.0, 0.0, 2.0};
        break;
    }
    return j;
  }
};

struct OuterMap {
  OuterForm form = OuterForm::identity;
  double exponent = 1.0;
  double scale = 1.0;
  std::string formula;

  friend bool operator==(const OuterMap&, const OuterMap&) = default;

  double value(std::span<const double> z) const { return evaluate(z, false).value; }
  OuterJet jet(std::span<const double> z) const { return evaluate(z, true); }

 private:
  // Radicand 2 s_3 - s_2^2 of the extremum maps. It equals (x_1 - x_2)^2, so
  // small negative values are rounding noise.
  static double radicand(std::span<const double> z) {
    double r = 2.0 * z[2] - z[1] * z[1];
    if (r < 0.0) {
      if (r < -1e-9 * std::max(1.0, std::abs(z[2]))) throw DomainError("negative radicand in extremum outer map");
      r = 0.0;
    }
    return r;
  }

  OuterJet evaluate(std::span<const double> z, bool derivatives) const {
    OuterJet j;
    switch (form) {
      case OuterForm::scaled_exp: {
        double v = z[0] == -INFINITY ? 0.0 : scale * std::exp(z[0]);
        j.value = v;
        j.grad = {v};
        j.hess = {v};
        break;
      }
      case OuterForm::exp2: {
        double v = z[0] == -INFINITY ? 0.0 : std::exp2(z[0]);
        j.value = v;
        j.grad = {std::numbers::ln2 * v};
        j.hess = {std::numbers::ln2 * std::numbers::ln2 * v};
        break;
      }
      case OuterForm::root: {
        const double inv = 1.0 / exponent;
        j.value = std::pow(z[0], inv);
        if (derivatives) {
          if (z[0] <= 0.0 && exponent != 1.0) throw DomainError("root outer map is not differentiable at 0");
          j.grad = {inv * std::pow(z[0], inv - 1.0)};
          j.hess = {inv * (inv - 1.0) * std::pow(z[0], inv - 2.0)};
        }
        break;
      }
      case OuterForm::power: {
        const double m = exponent;
        j.value = std::pow(z[0], m);
        j.grad = {m * std::pow(z[0], m - 1.0)};
        j.hess = {m < 2.0 ? 0.0 : m * (m - 1.0) * std::pow(z[0], m - 2.0)};
        break;
      }
      case OuterForm::identity:
        j.value = z[0];
        j.grad = {1.0};
        j.hess = {0.0};
        break;
      case OuterForm::sqrt_lower:
      case OuterForm::sqrt_upper: {
        const double sign = form == OuterForm::sqrt_upper ? 1.0 : -1.0;
        const double r = radicand(z);
        const double g = std::sqrt(r);
        j.value = z[1] / 2.0 + sign * g / 2.0;
        if (derivatives) {
          if (g == 0.0) throw DomainError("extremum outer map is not differentiable on the diagonal");
          // r_2 = -2 s_2, r_3 = 2, r_22 = -2; dg = r_i / 2g, d2g = r_ij / 2g - r_i r_j / 4g^3
          const double r2 = -2.0 * z[1], r3 = 2.0;
          const double g2 = r2 / (2.0 * g), g3 = r3 / (2.0 * g);
          const double g3inv = 1.0 / (4.0 * g * g * g);
          const double g22 = -2.0 / (2.0 * g) - r2 * r2 * g3inv;
          const double g23 = -r2 * r3 * g3inv;
          const double g33 = -r3 * r3 * g3inv;
          j.grad = {0.0, 0.5 + sign * g2 / 2.0, sign * g3 / 2.0};
          j.hess = {0.0, 0.0, 0.0,
                    0.0, sign * g22 / 2.0, sign * g23 / 2.0,
                    0.0, sign * g23 / 2.0, sign * g33 / 2.0};
        }
        break;
      }
    }
    return j;
  }
};

struct Decomposition {
  InnerMap inner;
  std::vector<double> alphas;
  double shift = 0.0;
  std::size_t q_count = 1;  // q ranges over 0 .. q_count-1
  OuterMap outer;
};

struct KaSystem {
  FunctionSpec function;
  std::size_t n = 0;
  std::optional<Decomposition> decomposition;  // absent for the xor entries

  std::string name() const { return describe(function); }

  const Decomposition& require_decomposition() const {
    if (!decomposition) {
      throw DomainError(name() + " has no closed-form decomposition; only direct evaluation is available");
    }
    return *decomposition;
  }
};

inline KaSystem catalog(const FunctionSpec& spec, std::size_t n) {
  if (n == 0 || n > kMaxRank) throw ValidationError("number of sources must be in 1.." + std::to_string(kMaxRank));
  if ((spec.family == Family::lm_norm || spec.family == Family::polynomial) && spec.m < 1) {
    throw ValidationError("m must be a positive integer");
  }
  const std::vector<double> ones(n, 1.0);
  KaSystem s{spec, n, std::nullopt};
  switch (spec.family) {
    case Family::product_abs_sprecher: {
      const double nq = 2.0 * static_cast<double>(n) + 1.0;
      const double c = (std::numbers::e - 1.0) / (std::exp(nq) - 1.0);
      s.decomposition = Decomposition{{InnerForm::log_abs, 1.0, 1, "ln|x|"}, ones, 0.0, 2 * n + 1,
                                      {OuterForm::scaled_exp, 1.0, c, "(e-1)/(e^(2n+1)-1) exp(x)"}};
      break;
    }
    case Family::product_abs_simple:
      s.decomposition = Decomposition{{InnerForm::log2_abs, 1.0, 1, "log2|x|"}, ones, 0.0, 1,
                                      {OuterForm::exp2, 1.0, 1.0, "2^x"}};
      break;
    case Family::lm_norm:
      s.decomposition = Decomposition{{InnerForm::abs_power, double(spec.m), 1, "|x|^m"}, ones, 0.0, 1,
                                      {OuterForm::root, double(spec.m), 1.0, "x^(1/m)"}};
      break;
    case Family::polynomial:
      s.decomposition = Decomposition{{InnerForm::identity, 1.0, 1, "x"}, ones, 0.0, 1,
                                      {OuterForm::power, double(spec.m), 1.0, "x^m"}};
      break;
    case Family::max:
    case Family::min:
      if (n != 2) throw ValidationError("max/min decompositions are bivariate (n = 2)");
      s.decomposition = Decomposition{
          {InnerForm::moments, 1.0, 3, "(1, x, x^2)"}, ones, 0.0, 1,
          {spec.family == Family::max ? OuterForm::sqrt_upper : OuterForm::sqrt_lower, 1.0, 1.0,
           spec.family == Family::max ? "s2/2 + sqrt(2 s3 - s2^2)/2" : "s2/2 - sqrt(2 s3 - s2^2)/2"}};
      break;
    case Family::affine:
      if (spec.alphas.size() != n) throw ValidationError("affine needs one weight per source");
      s.decomposition = Decomposition{{InnerForm::identity, 1.0, 1, "x"}, spec.alphas, 0.0, 1,
                                      {OuterForm::identity, 1.0, 1.0, "x"}};
      break;
    case Family::xor_bits:
    case Family::binary_xor:
      break;
  }
  return s;
}

struct PipelineTrace {
  Vec x;
  std::vector<std::vector<Vec>> y_pq;  // [p][q], inner outputs a_p psi(x_p + q s)
  std::vector<Vec> y_q;                // channel sums over p, in order p = 1..n
  double output = 0.0;                 // sum_q Phi(Y_q + q)
};

namespace detail {

inline void check_arity(const KaSystem& s, std::span<const double> x) {
  if (x.size() != s.n) {
    throw ValidationError("expected " + std::to_string(s.n) + " coordinates, got " + std::to_string(x.size()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw DomainError("realization must be finite");
  }
}

// Outer argument for index q: the channel value shifted by q (scalar maps only).
inline Vec outer_argument(const Vec& channel, std::size_t q) {
  Vec z = channel;
  if (z.size() == 1) z[0] += static_cast<double>(q);
  return z;
}

}  // namespace detail

inline PipelineTrace pipeline_evaluate(const KaSystem& s, std::span<const double> x) {
  const auto& d = s.require_decomposition();
  detail::check_arity(s, x);
  PipelineTrace t;
  t.x.assign(x.begin(), x.end());
  t.y_pq.assign(s.n, std::vector<Vec>(d.q_count));
  for (std::size_t p = 0; p < s.n; ++p) {
    for (std::size_t q = 0; q < d.q_count; ++q) {
      Vec y = d.inner.value(x[p] + static_cast<double>(q) * d.shift);
      for (double& v : y) v *= d.alphas[p];
      t.y_pq[p][q] = std::move(y);
    }
  }
  t.y_q.assign(d.q_count, Vec(d.inner.dim, 0.0));
  for (std::size_t q = 0; q < d.q_count; ++q) {
    t.y_q[q] = t.y_pq[0][q];
    for (std::size_t p = 1; p < s.n; ++p) {
      for (std::size_t k = 0; k < d.inner.dim; ++k) t.y_q[q][k] += t.y_pq[p][q][k];
    }
  }
  double out = 0.0;
  for (std::size_t q = 0; q < d.q_count; ++q) {
    out += d.outer.value(detail::outer_argument(t.y_q[q], q));
  }
  t.output = out;
  return t;
}

// Joint law of the transmitted q = 0 inner images Y_p = a_p psi(x_p). The
// vector inner map of the extremum entries is a bijection of x, so Y_p = x_p.
inline JointPmf inner_image_distribution(const KaSystem& s, const JointPmf& j) {
  const auto& d = s.require_decomposition();
  if (j.rank() != s.n) throw ValidationError("joint pmf rank does not match the number of sources");
  std::vector<std::function<double(double)>> maps;
  for (std::size_t p = 0; p < s.n; ++p) {
    if (d.inner.dim != 1) {
      maps.emplace_back([](double x) { return x; });
    } else {
      maps.emplace_back([&d, p](double x) { return d.alphas[p] * d.inner.value(x)[0]; });
    }
  }
  return map_coordinates(j, maps);
}

// Receiver-side function of the inner images: Phi(sum_p Y_p) for q = 0.
inline RealizationFunction outer_of_images(const KaSystem& s) {
  const auto& d = s.require_decomposition();
  if (d.q_count != 1) {
    // The Sprecher form repeats the same image for every q; collapse to the
    // equivalent single-term receiver exp(sum Y).
    return [](std::span<const double> y) {
      double sum = 0.0;
      for (double v : y) sum += v;
      return sum == -INFINITY ? 0.0 : std::exp(sum);
    };
  }
  if (d.inner.dim != 1) {
    return [d](std::span<const double> y) {
      Vec z(d.inner.dim, 0.0);
      for (double v : y) {
        Vec img = d.inner.value(v);
        for (std::size_t k = 0; k < z.size(); ++k) z[k] += img[k];
      }
      return d.outer.value(z);
    };
  }
  return [d](std::span<const double> y) {
    double sum = 0.0;
    for (double v : y) sum += v;
    return d.outer.value(Vec{sum});
  };
}

// Gradient through the chain rule sum_q grad Phi(Y_q + q) . a_p psi'(x_p + q s).
inline Vec gradient(const KaSystem& s, std::span<const double> x) {
  const auto& d = s.require_decomposition();
  detail::check_arity(s, x);
  auto trace = pipeline_evaluate(s, x);
  Vec grad(s.n, 0.0);
  for (std::size_t q = 0; q < d.q_count; ++q) {
    OuterJet outer = d.outer.jet(detail::outer_argument(trace.y_q[q], q));
    for (std::size_t p = 0; p < s.n; ++p) {
      InnerJet inner = d.inner.jet(x[p] + static_cast<double>(q) * d.shift);
      double acc = 0.0;
      for (std::size_t k = 0; k < d.inner.dim; ++k) acc += outer.grad[k] * d.alphas[p] * inner.d1[k];
      grad[p] += acc;
    }
  }
  return grad;
}

// Row-major n x n Hessian: the rank-one terms grad Y_q^T Hess Phi grad Y_q
// plus the diagonal grad Phi . a_p psi''(x_p + q s).
inline Vec hessian(const KaSystem& s, std::span<const double> x) {
  const auto& d = s.require_decomposition();
  detail::check_arity(s, x);
  auto trace = pipeline_evaluate(s, x);
  const std::size_t n = s.n, dim = d.inner.dim;
  Vec h(n * n, 0.0);
  for (std::size_t q = 0; q < d.q_count; ++q) {
    OuterJet outer = d.outer.jet(detail::outer_argument(trace.y_q[q], q));
    std::vector<InnerJet> inner;
    for (std::size_t p = 0; p < n; ++p) inner.push_back(d.inner.jet(x[p] + static_cast<double>(q) * d.shift));
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t r = 0; r < n; ++r) {
        double acc = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
          for (std::size_t l = 0; l < dim; ++l) {
            acc += d.alphas[p] * inner[p].d1[k] * outer.hess[k * dim + l] * d.alphas[r] * inner[r].d1[l];
          }
        }
        if (p == r) {
          for (std::size_t k = 0; k < dim; ++k) acc += outer.grad[k] * d.alphas[p] * inner[p].d2[k];
        }
        h[p * n + r] += acc;
      }
    }
  }
  return h;
}

// Second-order prediction f(x) + grad . dx + dx^T H dx / 2.
inline double taylor2(const KaSystem& s, std::span<const double> x, std::span<const double> dx) {
  if (dx.size() != s.n) throw ValidationError("step has the wrong number of coordinates");
  const double f = pipeline_evaluate(s, x).output;
  const Vec g = gradient(s, x);
  const Vec h = hessian(s, x);
  double linear = 0.0, quadratic = 0.0;
  for (std::size_t p = 0; p < s.n; ++p) {
    linear += g[p] * dx[p];
    for (std::size_t r = 0; r < s.n; ++r) quadratic += dx[p] * h[p * s.n + r] * dx[r];
  }
  return f + linear + 0.5 * quadratic;
}

}  // namespace kamac
