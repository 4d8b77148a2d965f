#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

#include "tailex/numerics.hpp"
#include "tailex/rv_kernel.hpp"
#include "tailex/spec_parse.hpp"
#include "tailex/tail_models.hpp"

namespace tailex {

/// G-bar(1 - 1/x) in 3RV_{-alpha_g, varrho_g, varsigma_g}.
struct ScalerTailMeta {
  double alpha_g = 0.0;
  double varrho_g = -1.0;
  double varsigma_g = -1.0;
  Fn A_tilde;
  Fn B_tilde;
  bool exact_power = false;  // A_tilde identically 0
};

struct Scaler {
  std::string name;
  Fn cdf;
  Fn sf;
  Fn upper_tail;  // z -> P(S > 1 - z), accurate for small z
  std::function<double(double, double)> density;  // (s, 1 - s) -> g(s); empty when degenerate
  Fn moment;      // l -> E S^l
  Fn log_moment;  // l -> E S^l ln S
  std::optional<ScalerTailMeta> tail_meta;
  bool degenerate = false;  // S = 1
};

inline Scaler beta_scaler(double a, double b) {
  detail::require_positive(a, "beta scaler: a");
  detail::require_positive(b, "beta scaler: b");
  Scaler s;
  s.name = "beta:" + detail::fmt_params({{"a", a}, {"b", b}});
  s.cdf = [a, b](double x) { return x <= 0 ? 0.0 : x >= 1 ? 1.0 : numerics::inc_beta(a, b, x); };
  s.sf = [a, b](double x) { return x <= 0 ? 1.0 : x >= 1 ? 0.0 : numerics::inc_beta(b, a, 1 - x); };
  s.upper_tail = [a, b](double z) {
    return z <= 0 ? 0.0 : z >= 1 ? 1.0 : numerics::inc_beta(b, a, z);
  };
  const double lB = numerics::log_beta(a, b);
  s.density = [a, b, lB](double x, double w) {
    if (x <= 0 || w <= 0) return 0.0;
    return std::exp((a - 1) * std::log(x) + (b - 1) * std::log(w) - lB);
  };
  s.moment = [a, b, lB](double l) {
    if (l < 0) throw DomainError("scaler moment: negative exponent");
    return std::exp(numerics::log_beta(a + l, b) - lB);
  };
  s.log_moment = [a, b, lB](double l) {
    const double m = std::exp(numerics::log_beta(a + l, b) - lB);
    return m * (boost::math::digamma(a + l) - boost::math::digamma(a + l + b));
  };
  // G-bar(1 - 1/x) = x^{-b}/(b B(a,b)) (1 + c/x + d/x^2 + ...).
  const double c = -b * (a - 1) / (b + 1);
  const double d = b * (a - 1) * (a - 2) / (2 * (b + 2));
  ScalerTailMeta meta;
  meta.alpha_g = b;
  if (c == 0.0) {
    meta.A_tilde = [](double) { return 0.0; };
    meta.B_tilde = [](double) { return 0.0; };
    meta.exact_power = true;
  } else {
    auto aux = rv::hall_auxiliaries(rv::HallFunction{std::exp(-lB) / b, -b, c, d, -1.0});
    meta.A_tilde = aux.A;
    meta.B_tilde = aux.B;
  }
  s.tail_meta = meta;
  return s;
}

inline Scaler uniform_scaler() {
  auto s = beta_scaler(1.0, 1.0);
  s.name = "uniform";
  return s;
}

inline Scaler unit_scaler() {
  Scaler s;
  s.name = "unit";
  s.degenerate = true;
  s.cdf = [](double x) { return x >= 1 ? 1.0 : 0.0; };
  s.sf = [](double x) { return x >= 1 ? 0.0 : 1.0; };
  s.upper_tail = [](double z) { return z > 0 ? 1.0 : 0.0; };
  s.moment = [](double l) {
    if (l < 0) throw DomainError("scaler moment: negative exponent");
    return 1.0;
  };
  s.log_moment = [](double) { return 0.0; };
  return s;
}

/// E S^l by quadrature of the density; independent of the closed form.
inline double moment_by_quadrature(const Scaler& s, double l, double rel_tol = 1e-12) {
  if (l < 0) throw DomainError("scaler moment: negative exponent");
  if (s.degenerate) return 1.0;
  numerics::QuadratureSpec q;
  q.rel_tol = rel_tol;
  q.abs_tol = 1e-300;
  return numerics::integrate_unit(
             [&](double x, double w) { return std::pow(x, l) * s.density(x, w); }, q)
      .value;
}

inline std::vector<double> scaler_moment_vector(const Scaler& s, const std::vector<double>& ls) {
  std::vector<double> out;
  out.reserve(ls.size());
  for (double l : ls) {
    if (l < 0) throw DomainError("scaler_moment_vector: negative exponent");
    out.push_back(s.moment ? s.moment(l) : moment_by_quadrature(s, l, 1e-10));
  }
  return out;
}

inline Scaler parse_scaler(std::string_view text) {
  const auto p = parse_spec(text);
  if (p.family == "unit") {
    p.allow_only({});
    return unit_scaler();
  }
  if (p.family == "uniform") {
    p.allow_only({});
    return uniform_scaler();
  }
  if (p.family == "beta") {
    p.allow_only({"a", "b"});
    return beta_scaler(p.get("a"), p.get("b"));
  }
  throw ParseError("unknown scaler family '" + p.family + "'");
}

}  // namespace tailex
