#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "tailex/numerics.hpp"
#include "tailex/rv_kernel.hpp"
#include "tailex/spec_parse.hpp"

namespace tailex {

enum class Branch { frechet, gumbel, weibull };

inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::frechet: return "frechet";
    case Branch::gumbel: return "gumbel";
    case Branch::weibull: return "weibull";
  }
  return "?";
}

using Fn = std::function<double(double)>;

/// Third-order profile of U (Frechet, Gumbel) or of x_F - U (Weibull).
/// For Frechet and Weibull the auxiliaries A, B are those of the
/// regular-variation form U(tx)/U(t) = x^g (1 + A D_rho(x) + A B D_{rho+eta}(x) + ...).
struct RvProfile {
  Branch branch = Branch::frechet;
  rv::RvParams params;
  Fn a;
  Fn A;
  Fn B;  // empty when no third-order information exists
  bool exact_power = false;  // A identically zero
};

/// Survival-scale profile for Frechet models: F-bar in 3RV_{-alpha, varrho, varsigma}.
struct SurvivalProfile {
  double alpha = 0.0;
  double varrho = 0.0;
  double varsigma = 0.0;
  Fn A;
  Fn B;
  bool exact_power = false;
};

struct TailModel {
  std::string name;
  Fn cdf;
  Fn sf;
  Fn quantile;       // p -> F^{<-}(p)
  Fn tail_quantile;  // t -> F^{<-}(1 - 1/t)
  Fn tail_gap;       // t -> x_F - U(t), finite endpoint only
  Fn sf_gap;         // v -> F-bar(x_F - v), finite endpoint only
  std::optional<double> mean;
  double endpoint = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();  // left end of the support
  RvProfile profile;
  std::optional<SurvivalProfile> survival;
  std::optional<rv::HallFunction> survival_hall;
  double weibull_C = 0.0;  // x_F - U(t) ~ C t^gamma
  // Optional accurate (U(tx) - U(t)) / a(t).
  std::function<double(double, double)> u_increment;

  double gamma() const { return profile.params.gamma; }
  bool finite_endpoint() const { return std::isfinite(endpoint); }
  double require_mean() const {
    if (!mean) throw DomainError(name + ": mean is undefined");
    return *mean;
  }
};

namespace detail {

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw DomainError(std::string(what) + " must be positive and finite");
}

inline std::string fmt_params(std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream os;
  os.precision(10);
  bool first = true;
  for (auto& [k, v] : kv) {
    os << (first ? "" : ",") << k << "=" << v;
    first = false;
  }
  return os.str();
}

// Profile of U from a Hall-form U(t) = a t^g (1 + c t^r + d t^{2r}).
inline void fill_from_hall(RvProfile& p, const rv::HallFunction& u) {
  p.params = {u.alpha, u.rho, u.rho};
  auto aux = rv::hall_auxiliaries(u);
  p.A = aux.A;
  p.B = aux.B;
  p.exact_power = aux.exact_power;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline TailModel make_burr(double a, double b) {
  detail::require_positive(a, "burr: a");
  detail::require_positive(b, "burr: b");
  TailModel m;
  m.name = "burr:" + detail::fmt_params({{"a", a}, {"b", b}});
  m.lower = 0.0;
  m.sf = [a, b](double x) { return x <= 0 ? 1.0 : std::exp(-b * std::log1p(std::pow(x, a))); };
  m.cdf = [a, b](double x) { return x <= 0 ? 0.0 : -std::expm1(-b * std::log1p(std::pow(x, a))); };
  m.quantile = [a, b](double p) {
    if (p <= 0) return 0.0;
    if (p >= 1) return std::numeric_limits<double>::infinity();
    return std::pow(std::expm1(-std::log1p(-p) / b), 1.0 / a);
  };
  m.tail_quantile = [a, b](double t) { return std::pow(std::expm1(std::log(t) / b), 1.0 / a); };
  const double g = 1.0 / (a * b), r = -1.0 / b;
  if (a * b > 1.0) m.mean = numerics::beta(b - 1.0 / a, 1.0 / a) / a;
  auto& p = m.profile;
  p.branch = Branch::frechet;
  p.params = {g, r, r};
  p.a = [g, U = m.tail_quantile](double t) { return g * U(t); };
  p.A = [a, b](double t) {
    const double s = std::pow(t, -1.0 / b);
    return s / (a * b - b * s);
  };
  p.B = [a, b](double t) { return (a - 1.0) / a * std::pow(t, -1.0 / b); };
  m.u_increment = [a, b, g, r](double t, double x) {
    const double s = std::pow(t, r);
    const double z =
        g * std::log(x) + (std::log1p(-s * std::pow(x, r)) - std::log1p(-s)) / a;
    return std::expm1(z) / g;
  };
  m.survival_hall = rv::HallFunction{1.0, -a * b, -b, b * (b + 1) / 2, -a};
  auto aux = rv::hall_auxiliaries(*m.survival_hall);
  m.survival = SurvivalProfile{a * b, -a, -a, aux.A, aux.B, false};
  return m;
}

inline TailModel make_student(double v) {
  if (!(v > 1.0)) throw DomainError("student: v must exceed 1 (finite mean)");
  TailModel m;
  m.name = "student:" + detail::fmt_params({{"v", v}});
  auto dist = std::make_shared<boost::math::students_t_distribution<double>>(v);
  m.cdf = [dist](double x) { return boost::math::cdf(*dist, x); };
  m.sf = [dist](double x) { return boost::math::cdf(boost::math::complement(*dist, x)); };
  m.quantile = [dist](double p) {
    if (p <= 0) return -std::numeric_limits<double>::infinity();
    if (p >= 1) return std::numeric_limits<double>::infinity();
    return boost::math::quantile(*dist, p);
  };
  m.tail_quantile = [dist](double t) {
    return boost::math::quantile(boost::math::complement(*dist, 1.0 / t));
  };
  m.mean = 0.0;
  const double Cv = std::pow(v, v / 2) / numerics::beta(v / 2, 0.5);
  auto& p = m.profile;
  p.branch = Branch::frechet;
  p.params = {1.0 / v, -2.0 / v, -2.0 / v};
  p.a = [v, U = m.tail_quantile](double t) { return U(t) / v; };
  p.A = [v, Cv](double t) {
    const double w = std::pow(Cv * t / v, -2.0 / v);
    return (v + 1) * w / (v + 2 - v * (v + 1) * w / 2);
  };
  p.B = [v, Cv](double t) {
    return v * v * (v + 3) / (2 * (v + 2) * (v + 4)) * std::pow(Cv * t / v, -2.0 / v);
  };
  m.survival_hall = rv::HallFunction{Cv / v, -v, -v * v * (v + 1) / (2 * (v + 2)),
                                     v * v * v * (v + 1) * (v + 3) / (8 * (v + 4)), -2.0};
  auto aux = rv::hall_auxiliaries(*m.survival_hall);
  m.survival = SurvivalProfile{v, -2.0, -2.0, aux.A, aux.B, false};
  return m;
}

inline TailModel make_beta_model(double a, double b) {
  detail::require_positive(a, "beta: a");
  detail::require_positive(b, "beta: b");
  TailModel m;
  m.name = "beta:" + detail::fmt_params({{"a", a}, {"b", b}});
  m.endpoint = 1.0;
  m.lower = 0.0;
  m.cdf = [a, b](double x) { return x <= 0 ? 0.0 : x >= 1 ? 1.0 : numerics::inc_beta(a, b, x); };
  m.sf = [a, b](double x) {
    return x <= 0 ? 1.0 : x >= 1 ? 0.0 : numerics::inc_beta(b, a, 1.0 - x);
  };
  m.quantile = [a, b](double p) {
    if (p <= 0) return 0.0;
    if (p >= 1) return 1.0;
    return numerics::inc_beta_inv(a, b, p);
  };
  m.tail_gap = [a, b](double t) { return numerics::inc_beta_inv(b, a, 1.0 / t); };
  m.sf_gap = [a, b](double v) { return v <= 0 ? 0.0 : v >= 1 ? 1.0 : numerics::inc_beta(b, a, v); };
  m.tail_quantile = [a, b](double t) { return numerics::inc_beta_c_inv(a, b, 1.0 / t); };
  m.mean = a / (a + b);
  const double g = -1.0 / b;
  const double bB = b * numerics::beta(a, b);
  m.weibull_C = std::pow(bB, 1.0 / b);
  auto& p = m.profile;
  p.branch = Branch::weibull;
  p.params = {g, g, g};
  p.a = [g, gap = m.tail_gap](double t) { return -g * gap(t); };
  const double k = (a - 1) / (b + 1);
  p.A = [b, k, bB](double t) {
    const double s = std::pow(t / bB, -1.0 / b);
    return -(k / b) * s / (1 + k * s);
  };
  p.B = [a, b, k, bB](double t) {
    return 2 * (k + (a + b) / (2 * (b + 2))) * std::pow(t / bB, -1.0 / b);
  };
  p.exact_power = (a == 1.0);
  return m;
}

/// Exact df b x^{-alpha}(1 + c x^varrho + d x^{2 varrho}) on (x_min, inf).
inline TailModel make_hall_model(double b, double alpha, double c, double d, double varrho) {
  detail::require_positive(b, "hall: b");
  detail::require_positive(alpha, "hall: alpha");
  if (!(varrho < 0.0)) throw DomainError("hall: varrho must be negative");
  TailModel m;
  m.name = "hall:" + detail::fmt_params(
                         {{"b", b}, {"alpha", alpha}, {"c", c}, {"d", d}, {"varrho", varrho}});
  // A vanishing first correction leaves a Hall form in x^{2 varrho}.
  rv::HallFunction sh{b, -alpha, c, d, varrho};
  if (c == 0.0 && d != 0.0) sh = {b, -alpha, d, 0.0, 2 * varrho};
  const double r = sh.rho, cc = sh.c, dd = sh.d;
  auto raw = [=](double x) {
    const double s = std::pow(x, r);
    return b * std::pow(x, -alpha) * (1 + cc * s + dd * s * s);
  };
  // Derivative sign: x F'(x) / (b x^{-alpha}) = -alpha + c(r - alpha) z + d(2r - alpha) z^2, z = x^r.
  auto slope = [=](double z) { return -alpha + cc * (r - alpha) * z + dd * (2 * r - alpha) * z * z; };
  // Walk down from a point where the corrections are small until raw >= 1.
  double hi = std::max({1.0, std::pow(b, 1.0 / alpha)});
  if (cc != 0) hi = std::max(hi, 10 * std::pow(std::abs(cc), -1.0 / r));
  if (dd != 0) hi = std::max(hi, 10 * std::pow(std::abs(dd), -1.0 / (2 * r)));
  hi *= 2;
  while (raw(hi) >= 1.0) hi *= 2;
  double lo = hi, prev = raw(hi);
  bool found = false;
  for (int i = 0; i < 40000; ++i) {
    const double x = lo / 1.02;
    const double v = raw(x);
    if (!(v > prev)) break;
    lo = x;
    prev = v;
    if (v >= 1.0) {
      found = true;
      break;
    }
  }
  if (!found)
    throw DomainError("hall: survival function is not monotone decreasing down to level 1");
  const double xmin = numerics::find_root([&](double x) { return raw(x) - 1.0; },
                                          {lo, lo * 1.02, 1e-15, 400});
  {
    // Check the slope on (xmin, inf): endpoints and the vertex of the quadratic in z.
    const double zmax = std::pow(xmin, r);
    bool ok = slope(zmax) < 0 && slope(0.0) < 0;
    if (dd != 0) {
      const double zv = -cc * (r - alpha) / (2 * dd * (2 * r - alpha));
      if (zv > 0 && zv < zmax && !(slope(zv) < 0)) ok = false;
    }
    if (!ok) throw DomainError("hall: survival function is not monotone on (x_min, inf)");
  }
  m.lower = xmin;
  m.sf = [raw, xmin](double x) { return x <= xmin ? 1.0 : std::min(1.0, raw(x)); };
  m.cdf = [raw, xmin](double x) { return x <= xmin ? 0.0 : std::max(0.0, 1.0 - raw(x)); };
  auto solve_level = [raw, xmin, b, alpha](double level) {
    if (level >= 1.0) return xmin;
    double guess = std::max(xmin * 1.0000001, std::pow(level / b, -1.0 / alpha));
    double lo = guess, hi = guess;
    while (lo > xmin && raw(lo) < level) lo = std::max(xmin, lo / 2);
    while (raw(hi) > level) hi *= 2;
    if (lo == hi) return lo;
    return numerics::find_root(
        [&](double x) { return std::log(raw(x)) - std::log(level); }, {lo, hi, 1e-15, 400});
  };
  m.tail_quantile = [solve_level](double t) { return solve_level(1.0 / t); };
  m.quantile = [solve_level](double p) {
    if (p <= 0) return solve_level(1.0);
    if (p >= 1) return std::numeric_limits<double>::infinity();
    return solve_level(1.0 - p);
  };
  if (alpha > 1) {
    // E X = x_min + int_{x_min}^inf F-bar.
    auto prim = [=](double x, double e) { return std::pow(x, e) / e; };
    // int_{xmin}^inf b x^{-alpha}(1 + c x^r + d x^{2r}) dx in closed form.
    const double I = -b * (prim(xmin, 1 - alpha) + cc * prim(xmin, 1 - alpha + r) +
                           dd * prim(xmin, 1 - alpha + 2 * r));
    m.mean = xmin + I;
  }
  m.survival_hall = sh;
  auto saux = rv::hall_auxiliaries(sh);
  m.survival = SurvivalProfile{alpha, r, r, saux.A, saux.B, saux.exact_power};
  // U(t) = (bt)^{1/alpha}(1 + (c/alpha)(bt)^{r/alpha} + k2 (bt)^{2r/alpha}).
  const auto inv = rv::hall_invert_coeffs(sh);
  rv::HallFunction uh{std::pow(b, 1.0 / alpha), 1.0 / alpha, inv.c1 * std::pow(b, r / alpha),
                      inv.c2 * std::pow(b, 2 * r / alpha), r / alpha};
  auto& p = m.profile;
  p.branch = Branch::frechet;
  detail::fill_from_hall(p, uh);
  p.a = [g = 1.0 / alpha, U = m.tail_quantile](double t) { return g * U(t); };
  return m;
}

inline TailModel make_pareto(double alpha) { return make_hall_model(1.0, alpha, 0.0, 0.0, -1.0); }

/// Exponential with rate lambda: U(t) = ln(t) / lambda, a = 1/lambda, A identically 0.
inline TailModel make_exponential(double lambda = 1.0) {
  detail::require_positive(lambda, "exponential: rate");
  TailModel m;
  m.name = "exponential:" + detail::fmt_params({{"rate", lambda}});
  m.lower = 0.0;
  m.sf = [lambda](double x) { return x <= 0 ? 1.0 : std::exp(-lambda * x); };
  m.cdf = [lambda](double x) { return x <= 0 ? 0.0 : -std::expm1(-lambda * x); };
  m.quantile = [lambda](double p) { return -std::log1p(-p) / lambda; };
  m.tail_quantile = [lambda](double t) { return std::log(t) / lambda; };
  m.mean = 1.0 / lambda;
  auto& p = m.profile;
  p.branch = Branch::gumbel;
  p.params = {0.0, -1.0, -1.0};
  p.a = [lambda](double) { return 1.0 / lambda; };
  p.A = [](double) { return 0.0; };
  p.exact_power = true;
  return m;
}

/// Build a model from "burr:a=2,b=1.5", "student:v=1.2", "beta:a=3,b=6",
/// "hall:b=1,alpha=3,c=0.5,d=0.1,varrho=-1", "pareto:alpha=3", "exponential:rate=1".
inline TailModel parse_model(std::string_view text) {
  const auto s = parse_spec(text);
  if (s.family == "burr") {
    s.allow_only({"a", "b"});
    return make_burr(s.get("a"), s.get("b"));
  }
  if (s.family == "student") {
    s.allow_only({"v"});
    return make_student(s.get("v"));
  }
  if (s.family == "beta") {
    s.allow_only({"a", "b"});
    return make_beta_model(s.get("a"), s.get("b"));
  }
  if (s.family == "hall") {
    s.allow_only({"b", "alpha", "c", "d", "varrho"});
    return make_hall_model(s.get_or("b", 1.0), s.get("alpha"), s.get_or("c", 0.0),
                           s.get_or("d", 0.0), s.get("varrho"));
  }
  if (s.family == "pareto") {
    s.allow_only({"alpha"});
    return make_pareto(s.get("alpha"));
  }
  if (s.family == "exponential") {
    s.allow_only({"rate"});
    return make_exponential(s.get_or("rate", 1.0));
  }
  throw ParseError("unknown model family '" + s.family + "'");
}

}  // namespace tailex
