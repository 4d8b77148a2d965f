#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace tailex {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace numerics {

enum class Transform { none, exp_sub, semi_infinite };

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  std::size_t max_subdiv = 1'000'000;
  Transform transform = Transform::none;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, QuadratureResult best)
      : std::runtime_error(what), best_(best) {}
  const QuadratureResult& best() const noexcept { return best_; }

 private:
  QuadratureResult best_;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule.
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525452182, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a, b, value, error;
  double floor;  // roundoff part of the error estimate
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk21(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double rk = fc * kWgk[10];
  double rg = 0.0;
  double resabs = std::abs(rk);
  std::array<double, 10> f1{}, f2{};
  for (int j = 0; j < 10; ++j) {
    const double dx = h * kXgk[j];
    f1[j] = f(c - dx);
    f2[j] = f(c + dx);
    rk += kWgk[j] * (f1[j] + f2[j]);
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) rg += kWg[j / 2] * (f1[j] + f2[j]);
  }
  const double mean = 0.5 * rk;
  double resasc = kWgk[10] * std::abs(fc - mean);
  for (int j = 0; j < 10; ++j)
    resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  resasc *= std::abs(h);
  resabs *= std::abs(h);
  double err = std::abs((rk - rg) * h);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  const double floor = 50 * eps * resabs;
  if (resabs > std::numeric_limits<double>::min() / (50 * eps)) err = std::max(floor, err);
  return {a, b, rk * h, err, floor};
}

template <class F>
QuadratureResult adapt(const F& f, double a, double b, const QuadratureSpec& spec) {
  if (!(spec.rel_tol > 0) || !(spec.abs_tol > 0) || spec.max_subdiv < 1)
    throw DomainError("integrate: tolerances must be positive and max_subdiv >= 1");
  std::priority_queue<Segment> heap;
  Segment first = gk21(f, a, b);
  double total = first.value, err = first.error, floor = first.floor;
  heap.push(first);
  std::size_t n = 1;
  // Stop at the requested tolerance, or once the estimate is roundoff dominated.
  auto done = [&] {
    return err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total)) || err <= 2 * floor;
  };
  while (!done()) {
    if (!std::isfinite(total))
      throw IntegrationError("integrate: non-finite integrand value", {total, err, n});
    if (n >= spec.max_subdiv)
      throw IntegrationError("integrate: subdivision budget exhausted", {total, err, n});
    Segment s = heap.top();
    const double mid = 0.5 * (s.a + s.b);
    if (!(mid > s.a && mid < s.b)) {
      // Interval collapsed to machine resolution; accept what we have.
      break;
    }
    heap.pop();
    Segment l = gk21(f, s.a, mid), r = gk21(f, mid, s.b);
    total += l.value + r.value - s.value;
    err += l.error + r.error - s.error;
    floor += l.floor + r.floor - s.floor;
    heap.push(l);
    heap.push(r);
    ++n;
  }
  // Re-sum to shed accumulated update roundoff.
  double v = 0.0, e = 0.0;
  std::vector<Segment> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
  for (const auto& s : segs) {
    v += s.value;
    e += s.error;
  }
  if (!std::isfinite(v)) throw IntegrationError("integrate: non-finite result", {v, e, n});
  return {v, e, n};
}

}  // namespace detail

/// Integrate f over [a, b].
///   none          : finite [a, b]; a > b gives minus the integral over [b, a]
///   semi_infinite : [a, inf), b ignored; x = a + u/(1-u)
///   exp_sub       : (0, b] with s = b e^{-u}, then u mapped as semi_infinite
template <class F>
QuadratureResult integrate(const F& f, double a, double b, const QuadratureSpec& spec = {}) {
  switch (spec.transform) {
    case Transform::none:
      if (!(std::isfinite(a) && std::isfinite(b)))
        throw DomainError("integrate: finite bounds required without a transform");
      if (a == b) return {0.0, 0.0, 0};
      if (a > b) {
        auto r = detail::adapt(f, b, a, spec);
        r.value = -r.value;
        return r;
      }
      return detail::adapt(f, a, b, spec);
    case Transform::semi_infinite: {
      auto g = [&](double u) {
        const double w = 1.0 - u;
        const double val = f(a + u / w);
        return val == 0.0 ? 0.0 : val / (w * w);
      };
      return detail::adapt(g, 0.0, 1.0, spec);
    }
    case Transform::exp_sub: {
      auto g = [&](double u) {
        const double w = 1.0 - u;
        const double t = u / w;
        const double s = b * std::exp(-t);
        if (s == 0.0) return 0.0;
        const double val = f(s);
        return val == 0.0 ? 0.0 : val * s / (w * w);
      };
      return detail::adapt(g, 0.0, 1.0, spec);
    }
  }
  throw DomainError("integrate: unknown transform");
}

template <class F>
double integral(const F& f, double a, double b, const QuadratureSpec& spec = {}) {
  return integrate(f, a, b, spec).value;
}

/// int_0^1 f(s, 1 - s) ds, with 1 - s supplied exactly near s = 1. Both halves
/// use the exponential substitution so endpoint singularities are integrable.
template <class F>
QuadratureResult integrate_unit(const F& f, const QuadratureSpec& base = {}) {
  QuadratureSpec spec = base;
  spec.transform = Transform::exp_sub;
  auto left = integrate([&](double s) { return f(s, 1.0 - s); }, 0.0, 0.5, spec);
  auto right = integrate([&](double w) { return f(1.0 - w, w); }, 0.0, 0.5, spec);
  return {left.value + right.value, left.error + right.error, left.intervals + right.intervals};
}

struct RootSpec {
  double lo = 0.0;
  double hi = 1.0;
  double rel_tol = 1e-12;
  std::size_t max_iter = 200;
};

class RootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bracketed root of a continuous residual (TOMS 748). Never leaves [lo, hi].
template <class F>
double find_root(const F& residual, const RootSpec& spec) {
  double lo = spec.lo, hi = spec.hi;
  if (!(lo < hi)) throw RootError("find_root: empty bracket");
  const double flo = residual(lo), fhi = residual(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0) || std::isnan(flo) || std::isnan(fhi))
    throw RootError("find_root: residual has no sign change on [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");
  const double tol = std::max(spec.rel_tol, 4 * std::numeric_limits<double>::epsilon());
  auto stop = [tol](double x, double y) {
    return std::abs(x - y) <= tol * std::min(std::abs(x), std::abs(y)) ||
           std::abs(x - y) <= std::numeric_limits<double>::min();
  };
  boost::uintmax_t iters = spec.max_iter;
  auto r = boost::math::tools::toms748_solve(residual, lo, hi, flo, fhi, stop, iters);
  return 0.5 * (r.first + r.second);
}

/// Grow [lo, hi] geometrically (in the direction of `up`) until residual changes sign.
/// Returns the bracket; lower end is kept fixed when growing up and vice versa.
template <class F>
std::pair<double, double> expand_bracket(const F& residual, double lo, double hi, double factor,
                                         int max_steps, double limit) {
  double flo = residual(lo), fhi = residual(hi);
  for (int i = 0; i < max_steps && (flo > 0) == (fhi > 0); ++i) {
    if (std::abs(flo) < std::abs(fhi)) {
      const double step = hi - lo;
      lo -= step * (factor - 1);
      flo = residual(lo);
    } else {
      const double step = hi - lo;
      const double nh = std::min(hi + step * (factor - 1), limit);
      if (nh == hi) break;
      lo = hi;
      flo = fhi;
      hi = nh;
      fhi = residual(hi);
    }
  }
  if ((flo > 0) == (fhi > 0)) throw RootError("expand_bracket: no sign change found");
  return {lo, hi};
}

// Special functions, Boost.Math backed.
inline double log_gamma(double x) {
  if (x <= 0 && x == std::floor(x)) throw DomainError("log_gamma: pole at non-positive integer");
  return boost::math::lgamma(x);
}
inline double beta(double a, double b) {
  if (!(a > 0 && b > 0)) throw DomainError("beta: arguments must be positive");
  return boost::math::beta(a, b);
}
inline double log_beta(double a, double b) {
  if (!(a > 0 && b > 0)) throw DomainError("log_beta: arguments must be positive");
  return boost::math::lgamma(a) + boost::math::lgamma(b) - boost::math::lgamma(a + b);
}
inline double inc_beta(double a, double b, double x) {
  if (!(a > 0 && b > 0) || x < 0 || x > 1) throw DomainError("inc_beta: bad arguments");
  return boost::math::ibeta(a, b, x);
}
inline double inc_beta_c(double a, double b, double x) {
  if (!(a > 0 && b > 0) || x < 0 || x > 1) throw DomainError("inc_beta_c: bad arguments");
  return boost::math::ibetac(a, b, x);
}
inline double inc_beta_inv(double a, double b, double p) {
  if (!(a > 0 && b > 0) || p < 0 || p > 1) throw DomainError("inc_beta_inv: bad arguments");
  return boost::math::ibeta_inv(a, b, p);
}
/// x with 1 - I_x(a, b) = p; accurate for tiny p.
inline double inc_beta_c_inv(double a, double b, double p) {
  if (!(a > 0 && b > 0) || p < 0 || p > 1) throw DomainError("inc_beta_c_inv: bad arguments");
  return boost::math::ibetac_inv(a, b, p);
}

}  // namespace numerics
}  // namespace tailex
