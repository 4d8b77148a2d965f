#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tailex/numerics.hpp"

namespace tailex::rv {

struct RvParams {
  double gamma = 0.0;
  double rho = 0.0;
  double eta = 0.0;
};

inline void check_params(const RvParams& p) {
  if (!(p.rho <= 0.0) || !(p.eta <= 0.0))
    throw DomainError("RvParams: rho and eta must be <= 0");
}

namespace detail {

// Divided difference exp[z_0, ..., z_n]. Nodes within unit spread use the
// centred series sum_k h_k(z - c) / (n + k)!; wider sets recurse on the
// outermost pair, which keeps the subtraction well conditioned.
template <std::size_t N>
double exp_divdiff(std::array<double, N> z) {
  static_assert(N >= 1);
  std::sort(z.begin(), z.end());
  constexpr int n = static_cast<int>(N) - 1;
  if (z[N - 1] - z[0] <= 1.0) {
    double c = 0.0;
    for (double v : z) c += v;
    c /= static_cast<double>(N);
    std::array<double, N> w{};
    for (std::size_t i = 0; i < N; ++i) w[i] = z[i] - c;
    // h_k via the recurrence h_k(w_0..w_j) = h_k(w_0..w_{j-1}) + w_j h_{k-1}(w_0..w_j).
    constexpr int K = 30;
    std::array<double, K + 1> h{};
    h.fill(0.0);
    h[0] = 1.0;
    for (int k = 1; k <= K; ++k) h[k] = std::pow(w[0], k);
    for (std::size_t j = 1; j < N; ++j)
      for (int k = 1; k <= K; ++k) h[k] += w[j] * h[k - 1];
    double fact = 1.0;
    for (int i = 2; i <= n; ++i) fact *= i;
    double sum = 0.0;
    for (int k = 0; k <= K; ++k) {
      if (k > 0) fact *= (n + k);
      sum += h[k] / fact;  // no early exit: odd terms vanish for symmetric nodes
    }
    return std::exp(c) * sum;
  }
  if constexpr (N == 1) {
    return std::exp(z[0]);
  } else {
    std::array<double, N - 1> lo{}, hi{};
    for (std::size_t i = 0; i + 1 < N; ++i) {
      lo[i] = z[i];
      hi[i] = z[i + 1];
    }
    return (exp_divdiff(hi) - exp_divdiff(lo)) / (z[N - 1] - z[0]);
  }
}

inline double checked_log(double x, const char* who) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError(std::string(who) + ": argument must be positive and finite");
  return std::log(x);
}

}  // namespace detail

/// D_gamma(x) = (x^gamma - 1) / gamma, ln x at gamma = 0.
inline double d_kernel(double x, double gamma) {
  const double L = detail::checked_log(x, "d_kernel");
  if (std::abs(gamma) < 1e-12) return L * (1.0 + 0.5 * gamma * L);
  const double z = gamma * L;
  return std::expm1(z) / gamma;
}

/// H_{gamma,rho}(x) = int_1^x y^{gamma-1} int_1^y u^{rho-1} du dy.
inline double h_kernel(double x, double gamma, double rho) {
  const double L = detail::checked_log(x, "h_kernel");
  if (L == 0.0) return 0.0;
  return L * L * detail::exp_divdiff<3>({0.0, gamma * L, (gamma + rho) * L});
}

/// R_{gamma,rho,eta}(x), the triple iterated integral.
inline double r_kernel(double x, const RvParams& p) {
  const double L = detail::checked_log(x, "r_kernel");
  if (L == 0.0) return 0.0;
  return L * L * L *
         detail::exp_divdiff<4>(
             {0.0, p.gamma * L, (p.gamma + p.rho) * L, (p.gamma + p.rho + p.eta) * L});
}

// Same kernels with the argument given as L = ln x (no round trip through exp).
inline double d_kernel_log(double L, double gamma) {
  if (std::abs(gamma) < 1e-12) return L * (1.0 + 0.5 * gamma * L);
  return std::expm1(gamma * L) / gamma;
}
inline double h_kernel_log(double L, double gamma, double rho) {
  if (L == 0.0) return 0.0;
  return L * L * detail::exp_divdiff<3>({0.0, gamma * L, (gamma + rho) * L});
}
inline double r_kernel_log(double L, const RvParams& p) {
  if (L == 0.0) return 0.0;
  return L * L * L *
         detail::exp_divdiff<4>(
             {0.0, p.gamma * L, (p.gamma + p.rho) * L, (p.gamma + p.rho + p.eta) * L});
}

/// Limit functions of the regular-variation form f(tx)/f(t) written as an
/// extended increment with a(t) = gamma f(t): x^gamma D_rho(x) / gamma and
/// x^gamma D_{rho+eta}(x) / gamma.
inline double h_regular(double x, double gamma, double rho) {
  return std::pow(x, gamma) * d_kernel(x, rho) / gamma;
}
inline double r_regular(double x, const RvParams& p) {
  return std::pow(x, p.gamma) * d_kernel(x, p.rho + p.eta) / p.gamma;
}

// ---------------------------------------------------------------------------
// Hall-type functions f(x) = a x^alpha (1 + c x^rho + d x^{2 rho}).

struct HallFunction {
  double a = 1.0;
  double alpha = 1.0;
  double c = 0.0;
  double d = 0.0;
  double rho = -1.0;

  double operator()(double x) const {
    const double s = std::pow(x, rho);
    return a * std::pow(x, alpha) * (1.0 + c * s + d * s * s);
  }
};

inline void check_hall(const HallFunction& f) {
  if (f.alpha == 0.0) throw DomainError("hall: alpha = 0 is unsupported");
  if (!(f.rho < 0.0)) throw DomainError("hall: corr_exp rho must be < 0");
  if (f.a == 0.0) throw DomainError("hall: scale a must be non-zero");
}

struct HallInverseCoeffs {
  double lead = 1.0;  // a^{-1/alpha}
  double c1 = 0.0;    // multiplies (t/a)^{rho/alpha}
  double c2 = 0.0;    // multiplies (t/a)^{2 rho/alpha}
};

inline HallInverseCoeffs hall_invert_coeffs(const HallFunction& f) {
  check_hall(f);
  const double al = f.alpha;
  HallInverseCoeffs k;
  k.lead = std::pow(f.a, -1.0 / al);
  k.c1 = -f.c / al;
  k.c2 = f.c * f.c / (2 * al * al) * (1 + al + 2 * f.rho) - f.d / al;
  return k;
}

/// Three-term inverse of f. For alpha > 0 the regime is t -> inf, for
/// alpha < 0 it is t -> 0+.
inline double hall_invert(const HallFunction& f, double t) {
  const auto k = hall_invert_coeffs(f);
  const double u = t / f.a;
  if (!(u > 0.0)) throw DomainError("hall_invert: t/a must be positive");
  const double s = std::pow(u, f.rho / f.alpha);
  return std::pow(u, 1.0 / f.alpha) * (1.0 + k.c1 * s + k.c2 * s * s);
}

struct HallAuxiliaries {
  std::function<double(double)> A;
  std::function<double(double)> B;  // empty when unavailable
  bool exact_power = false;         // c = 0: A identically 0
};

inline HallAuxiliaries hall_auxiliaries(const HallFunction& f) {
  check_hall(f);
  HallAuxiliaries out;
  if (f.c == 0.0) {
    out.A = [](double) { return 0.0; };
    out.exact_power = true;
    return out;
  }
  const double rho = f.rho, c = f.c, d = f.d;
  out.A = [=](double t) {
    const double s = std::pow(t, rho);
    return rho * c * s / (1.0 + c * s);
  };
  out.B = [=](double t) { return 2.0 * d / c * std::pow(t, rho); };
  return out;
}

// ---------------------------------------------------------------------------
// Empirical check of the third-order Drees-type envelope.

enum class LimitForm { extended, regular };

struct DreesTriple {
  std::function<double(double)> f;
  std::function<double(double)> a;
  std::function<double(double)> A;
  std::function<double(double)> B;
  // Optional accurate (f(tx) - f(t)) / a(t); used instead of differencing f.
  std::function<double(double, double)> scaled_increment;
  LimitForm form = LimitForm::extended;
  bool exact_power = false;
};

struct DreesGrid {
  double t_max = 1e10;
  double x_min = 0.05;
  double x_max = 20.0;
  int n_t = 20;
  int n_x = 20;
  double t0_first = 1e2;
  double t0_cap = 1e10;
  double C = 1.0;
};

struct DreesPoint {
  double t = 0.0;
  double x = 0.0;
  double lhs = 0.0;
  double envelope = 0.0;
};

struct DreesReport {
  double epsilon = 0.0;
  double t0 = 0.0;
  std::vector<DreesPoint> grid;
  std::vector<DreesPoint> violations;
  double max_slack = 0.0;  // max(lhs - envelope); negative when clean
  std::size_t skipped = 0;
  bool clean() const { return violations.empty() && !grid.empty(); }
};

inline double drees_envelope(double x, const RvParams& p, double eps, double C) {
  const double lx = std::abs(std::log(x));
  double env = 1.0 + std::pow(x, p.gamma) + 2.0 * std::pow(x, p.gamma + p.rho) +
               4.0 * std::pow(x, p.gamma + p.rho + p.eta) * std::exp(eps * lx);
  if (p.gamma == 0.0 && p.rho == 0.0) env += std::exp(C * lx);
  return eps * env;
}

inline double drees_lhs(const DreesTriple& f, const RvParams& p, double t, double x) {
  const double at = f.a(t), At = f.A(t), Bt = f.B(t);
  const double inc = f.scaled_increment ? f.scaled_increment(t, x) : (f.f(t * x) - f.f(t)) / at;
  double h, r;
  if (f.form == LimitForm::extended) {
    h = h_kernel(x, p.gamma, p.rho);
    r = r_kernel(x, p);
  } else {
    h = h_regular(x, p.gamma, p.rho);
    r = r_regular(x, p);
  }
  return std::abs((inc - d_kernel(x, p.gamma) - At * h) / (At * Bt) - r);
}

/// Calibrate t0 over {t0_first, 10 t0_first, ...} until the (t, x) grid is clean.
inline DreesReport drees_check(const DreesTriple& f, const RvParams& p, double eps,
                               const DreesGrid& g = {}) {
  check_params(p);
  if (!(eps > 0.0)) throw DomainError("drees_check: epsilon must be positive");
  if (f.exact_power || !f.A || !f.B)
    throw DomainError("drees_check: degenerate auxiliary (A or B identically zero)");
  DreesReport rep;
  rep.epsilon = eps;
  for (double t0 = g.t0_first; t0 <= g.t0_cap * (1 + 1e-12); t0 *= 10.0) {
    rep = DreesReport{};
    rep.epsilon = eps;
    rep.t0 = t0;
    rep.max_slack = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.n_t; ++i) {
      const double t =
          g.n_t == 1 ? t0 : t0 * std::pow(g.t_max / t0, static_cast<double>(i) / (g.n_t - 1));
      for (int j = 0; j < g.n_x; ++j) {
        const double x = g.x_min * std::pow(g.x_max / g.x_min,
                                            static_cast<double>(j) / std::max(1, g.n_x - 1));
        if (std::min(t, t * x) < t0) continue;
        const double ab = f.A(t) * f.B(t);
        if (ab == 0.0 || !std::isfinite(ab)) {
          ++rep.skipped;
          continue;
        }
        DreesPoint pt{t, x, drees_lhs(f, p, t, x), drees_envelope(x, p, eps, g.C)};
        rep.max_slack = std::max(rep.max_slack, pt.lhs - pt.envelope);
        if (!(pt.lhs <= pt.envelope)) rep.violations.push_back(pt);
        rep.grid.push_back(pt);
      }
    }
    if (rep.clean()) break;
  }
  return rep;
}

}  // namespace tailex::rv
