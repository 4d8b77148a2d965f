#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "tailex/numerics.hpp"
#include "tailex/scalers.hpp"
#include "tailex/tail_models.hpp"
#include "tailex/weyl_engine.hpp"

namespace tailex {

struct OracleSpec {
  double rel_tol = 1e-13;
};

namespace detail {

// int_0^{x_F - start} h(w) F-bar(start + w) dw.
template <class H>
double tail_integral(const TailModel& m, double start, const H& h, double rel_tol) {
  numerics::QuadratureSpec q;
  q.rel_tol = rel_tol;
  q.abs_tol = 1e-300;
  q.transform = numerics::Transform::exp_sub;
  if (m.finite_endpoint()) {
    const double gap = m.endpoint - start;
    if (!(gap > 0)) return 0.0;
    // Both halves see the distance to x_F directly; start + w would cancel near x_F.
    auto sf_at = [&](double v) { return m.sf_gap ? m.sf_gap(v) : m.sf(m.endpoint - v); };
    auto left = numerics::integral([&](double w) { return h(w) * sf_at(gap - w); }, 0.0, gap / 2, q);
    auto right = numerics::integral(
        [&](double v) {
          const double sf = sf_at(v);
          return sf == 0.0 ? 0.0 : h(gap - v) * sf;
        },
        0.0, gap / 2, q);
    return left + right;
  }
  const double sigma = std::max(1.0, std::abs(start));
  auto near = numerics::integral([&](double tau) { return h(sigma * tau) * m.sf(start + sigma * tau); },
                                 0.0, 1.0, q);
  numerics::QuadratureSpec qi = q;
  qi.transform = numerics::Transform::semi_infinite;
  auto far = numerics::integral(
      [&](double v) {
        const double tau = std::exp(v);
        const double sf = m.sf(start + sigma * tau);
        return sf == 0.0 ? 0.0 : h(sigma * tau) * sf * tau;
      },
      0.0, 0.0, qi);
  return sigma * (near + far);
}

inline void check_moment(const TailModel& m, double kappa) {
  const double g = m.gamma();
  if (m.profile.branch == Branch::frechet && kappa * g >= 1)
    throw DomainError(m.name + ": moment of order kappa diverges (kappa*gamma >= 1)");
}

}  // namespace detail

/// E(X - x)_+^kappa by quadrature of kappa (y - x)^{kappa-1} F-bar(y).
inline double exact_partial_moment(const TailModel& m, double x, double kappa,
                                   const OracleSpec& o = {}) {
  if (kappa < 0) throw DomainError("exact_partial_moment: kappa must be >= 0");
  if (kappa == 0) return m.sf(x);
  detail::check_moment(m, kappa);
  if (x >= m.endpoint) return 0.0;
  if (x >= m.lower) {
    return detail::tail_integral(
        m, x, [kappa](double w) { return kappa * std::pow(w, kappa - 1); }, o.rel_tol);
  }
  const double d = m.lower - x;
  return std::pow(d, kappa) +
         detail::tail_integral(
             m, m.lower, [kappa, d](double w) { return kappa * std::pow(w + d, kappa - 1); },
             o.rel_tol);
}

/// E[X^kappa 1{X > z}] for z > 0.
inline double exact_upper_moment(const TailModel& m, double z, double kappa,
                                 const OracleSpec& o = {}) {
  if (z >= m.endpoint) return 0.0;
  if (kappa == 0) return m.sf(z);
  return std::pow(z, kappa) * m.sf(z) +
         detail::tail_integral(
             m, z, [kappa, z](double w) { return kappa * std::pow(z + w, kappa - 1); }, o.rel_tol);
}

/// E[X^kappa 1{SX > x}] by nested quadrature, x > 0.
inline double exact_weyl_integral(const TailModel& m, const Scaler& s, double x, double kappa,
                                  const OracleSpec& o = {}) {
  if (!(x > 0)) throw DomainError("exact_weyl_integral: x must be positive");
  if (kappa < 0) throw DomainError("exact_weyl_integral: kappa must be >= 0");
  detail::check_moment(m, kappa);
  const OracleSpec inner{std::max(o.rel_tol, 1e-13)};
  auto T = [&](double z) { return exact_upper_moment(m, z, kappa, inner); };
  if (s.degenerate) return T(x);
  numerics::QuadratureSpec q;
  q.rel_tol = std::max(o.rel_tol * 10, 1e-12);
  q.abs_tol = 1e-300;
  if (!m.finite_endpoint()) {
    return numerics::integrate_unit(
               [&](double sv, double w) {
                 const double g = s.density(sv, w);
                 return g == 0.0 ? 0.0 : T(x / sv) * g;
               },
               q)
        .value;
  }
  // Only s > x / x_F contributes.
  const double s0 = x / m.endpoint;
  if (s0 >= 1) return 0.0;
  const double mid = 0.5 * (1 + s0);
  auto lo = numerics::integral(
      [&](double sv) {
        const double g = s.density(sv, 1 - sv);
        return g == 0.0 ? 0.0 : T(x / sv) * g;
      },
      s0, mid, q);
  q.transform = numerics::Transform::exp_sub;
  auto hi = numerics::integral(
      [&](double w) {
        const double g = s.density(1 - w, w);
        return g == 0.0 ? 0.0 : T(x / (1 - w)) * g;
      },
      0.0, 1 - mid, q);
  return lo + hi;
}

// ---------------------------------------------------------------------------
// Expectiles.

/// Solves e = E X + ((2q - 1)/(1 - q)) E(X - e)_+.
inline double exact_expectile(const TailModel& m, double q, const OracleSpec& o = {}) {
  if (!(q > 0 && q < 1)) throw DomainError("exact_expectile: q must lie in (0,1)");
  const double mu = m.require_mean();
  const double p = 1 - q;
  const double k = (1 - 2 * p) / p;
  auto r = [&](double e) { return e - mu - k * exact_partial_moment(m, e, 1.0, o); };
  if (q == 0.5) return mu;
  double lo, hi;
  if (q > 0.5) {
    lo = mu;
    if (m.finite_endpoint()) {
      hi = m.endpoint;
    } else {
      double d = std::max({1.0, std::abs(mu), m.tail_quantile(1 / p) - mu});
      hi = mu + d;
      for (int i = 0; r(hi) <= 0; ++i) {
        if (i > 200) throw numerics::RootError("exact_expectile: upper bracket not found");
        lo = hi;
        d *= 2;
        hi = mu + d;
      }
    }
  } else {
    hi = mu;
    if (std::isfinite(m.lower)) {
      lo = m.lower;
    } else {
      double d = std::max({1.0, std::abs(mu), mu - m.quantile(q)});
      lo = mu - d;
      for (int i = 0; r(lo) >= 0; ++i) {
        if (i > 200) throw numerics::RootError("exact_expectile: lower bracket not found");
        hi = lo;
        d *= 2;
        lo = mu - d;
      }
    }
  }
  return numerics::find_root(r, {lo, hi, 1e-15, 400});
}

struct ExpectileFrechetCoeffs {
  double gamma = 0, rho = 0, eta = 0, mean = 0;
  double lead = 0;  // (gamma/(1-gamma))^gamma
  double D = 0;
  double d[10] = {};
  double d_classic[10] = {};
};

/// Coefficients of the expectile expansion for U in 3RV_{gamma,rho,eta}, 0 < gamma < 1.
/// d4..d9 are those of the expansion with A(tx)/A(t) = x^rho (1 - A(t) D_rho(x) + ...),
/// which is the behaviour of A for every Hall-type profile.
inline ExpectileFrechetCoeffs expectile_frechet_coeffs(const RvProfile& p, double mean) {
  const double g = p.params.gamma, r = p.params.rho, e = p.params.eta;
  if (!(g > 0 && g < 1)) throw DomainError("expectile expansion requires 0 < gamma < 1");
  if (r == 0) throw DomainError("expectile expansion requires rho < 0");
  ExpectileFrechetCoeffs c;
  c.gamma = g;
  c.rho = r;
  c.eta = e;
  c.mean = mean;
  const double gi = 1 / g - 1;
  c.lead = std::pow(gi, -g);
  const double z = std::pow(gi, -r);
  const double D = z / (1 - g - r);
  c.D = D;
  const double zre = std::pow(gi, -r - e);
  const double dre = std::abs(r + e) < 1e-12 ? -std::log(gi) : (zre - 1) / (r + e);
  auto& d = c.d;
  d[0] = g * std::pow(gi, g) * mean;
  d[1] = -2 * g;
  d[2] = D + (z - 1) / r;
  d[3] = 2 * (g * g - g);
  d[4] = D * D * ((g - 1) / (2 * g) + r / g) + D * z / g;
  d[5] = -2 * (g + r) * D - 2 * z - 2 * g * (z - 1) / r;
  d[6] = zre / (1 - g - r - e) + dre;
  d[7] = std::pow(gi, 2 * g + 1) * (g * mean) * (g * mean) / 2;
  d[8] = 0.0;
  d[9] = (1 - g) * std::pow(gi, g - r) * mean / (1 - g - r);
  auto& pd = c.d_classic;
  for (int i = 0; i < 4; ++i) pd[i] = d[i];
  pd[4] = D * D * ((g - 1) / (2 * g) + r / g) + D * ((1 / r + 1 / g) * std::pow(g / (1 - g), r) - 1 / r);
  pd[5] = -2 * (1 + r) * D - 2 * (z - 1) / (r / g) - 2 * z;
  const double ze = std::pow(gi, -e);
  pd[6] = e == 0 ? std::numeric_limits<double>::quiet_NaN()
                 : D * ((1 - g - r) * ze / (1 - g - r - e) + (ze - 1) / e) + dre;
  pd[7] = d[7];
  pd[8] = -2 * g * g * std::pow(gi, g + 1) * mean;
  pd[9] = 2 * g * std::pow(gi, g + 1 - r) / (1 - g - r) * mean;
  return c;
}

inline Expansion expectile_expansion(const TailModel& m, double q, int order) {
  check_order(order);
  const auto& p = m.profile;
  if (p.branch != Branch::frechet) throw DomainError("expectile_approx: Frechet branch required");
  if (order == 3 && !p.exact_power && !p.B) throw DomainError("third-order profile unavailable");
  const auto c = expectile_frechet_coeffs(p, m.require_mean());
  const double pr = 1 - q;
  const double t = 1 / pr;
  const double F = m.tail_quantile(t);
  const double eps = p.exact_power ? 0.0 : p.A(t);
  const double psi = p.exact_power || !p.B ? 0.0 : p.B(t);
  const auto& d = c.d;
  Expansion e;
  e.order = order;
  e.leading = c.lead * F;
  e.add("d0/F", 2, d[0], 1 / F);
  e.add("d1 (1-q)", 2, d[1], pr);
  e.add("d2 eps_q", 2, d[2], eps);
  e.add("d3 (1-q)^2", 3, d[3], pr * pr, 1.0, true);
  e.add("d4 eps_q^2", 3, d[4], eps * eps, 1.0, true);
  e.add("d5 eps_q (1-q)", 3, d[5], eps * pr, 1.0, true);
  e.add("d6 eps_q psi_q", 3, d[6], eps * psi, 1.0, true);
  e.add("d7/F^2", 3, d[7], 1 / (F * F), 1.0, true);
  e.add("d8 (1-q)/F", 3, d[8], pr / F, 1.0, true);
  e.add("d9 eps_q/F", 3, d[9], eps / F, 1.0, true);
  e.finish();
  return e;
}

inline double expectile_approx(const TailModel& m, double q, int order) {
  return expectile_expansion(m, q, order).value;
}

struct ExpectileWeibullCoeffs {
  double C = 0, alpha = 0, x0 = 0, rho = 0;
};

inline ExpectileWeibullCoeffs expectile_weibull_coeffs(const TailModel& m) {
  const auto& p = m.profile;
  if (p.branch != Branch::weibull || !(p.params.gamma < 0))
    throw DomainError("expectile_weibull_approx: requires gamma < 0");
  const double mu = m.require_mean();
  if (!(m.endpoint > mu)) throw DomainError("expectile_weibull_approx: requires x_F > E X");
  const double alpha = -1 / p.params.gamma;
  return {m.weibull_C, alpha, (alpha + 1) * (m.endpoint - mu), p.params.rho};
}

enum class WeibullExpectileForm { classic, corrected };

/// x_F - e_q ~ W (1 - k1 W + k2 A(t_q)), W = (C^alpha x0 (1-q))^{1/(alpha+1)}.
/// The classic form has k1 = 1/(alpha (x_F - E X)) and k2 = (alpha+1) c_A; the
/// corrected form, matching the first-order condition, has k1 = 1/((alpha+1)(x_F - E X))
/// and k2 = alpha c_A, with c_A = (C/x0)^{alpha rho/(alpha+1)}/(rho(alpha+1-alpha rho)).
inline double expectile_weibull_approx(const TailModel& m, double q, int order,
                                       WeibullExpectileForm form = WeibullExpectileForm::classic) {
  if (order < 1 || order > 2) throw DomainError("expectile_weibull_approx: order must be 1 or 2");
  const auto c = expectile_weibull_coeffs(m);
  const double pr = 1 - q;
  const double a = c.alpha;
  const double W = std::pow(std::pow(c.C, a) * c.x0 * pr, 1 / (a + 1));
  if (order == 1) return m.endpoint - W;
  const double xm = m.endpoint - m.require_mean();
  const bool cls = form == WeibullExpectileForm::classic;
  const double k1 = cls ? 1 / (a * xm) : 1 / ((a + 1) * xm);
  double corr = -k1 * W;
  if (!m.profile.exact_power) {
    const double cA =
        std::pow(c.C / c.x0, a * c.rho / (a + 1)) / (c.rho * (a + 1 - a * c.rho));
    const double tq = std::pow(pr, -a / (a + 1));
    corr += (cls ? (a + 1) : a) * cA * m.profile.A(tq);
  }
  return m.endpoint - W * (1 + corr);
}

// ---------------------------------------------------------------------------
// Haezendonck-Goovaerts measure with power Young function.

struct HgResult {
  double H = 0;
  double x_star = 0;
};

inline HgResult exact_hg(const TailModel& m, double q, double kappa, const OracleSpec& o = {}) {
  if (!(q > 0 && q < 1)) throw DomainError("exact_hg: q must lie in (0,1)");
  if (kappa < 1) throw DomainError("exact_hg: kappa must be >= 1");
  detail::check_moment(m, kappa);
  const double p = 1 - q;
  const double var = m.tail_quantile(1 / p);
  if (kappa == 1) return {var + exact_partial_moment(m, var, 1, o) / p, var};
  auto f = [&](double x) {
    const double P1 = exact_partial_moment(m, x, kappa - 1, o);
    const double P2 = exact_partial_moment(m, x, kappa, o);
    if (P1 <= 0 || P2 <= 0) return -std::numeric_limits<double>::infinity();
    return kappa * std::log(P1) - (kappa - 1) * std::log(P2) - std::log(p);
  };
  double scale = m.finite_endpoint() ? m.endpoint - var : std::max(1.0, std::abs(var));
  double lo = var, hi = var;
  for (int i = 0; f(lo) <= 0; ++i) {
    if (i > 200) throw numerics::RootError("exact_hg: lower bracket not found");
    hi = lo;
    lo -= scale * std::ldexp(0.5, i);
  }
  if (hi == lo) {
    for (int i = 0; f(hi) >= 0; ++i) {
      if (i > 200) throw numerics::RootError("exact_hg: upper bracket not found");
      lo = hi;
      hi = m.finite_endpoint() ? m.endpoint - scale * std::ldexp(1.0, -(i + 1))
                               : hi + scale * std::ldexp(1.0, i);
    }
  }
  const double x = numerics::find_root(f, {lo, hi, 1e-15, 400});
  return {x + std::pow(exact_partial_moment(m, x, kappa, o) / p, 1 / kappa), x};
}

struct HgCoeffs {
  double kappa = 0, gamma = 0, rho = 0, eta = 0;
  double c_bar = 0, c0 = 0, c1 = 0, c2 = 0, c3 = 0;
  double Delta_kappa = 0, Theta_kappa = 0, Lambda_kappa = 0, M_tilde_kappa_1 = 0;
  // Values of c2 and c3 under the classic form, kept for the ledger.
  double c2_classic = 0, c3_classic = 0;
};

namespace detail {

// (c^r xi_{k,r}/xi_{k,0} - 1)/r, continuous at r = 0.
inline double hg_ratio(double g, double k, double cbar, double r) {
  if (std::abs(r) < 1e-8) return std::log(cbar) + xi_slope(g, k, 0) / xi(g, k, 0);
  return (std::pow(cbar, r) * xi(g, k, r) / xi(g, k, 0) - 1) / r;
}

}  // namespace detail

/// Coefficients of H_q ~ c0 F(q)(1 + c1 eps + c2 eps^2 + c3 eps psi).
/// c2 and c3 are those of the expansion with A(tx)/A(t) = x^rho (1 - A(t) D_rho(x) + ...).
inline HgCoeffs hg_coeffs(const RvProfile& p, double kappa) {
  const double g = p.params.gamma, rho = p.params.rho, eta = p.params.eta;
  if (g == 0) throw DomainError("hg_coeffs: gamma must be non-zero");
  if (kappa < 1) throw DomainError("hg_coeffs: kappa must be >= 1");
  if (g > 0 && !(kappa * g < 1)) throw DomainError("hg_coeffs: kappa*gamma must be < 1");
  HgCoeffs c;
  c.kappa = kappa;
  c.gamma = g;
  c.rho = rho;
  c.eta = eta;
  const double ag = std::abs(g);
  c.c_bar = kappa * std::pow((1 - kappa * g) / (kappa * ag), kappa) * xi(g, kappa, 0);
  c.c0 = std::pow(c.c_bar, g) / (1 - kappa * g);
  c.c1 = detail::hg_ratio(g, kappa, c.c_bar, rho);
  c.c3 = detail::hg_ratio(g, kappa, c.c_bar, rho + eta);
  const bool k1 = kappa == 1;
  auto R = [&](double r) { return xi(g, kappa, r) / xi(g, kappa, 0); };
  auto R1 = [&](double r) { return k1 ? 1.0 : xi(g, kappa - 1, r) / xi(g, kappa - 1, 0); };
  auto c2_at = [&](double r, double& mt, double& delta) {
    mt = (R(r) - R1(r)) / (g * r);
    delta = (kappa * R1(r) - (kappa - 1) * R(r) - 1) / (g * r);
    const double second =
        ((1 - g - 2 * r) * R(2 * r) - 2 * (1 - g - r) * R(r) + 1 - g) / (2 * g * g * r * r);
    return g * std::pow(c.c_bar, 2 * r) *
           (second + delta * (kappa * (g + r) * mt + (r + (g - 1) / 2) * delta + 1 / g) +
            kappa * mt * ((kappa - 1) / 2 * mt - (R1(r) - 1) / (g * r)));
  };
  double mt = 0, delta = 0;
  if (std::abs(rho) >= 1e-5) {
    c.c2 = c2_at(rho, mt, delta);
  } else {
    // Linear extrapolation from two nearby points; the closed form is 0/0 at rho = 0.
    double m1, d1, m2, d2;
    const double r1 = -1e-5, r2 = -2e-5;
    const double v1 = c2_at(r1, m1, d1), v2 = c2_at(r2, m2, d2);
    const double w = (rho - r1) / (r1 - r2);
    c.c2 = v1 + w * (v1 - v2);
    mt = m1 + w * (m1 - m2);
    delta = d1 + w * (d1 - d2);
  }
  c.M_tilde_kappa_1 = mt;
  c.Delta_kappa = delta;
  const double re = rho + eta;
  c.Theta_kappa = std::abs(re) < 1e-8 ? 0.0
                                      : (kappa * R1(re) - (kappa - 1) * R(re) - 1) / (g * re);
  if (!k1) {
    RvProfile q = p;
    const auto kb1 = kappa_beta_coeffs(q, kappa - 1);
    c.Lambda_kappa = kappa * kb1.M_kappa_2 / kb1.L_kappa;
  }
  const double Rr = R(rho) - 1;
  c.c2_classic = c.c2 + std::pow(c.c_bar, rho) * (std::pow(c.c_bar, rho) - 1) / (rho * rho) * Rr;
  c.c3_classic = eta == 0 ? std::numeric_limits<double>::quiet_NaN()
                            : c.c3 + std::pow(c.c_bar, rho) * (std::pow(c.c_bar, eta) - 1) /
                                         (rho * eta) * Rr;
  return c;
}

inline Expansion hg_expansion(const TailModel& m, double q, double kappa, int order) {
  check_order(order);
  const auto& p = m.profile;
  if (p.branch == Branch::gumbel) throw DomainError("hg_approx: Gumbel branch is unsupported");
  if (order == 3 && !p.exact_power && !p.B) throw DomainError("third-order profile unavailable");
  const auto c = hg_coeffs(p, kappa);
  const double pr = 1 - q, t = 1 / pr;
  const double eps = p.exact_power ? 0.0 : p.A(t);
  const double psi = p.exact_power || !p.B ? 0.0 : p.B(t);
  Expansion e;
  e.order = order;
  e.leading = c.c0;  // multiplies F(q) or x_F - F(q); set by the caller
  e.add("c1 eps_q", 2, c.c1, eps);
  e.add("c2 eps_q^2", 3, c.c2, eps * eps, 1.0, true);
  e.add("c3 eps_q psi_q", 3, c.c3, eps * psi, 1.0, true);
  e.finish();
  if (p.branch == Branch::frechet) {
    const double F = m.tail_quantile(t);
    e.leading *= F;
    e.value *= F;
  } else {
    const double gap = m.tail_gap(t);
    e.leading *= gap;
    e.value = m.endpoint - e.value * gap;
  }
  return e;
}

/// Frechet: c0 F(q)(1 + ...); Weibull: x_F - c0 (x_F - F(q))(1 + ...).
inline double hg_approx(const TailModel& m, double q, double kappa, int order) {
  return hg_expansion(m, q, kappa, order).value;
}

/// eps_q and psi_q as power series in u = (1-q)^{-rho}: eps = e1 u + e2 u^2 + ..., psi = f1 u + ...
/// Returns the collapsed coefficients of 1 + C1 u + C2 u^2.
struct CollapsedSeries {
  double exponent = 0;  // -rho
  double C1 = 0, C2 = 0;
  double e1 = 0, e2 = 0, f1 = 0;
};

inline CollapsedSeries hg_collapsed_series(const TailModel& m, double kappa) {
  const auto& p = m.profile;
  const auto c = hg_coeffs(p, kappa);
  CollapsedSeries s;
  s.exponent = -p.params.rho;
  // Fit g(u) = eps/u = e1 + e2 u + e3 u^2 through three small u.
  auto epsu = [&](double u) { return p.A(std::pow(u, -1 / s.exponent)) / u; };
  auto psiu = [&](double u) { return p.B(std::pow(u, -1 / s.exponent)) / u; };
  const double u1 = 1e-3, u2 = 2e-3, u3 = 3e-3;
  const double g1 = epsu(u1), g2 = epsu(u2), g3 = epsu(u3);
  // Quadratic through (u_i, g_i); evaluate intercept and slope at 0.
  const double a2 = ((g3 - g2) / (u3 - u2) - (g2 - g1) / (u2 - u1)) / (u3 - u1);
  const double a1 = (g2 - g1) / (u2 - u1) - a2 * (u1 + u2);
  const double a0 = g1 - a1 * u1 - a2 * u1 * u1;
  s.e1 = a0;
  s.e2 = a1;
  const double h1 = psiu(u1), h2 = psiu(u2), h3 = psiu(u3);
  const double b2 = ((h3 - h2) / (u3 - u2) - (h2 - h1) / (u2 - u1)) / (u3 - u1);
  const double b1 = (h2 - h1) / (u2 - u1) - b2 * (u1 + u2);
  s.f1 = h1 - b1 * u1 - b2 * u1 * u1;
  s.C1 = c.c1 * s.e1;
  s.C2 = c.c1 * s.e2 + c.c2 * s.e1 * s.e1 + c.c3 * s.e1 * s.f1;
  return s;
}

// ---------------------------------------------------------------------------
// Deflated risk SX.

/// P(SX > x): heavy tails via the Frechet expansion, otherwise the unified one (kappa = 0).
inline Expansion deflated_tail_expansion(const TailModel& m, const Scaler& s, double x, int order) {
  if (m.profile.branch == Branch::frechet) return frechet_weyl_expand(m, s, 0.0, x, order);
  return gw_expand(m, s, 0.0, x, order);
}

inline double deflated_tail_approx(const TailModel& m, const Scaler& s, double x, int order) {
  return deflated_tail_expansion(m, s, x, order).value;
}

/// VaR_q(SX) for F-bar(x) = b x^{-alpha}(1 + c x^varrho + d x^{2 varrho}).
inline double deflated_var_approx(const rv::HallFunction& hall, const Scaler& s, double q,
                                  int order) {
  check_order(order);
  if (!(hall.alpha < 0)) throw DomainError("deflated_var_approx: survival exponent must be negative");
  const double alpha = -hall.alpha, r = hall.rho;
  const double Ea = s.moment(alpha);
  const double cq = std::pow(hall.a * Ea / (1 - q), 1 / alpha);
  const double k1 = hall.c * s.moment(alpha - r) / (alpha * Ea);
  const double k2 = 0.5 * k1 * k1 * (1 - alpha + 2 * r) + hall.d * s.moment(alpha - 2 * r) / (alpha * Ea);
  double v = 1.0;
  if (order >= 2) v += k1 * std::pow(cq, r);
  if (order >= 3) v += k2 * std::pow(cq, 2 * r);
  return cq * v;
}

/// Root of P(SX > x) = 1 - q with P(SX > x) from the nested quadrature oracle.
inline double exact_deflated_var(const TailModel& m, const Scaler& s, double q,
                                 const OracleSpec& o = {}) {
  const double p = 1 - q;
  auto f = [&](double lx) { return std::log(exact_weyl_integral(m, s, std::exp(lx), 0.0, o)) - std::log(p); };
  double guess = m.tail_quantile(1 / p);
  if (!(guess > 0)) throw DomainError("exact_deflated_var: quantile must be positive");
  double lo = std::log(guess), hi = lo;
  for (int i = 0; f(lo) <= 0; ++i) {
    if (i > 200) throw numerics::RootError("exact_deflated_var: bracket not found");
    hi = lo;
    lo -= 1.0;
  }
  if (lo == hi) {
    hi = lo + 0.0;
    for (int i = 0; f(hi) >= 0; ++i) {
      if (i > 200) throw numerics::RootError("exact_deflated_var: bracket not found");
      lo = hi;
      hi = m.finite_endpoint() ? std::log(m.endpoint) - (std::log(m.endpoint) - lo) / 2 : hi + 1.0;
    }
  }
  return std::exp(numerics::find_root(f, {lo, hi, 1e-14, 400}));
}

}  // namespace tailex
