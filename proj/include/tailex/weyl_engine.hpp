#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

#include "tailex/numerics.hpp"
#include "tailex/rv_kernel.hpp"
#include "tailex/scalers.hpp"
#include "tailex/tail_models.hpp"

namespace tailex {

// ---------------------------------------------------------------------------
// Expansion results.

struct ExpansionTerm {
  std::string label;
  int order = 2;
  double coefficient = 0.0;
  double aux = 0.0;           // product of auxiliary functions multiplying the coefficient
  double contribution = 0.0;  // relative to the leading value
  bool carries_o1 = false;    // term is multiplied by (1 + o(1)) in the expansion
};

struct Expansion {
  double leading = 0.0;
  std::vector<ExpansionTerm> terms;
  int order = 1;
  double value = 0.0;
  bool pre_asymptotic = false;

  void add(std::string label, int ord, double coef, double aux, double scale = 1.0,
           bool o1 = false) {
    if (ord > order) return;
    terms.push_back({std::move(label), ord, coef, aux, coef * aux / scale, o1});
  }
  void finish() {
    double s = 1.0;
    for (const auto& t : terms) s += t.contribution;
    value = leading * s;
  }
};

inline void check_order(int order) {
  if (order < 1 || order > 3) throw DomainError("order must be 1, 2 or 3");
}

inline double binom_c(double a, int l) {
  double c = 1.0;
  for (int i = 0; i < l; ++i) c *= (a - i) / (i + 1);
  return c;
}

// ---------------------------------------------------------------------------
// Heavy-tailed case.

struct FrechetWeylCoeffs {
  double kappa = 0.0, alpha = 0.0, varrho = 0.0, varsigma = 0.0;
  double d0 = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
  // Values of the A^2 / A B coefficients in the classic form, kept for the ledger.
  double d2_classic = std::numeric_limits<double>::quiet_NaN();
  double d3_classic = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

// (m(l-h) - m(l))/h + kappa (m(l-h)/(l-h) - m(l)/l)/h, continuous at h = 0.
inline double weyl_slope(const Scaler& s, double kappa, double l, double h) {
  if (std::abs(h) < 1e-8) {
    const double lm = s.log_moment(l), m = s.moment(l);
    return -lm * (1 + kappa / l) + kappa * m / (l * l);
  }
  const double m0 = s.moment(l), m1 = s.moment(l - h);
  return (m1 - m0) / h + kappa * (m1 / (l - h) - m0 / l) / h;
}

}  // namespace detail

inline FrechetWeylCoeffs frechet_weyl_coeffs(double kappa, double alpha, double varrho,
                                             double varsigma, const Scaler& s) {
  if (!(kappa < alpha)) throw DomainError("frechet_weyl_coeffs: requires kappa < alpha");
  if (varrho > 0 || varsigma > 0)
    throw DomainError("frechet_weyl_coeffs: varrho and varsigma must be <= 0");
  if (!(alpha - kappa - varrho > 0))
    throw DomainError("frechet_weyl_coeffs: requires alpha - kappa - varrho > 0");
  if (!(alpha - kappa - varrho - varsigma > 0))
    throw DomainError("frechet_weyl_coeffs: requires alpha - kappa - varrho - varsigma > 0");
  FrechetWeylCoeffs c{kappa, alpha, varrho, varsigma};
  const double l = alpha - kappa;
  const double w = l / alpha;
  c.d0 = s.moment(l);
  c.d1 = w * detail::weyl_slope(s, kappa, l, varrho);
  c.d2 = 0.0;
  c.d3 = w * detail::weyl_slope(s, kappa, l, varrho + varsigma);
  if (varrho != 0 && varsigma != 0) {
    const double E0 = c.d0, E1 = s.moment(l - varrho), E2 = s.moment(l - 2 * varrho),
                 Eb = s.moment(l - varrho - varsigma);
    c.d2_classic = kappa * (E2 - E1) / (alpha * varrho * (l - varrho));
    c.d3_classic = kappa / alpha *
                         ((Eb - E1) / ((l - varrho) * varsigma) + Eb / (l - varrho - varsigma)) +
                     (Eb - E0) / (varrho + varsigma);
  }
  return c;
}

/// E[X^kappa 1{SX > x}] for F-bar in 3RV_{-alpha, varrho, varsigma}.
inline Expansion frechet_weyl_expand(const TailModel& m, const Scaler& s, double kappa, double x,
                                     int order) {
  check_order(order);
  if (!m.survival) throw DomainError(m.name + ": survival-scale profile unavailable");
  const auto& sp = *m.survival;
  if (order == 3 && !sp.exact_power && !sp.B)
    throw DomainError("third-order profile unavailable");
  const auto c = frechet_weyl_coeffs(kappa, sp.alpha, sp.varrho, sp.varsigma, s);
  Expansion e;
  e.order = order;
  e.leading = std::pow(x, kappa) * m.sf(x) * sp.alpha / (sp.alpha - kappa) * c.d0;
  const double A = sp.A(x);
  const double B = sp.exact_power ? 0.0 : sp.B ? sp.B(x) : 0.0;
  e.add("d_{1,kappa} A(x)", 2, c.d1, A, c.d0);
  e.add("d_{2,kappa} A(x)^2", 3, c.d2, A * A, c.d0, true);
  e.add("d_{3,kappa} A(x)B(x)", 3, c.d3, A * B, c.d0, true);
  e.finish();
  return e;
}

// ---------------------------------------------------------------------------
// Light-tailed and short-tailed cases: constants L, M, N, Q.

namespace detail {

// Quadrature over s in (0,1) written in u = -ln s: int_0^inf f(u) e^{-u} du.
template <class F>
double s_integral(const F& f) {
  numerics::QuadratureSpec q;
  q.rel_tol = 1e-12;
  q.abs_tol = 1e-300;
  q.transform = numerics::Transform::semi_infinite;
  auto g = [&](double u) {
    const double w = std::exp(-u);
    if (w == 0.0) return 0.0;
    const double v = f(u);
    return v == 0.0 ? 0.0 : v * w;
  };
  return numerics::integrate(g, 0.0, 0.0, q).value;
}

struct KernelSet {
  double gamma, rho, eta;
  rv::LimitForm form;
  double D(double u) const { return rv::d_kernel_log(u, gamma); }
  double H(double u) const {
    if (form == rv::LimitForm::extended) return rv::h_kernel_log(u, gamma, rho);
    return std::exp(gamma * u) * rv::d_kernel_log(u, rho) / gamma;
  }
  double R(double u) const {
    if (form == rv::LimitForm::extended) return rv::r_kernel_log(u, {gamma, rho, eta});
    return std::exp(gamma * u) * rv::d_kernel_log(u, rho + eta) / gamma;
  }
};

inline double pw(double base, double e) { return e == 0.0 ? 1.0 : std::pow(base, e); }

}  // namespace detail

struct GwKey {
  double gamma, rho, eta, alpha, varrho, varsigma;
  int form;
  auto tie() const { return std::tie(gamma, rho, eta, alpha, varrho, varsigma, form); }
  bool operator<(const GwKey& o) const { return tie() < o.tie(); }
};

struct GwConstants {
  double L_a = 0, L_a1 = 0, L_a2 = 0, L_arho1 = 0;  // L_alpha, L_{alpha+1}, L_{alpha+2}, L_{alpha-varrho+1}
  double M_a1 = 0, M_a2 = 0, M_a11 = 0;            // M_{alpha,1}, M_{alpha,2}, M_{alpha+1,1}
  double N_a0r = 0, N_a1r = 0, N_a0rs = 0, N_a10r = 0;  // N_{alpha,0,varrho}, N_{alpha,1,varrho},
                                                        // N_{alpha,0,varrho+varsigma}, N_{alpha+1,0,varrho}
  double Q_a = 0;                                       // Q_alpha
  double K_a = 0;  // int D^{alpha-varrho-1} H ds, cross term of A and A~

  std::vector<std::pair<std::string, double>> table() const {
    return {{"L_{alpha}", L_a},           {"L_{alpha+1}", L_a1},
            {"L_{alpha+2}", L_a2},        {"L_{alpha-varrho+1}", L_arho1},
            {"M_{alpha,1}", M_a1},        {"M_{alpha,2}", M_a2},
            {"M_{alpha+1,1}", M_a11},     {"N_{alpha,0,varrho}", N_a0r},
            {"N_{alpha,1,varrho}", N_a1r}, {"N_{alpha,0,varrho+varsigma}", N_a0rs},
            {"N_{alpha+1,0,varrho}", N_a10r}, {"Q_{alpha}", Q_a},
            {"K_{alpha}", K_a}};
  }
};

/// L_beta = int_0^1 D^beta ds.
inline double gw_L(double gamma, double beta) {
  return detail::s_integral([&](double u) { return detail::pw(rv::d_kernel_log(u, gamma), beta); });
}

/// M_{beta,l} = c_{beta,l} int D^{beta-l} H^l ds.
inline double gw_M(double gamma, double rho, double beta, int l,
                   rv::LimitForm form = rv::LimitForm::regular) {
  detail::KernelSet k{gamma, rho, 0.0, form};
  return binom_c(beta, l) * detail::s_integral([&](double u) {
           return detail::pw(k.D(u), beta - l) * detail::pw(k.H(u), l);
         });
}

/// N_{beta,l,r} = c_{beta,l} int D^{beta-l} H^l (D^{-r} - 1)/r ds.
inline double gw_N(double gamma, double rho, double beta, int l, double r,
                   rv::LimitForm form = rv::LimitForm::regular) {
  detail::KernelSet k{gamma, rho, 0.0, form};
  return binom_c(beta, l) * detail::s_integral([&](double u) {
           const double D = k.D(u);
           return detail::pw(D, beta - l) * detail::pw(k.H(u), l) * -rv::d_kernel(D, -r);
         });
}

/// Q_beta = beta int D^{beta-1} R ds.
inline double gw_Q(double gamma, double rho, double eta, double beta,
                   rv::LimitForm form = rv::LimitForm::regular) {
  detail::KernelSet k{gamma, rho, eta, form};
  return beta * detail::s_integral([&](double u) { return detail::pw(k.D(u), beta - 1) * k.R(u); });
}

inline GwConstants gw_constants_uncached(double gamma, double rho, double eta, double alpha,
                                         double varrho, double varsigma, rv::LimitForm form) {
  if (gamma > 0) throw DomainError("gw_constants: gamma must be <= 0");
  if (rho > 0 || eta > 0) throw DomainError("gw_constants: rho, eta must be <= 0");
  if (!(alpha > 0)) throw DomainError("gw_constants: alpha_g must be positive");
  if (!(varrho < 0) || !(varsigma < 0))
    throw DomainError("gw_constants: varrho_g and varsigma_g must be negative");
  if (gamma == 0 && form == rv::LimitForm::regular) form = rv::LimitForm::extended;
  GwConstants c;
  c.L_a = gw_L(gamma, alpha);
  c.L_a1 = gw_L(gamma, alpha + 1);
  c.L_a2 = gw_L(gamma, alpha + 2);
  c.L_arho1 = gw_L(gamma, alpha - varrho + 1);
  c.M_a1 = gw_M(gamma, rho, alpha, 1, form);
  c.M_a2 = gw_M(gamma, rho, alpha, 2, form);
  c.M_a11 = gw_M(gamma, rho, alpha + 1, 1, form);
  c.N_a0r = gw_N(gamma, rho, alpha, 0, varrho, form);
  c.N_a1r = gw_N(gamma, rho, alpha, 1, varrho, form);
  c.N_a0rs = gw_N(gamma, rho, alpha, 0, varrho + varsigma, form);
  c.N_a10r = gw_N(gamma, rho, alpha + 1, 0, varrho, form);
  c.Q_a = gw_Q(gamma, rho, eta, alpha, form);
  c.K_a = gw_M(gamma, rho, alpha - varrho, 1, form) / (alpha - varrho);
  for (auto& [name, v] : c.table())
    if (!std::isfinite(v)) throw DomainError("gw_constants: " + name + " diverges");
  return c;
}

namespace detail {
class GwMemo {
 public:
  GwConstants get(const GwKey& k) {
    {
      std::shared_lock lock(mu_);
      auto it = table_.find(k);
      if (it != table_.end()) return it->second;
    }
    auto v = gw_constants_uncached(k.gamma, k.rho, k.eta, k.alpha, k.varrho, k.varsigma,
                                   static_cast<rv::LimitForm>(k.form));
    std::unique_lock lock(mu_);
    return table_.emplace(k, v).first->second;
  }
  std::size_t size() const {
    std::shared_lock lock(mu_);
    return table_.size();
  }

 private:
  mutable std::shared_mutex mu_;
  std::map<GwKey, GwConstants> table_;
};
inline GwMemo& gw_memo() {
  static GwMemo memo;
  return memo;
}
}  // namespace detail

/// Memoised constants; safe to call concurrently.
inline GwConstants gw_constants(double gamma, double rho, double eta, double alpha,
                                double varrho, double varsigma,
                                rv::LimitForm form = rv::LimitForm::regular) {
  return detail::gw_memo().get({gamma, rho, eta, alpha, varrho, varsigma, static_cast<int>(form)});
}

/// E[X^kappa 1{SX > x}] for U in 3ERV_0 or x_F - U in 3RV_gamma (gamma < 0).
inline Expansion gw_expand(const TailModel& m, const Scaler& s, double kappa, double x, int order) {
  check_order(order);
  const auto& p = m.profile;
  if (p.branch == Branch::frechet) throw DomainError("gw_expand: model is in the Frechet branch");
  if (!s.tail_meta) throw DomainError("gw_expand: scaler lacks tail metadata");
  const auto& g = *s.tail_meta;
  if (order == 3 && ((!p.exact_power && !p.B) || (!g.exact_power && !g.B_tilde)))
    throw DomainError("third-order profile unavailable");
  const auto form =
      p.branch == Branch::weibull ? rv::LimitForm::regular : rv::LimitForm::extended;
  const auto c = gw_constants(p.params.gamma, p.params.rho, p.params.eta, g.alpha_g, g.varrho_g,
                              g.varsigma_g, form);
  const double Fb = m.sf(x);
  const double t = 1.0 / Fb;
  const double a = p.a(t);
  const double phi = x / a;
  const double A = p.exact_power ? 0.0 : p.A(t);
  const double B = p.exact_power ? 0.0 : p.B(t);
  const double At = g.exact_power ? 0.0 : g.A_tilde(phi);
  const double Bt = g.exact_power ? 0.0 : g.B_tilde(phi);
  const double ka = kappa - g.alpha_g;
  Expansion e;
  e.order = order;
  e.pre_asymptotic = phi < 10.0;
  e.leading = std::pow(x, kappa) * Fb * s.upper_tail(1.0 / phi) * c.L_a;
  const double L = c.L_a;
  e.add("M_{alpha,1} A(t)", 2, c.M_a1, A, L);
  e.add("N_{alpha,0,varrho} A~(phi_t)", 2, c.N_a0r, At, L);
  e.add("(kappa-alpha) L_{alpha+1}/phi_t", 2, ka * c.L_a1, 1.0 / phi, L);
  e.add("M_{alpha,2} A(t)^2", 3, c.M_a2, A * A, L, true);
  e.add("Q_{alpha} A(t)B(t)", 3, c.Q_a, A * B, L, true);
  e.add("(N_{alpha,1,varrho} - K_{alpha}) A(t)A~(phi_t)", 3, c.N_a1r - c.K_a, A * At, L, true);
  e.add("(kappa-alpha) M_{alpha+1,1} A(t)/phi_t", 3, ka * c.M_a11, A / phi, L, true);
  e.add("(kappa-alpha)(kappa-alpha-1)/2 L_{alpha+2}/phi_t^2", 3, ka * (ka - 1) / 2 * c.L_a2,
        1.0 / (phi * phi), L, true);
  e.add("N_{alpha,0,varrho+varsigma} A~(phi_t)B~(phi_t)", 3, c.N_a0rs, At * Bt, L, true);
  e.add("((kappa-alpha) N_{alpha+1,0,varrho} + L_{alpha-varrho+1}) A~(phi_t)/phi_t", 3,
        ka * c.N_a10r + c.L_arho1, At / phi, L, true);
  e.finish();
  return e;
}

// ---------------------------------------------------------------------------
// Partial moments E(X - U(t))_+^kappa.

/// xi_{kappa,rho} as a Beta function value.
inline double xi(double gamma, double kappa, double rho) {
  if (gamma > 0) return numerics::beta((1 - rho) / gamma - kappa, kappa);
  if (gamma < 0) return numerics::beta(1 - (1 - rho) / gamma, kappa);
  throw DomainError("xi: gamma must be non-zero");
}

/// d/drho of xi_{kappa,rho}.
inline double xi_slope(double gamma, double kappa, double rho) {
  const double x = gamma > 0 ? (1 - rho) / gamma - kappa : 1 - (1 - rho) / gamma;
  const double dx = -1.0 / gamma;
  return xi(gamma, kappa, rho) * dx *
         (boost::math::digamma(x) - boost::math::digamma(x + kappa));
}

struct KappaBetaCoeffs {
  double gamma = 0, rho = 0, eta = 0, kappa = 0;
  double xi0 = 0, xi_rho = 0, xi_2rho = 0, xi_rhoeta = 0;
  double L_kappa = 0, M_kappa_1 = 0, M_kappa_2 = 0, Q_kappa = 0;
  double omega_1 = 0, omega_2 = 0, omega_tilde = 0;
  bool M1_limit = false, M2_limit = false, Q_limit = false;
};

/// omega_{kappa,l} (tilde = false) or the tilde variant, by quadrature on (0, inf).
inline double omega_integral(double gamma, double kappa, int l, bool tilde) {
  const double ag = std::abs(gamma);
  const double c = (1 - (gamma > 0 ? kappa * gamma : gamma)) / ag;
  const int pw = tilde ? 2 : l;
  const double e = tilde ? kappa - 1 : kappa - l;
  return detail::s_integral([&](double x) {
           return std::pow(x, pw) * detail::pw(-std::expm1(-x), e) * std::exp((1 - c) * x);
         }) /
         ag;
}

inline KappaBetaCoeffs kappa_beta_coeffs(const RvProfile& p, double kappa) {
  const double g = p.params.gamma, rho = p.params.rho, eta = p.params.eta;
  if (g == 0) throw DomainError("kappa_beta_coeffs: gamma must be non-zero");
  if (!(kappa > 0)) throw DomainError("kappa_beta_coeffs: kappa must be positive");
  if (g > 0 && !(kappa * g < 1)) throw DomainError("partial moment diverges (kappa*gamma >= 1)");
  KappaBetaCoeffs k;
  k.gamma = g;
  k.rho = rho;
  k.eta = eta;
  k.kappa = kappa;
  const double ag = std::abs(g), sg = g > 0 ? 1.0 : -1.0;
  k.xi0 = xi(g, kappa, 0);
  k.xi_rho = xi(g, kappa, rho);
  k.xi_2rho = xi(g, kappa, 2 * rho);
  k.xi_rhoeta = xi(g, kappa, rho + eta);
  k.L_kappa = kappa * k.xi0 / std::pow(ag, kappa);
  const auto reg = rv::LimitForm::regular;
  if (std::abs(rho) >= 1e-8) {
    k.M_kappa_1 = kappa * sg / (std::pow(ag, kappa + 1) * rho) * (k.xi_rho - k.xi0);
  } else {
    k.M_kappa_1 = kappa * sg / std::pow(ag, kappa + 1) * xi_slope(g, kappa, 0);
    k.M1_limit = true;
  }
  // The second difference loses about |log10 rho^2| digits; below 1e-3 integrate directly.
  if (std::abs(rho) >= 1e-3) {
    k.M_kappa_2 = kappa / (2 * std::pow(ag, kappa + 2) * rho * rho) *
                  ((1 - 2 * rho - g) * k.xi_2rho - 2 * (1 - rho - g) * k.xi_rho + (1 - g) * k.xi0);
  } else {
    k.M_kappa_2 = gw_M(g, rho, kappa, 2, reg);
    k.M2_limit = true;
  }
  if (std::abs(rho + eta) >= 1e-8) {
    k.Q_kappa = kappa * sg / (std::pow(ag, kappa + 1) * (rho + eta)) * (k.xi_rhoeta - k.xi0);
  } else {
    k.Q_kappa = kappa * sg / std::pow(ag, kappa + 1) * xi_slope(g, kappa, 0);
    k.Q_limit = true;
  }
  k.omega_1 = omega_integral(g, kappa, 1, false);
  k.omega_2 = omega_integral(g, kappa, 2, false);
  k.omega_tilde = omega_integral(g, kappa, 1, true);
  return k;
}

/// E(X - U(t))_+^kappa ~ t^{-1} a(t)^kappa (L + M1 A + M2 A^2 + Q A B).
inline Expansion partial_moment_expand(const TailModel& m, double kappa, double t, int order) {
  check_order(order);
  const auto& p = m.profile;
  if (p.branch == Branch::gumbel) throw DomainError("partial_moment_expand: gamma must be non-zero");
  if (order == 3 && !p.exact_power && !p.B) throw DomainError("third-order profile unavailable");
  const auto k = kappa_beta_coeffs(p, kappa);
  const double A = p.exact_power ? 0.0 : p.A(t);
  const double B = p.exact_power || !p.B ? 0.0 : p.B(t);
  Expansion e;
  e.order = order;
  e.leading = std::pow(p.a(t), kappa) / t * k.L_kappa;
  e.add("M_{kappa,1} A(t)", 2, k.M_kappa_1, A, k.L_kappa);
  e.add("M_{kappa,2} A(t)^2", 3, k.M_kappa_2, A * A, k.L_kappa, true);
  e.add("Q_{kappa} A(t)B(t)", 3, k.Q_kappa, A * B, k.L_kappa, true);
  e.finish();
  return e;
}

}  // namespace tailex
