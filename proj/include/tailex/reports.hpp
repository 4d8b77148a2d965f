#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "tailex/risk_measures.hpp"
#include "tailex/spec_parse.hpp"

namespace tailex::reports {

enum class MeasureKind { expectile, hg, deflated_tail, deflated_var };
enum class Format { csv, tsv };

struct Measure {
  MeasureKind kind = MeasureKind::expectile;
  double kappa = 1.0;  // hg only
};

inline Measure parse_measure(std::string_view text) {
  if (text == "expectile") return {MeasureKind::expectile};
  if (text == "deflated-tail") return {MeasureKind::deflated_tail};
  if (text == "deflated-var") return {MeasureKind::deflated_var};
  const auto s = parse_spec(text);
  if (s.family == "hg") {
    s.allow_only({"kappa"});
    const double k = s.get("kappa");
    if (!(k >= 1)) throw ParseError("hg: kappa must be >= 1");
    return {MeasureKind::hg, k};
  }
  throw ParseError("unknown measure '" + std::string(text) + "'");
}

inline std::string to_string(const Measure& m) {
  switch (m.kind) {
    case MeasureKind::expectile: return "expectile";
    case MeasureKind::deflated_tail: return "deflated-tail";
    case MeasureKind::deflated_var: return "deflated-var";
    case MeasureKind::hg: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "hg:kappa=%.15g", m.kappa);
      return buf;
    }
  }
  return "?";
}

/// "a:b:geom[:n]" (1-q geometric from 1-a to 1-b) or a comma list.
inline std::vector<double> parse_q_grid(std::string_view text) {
  std::vector<double> q;
  if (text.find(':') != std::string_view::npos) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
      if (c == ':') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    parts.push_back(cur);
    if (parts.size() < 3 || parts.size() > 4 || parts[2] != "geom")
      throw ParseError("q grid: expected a:b:geom[:n]");
    const double a = parse_number(parts[0], "q"), b = parse_number(parts[1], "q");
    int n = 25;
    if (parts.size() == 4) {
      const double nn = parse_number(parts[3], "n");
      if (nn < 2 || nn != std::floor(nn) || nn > 1e5) throw ParseError("q grid: n must be an integer >= 2");
      n = static_cast<int>(nn);
    }
    if (!(a > 0 && a < 1 && b > 0 && b < 1 && a < b))
      throw ParseError("q grid: need 0 < a < b < 1");
    const double la = std::log(1 - a), lb = std::log(1 - b);
    for (int i = 0; i < n; ++i) q.push_back(1 - std::exp(la + (lb - la) * i / (n - 1)));
  } else {
    std::string cur;
    auto flush = [&] {
      if (cur.empty()) throw ParseError("q grid: empty entry");
      q.push_back(parse_number(cur, "q"));
      cur.clear();
    };
    for (char c : text) {
      if (c == ',') flush();
      else cur += c;
    }
    flush();
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] > 0 && q[i] < 1)) throw ParseError("q grid: values must lie in (0,1)");
    if (i > 0 && !(q[i] > q[i - 1])) throw ParseError("q grid: values must be strictly increasing");
  }
  return q;
}

inline std::set<int> parse_orders(std::string_view text) {
  std::set<int> out;
  std::string cur;
  auto flush = [&] {
    if (cur != "1" && cur != "2" && cur != "3") throw ParseError("orders: expected a subset of {1,2,3}");
    out.insert(cur[0] - '0');
    cur.clear();
  };
  for (char c : text) {
    if (c == ',') flush();
    else cur += c;
  }
  flush();
  return out;
}

struct RunConfig {
  std::string model;
  std::string scaler;  // deflated measures only
  Measure measure;
  std::vector<double> q_grid;
  std::set<int> orders;  // empty: every order the model/measure pair supports
  std::string out;
  Format format = Format::csv;
  WeibullExpectileForm weibull_form = WeibullExpectileForm::classic;
};

struct Cell {
  std::optional<double> value;
  bool pre_asymptotic = false;
};

struct Row {
  double q = 0;
  double exact = 0;
  Cell approx[3];
};

namespace detail {

inline Scaler require_scaler(const RunConfig& c) {
  if (c.scaler.empty()) throw DomainError("deflated measures need --scaler");
  return parse_scaler(c.scaler);
}

inline int max_order(const TailModel& m, const Measure& me) {
  const auto& p = m.profile;
  const bool third = p.exact_power || static_cast<bool>(p.B);
  switch (me.kind) {
    case MeasureKind::expectile:
      if (p.branch == Branch::weibull) return 2;
      if (p.branch == Branch::gumbel)
        throw DomainError("expectile expansions need a Frechet (0 < gamma < 1) or Weibull tail");
      return third ? 3 : 2;
    case MeasureKind::hg:
      if (p.branch == Branch::gumbel) throw DomainError("H-G expansion needs gamma != 0");
      return third ? 3 : 2;
    case MeasureKind::deflated_tail:
      return 3;
    case MeasureKind::deflated_var:
      if (!m.survival_hall) throw DomainError("deflated VaR needs a Hall-type survival function");
      return 3;
  }
  return 1;
}

}  // namespace detail

inline std::set<int> effective_orders(const TailModel& m, const RunConfig& c) {
  const int top = detail::max_order(m, c.measure);
  if (c.orders.empty()) {
    std::set<int> all;
    for (int k = 1; k <= top; ++k) all.insert(k);
    return all;
  }
  for (int k : c.orders)
    if (k > top)
      throw DomainError("order " + std::to_string(k) + " is not available for " + m.name + " / " +
                        to_string(c.measure));
  return c.orders;
}

inline Row compute_row(const TailModel& m, const std::optional<Scaler>& s, const RunConfig& c,
                       const std::set<int>& orders, double q) {
  Row r;
  r.q = q;
  const auto& me = c.measure;
  switch (me.kind) {
    case MeasureKind::expectile:
      r.exact = exact_expectile(m, q);
      for (int k : orders) {
        if (m.profile.branch == Branch::weibull) {
          r.approx[k - 1].value = expectile_weibull_approx(m, q, k, c.weibull_form);
        } else {
          const auto e = expectile_expansion(m, q, k);
          r.approx[k - 1] = {e.value, e.pre_asymptotic};
        }
      }
      break;
    case MeasureKind::hg:
      r.exact = exact_hg(m, q, me.kappa).H;
      for (int k : orders) {
        const auto e = hg_expansion(m, q, me.kappa, k);
        r.approx[k - 1] = {e.value, e.pre_asymptotic};
      }
      break;
    case MeasureKind::deflated_tail: {
      const double x = m.tail_quantile(1 / (1 - q));
      r.exact = exact_weyl_integral(m, *s, x, 0.0);
      for (int k : orders) {
        const auto e = deflated_tail_expansion(m, *s, x, k);
        r.approx[k - 1] = {e.value, e.pre_asymptotic};
      }
      break;
    }
    case MeasureKind::deflated_var:
      r.exact = exact_deflated_var(m, *s, q);
      for (int k : orders) r.approx[k - 1].value = deflated_var_approx(*m.survival_hall, *s, q, k);
      break;
  }
  return r;
}

/// Rows are computed on worker threads and returned in q order.
inline std::vector<Row> compute_table(const RunConfig& c) {
  const auto m = parse_model(c.model);
  std::optional<Scaler> s;
  if (c.measure.kind == MeasureKind::deflated_tail || c.measure.kind == MeasureKind::deflated_var)
    s = detail::require_scaler(c);
  const auto orders = effective_orders(m, c);
  std::vector<Row> rows(c.q_grid.size());
  std::vector<std::exception_ptr> errs(rows.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < rows.size();) {
      try {
        rows[i] = compute_row(m, s, c, orders, c.q_grid[i]);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  const std::size_t n =
      std::min<std::size_t>(rows.size(), std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return rows;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string render_table(const RunConfig& c, const std::vector<Row>& rows) {
  const char sep = c.format == Format::csv ? ',' : '\t';
  std::ostringstream os;
  os << "# tailex table model=" << c.model << " measure=" << to_string(c.measure);
  if (!c.scaler.empty()) os << " scaler=" << c.scaler;
  if (c.weibull_form == WeibullExpectileForm::corrected) os << " weibull-form=corrected";
  os << '\n';
  os << "q" << sep << "exact" << sep << "order1" << sep << "order2" << sep << "order3" << sep
     << "ratio1" << sep << "ratio2" << sep << "ratio3" << '\n';
  for (const auto& r : rows) {
    os << fmt(r.q) << sep << fmt(r.exact);
    for (const auto& a : r.approx) os << sep << (a.value ? fmt(*a.value) : "");
    for (const auto& a : r.approx) {
      os << sep;
      if (a.value) os << fmt(*a.value / r.exact) << (a.pre_asymptotic ? "!" : "");
    }
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Coefficient ledgers.

using Ledger = std::vector<std::pair<std::string, double>>;

inline Ledger coefficient_ledger(const RunConfig& c) {
  const auto m = parse_model(c.model);
  const auto& p = m.profile;
  Ledger L{{"gamma", p.params.gamma}, {"rho", p.params.rho}, {"eta", p.params.eta}};
  switch (c.measure.kind) {
    case MeasureKind::hg: {
      const double k = c.measure.kappa;
      const auto h = hg_coeffs(p, k);
      L.insert(L.end(), {{"kappa", k},
                         {"c_bar", h.c_bar},
                         {"c0", h.c0},
                         {"c1", h.c1},
                         {"c2", h.c2},
                         {"c3", h.c3},
                         {"Delta_kappa", h.Delta_kappa},
                         {"Theta_kappa", h.Theta_kappa},
                         {"Lambda_kappa", h.Lambda_kappa},
                         {"M~_{kappa,1}", h.M_tilde_kappa_1},
                         {"c2 (classic form)", h.c2_classic},
                         {"c3 (classic form)", h.c3_classic}});
      const auto kb = kappa_beta_coeffs(p, k);
      L.insert(L.end(), {{"xi_{kappa,0}", kb.xi0},
                         {"xi_{kappa,rho}", kb.xi_rho},
                         {"xi_{kappa,2rho}", kb.xi_2rho},
                         {"xi_{kappa,rho+eta}", kb.xi_rhoeta},
                         {"L_kappa", kb.L_kappa},
                         {"M_{kappa,1}", kb.M_kappa_1},
                         {"M_{kappa,2}", kb.M_kappa_2},
                         {"Q_kappa", kb.Q_kappa}});
      if (p.branch == Branch::frechet && !p.exact_power && p.B) {
        const auto s = hg_collapsed_series(m, k);
        L.insert(L.end(), {{"series exponent", s.exponent},
                           {"series C1", s.C1},
                           {"series C2", s.C2}});
      }
      break;
    }
    case MeasureKind::expectile:
      if (p.branch == Branch::weibull) {
        const auto w = expectile_weibull_coeffs(m);
        L.insert(L.end(), {{"C", w.C}, {"alpha", w.alpha}, {"x0", w.x0}});
      } else {
        const auto e = expectile_frechet_coeffs(p, m.require_mean());
        L.push_back({"lead", e.lead});
        L.push_back({"D", e.D});
        for (int i = 0; i < 10; ++i) L.push_back({"d" + std::to_string(i), e.d[i]});
        for (int i = 4; i < 10; ++i)
          L.push_back({"d" + std::to_string(i) + " (classic form)", e.d_classic[i]});
      }
      break;
    case MeasureKind::deflated_tail: {
      const auto s = detail::require_scaler(c);
      if (p.branch == Branch::frechet) {
        if (!m.survival) throw DomainError(m.name + ": survival-scale profile unavailable");
        const auto& sp = *m.survival;
        const auto w = frechet_weyl_coeffs(0.0, sp.alpha, sp.varrho, sp.varsigma, s);
        L.insert(L.end(), {{"alpha", sp.alpha},
                           {"varrho", sp.varrho},
                           {"varsigma", sp.varsigma},
                           {"d_{0,kappa}", w.d0},
                           {"d_{1,kappa}", w.d1},
                           {"d_{2,kappa}", w.d2},
                           {"d_{3,kappa}", w.d3},
                           {"d_{2,kappa} (classic form)", w.d2_classic},
                           {"d_{3,kappa} (classic form)", w.d3_classic}});
      } else {
        if (!s.tail_meta) throw DomainError("scaler lacks tail metadata");
        const auto& g = *s.tail_meta;
        const auto form = p.branch == Branch::gumbel ? rv::LimitForm::extended : rv::LimitForm::regular;
        const auto k = gw_constants(p.params.gamma, p.params.rho, p.params.eta, g.alpha_g,
                                    g.varrho_g, g.varsigma_g, form);
        for (auto& e : k.table()) L.push_back(e);
      }
      break;
    }
    case MeasureKind::deflated_var: {
      if (!m.survival_hall) throw DomainError("deflated VaR needs a Hall-type survival function");
      const auto s = detail::require_scaler(c);
      const auto& h = *m.survival_hall;
      const double al = -h.alpha, Ea = s.moment(al);
      const double k1 = h.c * s.moment(al - h.rho) / (al * Ea);
      const double k2 = 0.5 * k1 * k1 * (1 - al + 2 * h.rho) + h.d * s.moment(al - 2 * h.rho) / (al * Ea);
      L.insert(L.end(), {{"E S^alpha", Ea}, {"k1", k1}, {"k2", k2}});
      break;
    }
  }
  return L;
}

inline std::string render_ledger(const RunConfig& c, const Ledger& L) {
  const char sep = c.format == Format::csv ? ',' : '\t';
  std::ostringstream os;
  os << "# tailex coeffs model=" << c.model << " measure=" << to_string(c.measure);
  if (!c.scaler.empty()) os << " scaler=" << c.scaler;
  os << '\n' << "name" << sep << "value" << '\n';
  for (const auto& [k, v] : L) {
    const bool quote = c.format == Format::csv && k.find(',') != std::string::npos;
    os << (quote ? "\"" + k + "\"" : k) << sep << fmt(v) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Verification suites.

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Iterated integral int_1^x y^{g-1} int_1^y u^{r-1} [int_1^u v^{e-1} dv] du dy by nested quadrature.
inline double kernel_oracle(double x, const std::vector<double>& exps) {
  numerics::QuadratureSpec spec;
  spec.rel_tol = 1e-12;
  spec.abs_tol = 1e-15;
  std::function<double(double, std::size_t)> level = [&](double y, std::size_t i) -> double {
    if (i == exps.size()) return 1.0;
    const double e = exps[i] - 1;
    return numerics::integral([&](double u) { return std::pow(u, e) * level(u, i + 1); }, 1.0, y, spec);
  };
  return level(x, 0);
}

struct KernelCase {
  double x, gamma, rho, eta;
};

/// 100 tuples: random draws plus every degenerate slice of (gamma, rho, eta) and x = 1.
inline std::vector<KernelCase> kernel_cases(std::uint64_t seed = 20240611) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> lx(std::log(0.05), std::log(20.0));
  std::uniform_real_distribution<double> ug(-1.0, 1.0), ur(-2.0, 0.0);
  std::vector<KernelCase> out;
  const double slices[][3] = {{0, 0, 0},    {0, -1, 0},   {0, 0, -1},    {0.5, 0, 0},
                              {-0.5, 0, 0}, {0.5, -0.5, 0}, {0, -0.5, -0.5}, {1e-9, -1e-9, 0},
                              {-0.5, 0, -1}, {0.25, -0.25, 0}};
  for (const auto& sl : slices)
    for (double x : {0.05, 0.5, 1.0, 3.0, 20.0}) out.push_back({x, sl[0], sl[1], sl[2]});
  while (out.size() < 100) out.push_back({std::exp(lx(gen)), ug(gen), ur(gen), ur(gen)});
  return out;
}

inline Check verify_kernels(double tol = 1e-7) {
  double worst = 0;
  std::string where;
  for (const auto& k : kernel_cases()) {
    const double h = rv::h_kernel(k.x, k.gamma, k.rho);
    const double r = rv::r_kernel(k.x, {k.gamma, k.rho, k.eta});
    const double ho = kernel_oracle(k.x, {k.gamma, k.rho});
    const double ro = kernel_oracle(k.x, {k.gamma, k.rho, k.eta});
    for (double d : {std::abs(h - ho) / std::max(1.0, std::abs(ho)),
                     std::abs(r - ro) / std::max(1.0, std::abs(ro))}) {
      if (!(d <= worst)) {
        worst = d;
        char buf[160];
        std::snprintf(buf, sizeof buf, "x=%g gamma=%g rho=%g eta=%g", k.x, k.gamma, k.rho, k.eta);
        where = buf;
      }
    }
  }
  return {"kernels match iterated integrals", worst <= tol,
          "max scaled deviation " + fmt(worst) + " at " + where};
}

/// Kernels are continuous across the degenerate slices: a step of size h away
/// from gamma = 0 (or rho = eta = 0) moves them by O(h), not O(1).
inline Check verify_degenerate_limits(double tol = 50.0) {
  const double h = 1e-7;
  double worst = 0;
  auto probe = [&](double moved, double base) {
    worst = std::max(worst, std::abs(moved - base) / (h * std::max(1.0, std::abs(base))));
  };
  for (double x : {0.1, 2.0, 15.0}) {
    for (double s : {h, -h}) {
      probe(rv::d_kernel(x, s), rv::d_kernel(x, 0));
      probe(rv::h_kernel(x, s, 0), rv::h_kernel(x, 0, 0));
      probe(rv::r_kernel(x, {s, 0, 0}), rv::r_kernel(x, {0, 0, 0}));
    }
    probe(rv::h_kernel(x, 0.3, -h), rv::h_kernel(x, 0.3, 0));
    probe(rv::r_kernel(x, {-0.4, -h, -h}), rv::r_kernel(x, {-0.4, 0, 0}));
    probe(rv::r_kernel(x, {0.2, -0.5, -h}), rv::r_kernel(x, {0.2, -0.5, 0}));
  }
  return {"degenerate-limit consistency", worst <= tol, "max jump / step " + fmt(worst)};
}

inline Check verify_drees(const TailModel& m, double eps, const rv::DreesGrid& g = {}) {
  const auto& p = m.profile;
  if (p.exact_power || !p.B) throw DomainError("drees: degenerate auxiliary (A or B identically zero)");
  rv::DreesTriple tr{m.tail_quantile, p.a, p.A, p.B, m.u_increment,
                     p.branch == Branch::frechet ? rv::LimitForm::regular : rv::LimitForm::extended,
                     false};
  const auto rep = rv::drees_check(tr, p.params, eps, g);
  return {"Drees envelope on " + m.name, rep.clean(),
          "t0=" + fmt(rep.t0) + " grid=" + std::to_string(rep.grid.size()) +
              " violations=" + std::to_string(rep.violations.size()) + " max_slack=" + fmt(rep.max_slack)};
}

/// Orders improve on each other (up to a numerical floor) and order-1 error falls as q -> 1.
inline std::vector<Check> verify_convergence(const RunConfig& c, double floor = 1e-12) {
  const auto rows = compute_table(c);
  const auto m = parse_model(c.model);
  const auto orders = effective_orders(m, c);
  std::vector<Check> out;
  bool mono = true;
  std::string first_bad;
  for (const auto& r : rows) {
    int prev = 0;
    for (int k : orders) {
      if (prev) {
        const double ep = std::abs(*r.approx[prev - 1].value / r.exact - 1);
        const double ek = std::abs(*r.approx[k - 1].value / r.exact - 1);
        if (ek > ep + floor && mono) {
          mono = false;
          first_bad = "q=" + fmt(r.q) + " order " + std::to_string(k);
        }
      }
      prev = k;
    }
  }
  out.push_back({"higher orders closer to the oracle", mono, mono ? "all rows" : first_bad});
  for (int k : orders) {
    // Least-squares slope of log|error| against log(1-q), over rows above the floor.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : rows) {
      const double e = std::abs(*r.approx[k - 1].value / r.exact - 1);
      if (!(e > floor)) continue;
      const double lx = std::log(1 - r.q), ly = std::log(e);
      sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, ++n;
    }
    const double slope = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : NAN;
    const bool ok = k > 1 || (n >= 2 && slope > 0);
    out.push_back({"order " + std::to_string(k) + " error slope in log(1-q)", ok,
                   n >= 2 ? fmt(slope) + " over " + std::to_string(n) + " rows" : "below floor"});
  }
  return out;
}

}  // namespace tailex::reports
