// tailex: convergence tables, coefficient ledgers and self-checks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tailex/reports.hpp"

namespace rp = tailex::reports;

namespace {

int emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "tailex: cannot open " << path << " for writing\n";
    return 2;
  }
  f << text;
  return f ? 0 : 2;
}

void report(const rp::Check& c) {
  std::cout << (c.pass ? "PASS  " : "FAIL  ") << c.name << "  (" << c.detail << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail expansions of risk measures against numerical oracles"};
  app.require_subcommand(1);

  rp::RunConfig cfg;
  std::string measure = "expectile", q = "0.99:0.999999:geom", orders, format = "csv",
              wform = "classic";
  const std::map<std::string, rp::Format> formats{{"csv", rp::Format::csv}, {"tsv", rp::Format::tsv}};

  auto common = [&](CLI::App* s) {
    s->add_option("--model", cfg.model, "e.g. burr:a=2,b=1.5, student:v=1.2, beta:a=2,b=3")->required();
    s->add_option("--scaler", cfg.scaler, "unit, uniform or beta:a=..,b=.. (deflated measures)");
    s->add_option("--measure", measure, "expectile | hg:kappa=K | deflated-tail | deflated-var");
    s->add_option("--out", cfg.out, "output file (default stdout)");
    s->add_option("--format", format, "csv or tsv")->check(CLI::IsMember({"csv", "tsv"}));
  };

  auto* table = app.add_subcommand("table", "one row per q: exact, approximations and ratios");
  common(table);
  table->add_option("--orders", orders, "subset of 1,2,3 (default: all available)");
  table->add_option("--q", q, "a:b:geom[:n] or a comma list");
  table->add_option("--weibull-form", wform, "classic or corrected (Weibull expectile)")
      ->check(CLI::IsMember({"classic", "corrected"}));

  auto* coeffs = app.add_subcommand("coeffs", "named coefficient ledger");
  common(coeffs);

  std::string suite, vq = "0.99:0.9999:geom:9";
  double eps = 0.1;
  auto* verify = app.add_subcommand("verify", "run invariant suites; exit 1 on the first failure");
  verify->add_option("suite", suite, "kernels | drees | convergence")
      ->required()
      ->check(CLI::IsMember({"kernels", "drees", "convergence"}));
  verify->add_option("--model", cfg.model, "model for drees / convergence");
  verify->add_option("--measure", measure, "measure for convergence");
  verify->add_option("--scaler", cfg.scaler, "scaler for deflated measures");
  verify->add_option("--eps", eps, "Drees epsilon");
  verify->add_option("--q", vq, "q grid for convergence");
  verify->add_option("--orders", orders, "orders for convergence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    cfg.measure = rp::parse_measure(measure);
    cfg.format = formats.at(format);
    cfg.weibull_form = wform == "corrected" ? tailex::WeibullExpectileForm::corrected
                                            : tailex::WeibullExpectileForm::classic;
    if (!orders.empty()) cfg.orders = rp::parse_orders(orders);

    if (*table) {
      cfg.q_grid = rp::parse_q_grid(q);
      return emit(rp::render_table(cfg, rp::compute_table(cfg)), cfg.out);
    }
    if (*coeffs) return emit(rp::render_ledger(cfg, rp::coefficient_ledger(cfg)), cfg.out);

    std::vector<rp::Check> checks;
    if (suite == "kernels") {
      checks.push_back(rp::verify_kernels());
      checks.push_back(rp::verify_degenerate_limits());
    } else {
      if (cfg.model.empty()) throw tailex::DomainError(suite + " needs --model");
      if (suite == "drees") {
        checks.push_back(rp::verify_drees(tailex::parse_model(cfg.model), eps));
      } else {
        cfg.q_grid = rp::parse_q_grid(vq);
        checks = rp::verify_convergence(cfg);
      }
    }
    for (const auto& c : checks) {
      report(c);
      if (!c.pass) {
        std::cerr << "tailex: failed: " << c.name << '\n';
        return 1;
      }
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "tailex: " << e.what() << '\n';
    return 2;
  }
}
