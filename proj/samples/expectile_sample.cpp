// Student-t expectiles next to their tail expansions.
#include <cstdio>

#include "tailex/risk_measures.hpp"

int main() {
  const auto m = tailex::make_student(1.2);
  std::printf("%-10s %-14s %-14s %-14s %-14s\n", "q", "exact", "order1", "order2", "order3");
  for (double q : {0.99, 0.9979, 0.999, 0.9999, 0.99999}) {
    std::printf("%-10g %-14.8g", q, tailex::exact_expectile(m, q));
    for (int k = 1; k <= 3; ++k) std::printf(" %-14.8g", tailex::expectile_approx(m, q, k));
    std::printf("\n");
  }
}
