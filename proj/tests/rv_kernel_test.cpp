#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tailex/numerics.hpp"
#include "tailex/rv_kernel.hpp"
#include "tailex/tail_models.hpp"

using namespace tailex;
using namespace tailex::rv;

namespace {

// Closed forms valid away from the degenerate slices.
double h_closed(double x, double g, double r) { return (d_kernel(x, g + r) - d_kernel(x, g)) / r; }
double r_closed(double x, double g, double r, double e) {
  return (h_closed(x, g, r + e) - h_closed(x, g, r)) / e;
}

// int_1^x y^{g-1} int_1^y u^{r-1} du dy by nested quadrature.
double h_quad(double x, double g, double r) {
  numerics::QuadratureSpec s;
  s.rel_tol = 1e-12;
  return numerics::integral(
      [&](double y) {
        return std::pow(y, g - 1) *
               numerics::integral([&](double u) { return std::pow(u, r - 1); }, 1.0, y, s);
      },
      1.0, x, s);
}

}  // namespace

TEST(DKernel, PowerAndLog) {
  EXPECT_NEAR(d_kernel(4.0, 0.5), 2.0, 1e-15);
  EXPECT_NEAR(d_kernel(3.0, 0.0), std::log(3.0), 1e-15);
  EXPECT_NEAR(d_kernel(3.0, -1.0), 2.0 / 3, 1e-15);
  EXPECT_EQ(d_kernel(1.0, 0.7), 0.0);
}

TEST(DKernel, TinyGammaIsAccurate) {
  // (x^g - 1)/g = L + g L^2/2 + g^2 L^3/6 + ...
  const double L = std::log(50.0), g = 1e-9;
  EXPECT_NEAR(d_kernel(50.0, g), L + g * L * L / 2, 1e-15 * L);
}

TEST(DKernel, RejectsNonPositive) {
  EXPECT_THROW(d_kernel(0.0, 1.0), DomainError);
  EXPECT_THROW(h_kernel(-1.0, 1.0, -1.0), DomainError);
  EXPECT_THROW(r_kernel(INFINITY, {1, -1, -1}), DomainError);
}

TEST(HKernel, MatchesClosedForm) {
  for (double x : {0.05, 0.7, 2.0, 19.0})
    for (double g : {-0.8, -0.1, 0.3, 1.2})
      for (double r : {-2.0, -0.5, -0.05})
        EXPECT_NEAR(h_kernel(x, g, r), h_closed(x, g, r), 1e-12 * std::max(1.0, std::abs(h_closed(x, g, r))))
            << x << " " << g << " " << r;
}

TEST(HKernel, DegenerateSlicesMatchQuadrature) {
  for (double x : {0.05, 0.5, 3.0, 20.0}) {
    EXPECT_NEAR(h_kernel(x, 0, 0), std::pow(std::log(x), 2) / 2, 1e-14);
    EXPECT_NEAR(h_kernel(x, 0.5, 0), h_quad(x, 0.5, 0), 1e-10);
    EXPECT_NEAR(h_kernel(x, 0, -0.5), h_quad(x, 0, -0.5), 1e-10);
    // gamma + rho = 0 gives a repeated node at zero.
    EXPECT_NEAR(h_kernel(x, 0.5, -0.5), h_quad(x, 0.5, -0.5), 1e-10);
  }
}

TEST(HKernel, SymmetricNodes) {
  // Nodes {0, 2c, c}: centred at c, odd series terms vanish.
  const double x = 8.73106, g = 0.701659, r = -0.269846;
  EXPECT_NEAR(h_kernel(x, g, r), h_quad(x, g, r), 1e-11);
}

TEST(RKernel, MatchesClosedForm) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> ux(-3.0, 3.0), ug(-1.5, 1.5), ur(-2.0, -0.05);
  for (int i = 0; i < 300; ++i) {
    const double x = std::exp(ux(gen)), g = ug(gen), r = ur(gen), e = ur(gen);
    const double want = r_closed(x, g, r, e);
    // The closed form itself cancels for close exponents; compare with a scale-aware tolerance.
    EXPECT_NEAR(r_kernel(x, {g, r, e}), want, 1e-9 * std::max(1.0, std::abs(want)))
        << x << " " << g << " " << r << " " << e;
  }
}

TEST(RKernel, AllZeroIsCubeOfLog) {
  for (double x : {0.1, 5.0}) EXPECT_NEAR(r_kernel(x, {0, 0, 0}), std::pow(std::log(x), 3) / 6, 1e-14);
}

TEST(Kernels, LogVariantsAgree) {
  for (double x : {0.2, 1.5, 30.0}) {
    const double L = std::log(x);
    EXPECT_DOUBLE_EQ(d_kernel_log(L, 0.3), d_kernel(x, 0.3));
    EXPECT_DOUBLE_EQ(h_kernel_log(L, 0.3, -0.4), h_kernel(x, 0.3, -0.4));
    EXPECT_DOUBLE_EQ(r_kernel_log(L, {0.3, -0.4, -1}), r_kernel(x, {0.3, -0.4, -1}));
  }
}

TEST(Kernels, RegularForms) {
  EXPECT_NEAR(h_regular(4.0, 0.5, -1.0), std::pow(4.0, 0.5) * (0.75) / 0.5, 1e-14);
  EXPECT_NEAR(r_regular(4.0, {0.5, -1.0, -1.0}), 2.0 * ((1.0 / 16 - 1) / -2) / 0.5, 1e-14);
}

TEST(Hall, InverseCoefficients) {
  const HallFunction f{2, 3, 0.5, 0.1, -1};
  const auto k = hall_invert_coeffs(f);
  EXPECT_NEAR(k.lead, std::pow(2.0, -1.0 / 3), 1e-15);
  EXPECT_NEAR(k.c1, -0.5 / 3, 1e-15);
  EXPECT_NEAR(k.c2, 0.25 / 18 * (1 + 3 - 2) - 0.1 / 3, 1e-15);
}

TEST(Hall, InverseErrorIsThirdOrderRelative) {
  const HallFunction f{2, 3, 0.5, 0.1, -1};
  double prev = INFINITY;
  for (double t : {1e4, 1e6, 1e8}) {
    const double root = numerics::find_root([&](double x) { return std::log(f(x) / t); },
                                            {0.5, 1e5, 1e-16, 400});
    const double rel = std::abs(hall_invert(f, t) / root - 1);
    EXPECT_LT(rel, std::pow(t, -2.0 / 3) * 1e-3);
    EXPECT_LT(rel, prev);
    prev = rel;
  }
}

TEST(Hall, NegativeExponentRegime) {
  // alpha < 0: inverse for t -> 0+.
  const HallFunction f{1.5, -2, 0.3, 0.05, -0.5};
  const double t = 1e-8;
  const double root = numerics::find_root([&](double x) { return std::log(f(x) / t); }, {1, 1e8, 1e-16, 400});
  EXPECT_NEAR(hall_invert(f, t) / root, 1.0, 1e-6);
}

TEST(Hall, Validation) {
  EXPECT_THROW(hall_invert_coeffs({1, 0, 0.5, 0, -1}), DomainError);
  EXPECT_THROW(hall_invert_coeffs({1, 2, 0.5, 0, 0}), DomainError);
  EXPECT_THROW(hall_invert({-1, 2, 0.5, 0, -1}, 10.0), DomainError);
}

TEST(Hall, AuxiliariesGiveSecondOrderLimit) {
  const HallFunction f{1, 2, 0.7, 0.2, -0.5};
  const auto aux = hall_auxiliaries(f);
  ASSERT_FALSE(aux.exact_power);
  const double t = 1e10;
  for (double x : {0.5, 2.0, 7.0}) {
    const double lhs = (f(t * x) / f(t) / std::pow(x, 2) - 1) / aux.A(t);
    EXPECT_NEAR(lhs, d_kernel(x, -0.5), 1e-4);
  }
}

TEST(Hall, ZeroCorrectionIsExactPower) {
  const auto aux = hall_auxiliaries({1, 2, 0, 0, -1});
  EXPECT_TRUE(aux.exact_power);
  EXPECT_EQ(aux.A(1e3), 0.0);
}

TEST(Drees, CleanForBurr) {
  const auto m = make_burr(2, 1.5);
  DreesTriple tr{m.tail_quantile, m.profile.a, m.profile.A, m.profile.B, m.u_increment,
                 LimitForm::regular, false};
  const auto rep = drees_check(tr, m.profile.params, 0.1);
  EXPECT_TRUE(rep.clean());
  EXPECT_LE(rep.t0, 1e8);
  EXPECT_LT(rep.max_slack, 0);
  for (const auto& p : rep.grid) EXPECT_GE(std::min(p.t, p.t * p.x), rep.t0);
}

TEST(Drees, EnvelopeIsPositiveAndGrowsAwayFromOne) {
  const RvParams p{0.5, -1, -1};
  EXPECT_GT(drees_envelope(1.0, p, 0.1, 1), 0);
  EXPECT_GT(drees_envelope(20.0, p, 0.1, 1), drees_envelope(2.0, p, 0.1, 1));
}

TEST(Drees, RejectsDegenerateAuxiliary) {
  DreesTriple tr{[](double t) { return t; }, [](double t) { return t; }, [](double) { return 0.0; },
                 [](double) { return 0.0; }, nullptr, LimitForm::regular, true};
  EXPECT_THROW(drees_check(tr, {1, -1, -1}, 0.1), DomainError);
  EXPECT_THROW(drees_check(tr, {1, 0.5, -1}, 0.1), DomainError);
}
