#include <cmath>

#include <gtest/gtest.h>

#include "tailex/numerics.hpp"
#include "tailex/tail_models.hpp"

using namespace tailex;

namespace {

// E X = int_0^inf F-bar for non-negative X, by quadrature.
double mean_by_quadrature(const TailModel& m) {
  numerics::QuadratureSpec s;
  s.transform = numerics::Transform::semi_infinite;
  s.rel_tol = 1e-12;
  return numerics::integral(m.sf, 0.0, 0.0, s);
}

// ((U(tx)/U(t)) x^{-gamma} - 1)/A(t) should approach (x^rho - 1)/rho.
void expect_second_order(const TailModel& m, double t, double tol) {
  const auto& p = m.profile;
  for (double x : {0.3, 2.0, 10.0}) {
    const double lhs = (m.tail_quantile(t * x) / m.tail_quantile(t) / std::pow(x, p.params.gamma) - 1) /
                       p.A(t);
    EXPECT_NEAR(lhs, rv::d_kernel(x, p.params.rho), tol) << m.name << " x=" << x;
  }
}

}  // namespace

TEST(Burr, RoundTrips) {
  const auto m = make_burr(2, 1.5);
  for (double x : {0.1, 1.0, 7.0, 300.0}) {
    EXPECT_NEAR(m.cdf(x) + m.sf(x), 1.0, 1e-15);
    EXPECT_NEAR(m.quantile(m.cdf(x)) / x, 1.0, 1e-9);
  }
  for (double t : {10.0, 1e6, 1e12}) EXPECT_NEAR(m.sf(m.tail_quantile(t)) * t, 1.0, 1e-12);
}

TEST(Burr, MeanMatchesQuadrature) {
  const auto m = make_burr(2, 1.5);
  EXPECT_NEAR(*m.mean, mean_by_quadrature(m), 1e-10);
  EXPECT_FALSE(make_burr(0.5, 2).mean.has_value());
  EXPECT_THROW(make_burr(0.5, 2).require_mean(), DomainError);
}

TEST(Burr, SecondOrderProfile) {
  const auto m = make_burr(2, 1.5);
  EXPECT_DOUBLE_EQ(m.gamma(), 1.0 / 3);
  EXPECT_DOUBLE_EQ(m.profile.params.rho, -1.0 / 1.5);
  expect_second_order(m, 1e12, 1e-6);
}

TEST(Burr, IncrementMatchesDifferenceAtModerateT) {
  const auto m = make_burr(2, 1.5);
  const double t = 50;
  for (double x : {0.2, 3.0})
    EXPECT_NEAR(m.u_increment(t, x), (m.tail_quantile(t * x) - m.tail_quantile(t)) / m.profile.a(t), 1e-11);
}

TEST(Burr, SurvivalHallForm) {
  const auto m = make_burr(0.5, 4);
  ASSERT_TRUE(m.survival_hall.has_value());
  for (double x : {1e6, 1e10}) EXPECT_NEAR((*m.survival_hall)(x) / m.sf(x), 1.0, 25 * std::pow(x, -1.5));
}

TEST(Student, TwoDegreesClosedForm) {
  const auto m = make_student(2);
  for (double p : {0.3, 0.9, 0.999}) {
    const double want = (2 * p - 1) / std::sqrt(2 * p * (1 - p));
    EXPECT_NEAR(m.quantile(p), want, 1e-12 * std::max(1.0, std::abs(want)));
  }
  const double q = 1e-10;  // 1 - p, kept exact
  EXPECT_NEAR(m.tail_quantile(1 / q) / ((1 - 2 * q) / std::sqrt(2 * q * (1 - q))), 1.0, 1e-12);
}

TEST(Student, TailAndSymmetry) {
  const auto m = make_student(1.2);
  EXPECT_NEAR(m.sf(3.0), m.cdf(-3.0), 1e-15);
  EXPECT_EQ(*m.mean, 0.0);
  expect_second_order(m, 1e3, 1e-3);
  EXPECT_THROW(make_student(1.0), DomainError);
}

TEST(Student, SurvivalHallMatchesTail) {
  const auto m = make_student(3);
  const auto& h = *m.survival_hall;
  // Three-term Hall form; the next correction is x^{-6} relative.
  for (double x : {50.0, 500.0}) EXPECT_NEAR(h(x) / m.sf(x), 1.0, 50 * std::pow(x, -6));
}

TEST(BetaModel, GapsAreAccurateNearEndpoint) {
  const auto m = make_beta_model(2, 3);
  EXPECT_DOUBLE_EQ(m.endpoint, 1.0);
  for (double t : {1e3, 1e9, 1e15}) {
    const double gap = m.tail_gap(t);
    EXPECT_NEAR(m.sf_gap(gap) * t, 1.0, 1e-11);
  }
  EXPECT_NEAR(m.tail_gap(100), 1 - m.tail_quantile(100), 1e-14);
  EXPECT_NEAR(m.sf_gap(0.2), m.sf(0.8), 1e-15);
}

TEST(BetaModel, WeibullScale) {
  const auto m = make_beta_model(2, 3);
  const double g = m.gamma();
  EXPECT_DOUBLE_EQ(g, -1.0 / 3);
  const double t = 1e15;
  EXPECT_NEAR(m.tail_gap(t) / (m.weibull_C * std::pow(t, g)), 1.0, 1e-4);
}

TEST(BetaModel, SecondOrderOfGap) {
  const auto m = make_beta_model(2, 3);
  const auto& p = m.profile;
  const double t = 1e12;
  for (double x : {0.5, 4.0}) {
    const double lhs = (m.tail_gap(t * x) / m.tail_gap(t) / std::pow(x, p.params.gamma) - 1) / p.A(t);
    EXPECT_NEAR(lhs, rv::d_kernel(x, p.params.rho), 1e-3);
  }
}

TEST(BetaModel, UniformIsExactPower) {
  const auto u = make_beta_model(1, 1);
  EXPECT_TRUE(u.profile.exact_power);
  EXPECT_DOUBLE_EQ(*u.mean, 0.5);
  EXPECT_NEAR(u.tail_gap(1e8), 1e-8, 1e-22);
}

TEST(HallModel, Support) {
  const auto m = make_hall_model(1, 3, 0.5, 0.1, -1);
  EXPECT_NEAR(m.lower, 1.147656, 1e-6);
  EXPECT_EQ(m.sf(m.lower), 1.0);
  EXPECT_NEAR(*m.mean, mean_by_quadrature(m), 1e-10);
  EXPECT_NEAR(*m.mean, 1.651944, 1e-6);
}

TEST(HallModel, TailQuantileInverts) {
  const auto m = make_hall_model(1, 3, 0.5, 0.1, -1);
  for (double t : {2.0, 1e3, 1e9}) EXPECT_NEAR(m.sf(m.tail_quantile(t)) * t, 1.0, 1e-12);
}

TEST(HallModel, SecondCorrectionOnlyIsRewritten) {
  const auto m = make_hall_model(1, 2, 0.0, 0.3, -0.5);
  EXPECT_DOUBLE_EQ(m.survival_hall->c, 0.3);
  EXPECT_DOUBLE_EQ(m.survival_hall->rho, -1.0);
  EXPECT_FALSE(m.profile.exact_power);
}

TEST(HallModel, RejectsNonMonotone) {
  EXPECT_THROW(make_hall_model(1, 1, -5, 0, -3), DomainError);
  EXPECT_THROW(make_hall_model(1, 2, 0.5, 0, 0.5), DomainError);
}

TEST(Pareto, ExactPower) {
  const auto m = make_pareto(3);
  EXPECT_TRUE(m.profile.exact_power);
  EXPECT_NEAR(m.sf(2.0), 0.125, 1e-15);
  EXPECT_NEAR(m.tail_quantile(1000.0), 10.0, 1e-12);
  EXPECT_NEAR(*m.mean, 1.5, 1e-14);
}

TEST(Exponential, GumbelProfile) {
  const auto m = make_exponential(2.0);
  EXPECT_EQ(m.profile.branch, Branch::gumbel);
  EXPECT_NEAR(m.tail_quantile(std::exp(4.0)), 2.0, 1e-14);
  EXPECT_DOUBLE_EQ(m.profile.a(10), 0.5);
}

TEST(ParseModel, Families) {
  EXPECT_EQ(parse_model("burr:a=2,b=1.5").name, make_burr(2, 1.5).name);
  EXPECT_EQ(parse_model("student:v=1.2").profile.params.gamma, 1 / 1.2);
  EXPECT_EQ(parse_model("beta:a=3,b=6").profile.branch, Branch::weibull);
  EXPECT_EQ(parse_model("hall:alpha=3,c=0.5,d=0.1,varrho=-1").lower, make_hall_model(1, 3, 0.5, 0.1, -1).lower);
  EXPECT_EQ(parse_model("pareto:alpha=4").gamma(), 0.25);
  EXPECT_EQ(parse_model("exponential").profile.branch, Branch::gumbel);
}

TEST(ParseModel, Errors) {
  EXPECT_THROW(parse_model("weibull:k=2"), ParseError);
  EXPECT_THROW(parse_model("burr:a=2"), ParseError);
  EXPECT_THROW(parse_model("burr:a=2,b=1,c=3"), ParseError);
  EXPECT_THROW(parse_model("burr:a=x,b=1"), ParseError);
  EXPECT_THROW(parse_model("burr:a=2,a=3,b=1"), ParseError);
  EXPECT_THROW(parse_model("burr:a=-2,b=1"), DomainError);
  EXPECT_THROW(parse_model(":a=1"), ParseError);
}
