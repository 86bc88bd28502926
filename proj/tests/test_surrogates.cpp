#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "maler/surrogates.hpp"

namespace maler {
namespace {

Vector V2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

struct Tuple {
  Vector xt, g, x;
  double eta;
};

// Random (x_t, g, x, eta) with x_t, x in ball(0, D/2), ||g|| <= G and eta in (0, 2/(3DG)].
Tuple random_tuple(int d, double G, double D, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto in_ball = [&](double r) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = n(rng);
    return Vector(v.normalized() * r * std::pow(u(rng), 1.0 / d));
  };
  Tuple t{in_ball(D / 2), in_ball(G), in_ball(D / 2), 0.0};
  t.eta = (2.0 / (3.0 * D * G)) * std::max(u(rng), 1e-6);
  return t;
}

TEST(EllSurrogate, Examples) {
  const auto ctx = SurrogateContext::Curved(V2(0, 0), V2(1, 0), 0.1, 1.0, 1.0);
  EXPECT_NEAR(ell_value(ctx, V2(1, 0)), -0.1 * (-1.0) + 0.01 * 1.0, 1e-15);
  EXPECT_NEAR(ell_value(ctx, V2(-1, 0)), -0.1 * 1.0 + 0.01, 1e-15);
  EXPECT_EQ(ell_value(ctx, V2(0, 0)), 0.0);
  EXPECT_LE((ell_grad(ctx, V2(1, 0)) - V2(0.12, 0)).norm(), 1e-15);
  EXPECT_LE((ell_grad(ctx, V2(0, 0)) - V2(0.1, 0)).norm(), 1e-15);
}

TEST(SSurrogate, Examples) {
  const auto ctx = SurrogateContext::Curved(V2(0, 0), V2(1, 0), 0.1, 1.0, 1.0);
  EXPECT_NEAR(s_value(ctx, V2(1, 0)), 0.1 + 0.01, 1e-15);
  EXPECT_EQ(s_value(ctx, V2(0, 0)), 0.0);
  EXPECT_LE((s_grad(ctx, V2(1, 0)) - V2(0.12, 0)).norm(), 1e-15);
  EXPECT_LE((s_grad(ctx, V2(0, 0)) - V2(0.1, 0)).norm(), 1e-15);
}

TEST(CSurrogate, Examples) {
  // eta_c = 1/(2 sqrt(400)) = 0.025
  const auto ctx = SurrogateContext::Linear(V2(0, 0), V2(1, 0), 0.025, 1.0, 1.0, 400);
  EXPECT_NEAR(c_value(ctx, V2(1, 0)), 0.025 + 0.000625, 1e-15);
  EXPECT_NEAR(c_value(ctx, V2(0, 0)), 0.000625, 1e-15);
  EXPECT_LE((c_grad(ctx, V2(0.3, -0.2)) - V2(0.025, 0)).norm(), 1e-15);
}

TEST(CSurrogate, FiniteDifferenceSlopeIsConstant) {
  std::mt19937_64 rng(1);
  const auto ctx = SurrogateContext::Linear(V2(0.1, 0.2), V2(0.6, -0.8), linear_eta(1, 1, 100), 1.0, 1.0, 100);
  auto f = [&](const Vector& x) { return c_value(ctx, x); };
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int i = 0; i < 100; ++i) {
    const Vector x = V2(u(rng), u(rng));
    EXPECT_LE((finite_difference_gradient(f, x) - ctx.eta() * ctx.grad()).norm(), 1e-8);
  }
}

TEST(Surrogates, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const int d = 1 + i % 7;
    const double G = 0.5 + (i % 5), D = 0.25 + 0.5 * (i % 3);
    const auto t = random_tuple(d, G, D, rng);
    const auto ctx = SurrogateContext::Curved(t.xt, t.g, t.eta, G, D);
    auto fl = [&](const Vector& x) { return ell_value(ctx, x); };
    auto fs = [&](const Vector& x) { return s_value(ctx, x); };
    ASSERT_LE(relative_error(ell_grad(ctx, t.x), finite_difference_gradient(fl, t.x)), 1e-6);
    ASSERT_LE(relative_error(s_grad(ctx, t.x), finite_difference_gradient(fs, t.x)), 1e-6);
  }
}

TEST(Surrogates, SDominatesEll) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto t = random_tuple(3, 1.0, 1.0, rng);
    const auto ctx = SurrogateContext::Curved(t.xt, t.g, t.eta, 1.0, 1.0);
    ASSERT_GE(s_value(ctx, t.x), ell_value(ctx, t.x) - 1e-15);
  }
}

TEST(Surrogates, ConvexityAlongSegments) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const auto t = random_tuple(4, 1.0, 1.0, rng);
    const auto other = random_tuple(4, 1.0, 1.0, rng);
    const auto ctx = SurrogateContext::Curved(t.xt, t.g, t.eta, 1.0, 1.0);
    const double a = u(rng);
    const Vector mid = a * t.x + (1 - a) * other.x;
    for (auto kind : {SurrogateKind::kEll, SurrogateKind::kStrong}) {
      const double lhs = surrogate_value(kind, ctx, mid);
      const double rhs = a * surrogate_value(kind, ctx, t.x) + (1 - a) * surrogate_value(kind, ctx, other.x);
      ASSERT_LE(lhs, rhs + 1e-14);
    }
  }
}

TEST(Surrogates, SIsStronglyConvex) {
  // s(y) >= s(x) + <grad s(x), y - x> + eta^2 G^2 ||y - x||^2
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto t = random_tuple(3, 2.0, 1.0, rng);
    const auto y = random_tuple(3, 2.0, 1.0, rng).x;
    const auto ctx = SurrogateContext::Curved(t.xt, t.g, t.eta, 2.0, 1.0);
    const double lower = s_value(ctx, t.x) + s_grad(ctx, t.x).dot(y - t.x) +
                         t.eta * t.eta * 4.0 * (y - t.x).squaredNorm();
    ASSERT_NEAR(s_value(ctx, y), lower, 1e-12);
  }
}

TEST(ExpInequality, HoldsOnRandomTuples) {
  std::mt19937_64 rng(6);
  const auto at_xt = SurrogateContext::Curved(V2(0.1, 0), V2(1, 0), 0.2, 1.0, 1.0);
  EXPECT_TRUE(exp_inequality_check(at_xt, V2(0.1, 0)));
  for (int i = 0; i < 1000; ++i) {
    const auto t = random_tuple(1 + i % 5, 1.0, 1.0, rng);
    const auto ctx = SurrogateContext::Curved(t.xt, t.g, t.eta, 1.0, 1.0);
    ASSERT_TRUE(exp_inequality_check(ctx, t.x));
    // independent evaluation of the chain
    const double h = (t.x - t.xt).dot(t.g);
    const double ell = t.eta * h + t.eta * t.eta * h * h;
    const double s = t.eta * h + t.eta * t.eta * (t.x - t.xt).squaredNorm();
    ASSERT_LE(std::exp(-s), std::exp(-ell) + 1e-12);
    ASSERT_LE(std::exp(-ell), 1.0 - t.eta * h + 1e-12);
  }
}

TEST(ExpInequality, LinearAnalogue) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const int T = 1 + i;
    const auto t = random_tuple(3, 1.0, 1.0, rng);
    const auto ctx = SurrogateContext::Linear(t.xt, t.g, linear_eta(1.0, 1.0, T), 1.0, 1.0, T);
    ASSERT_TRUE(exp_inequality_check_linear(ctx, t.x));
    const double h = (t.x - t.xt).dot(t.g);
    ASSERT_LE(std::exp(-c_value(ctx, t.x)), 1.0 - ctx.eta() * h + 1e-12);
  }
}

TEST(SurrogateContext, Validation) {
  EXPECT_THROW(SurrogateContext::Curved(V2(0, 0), V2(1, 0), 0.0, 1.0, 1.0), InvalidArgument);
  EXPECT_THROW(SurrogateContext::Curved(V2(0, 0), V2(1, 0), 0.7, 1.0, 1.0), InvalidArgument);
  EXPECT_NO_THROW(SurrogateContext::Curved(V2(0, 0), V2(1, 0), 2.0 / 3.0, 1.0, 1.0));
  EXPECT_THROW(SurrogateContext::Curved(V2(0, 0), V2(2, 0), 0.1, 1.0, 1.0), AssumptionViolation);
  EXPECT_THROW(SurrogateContext::Linear(V2(0, 0), V2(1, 0), 0.03, 1.0, 1.0, 400), InvalidArgument);
  Vector g3(3);
  g3 << 0.1, 0, 0;
  EXPECT_THROW(SurrogateContext::Curved(V2(0, 0), g3, 0.1, 1.0, 1.0), InvalidArgument);
  EXPECT_DOUBLE_EQ(linear_eta(1.0, 1.0, 400), 0.025);
}

}  // namespace
}  // namespace maler
