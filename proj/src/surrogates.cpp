#include "maler/surrogates.hpp"

#include <cmath>
#include <string>

namespace maler {

namespace {

void check_common(const Vector& play, const Vector& grad, double G, double D) {
  if (play.size() < 1 || play.size() != grad.size())
    throw InvalidArgument("surrogate: play and gradient dimensions differ");
  if (!(G > 0.0) || !(D > 0.0)) throw InvalidArgument("surrogate: G and D must be positive");
  if (!play.allFinite() || !grad.allFinite()) throw InvalidArgument("surrogate: non-finite input");
  if (grad.norm() > G * (1.0 + 1e-9))
    throw AssumptionViolation("surrogate: ||g_t|| = " + std::to_string(grad.norm()) +
                              " exceeds G = " + std::to_string(G));
}

void check_curved_eta(double eta, double G, double D) {
  if (!(eta > 0.0) || eta > 2.0 / (3.0 * D * G) * (1.0 + 1e-12))
    throw InvalidArgument("surrogate: eta outside (0, 2/(3DG)]");
}

// (x - x_t)^T g_t
double offset_dot(const SurrogateContext& ctx, const Vector& x) {
  require_dim(x, ctx.dim(), "surrogate");
  return (x - ctx.play()).dot(ctx.grad());
}

}  // namespace

double linear_eta(double G, double D, int T) {
  return 1.0 / (2.0 * G * D * std::sqrt(static_cast<double>(T)));
}

SurrogateContext SurrogateContext::Curved(Vector play, Vector grad, double eta, double G, double D) {
  check_common(play, grad, G, D);
  check_curved_eta(eta, G, D);
  return SurrogateContext(std::move(play), std::move(grad), eta, G, D);
}

SurrogateContext SurrogateContext::Linear(Vector play, Vector grad, double eta_c, double G, double D,
                                          int T) {
  check_common(play, grad, G, D);
  if (T < 1) throw InvalidArgument("surrogate: T must be >= 1");
  const double expected = linear_eta(G, D, T);
  if (std::abs(eta_c - expected) > 1e-12 * expected)
    throw InvalidArgument("surrogate: linear eta must equal 1/(2GD sqrt(T))");
  SurrogateContext ctx(std::move(play), std::move(grad), eta_c, G, D);
  ctx.linear_ = true;
  return ctx;
}

SurrogateContext SurrogateContext::with_eta(double eta) const {
  if (linear_) {
    if (eta != eta_) throw InvalidArgument("surrogate: linear context has a fixed eta");
    return *this;
  }
  check_curved_eta(eta, G_, D_);
  return SurrogateContext(play_, grad_, eta, G_, D_);
}

double ell_value(const SurrogateContext& ctx, const Vector& x) {
  const double h = offset_dot(ctx, x);
  const double eta = ctx.eta();
  return eta * h + eta * eta * h * h;
}

Vector ell_grad(const SurrogateContext& ctx, const Vector& x) {
  const double h = offset_dot(ctx, x);
  const double eta = ctx.eta();
  return (eta + 2.0 * eta * eta * h) * ctx.grad();
}

double s_value(const SurrogateContext& ctx, const Vector& x) {
  const double h = offset_dot(ctx, x);
  const double eta = ctx.eta();
  const double G = ctx.G();
  return eta * h + eta * eta * G * G * (x - ctx.play()).squaredNorm();
}

Vector s_grad(const SurrogateContext& ctx, const Vector& x) {
  require_dim(x, ctx.dim(), "surrogate");
  const double eta = ctx.eta();
  const double G = ctx.G();
  return eta * ctx.grad() + (2.0 * eta * eta * G * G) * (x - ctx.play());
}

double c_value(const SurrogateContext& ctx, const Vector& x) {
  const double h = offset_dot(ctx, x);
  const double a = ctx.eta() * ctx.G() * ctx.D();
  return ctx.eta() * h + a * a;
}

Vector c_grad(const SurrogateContext& ctx, const Vector& x) {
  require_dim(x, ctx.dim(), "surrogate");
  return ctx.eta() * ctx.grad();
}

bool exp_inequality_check(const SurrogateContext& ctx, const Vector& x) {
  constexpr double kSlack = 1e-12;
  const double lhs = std::exp(-s_value(ctx, x));
  const double mid = std::exp(-ell_value(ctx, x));
  const double rhs = 1.0 - ctx.eta() * offset_dot(ctx, x);
  return lhs <= mid + kSlack && mid <= rhs + kSlack;
}

bool exp_inequality_check_linear(const SurrogateContext& ctx, const Vector& x) {
  constexpr double kSlack = 1e-12;
  return std::exp(-c_value(ctx, x)) <= 1.0 - ctx.eta() * offset_dot(ctx, x) + kSlack;
}

double surrogate_value(SurrogateKind kind, const SurrogateContext& ctx, const Vector& x) {
  switch (kind) {
    case SurrogateKind::kLinear: return c_value(ctx, x);
    case SurrogateKind::kStrong: return s_value(ctx, x);
    case SurrogateKind::kEll: return ell_value(ctx, x);
  }
  throw InvalidArgument("surrogate: unknown kind");
}

Vector surrogate_grad(SurrogateKind kind, const SurrogateContext& ctx, const Vector& x) {
  switch (kind) {
    case SurrogateKind::kLinear: return c_grad(ctx, x);
    case SurrogateKind::kStrong: return s_grad(ctx, x);
    case SurrogateKind::kEll: return ell_grad(ctx, x);
  }
  throw InvalidArgument("surrogate: unknown kind");
}

}  // namespace maler
