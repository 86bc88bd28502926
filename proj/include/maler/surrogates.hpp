#pragma once

#include "maler/core.hpp"

namespace maler {

/// One round's surrogate data: the aggregated play x_t, the gradient g_t
/// observed there, and a learning rate. Evaluating a surrogate needs nothing
/// else, so a round can be replayed from (x_t, g_t, eta) alone.
class SurrogateContext {
 public:
  /// Context for the l- and s-surrogates: requires 0 < eta <= 2/(3DG).
  static SurrogateContext Curved(Vector play, Vector grad, double eta, double G, double D);
  /// Context for the linear c-surrogate: requires eta == 1/(2GD sqrt(T)).
  static SurrogateContext Linear(Vector play, Vector grad, double eta_c, double G, double D, int T);

  const Vector& play() const { return play_; }
  const Vector& grad() const { return grad_; }
  double eta() const { return eta_; }
  double G() const { return G_; }
  double D() const { return D_; }
  int dim() const { return static_cast<int>(play_.size()); }

  /// Same context with a different learning rate (validated the same way).
  SurrogateContext with_eta(double eta) const;

 private:
  SurrogateContext(Vector play, Vector grad, double eta, double G, double D)
      : play_(std::move(play)), grad_(std::move(grad)), eta_(eta), G_(G), D_(D) {}

  Vector play_;
  Vector grad_;
  double eta_;
  double G_;
  double D_;
  bool linear_ = false;
};

/// Learning rate of the linear surrogate for horizon T.
double linear_eta(double G, double D, int T);

// l^eta_t(x) = -eta (x_t - x)^T g_t + eta^2 ((x - x_t)^T g_t)^2
double ell_value(const SurrogateContext& ctx, const Vector& x);
Vector ell_grad(const SurrogateContext& ctx, const Vector& x);

// s^eta_t(x) = -eta (x_t - x)^T g_t + eta^2 G^2 ||x_t - x||^2
double s_value(const SurrogateContext& ctx, const Vector& x);
Vector s_grad(const SurrogateContext& ctx, const Vector& x);

// c_t(x) = -eta_c (x_t - x)^T g_t + (eta_c G D)^2
double c_value(const SurrogateContext& ctx, const Vector& x);
Vector c_grad(const SurrogateContext& ctx, const Vector& x);

/// exp(-s) <= exp(-l) <= 1 + eta (x_t - x)^T g_t, each with slack 1e-12.
bool exp_inequality_check(const SurrogateContext& ctx, const Vector& x);

/// exp(-c) <= 1 + eta_c (x_t - x)^T g_t with slack 1e-12.
bool exp_inequality_check_linear(const SurrogateContext& ctx, const Vector& x);

enum class SurrogateKind { kLinear, kStrong, kEll };

double surrogate_value(SurrogateKind kind, const SurrogateContext& ctx, const Vector& x);
Vector surrogate_grad(SurrogateKind kind, const SurrogateContext& ctx, const Vector& x);

}  // namespace maler
