#include "maler/experts.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace maler {

namespace {

void require_eta(double ctx_eta, double state_eta) {
  if (ctx_eta != state_eta) throw InvalidArgument("expert step: context eta differs from expert eta");
}

}  // namespace

NewtonMatrix NewtonMatrix::Scaled(int dim, double diag) {
  NewtonMatrix m;
  m.sigma = Matrix::Identity(dim, dim) * diag;
  m.sigma_inv = Matrix::Identity(dim, dim) / diag;
  return m;
}

void NewtonMatrix::rank_one_update(const Vector& v) {
  sigma.noalias() += v * v.transpose();
  if (++updates_since_refactor >= kRefactorInterval) {
    refactor();
    return;
  }
  const Vector u = sigma_inv * v;
  sigma_inv -= (u * u.transpose()) / (1.0 + v.dot(u));
  // keep exact symmetry; the projection checks for it
  sigma_inv = 0.5 * (sigma_inv + sigma_inv.transpose()).eval();
}

void NewtonMatrix::refactor() {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw std::logic_error("newton matrix lost positive definiteness");
  sigma_inv = llt.solve(Matrix::Identity(sigma.rows(), sigma.cols()));
  sigma_inv = 0.5 * (sigma_inv + sigma_inv.transpose()).eval();
  updates_since_refactor = 0;
}

double convex_step_size(double D, double G, int t) {
  return D / (G * std::sqrt(static_cast<double>(t)));
}

double sc_step_size(double eta, double G, int t) {
  return 1.0 / (2.0 * eta * eta * G * G * static_cast<double>(t));
}

ConvexExpertState make_convex_expert(const Problem& problem, double eta_c) {
  return {Vector::Zero(problem.d()), 1, eta_c};
}

ONSExpertState make_ons_expert(const Problem& problem, double eta) {
  if (!problem.set.is_ball())
    throw UnsupportedOperation("ONS expert requires a ball decision set");
  const double D = problem.D();
  ONSExpertState s;
  s.iterate = Vector::Zero(problem.d());
  s.eta = eta;
  s.g_ell = 7.0 / (25.0 * D);
  s.beta = 0.5 * std::min(1.0 / (4.0 * s.g_ell * D), 1.0);
  s.newton = NewtonMatrix::Scaled(problem.d(), 1.0 / (s.beta * s.beta * D * D));
  return s;
}

SCExpertState make_sc_expert(const Problem& problem, double eta) {
  return {Vector::Zero(problem.d()), eta, 1};
}

ConvexExpertState convex_expert_step(const ConvexExpertState& state, const SurrogateContext& ctx,
                                     const Problem& problem) {
  require_eta(ctx.eta(), state.eta_c);
  require_dim(state.iterate, problem.d(), "convex expert");
  // grad c_t = eta_c g_t, so eta_c cancels against the step size.
  const double step = convex_step_size(problem.D(), problem.G(), state.round);
  ConvexExpertState next = state;
  next.iterate = project_euclidean(problem.set, state.iterate - step * ctx.grad());
  next.round = state.round + 1;
  return next;
}

ONSExpertState ons_expert_step(const ONSExpertState& state, const SurrogateContext& ctx,
                               const Problem& problem) {
  require_eta(ctx.eta(), state.eta);
  const Vector grad = ell_grad(ctx, state.iterate);
  if (grad.norm() > state.g_ell * (1.0 + 1e-9)) {
    throw std::logic_error("ONS expert: ||grad l|| = " + std::to_string(grad.norm()) +
                           " exceeds G_ell = " + std::to_string(state.g_ell));
  }
  ONSExpertState next = state;
  next.newton.rank_one_update(grad);
  const Vector target = state.iterate - (next.newton.sigma_inv * grad) / state.beta;
  next.iterate = project_weighted(problem.set, next.newton.sigma, target);
  return next;
}

SCExpertState sc_expert_step(const SCExpertState& state, const SurrogateContext& ctx,
                             const Problem& problem) {
  require_eta(ctx.eta(), state.eta);
  const double step = sc_step_size(state.eta, problem.G(), state.round);
  SCExpertState next = state;
  next.iterate = project_euclidean(problem.set, state.iterate - step * s_grad(ctx, state.iterate));
  next.round = state.round + 1;
  return next;
}

SurrogateKind expert_kind(const ExpertState& state) {
  switch (state.index()) {
    case 0: return SurrogateKind::kLinear;
    case 1: return SurrogateKind::kEll;
    default: return SurrogateKind::kStrong;
  }
}

const Vector& expert_point(const ExpertState& state) {
  return std::visit([](const auto& s) -> const Vector& { return s.iterate; }, state);
}

double expert_eta(const ExpertState& state) {
  if (const auto* c = std::get_if<ConvexExpertState>(&state)) return c->eta_c;
  if (const auto* o = std::get_if<ONSExpertState>(&state)) return o->eta;
  return std::get<SCExpertState>(state).eta;
}

ExpertState expert_step(const ExpertState& state, const SurrogateContext& ctx, const Problem& problem) {
  if (const auto* c = std::get_if<ConvexExpertState>(&state)) return convex_expert_step(*c, ctx, problem);
  if (const auto* o = std::get_if<ONSExpertState>(&state)) return ons_expert_step(*o, ctx, problem);
  return sc_expert_step(std::get<SCExpertState>(state), ctx, problem);
}

double expert_regret_bound(SurrogateKind kind, int d, int T) {
  const double lnT = std::log(static_cast<double>(T));
  switch (kind) {
    case SurrogateKind::kStrong: return 1.0 + lnT;
    case SurrogateKind::kEll: return 10.0 * d * lnT;
    case SurrogateKind::kLinear: return 0.75;
  }
  return 0.0;
}

namespace {

// sum_t surrogate_t(u) = u^T A u + b^T u + const
struct SummedSurrogate {
  Matrix A;
  Vector b;
};

SummedSurrogate sum_surrogates(SurrogateKind kind, const std::vector<SurrogateContext>& contexts,
                               int d) {
  SummedSurrogate q{Matrix::Zero(d, d), Vector::Zero(d)};
  for (const auto& ctx : contexts) {
    const double eta = ctx.eta();
    const Vector& g = ctx.grad();
    const Vector& xt = ctx.play();
    switch (kind) {
      case SurrogateKind::kLinear:
        q.b += eta * g;
        break;
      case SurrogateKind::kStrong: {
        const double w = eta * eta * ctx.G() * ctx.G();
        q.A.diagonal().array() += w;
        q.b += eta * g - 2.0 * w * xt;
        break;
      }
      case SurrogateKind::kEll: {
        const double e2 = eta * eta;
        q.A.noalias() += e2 * g * g.transpose();
        q.b += (eta - 2.0 * e2 * xt.dot(g)) * g;
        break;
      }
    }
  }
  return q;
}

}  // namespace

ExpertRegretReport expert_regret_certificate(SurrogateKind kind,
                                             const std::vector<SurrogateContext>& contexts,
                                             const std::vector<Vector>& points,
                                             const Problem& problem) {
  if (contexts.size() != points.size() || contexts.empty())
    throw InvalidArgument("expert certificate: need one point per round");
  const int d = problem.d();
  const SummedSurrogate q = sum_surrogates(kind, contexts, d);

  auto total = [&](const Vector& u) {
    double s = 0.0;
    for (const auto& ctx : contexts) s += surrogate_value(kind, ctx, u);
    return s;
  };
  auto quad_value = [&](const Vector& u) { return u.dot(q.A * u) + q.b.dot(u); };
  auto quad_grad = [&](const Vector& u) -> Vector { return 2.0 * (q.A * u) + q.b; };

  const double L = 2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(q.A, Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .maxCoeff();
  MinimizeOptions opts;
  opts.iterations = 10000;
  // Linear sums have no curvature; a step of length D per iteration suffices.
  opts.fixed_step = L > 1e-300 ? 1.0 / L : problem.D() / std::max(q.b.norm(), 1e-300);
  const MinimizeResult best =
      minimize_over_set(quad_value, quad_grad, problem.set, Vector::Zero(d), opts);

  double played = 0.0;
  for (std::size_t t = 0; t < contexts.size(); ++t) played += surrogate_value(kind, contexts[t], points[t]);

  ExpertRegretReport report;
  report.kind = kind;
  report.eta = contexts.front().eta();
  report.regret = played - total(best.point);
  report.bound = expert_regret_bound(kind, d, static_cast<int>(contexts.size()));
  report.comparator = best.point;
  report.violated = report.regret > report.bound + 1e-9;
  return report;
}

}  // namespace maler
