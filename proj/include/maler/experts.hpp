#pragma once

#include <variant>
#include <vector>

#include "maler/core.hpp"
#include "maler/surrogates.hpp"

namespace maler {

/// Projected OGD on the linear surrogate, step D/(eta_c G sqrt(t)).
struct ConvexExpertState {
  Vector iterate;
  int round = 1;
  double eta_c = 0.0;
};

/// Sigma and its maintained inverse for an online Newton step.
///
/// The inverse follows Sherman-Morrison on every rank-1 update and is
/// recomputed from a Cholesky factorization every kRefactorInterval updates.
struct NewtonMatrix {
  static constexpr int kRefactorInterval = 512;

  Matrix sigma;
  Matrix sigma_inv;
  int updates_since_refactor = 0;

  static NewtonMatrix Scaled(int dim, double diag);
  void rank_one_update(const Vector& v);
  void refactor();
};

/// Online Newton step on the l-surrogate.
struct ONSExpertState {
  Vector iterate;
  double eta = 0.0;
  double beta = 0.0;   // 1/2 min{1/(4 G_ell D), 1}
  double g_ell = 0.0;  // 7/(25 D), bound on ||grad l||
  NewtonMatrix newton;
};

/// Projected OGD on the s-surrogate with step 1/(2 eta^2 G^2 t).
struct SCExpertState {
  Vector iterate;
  double eta = 0.0;
  int round = 1;
};

ConvexExpertState make_convex_expert(const Problem& problem, double eta_c);
ONSExpertState make_ons_expert(const Problem& problem, double eta);
SCExpertState make_sc_expert(const Problem& problem, double eta);

ConvexExpertState convex_expert_step(const ConvexExpertState& state, const SurrogateContext& ctx,
                                     const Problem& problem);
ONSExpertState ons_expert_step(const ONSExpertState& state, const SurrogateContext& ctx,
                               const Problem& problem);
SCExpertState sc_expert_step(const SCExpertState& state, const SurrogateContext& ctx,
                             const Problem& problem);

double convex_step_size(double D, double G, int t);
double sc_step_size(double eta, double G, int t);

using ExpertState = std::variant<ConvexExpertState, ONSExpertState, SCExpertState>;

SurrogateKind expert_kind(const ExpertState& state);
const Vector& expert_point(const ExpertState& state);
double expert_eta(const ExpertState& state);
/// Dispatches to the matching *_step. ctx must carry the expert's own eta.
ExpertState expert_step(const ExpertState& state, const SurrogateContext& ctx, const Problem& problem);

/// Regret of one expert on its own surrogate stream against the worst fixed
/// comparator, with the bound it is expected to respect:
/// s-expert 1 + ln T, l-expert 10 d ln T, c-expert 3/4.
struct ExpertRegretReport {
  SurrogateKind kind = SurrogateKind::kLinear;
  double eta = 0.0;
  double regret = 0.0;
  double bound = 0.0;
  Vector comparator;
  bool violated = false;
};

double expert_regret_bound(SurrogateKind kind, int d, int T);

/// contexts[t] carries round t's (x_t, g_t) at this expert's eta and
/// points[t] the expert's iterate x^e_t. The comparator minimizes the summed
/// surrogate over the set by projected gradient descent (10,000 iterations).
ExpertRegretReport expert_regret_certificate(SurrogateKind kind,
                                             const std::vector<SurrogateContext>& contexts,
                                             const std::vector<Vector>& points,
                                             const Problem& problem);

}  // namespace maler
