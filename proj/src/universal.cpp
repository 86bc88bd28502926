#include "maler/universal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maler {

Vector Learner::predict() {
  if (round_ >= problem_.T())
    throw ProtocolError(name() + ": horizon of " + std::to_string(problem_.T()) + " rounds exhausted");
  awaiting_gradient_ = true;
  return current_play();
}

void Learner::observe(const Vector& gradient) {
  if (!awaiting_gradient_) throw ProtocolError(name() + ": observe() without a preceding predict()");
  require_dim(gradient, problem_.d(), "observe");
  if (!gradient.allFinite()) throw InvalidArgument(name() + ": non-finite gradient");
  const double norm = gradient.norm();
  if (norm > problem_.G() * (1.0 + 1e-9)) {
    throw AssumptionViolation(name() + ": round " + std::to_string(round_ + 1) + " gradient norm " +
                              std::to_string(norm) + " exceeds G = " + std::to_string(problem_.G()));
  }
  advance(gradient);
  awaiting_gradient_ = false;
  ++round_;
}

MetaLearner::MetaLearner(Problem problem, ExpertGrid grid, std::string name)
    : Learner(std::move(problem)), name_(std::move(name)), grid_(std::move(grid)) {
  const Problem& p = this->problem();
  if (grid_.horizon_T != p.T()) throw InvalidArgument("meta learner: grid built for a different T");
  experts_.reserve(grid_.size());
  for (const auto& slot : grid_.slots) {
    switch (slot.kind) {
      case SurrogateKind::kLinear: experts_.emplace_back(make_convex_expert(p, slot.eta)); break;
      case SurrogateKind::kEll: experts_.emplace_back(make_ons_expert(p, slot.eta)); break;
      case SurrogateKind::kStrong: experts_.emplace_back(make_sc_expert(p, slot.eta)); break;
    }
  }
  meta_ = init_meta(grid_, p.d());
  std::vector<Vector> points;
  for (const auto& e : experts_) points.push_back(expert_point(e));
  meta_.last_play = aggregate_play(meta_, grid_, points);
}

void MetaLearner::advance(const Vector& gradient) {
  const Problem& p = problem();
  RoundTrace rec;
  rec.t = round() + 1;
  rec.play = meta_.last_play;
  rec.grad = gradient;

  const std::size_t n = grid_.size();
  std::vector<SurrogateContext> contexts;
  contexts.reserve(n);
  rec.expert_points.reserve(n);
  rec.expert_losses.reserve(n);
  rec.play_losses.reserve(n);
  for (std::size_t e = 0; e < n; ++e) {
    const ExpertSlot& slot = grid_.slots[e];
    contexts.push_back(slot.kind == SurrogateKind::kLinear
                           ? SurrogateContext::Linear(rec.play, gradient, slot.eta, p.G(), p.D(), p.T())
                           : SurrogateContext::Curved(rec.play, gradient, slot.eta, p.G(), p.D()));
    const Vector& point = expert_point(experts_[e]);
    rec.expert_points.push_back(point);
    rec.expert_losses.push_back(surrogate_value(slot.kind, contexts[e], point));
    rec.play_losses.push_back(surrogate_value(slot.kind, contexts[e], rec.play));
  }

  meta_ = update_weights(meta_, grid_, rec.expert_losses);
  // Expert updates are independent given (x_t, g_t).
  for (std::size_t e = 0; e < n; ++e) experts_[e] = expert_step(experts_[e], contexts[e], p);

  std::vector<Vector> points;
  points.reserve(n);
  for (const auto& e : experts_) points.push_back(expert_point(e));
  meta_.last_play = aggregate_play(meta_, grid_, points);

  rec.log_weights = meta_.log_weights;
  rec.log_potential = meta_.log_potential;
  trace_.push_back(std::move(rec));
}

std::unique_ptr<MetaLearner> make_maler(const Problem& problem) {
  return std::make_unique<MetaLearner>(problem, build_grid(problem.params), "maler");
}

std::unique_ptr<MetaLearner> make_metagrad(const Problem& problem) {
  return std::make_unique<MetaLearner>(problem, build_metagrad_grid(problem.params), "metagrad");
}

RoundTrace maler_round(MetaLearner& learner, const std::function<Vector(const Vector&)>& gradient_oracle) {
  const Vector x = learner.predict();
  learner.observe(gradient_oracle(x));
  return learner.trace().back();
}

OgdLearner::OgdLearner(Problem problem, Mode mode, double lambda)
    : Learner(std::move(problem)), mode_(mode), lambda_(lambda) {
  if (mode_ == Mode::kStronglyConvex && !(lambda_ > 0.0))
    throw InvalidArgument("ogd-sc: strong convexity lambda must be positive");
  x_ = Vector::Zero(this->problem().d());
}

double OgdLearner::step_size(int t) const {
  if (mode_ == Mode::kConvex) return convex_step_size(problem().D(), problem().G(), t);
  return 1.0 / (lambda_ * t);
}

void OgdLearner::advance(const Vector& gradient) {
  x_ = project_euclidean(problem().set, x_ - step_size(round() + 1) * gradient);
}

OnsLearner::OnsLearner(Problem problem, double alpha) : Learner(std::move(problem)) {
  if (!(alpha > 0.0)) throw InvalidArgument("ons: alpha must be positive");
  const Problem& p = this->problem();
  if (!p.set.is_ball()) throw UnsupportedOperation("ons: requires a ball decision set");
  gamma_ = 0.5 * std::min(1.0 / (4.0 * p.G() * p.D()), alpha);
  newton_ = NewtonMatrix::Scaled(p.d(), 1.0 / (gamma_ * gamma_ * p.D() * p.D()));
  x_ = Vector::Zero(p.d());
}

void OnsLearner::advance(const Vector& gradient) {
  newton_.rank_one_update(gradient);
  const Vector target = x_ - (newton_.sigma_inv * gradient) / gamma_;
  x_ = project_weighted(problem().set, newton_.sigma, target);
}

const std::vector<std::string>& learner_names() {
  static const std::vector<std::string> names = {"maler", "metagrad", "ogd-convex", "ogd-sc", "ons"};
  return names;
}

std::unique_ptr<Learner> make_learner(const std::string& name, const Problem& problem,
                                      const LearnerOptions& options) {
  if (name == "maler") return make_maler(problem);
  if (name == "metagrad") return make_metagrad(problem);
  if (name == "ogd-convex") return std::make_unique<OgdLearner>(problem, OgdLearner::Mode::kConvex);
  if (name == "ogd-sc") {
    if (!options.strong_convexity) throw InvalidArgument("ogd-sc needs a strong convexity modulus");
    return std::make_unique<OgdLearner>(problem, OgdLearner::Mode::kStronglyConvex, *options.strong_convexity);
  }
  if (name == "ons") {
    return std::make_unique<OnsLearner>(
        problem, options.exp_concavity.value_or(std::numeric_limits<double>::infinity()));
  }
  throw InvalidArgument("unknown learner '" + name + "'");
}

double bound_constant_A(int T) {
  return meta_regret_constant(T) + 1.0 + std::log(static_cast<double>(T));
}

double bound_constant_B(int d, int T) {
  return meta_regret_constant(T) + 10.0 * d * std::log(static_cast<double>(T));
}

std::size_t RegretBoundReport::violations() const {
  return static_cast<std::size_t>(convex_violated) + exp_concave_violated + strongly_convex_violated +
         variation_order_violated;
}

RegretBoundReport regret_bound_certificate(const std::vector<RoundTrace>& trace,
                                    const std::vector<double>& comparator_losses,
                                    const Vector& comparator, const Problem& problem) {
  if (trace.size() != comparator_losses.size())
    throw InvalidArgument("regret_bounds: need one comparator loss per round");
  require_dim(comparator, problem.d(), "regret_bounds comparator");
  const double G = problem.G();
  const double D = problem.D();
  // The bounds are stated for the horizon the learner was tuned for.
  const int T = problem.T();

  RegretBoundReport r;
  auto& diag = r.diagnostics;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    if (std::isnan(trace[t].loss_value)) throw InvalidArgument("regret_bounds: trace lacks f_t(x_t)");
    diag.regret += trace[t].loss_value - comparator_losses[t];
    const Vector diff = trace[t].play - comparator;
    diag.V_s += G * G * diff.squaredNorm();
    const double h = diff.dot(trace[t].grad);
    diag.V_ell += h * h;
  }
  r.A = bound_constant_A(T);
  r.B = bound_constant_B(problem.d(), T);
  r.convex_bound = 2.0 * (1.0 + std::log(3.0)) * G * D * std::sqrt(static_cast<double>(T));
  r.exp_concave_bound = 3.0 * std::sqrt(diag.V_ell * r.B) + 10.0 * G * D * r.B;
  r.strongly_convex_bound = 3.0 * std::sqrt(diag.V_s * r.A) + 10.0 * G * D * r.A;
  auto exceeds = [](double value, double bound) { return value > bound + 1e-9 * std::max(1.0, bound); };
  r.convex_violated = exceeds(diag.regret, r.convex_bound);
  r.exp_concave_violated = exceeds(diag.regret, r.exp_concave_bound);
  r.strongly_convex_violated = exceeds(diag.regret, r.strongly_convex_bound);
  r.variation_order_violated = exceeds(diag.V_ell, diag.V_s);
  return r;
}

double strongly_convex_regret_bound(double G, double D, double lambda, int T) {
  return (10.0 * G * D + 9.0 * G * G / (2.0 * lambda)) * bound_constant_A(T);
}

double exp_concave_regret_bound(double G, double D, double alpha, int d, int T) {
  const double beta = 0.5 * std::min(alpha, 1.0 / (4.0 * G * D));
  return (10.0 * G * D + 9.0 / (2.0 * beta)) * bound_constant_B(d, T);
}

std::vector<ExpertRegretReport> expert_certificates(const std::vector<RoundTrace>& trace,
                                                    const ExpertGrid& grid, const Problem& problem) {
  std::vector<ExpertRegretReport> out;
  for (std::size_t e = 0; e < grid.size(); ++e) {
    const ExpertSlot& slot = grid.slots[e];
    std::vector<SurrogateContext> contexts;
    std::vector<Vector> points;
    contexts.reserve(trace.size());
    points.reserve(trace.size());
    for (const auto& r : trace) {
      contexts.push_back(slot.kind == SurrogateKind::kLinear
                             ? SurrogateContext::Linear(r.play, r.grad, slot.eta, problem.G(),
                                                        problem.D(), problem.T())
                             : SurrogateContext::Curved(r.play, r.grad, slot.eta, problem.G(), problem.D()));
      points.push_back(r.expert_points.at(e));
    }
    out.push_back(expert_regret_certificate(slot.kind, contexts, points, problem));
  }
  return out;
}

}  // namespace maler
