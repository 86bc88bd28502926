#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "maler/core.hpp"
#include "maler/experts.hpp"
#include "maler/meta.hpp"

namespace maler {

class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Online learner driven by the predict/observe protocol. predict() may be
/// called any number of times within a round and always returns the same
/// vector; observe() must follow a predict() and advances exactly one round.
/// Gradients with ||g|| > G are rejected with AssumptionViolation, never
/// clipped.
class Learner {
 public:
  explicit Learner(Problem problem) : problem_(std::move(problem)) {}
  virtual ~Learner() = default;

  Vector predict();
  void observe(const Vector& gradient);

  virtual std::string name() const = 0;
  /// Rounds completed so far.
  int round() const { return round_; }
  const Problem& problem() const { return problem_; }

 protected:
  virtual Vector current_play() const = 0;
  virtual void advance(const Vector& gradient) = 0;

 private:
  Problem problem_;
  int round_ = 0;
  bool awaiting_gradient_ = false;
};

/// Tilted exponentially weighted aggregation over a grid of experts. With the
/// full grid this is Maler; with l-experts only it is the MetaGrad baseline.
class MetaLearner : public Learner {
 public:
  MetaLearner(Problem problem, ExpertGrid grid, std::string name);

  std::string name() const override { return name_; }
  const ExpertGrid& grid() const { return grid_; }
  const MetaState& meta() const { return meta_; }
  const std::vector<ExpertState>& experts() const { return experts_; }
  const std::vector<RoundTrace>& trace() const { return trace_; }

 protected:
  Vector current_play() const override { return meta_.last_play; }
  void advance(const Vector& gradient) override;

 private:
  std::string name_;
  ExpertGrid grid_;
  MetaState meta_;
  std::vector<ExpertState> experts_;
  std::vector<RoundTrace> trace_;
};

std::unique_ptr<MetaLearner> make_maler(const Problem& problem);
std::unique_ptr<MetaLearner> make_metagrad(const Problem& problem);

/// Runs one round: predict, query the oracle at x_t, observe. Returns the
/// round's trace record.
RoundTrace maler_round(MetaLearner& learner, const std::function<Vector(const Vector&)>& gradient_oracle);

/// Projected OGD on the true gradients: step D/(G sqrt(t)) or 1/(lambda t).
class OgdLearner : public Learner {
 public:
  enum class Mode { kConvex, kStronglyConvex };
  OgdLearner(Problem problem, Mode mode, double lambda = 0.0);

  std::string name() const override { return mode_ == Mode::kConvex ? "ogd-convex" : "ogd-sc"; }
  double step_size(int t) const;

 protected:
  Vector current_play() const override { return x_; }
  void advance(const Vector& gradient) override;

 private:
  Mode mode_;
  double lambda_;
  Vector x_;
};

/// Online Newton step on the true gradients with gamma = 1/2 min{1/(4GD), alpha}
/// and A_1 = I / (gamma^2 D^2).
class OnsLearner : public Learner {
 public:
  OnsLearner(Problem problem, double alpha);

  std::string name() const override { return "ons"; }
  double gamma() const { return gamma_; }

 protected:
  Vector current_play() const override { return x_; }
  void advance(const Vector& gradient) override;

 private:
  double gamma_;
  NewtonMatrix newton_;
  Vector x_;
};

struct LearnerOptions {
  std::optional<double> strong_convexity;  // lambda for ogd-sc
  std::optional<double> exp_concavity;     // alpha for ons; unbounded when absent
};

/// Names: maler, metagrad, ogd-convex, ogd-sc, ons.
std::unique_ptr<Learner> make_learner(const std::string& name, const Problem& problem,
                                      const LearnerOptions& options = {});

const std::vector<std::string>& learner_names();

struct RegretDiagnostics {
  double regret = 0.0;
  double V_s = 0.0;    // G^2 sum ||x_t - x_*||^2
  double V_ell = 0.0;  // sum ((x_t - x_*)^T g_t)^2
};

/// A = meta constant + 1 + ln T
double bound_constant_A(int T);
/// B = meta constant + 10 d ln T
double bound_constant_B(int d, int T);

struct RegretBoundReport {
  RegretDiagnostics diagnostics;
  double A = 0.0;
  double B = 0.0;
  double convex_bound = 0.0;            // 2(1 + ln 3) G D sqrt(T)
  double exp_concave_bound = 0.0;       // 3 sqrt(V_ell B) + 10 G D B
  double strongly_convex_bound = 0.0;   // 3 sqrt(V_s A) + 10 G D A
  bool convex_violated = false;
  bool exp_concave_violated = false;
  bool strongly_convex_violated = false;
  bool variation_order_violated = false;  // V_ell > V_s
  std::size_t violations() const;
};

/// trace[t].loss_value must hold f_t(x_t); comparator_losses[t] holds f_t(x_*).
RegretBoundReport regret_bound_certificate(const std::vector<RoundTrace>& trace,
                                    const std::vector<double>& comparator_losses,
                                    const Vector& comparator, const Problem& problem);

/// (10GD + 9G^2/(2 lambda)) A
double strongly_convex_regret_bound(double G, double D, double lambda, int T);
/// (10GD + 9/(2 beta)) B with beta = 1/2 min{alpha, 1/(4GD)}
double exp_concave_regret_bound(double G, double D, double alpha, int d, int T);

/// Expert-regret certificates for every expert of a meta learner's trace.
std::vector<ExpertRegretReport> expert_certificates(const std::vector<RoundTrace>& trace,
                                                    const ExpertGrid& grid, const Problem& problem);

}  // namespace maler
