#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace maler {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when the arguments of an operation disagree in dimension or violate
/// a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an operation is not defined for the given decision set shape.
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Thrown by the weighted projection when bisection does not reach tolerance.
class ProjectionError : public std::runtime_error {
 public:
  ProjectionError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Thrown when an observed gradient exceeds the declared bound G.
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemParams {
  int horizon_T = 1;
  int dim_d = 1;
  double grad_bound_G = 1.0;
  double diameter_D = 1.0;

  /// Throws InvalidArgument unless T >= 1, d >= 1, G > 0, D > 0.
  void validate() const;
};

/// Compact convex feasible region: a Euclidean ball or an axis-aligned box.
/// Always contains the origin, since every learner starts at x_1 = 0.
class DecisionSet {
 public:
  enum class Shape { kBall, kBox };

  static DecisionSet Ball(Vector center, double radius);
  static DecisionSet Ball(int dim, double radius) { return Ball(Vector::Zero(dim), radius); }
  static DecisionSet Box(Vector lower, Vector upper);

  Shape shape() const { return shape_; }
  bool is_ball() const { return shape_ == Shape::kBall; }
  int dim() const { return static_cast<int>(a_.size()); }

  // Ball accessors.
  const Vector& center() const;
  double radius() const;
  // Box accessors.
  const Vector& lower() const;
  const Vector& upper() const;

  double diameter() const;

 private:
  DecisionSet(Shape shape, Vector a, Vector b, double radius)
      : shape_(shape), a_(std::move(a)), b_(std::move(b)), radius_(radius) {}

  Shape shape_;
  Vector a_;  // center (ball) or lower corner (box)
  Vector b_;  // upper corner (box only)
  double radius_ = 0.0;
};

/// Boundary tolerance used by contains() and the projection interior tests.
inline constexpr double kBoundaryTol = 1e-12;

bool contains(const DecisionSet& set, const Vector& x);

/// argmin_{x in set} ||x - y||.
Vector project_euclidean(const DecisionSet& set, const Vector& y);

struct WeightedProjection {
  Vector point;
  double multiplier = 0.0;   // KKT multiplier of the ball constraint
  double kkt_residual = 0.0; // ||H(x - y) + mu (x - c)||
  int iterations = 0;
};

/// argmin_{x in set} (x - y)^T H (x - y) for symmetric positive-definite H.
///
/// Only ball sets are supported. For infeasible y the minimizer satisfies
/// (H + mu I)(x - c) = H (y - c) with mu >= 0 chosen so that ||x - c|| = r;
/// mu is located by bisection on the secular equation, with H diagonalized
/// once up front. Throws InvalidArgument if H is not SPD, UnsupportedOperation
/// for boxes, ProjectionError if bisection stalls above tolerance.
WeightedProjection project_weighted_detailed(const DecisionSet& set, const Matrix& H,
                                             const Vector& y);

inline Vector project_weighted(const DecisionSet& set, const Matrix& H, const Vector& y) {
  return project_weighted_detailed(set, H, y).point;
}

/// The learner's problem: parameters plus the decision set they describe.
/// Construction checks that D matches the set diameter and d the set dimension.
struct Problem {
  ProblemParams params;
  DecisionSet set;

  Problem(ProblemParams p, DecisionSet s);

  int T() const { return params.horizon_T; }
  int d() const { return params.dim_d; }
  double G() const { return params.grad_bound_G; }
  double D() const { return params.diameter_D; }
};

struct GradientSample {
  Vector point;
  Vector gradient;
};

struct AssumptionReport {
  struct Violation {
    std::size_t index;
    double norm;
  };
  std::vector<Violation> gradient_violations;
  double measured_diameter = 0.0;
  double declared_diameter = 0.0;
  bool diameter_ok = false;

  bool ok() const { return gradient_violations.empty() && diameter_ok; }
};

AssumptionReport validate_assumptions(const ProblemParams& params, const DecisionSet& set,
                                      const std::vector<GradientSample>& samples);

/// Curvature class a loss declares about itself.
struct Curvature {
  enum class Kind { kConvex, kStronglyConvex, kExpConcave };
  Kind kind = Kind::kConvex;
  double modulus = 0.0;  // lambda or alpha

  static Curvature Convex() { return {}; }
  static Curvature StronglyConvex(double lambda) { return {Kind::kStronglyConvex, lambda}; }
  static Curvature ExpConcave(double alpha) { return {Kind::kExpConcave, alpha}; }
};

/// A single round's loss function f_t.
class LossOracle {
 public:
  virtual ~LossOracle() = default;
  virtual int dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual Curvature declared_class() const { return Curvature::Convex(); }
};

using LossPtr = std::shared_ptr<const LossOracle>;

/// Central finite-difference gradient of f at x with step h.
Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                                  double h = 1e-6);

/// ||a - b|| / max(1, ||b||).
double relative_error(const Vector& a, const Vector& b);

/// Projected gradient minimization of a smooth convex function over a set.
struct MinimizeOptions {
  int iterations = 10000;
  /// Fixed step when > 0, otherwise 1/(L * sqrt(k)) with L the supplied
  /// Lipschitz estimate of the gradient.
  double fixed_step = 0.0;
  double lipschitz = 1.0;
};

struct MinimizeResult {
  Vector point;
  double value = 0.0;
  /// ||x - P(x - grad / L)|| * L at the returned point.
  double gradient_mapping_norm = 0.0;
};

MinimizeResult minimize_over_set(const std::function<double(const Vector&)>& value,
                                 const std::function<Vector(const Vector&)>& gradient,
                                 const DecisionSet& set, const Vector& start,
                                 const MinimizeOptions& options);

void require_dim(const Vector& v, int dim, const char* what);

}  // namespace maler
