#include "maler/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace maler {

void require_dim(const Vector& v, int dim, const char* what) {
  if (v.size() != dim) {
    throw InvalidArgument(std::string(what) + ": expected dimension " + std::to_string(dim) +
                          ", got " + std::to_string(v.size()));
  }
}

void ProblemParams::validate() const {
  if (horizon_T < 1) throw InvalidArgument("horizon T must be >= 1");
  if (dim_d < 1) throw InvalidArgument("dimension d must be >= 1");
  if (!(grad_bound_G > 0.0) || !std::isfinite(grad_bound_G))
    throw InvalidArgument("gradient bound G must be positive and finite");
  if (!(diameter_D > 0.0) || !std::isfinite(diameter_D))
    throw InvalidArgument("diameter D must be positive and finite");
}

DecisionSet DecisionSet::Ball(Vector center, double radius) {
  if (center.size() < 1) throw InvalidArgument("ball: dimension must be >= 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball: radius must be positive");
  if (!center.allFinite()) throw InvalidArgument("ball: non-finite center");
  if (center.norm() > radius * (1.0 + kBoundaryTol)) {
    throw InvalidArgument("ball: decision set must contain the origin");
  }
  return DecisionSet(Shape::kBall, std::move(center), Vector(), radius);
}

DecisionSet DecisionSet::Box(Vector lower, Vector upper) {
  if (lower.size() < 1 || lower.size() != upper.size())
    throw InvalidArgument("box: lower/upper dimension mismatch");
  if (!lower.allFinite() || !upper.allFinite()) throw InvalidArgument("box: non-finite bounds");
  if ((lower.array() > upper.array()).any()) throw InvalidArgument("box: empty (lower > upper)");
  if ((lower.array() > 0.0).any() || (upper.array() < 0.0).any())
    throw InvalidArgument("box: decision set must contain the origin");
  return DecisionSet(Shape::kBox, std::move(lower), std::move(upper), 0.0);
}

const Vector& DecisionSet::center() const {
  if (!is_ball()) throw UnsupportedOperation("center() on a box");
  return a_;
}

double DecisionSet::radius() const {
  if (!is_ball()) throw UnsupportedOperation("radius() on a box");
  return radius_;
}

const Vector& DecisionSet::lower() const {
  if (is_ball()) throw UnsupportedOperation("lower() on a ball");
  return a_;
}

const Vector& DecisionSet::upper() const {
  if (is_ball()) throw UnsupportedOperation("upper() on a ball");
  return b_;
}

double DecisionSet::diameter() const {
  return is_ball() ? 2.0 * radius_ : (b_ - a_).norm();
}

namespace {

bool inside_ball(double dist, double radius) {
  return dist <= radius + kBoundaryTol * std::max(1.0, radius);
}

}  // namespace

bool contains(const DecisionSet& set, const Vector& x) {
  require_dim(x, set.dim(), "contains");
  if (set.is_ball()) return inside_ball((x - set.center()).norm(), set.radius());
  return ((x.array() >= set.lower().array() - kBoundaryTol) &&
          (x.array() <= set.upper().array() + kBoundaryTol))
      .all();
}

Vector project_euclidean(const DecisionSet& set, const Vector& y) {
  require_dim(y, set.dim(), "project_euclidean");
  if (set.is_ball()) {
    const Vector z = y - set.center();
    const double dist = z.norm();
    if (inside_ball(dist, set.radius())) return y;
    return set.center() + (set.radius() / dist) * z;
  }
  return y.cwiseMax(set.lower()).cwiseMin(set.upper());
}

WeightedProjection project_weighted_detailed(const DecisionSet& set, const Matrix& H,
                                             const Vector& y) {
  const int d = set.dim();
  require_dim(y, d, "project_weighted");
  if (H.rows() != d || H.cols() != d) throw InvalidArgument("project_weighted: H must be d x d");
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidArgument("project_weighted: H is not symmetric");
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success) throw InvalidArgument("project_weighted: H is not positive definite");

  if (contains(set, y)) return {y, 0.0, 0.0, 0};
  if (!set.is_ball()) throw UnsupportedOperation("weighted projection onto a box is not supported");

  const Vector& c = set.center();
  const double r = set.radius();
  const Vector z = y - c;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
  const Vector& lambda = eig.eigenvalues();
  const Vector w = eig.eigenvectors().transpose() * (H * z);

  auto radius_at = [&](double mu) {
    return (w.array() / (lambda.array() + mu)).matrix().norm();
  };

  const double tol = 1e-10 * std::max(1.0, r);
  double lo = 0.0;
  double hi = w.norm() / r;
  double hi_radius = radius_at(hi);
  bool converged = std::abs(hi_radius - r) <= tol;
  int it = 0;
  for (; it < 200 && !converged; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      // Bracket collapsed to adjacent doubles; nothing left to refine.
      converged = true;
      break;
    }
    const double rm = radius_at(mid);
    if (rm > r) {
      lo = mid;
    } else {
      hi = mid;
      hi_radius = rm;
    }
    converged = std::abs(hi_radius - r) <= tol;
  }

  // hi always keeps the iterate inside the ball.
  const double mu = hi;
  Vector x = c + eig.eigenvectors() * (w.array() / (lambda.array() + mu)).matrix();
  const double residual = (H * (x - y) + mu * (x - c)).norm();
  if (!converged) {
    throw ProjectionError("project_weighted: bisection did not converge, radius gap " +
                              std::to_string(std::abs(hi_radius - r)),
                          residual);
  }
  if (!contains(set, x)) x = project_euclidean(set, x);
  return {std::move(x), mu, residual, it};
}

Problem::Problem(ProblemParams p, DecisionSet s) : params(p), set(std::move(s)) {
  params.validate();
  if (set.dim() != params.dim_d) throw InvalidArgument("problem: set dimension does not match d");
  const double actual = set.diameter();
  if (std::abs(actual - params.diameter_D) > 1e-9 * params.diameter_D) {
    throw InvalidArgument("problem: D = " + std::to_string(params.diameter_D) +
                          " does not match set diameter " + std::to_string(actual));
  }
}

AssumptionReport validate_assumptions(const ProblemParams& params, const DecisionSet& set,
                                      const std::vector<GradientSample>& samples) {
  AssumptionReport report;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double n = samples[i].gradient.norm();
    if (n > params.grad_bound_G * (1.0 + 1e-9)) report.gradient_violations.push_back({i, n});
  }
  report.measured_diameter = set.diameter();
  report.declared_diameter = params.diameter_D;
  report.diameter_ok =
      std::abs(report.measured_diameter - params.diameter_D) <= 1e-9 * params.diameter_D;
  return report;
}

Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                                  double h) {
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = xp[i];
    xp[i] = orig + h;
    const double fp = f(xp);
    xp[i] = orig - h;
    const double fm = f(xp);
    xp[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double relative_error(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

MinimizeResult minimize_over_set(const std::function<double(const Vector&)>& value,
                                 const std::function<Vector(const Vector&)>& gradient,
                                 const DecisionSet& set, const Vector& start,
                                 const MinimizeOptions& options) {
  Vector x = project_euclidean(set, start);
  Vector best = x;
  double best_value = value(x);
  for (int k = 1; k <= options.iterations; ++k) {
    const double step = options.fixed_step > 0.0
                            ? options.fixed_step
                            : 1.0 / (options.lipschitz * std::sqrt(static_cast<double>(k)));
    x = project_euclidean(set, x - step * gradient(x));
    const double v = value(x);
    if (v < best_value) {
      best_value = v;
      best = x;
    }
  }
  const double L = options.fixed_step > 0.0 ? 1.0 / options.fixed_step : options.lipschitz;
  const Vector mapped = project_euclidean(set, best - gradient(best) / L);
  return {best, best_value, L * (best - mapped).norm()};
}

}  // namespace maler
