#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "maler/core.hpp"
#include "maler/libsvm.hpp"

namespace maler {

using Rng = std::mt19937_64;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Losses whose value is x^T Q x + b^T x + c. Sums of such losses collapse to
/// a single quadratic, which keeps the offline comparator cheap.
class QuadraticForm {
 public:
  virtual ~QuadraticForm() = default;
  virtual void accumulate(Matrix& Q, Vector& b, double& c) const = 0;
};

/// f(x) = g^T x
class LinearLoss final : public LossOracle, public QuadraticForm {
 public:
  explicit LinearLoss(Vector g) : g_(std::move(g)) {}
  int dim() const override { return static_cast<int>(g_.size()); }
  double value(const Vector& x) const override { return g_.dot(x); }
  Vector gradient(const Vector&) const override { return g_; }
  void accumulate(Matrix& Q, Vector& b, double& c) const override;

 private:
  Vector g_;
};

/// f(x) = (lambda/2) ||x - a||^2, lambda-strongly convex.
class SquaredDistanceLoss final : public LossOracle, public QuadraticForm {
 public:
  SquaredDistanceLoss(Vector a, double lambda) : a_(std::move(a)), lambda_(lambda) {}
  int dim() const override { return static_cast<int>(a_.size()); }
  double value(const Vector& x) const override { return 0.5 * lambda_ * (x - a_).squaredNorm(); }
  Vector gradient(const Vector& x) const override { return lambda_ * (x - a_); }
  Curvature declared_class() const override { return Curvature::StronglyConvex(lambda_); }
  void accumulate(Matrix& Q, Vector& b, double& c) const override;

 private:
  Vector a_;
  double lambda_;
};

/// Mini-batch ridge loss (1/n) sum_i (w^T x_i - y_i)^2 + lambda ||w||^2.
class RidgeBatchLoss final : public LossOracle, public QuadraticForm {
 public:
  RidgeBatchLoss(Matrix features, Vector labels, double lambda);
  int dim() const override { return static_cast<int>(X_.cols()); }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  /// Hessian is (2/n) X^T X + 2 lambda I >= 2 lambda I.
  Curvature declared_class() const override { return Curvature::StronglyConvex(2.0 * lambda_); }
  void accumulate(Matrix& Q, Vector& b, double& c) const override;

  /// max over ||w|| <= radius of ||gradient(w)||, bounded via the spectral norm.
  double gradient_bound(double radius) const;
  const Matrix& features() const { return X_; }
  const Vector& labels() const { return y_; }

 private:
  Matrix X_;  // n x d
  Vector y_;
  double lambda_;
};

/// Mini-batch logistic loss (1/n) sum_i log(1 + exp(-y_i w^T x_i)).
class LogisticBatchLoss final : public LossOracle {
 public:
  /// alpha is the exp-concavity modulus the caller certifies for the domain.
  LogisticBatchLoss(SparseMatrix features, Vector labels, double alpha);
  int dim() const override { return static_cast<int>(X_.cols()); }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  Curvature declared_class() const override { return Curvature::ExpConcave(alpha_); }

  /// (1/n) sum_i ||x_i||, an upper bound on ||gradient|| everywhere.
  double gradient_bound() const;

 private:
  SparseMatrix X_;
  Vector y_;
  double alpha_;
};

/// exp-concavity of the logistic loss on {||w|| <= radius} for ||x|| <= max_norm.
double logistic_exp_concavity(double radius, double max_norm);

/// Uniform sample from the d-ball of the given radius centered at the origin.
Vector uniform_in_ball(int d, double radius, Rng& rng);

/// A generated online problem: the decision set, its parameters, and one
/// loss per round.
struct TaskInstance {
  Problem problem;
  std::vector<LossPtr> losses;
  Curvature curvature;
  Vector w_star;  // regression only
};

struct RegressionConfig {
  int T = 200;
  int d = 50;
  int n = 200;
  double lambda = 0.001;
  double noise_std = 0.1;
  double radius = 0.5;
  double w_star_radius = 0.5;
  double feature_radius = 5.0;
};

/// Ridge regression stream. G is the largest per-round gradient bound over
/// the decision ball; D = 2 radius.
TaskInstance gen_regression(const RegressionConfig& config, Rng& rng);

struct ClassificationConfig {
  int T = 100;
  int n = 200;
  double radius = 0.5;
  int dim = 0;  // 0: take the largest feature index in the data
};

/// Rows shuffled by rng and cut into T batches of n (cycling when the file is
/// short). Features are divided by the largest row norm so all lie in the
/// unit ball.
TaskInstance make_classification(const LibsvmDataset& data, const ClassificationConfig& config, Rng& rng);

/// Writes a synthetic sparse binary-feature dataset in LIBSVM format.
void write_synthetic_libsvm(const std::string& path, int rows, int dim, int active, Rng& rng);

}  // namespace maler
