#include "maler/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace maler {

void LinearLoss::accumulate(Matrix&, Vector& b, double&) const { b += g_; }

void SquaredDistanceLoss::accumulate(Matrix& Q, Vector& b, double& c) const {
  Q.diagonal().array() += 0.5 * lambda_;
  b -= lambda_ * a_;
  c += 0.5 * lambda_ * a_.squaredNorm();
}

RidgeBatchLoss::RidgeBatchLoss(Matrix features, Vector labels, double lambda)
    : X_(std::move(features)), y_(std::move(labels)), lambda_(lambda) {
  if (X_.rows() != y_.size() || X_.rows() == 0) throw InvalidArgument("ridge: need one label per row");
  if (lambda_ < 0.0) throw InvalidArgument("ridge: lambda must be non-negative");
}

double RidgeBatchLoss::value(const Vector& w) const {
  require_dim(w, dim(), "ridge");
  return (X_ * w - y_).squaredNorm() / static_cast<double>(X_.rows()) + lambda_ * w.squaredNorm();
}

Vector RidgeBatchLoss::gradient(const Vector& w) const {
  require_dim(w, dim(), "ridge");
  const double n = static_cast<double>(X_.rows());
  return (2.0 / n) * (X_.transpose() * (X_ * w - y_)) + 2.0 * lambda_ * w;
}

void RidgeBatchLoss::accumulate(Matrix& Q, Vector& b, double& c) const {
  const double n = static_cast<double>(X_.rows());
  Q.noalias() += X_.transpose() * X_ / n;
  Q.diagonal().array() += lambda_;
  b -= (2.0 / n) * (X_.transpose() * y_);
  c += y_.squaredNorm() / n;
}

double RidgeBatchLoss::gradient_bound(double radius) const {
  const double n = static_cast<double>(X_.rows());
  const Matrix gram = X_.transpose() * X_;
  const double top = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  return ((2.0 / n) * top + 2.0 * lambda_) * radius + (2.0 / n) * (X_.transpose() * y_).norm();
}

LogisticBatchLoss::LogisticBatchLoss(SparseMatrix features, Vector labels, double alpha)
    : X_(std::move(features)), y_(std::move(labels)), alpha_(alpha) {
  if (X_.rows() != y_.size() || X_.rows() == 0) throw InvalidArgument("logistic: need one label per row");
}

namespace {

// log(1 + exp(-z))
double softplus_neg(double z) { return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }

// 1 / (1 + exp(z))
double sigmoid_neg(double z) {
  if (z >= 0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

}  // namespace

double LogisticBatchLoss::value(const Vector& w) const {
  require_dim(w, dim(), "logistic");
  const Vector margins = (X_ * w).cwiseProduct(y_);
  double total = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) total += softplus_neg(margins[i]);
  return total / static_cast<double>(X_.rows());
}

Vector LogisticBatchLoss::gradient(const Vector& w) const {
  require_dim(w, dim(), "logistic");
  const Vector margins = (X_ * w).cwiseProduct(y_);
  Vector coef(margins.size());
  for (Eigen::Index i = 0; i < margins.size(); ++i) coef[i] = -y_[i] * sigmoid_neg(margins[i]);
  return (X_.transpose() * coef) / static_cast<double>(X_.rows());
}

double LogisticBatchLoss::gradient_bound() const {
  double total = 0.0;
  for (Eigen::Index i = 0; i < X_.rows(); ++i) total += X_.row(i).norm();
  return total / static_cast<double>(X_.rows());
}

double logistic_exp_concavity(double radius, double max_norm) { return std::exp(-radius * max_norm); }

Vector uniform_in_ball(int d, double radius, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector v(d);
  double n = 0.0;
  do {
    for (int i = 0; i < d; ++i) v[i] = normal(rng);
    n = v.norm();
  } while (n == 0.0);
  const double r = radius * std::pow(unif(rng), 1.0 / d);
  return v * (r / n);
}

TaskInstance gen_regression(const RegressionConfig& cfg, Rng& rng) {
  if (cfg.T < 1 || cfg.d < 1 || cfg.n < 1) throw InvalidArgument("regression: T, d, n must be positive");
  if (!(cfg.noise_std >= 0.0)) throw InvalidArgument("regression: noise std must be non-negative");
  const Vector w_star = uniform_in_ball(cfg.d, cfg.w_star_radius, rng);
  std::normal_distribution<double> noise(0.0, cfg.noise_std > 0.0 ? cfg.noise_std : 1.0);

  std::vector<LossPtr> losses;
  losses.reserve(cfg.T);
  double G = 0.0;
  for (int t = 0; t < cfg.T; ++t) {
    Matrix X(cfg.n, cfg.d);
    Vector y(cfg.n);
    for (int i = 0; i < cfg.n; ++i) {
      X.row(i) = uniform_in_ball(cfg.d, cfg.feature_radius, rng).transpose();
      const double eps = noise(rng);
      y[i] = X.row(i).dot(w_star) + (cfg.noise_std > 0.0 ? eps : 0.0);
    }
    auto loss = std::make_shared<RidgeBatchLoss>(std::move(X), std::move(y), cfg.lambda);
    G = std::max(G, loss->gradient_bound(cfg.radius));
    losses.push_back(std::move(loss));
  }
  if (!(G > 0.0)) G = 1e-12;

  ProblemParams params{cfg.T, cfg.d, G, 2.0 * cfg.radius};
  return TaskInstance{Problem(params, DecisionSet::Ball(cfg.d, cfg.radius)), std::move(losses),
                      Curvature::StronglyConvex(2.0 * cfg.lambda), w_star};
}

TaskInstance make_classification(const LibsvmDataset& data, const ClassificationConfig& cfg, Rng& rng) {
  if (data.rows.empty()) throw InvalidArgument("classification: dataset is empty");
  if (cfg.T < 1 || cfg.n < 1) throw InvalidArgument("classification: T and n must be positive");
  const int d = std::max(cfg.dim, data.max_index);
  if (d < 1) throw InvalidArgument("classification: dataset has no features");

  double max_norm = 0.0;
  for (const auto& row : data.rows) {
    double sq = 0.0;
    for (const auto& [idx, v] : row.features) sq += v * v;
    max_norm = std::max(max_norm, std::sqrt(sq));
  }
  const double scale = max_norm > 0.0 ? 1.0 / max_norm : 1.0;

  std::vector<std::size_t> order(data.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  const double alpha = logistic_exp_concavity(cfg.radius, 1.0);
  std::vector<LossPtr> losses;
  losses.reserve(cfg.T);
  double G = 0.0;
  std::size_t cursor = 0;
  for (int t = 0; t < cfg.T; ++t) {
    std::vector<Eigen::Triplet<double>> triplets;
    Vector y(cfg.n);
    for (int i = 0; i < cfg.n; ++i) {
      const LibsvmRow& row = data.rows[order[cursor++ % order.size()]];
      y[i] = row.label;
      for (const auto& [idx, v] : row.features) {
        if (idx <= d) triplets.emplace_back(i, idx - 1, v * scale);
      }
    }
    SparseMatrix X(cfg.n, d);
    X.setFromTriplets(triplets.begin(), triplets.end());
    auto loss = std::make_shared<LogisticBatchLoss>(std::move(X), std::move(y), alpha);
    G = std::max(G, loss->gradient_bound());
    losses.push_back(std::move(loss));
  }
  if (!(G > 0.0)) G = 1e-12;

  ProblemParams params{cfg.T, d, G, 2.0 * cfg.radius};
  return TaskInstance{Problem(params, DecisionSet::Ball(d, cfg.radius)), std::move(losses),
                      Curvature::ExpConcave(alpha), Vector()};
}

void write_synthetic_libsvm(const std::string& path, int rows, int dim, int active, Rng& rng) {
  if (active < 1 || active > dim) throw InvalidArgument("synthetic libsvm: need 1 <= active <= dim");
  // One-hot groups, like a categorical census encoding.
  std::vector<int> group_start(active + 1);
  for (int g = 0; g <= active; ++g) group_start[g] = g * dim / active;
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector w(dim);
  for (int i = 0; i < dim; ++i) w[i] = normal(rng);
  const double bias = -0.8;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("synthetic libsvm: cannot write '" + path + "'");
  for (int r = 0; r < rows; ++r) {
    std::vector<int> idx;
    double score = bias;
    for (int g = 0; g < active; ++g) {
      std::uniform_int_distribution<int> pick(group_start[g], group_start[g + 1] - 1);
      const int j = pick(rng);
      idx.push_back(j + 1);
      score += w[j] / std::sqrt(static_cast<double>(active));
    }
    const int label = score + 0.5 * normal(rng) > 0.0 ? 1 : -1;
    out << (label > 0 ? "+1" : "-1");
    for (int j : idx) out << ' ' << j << ":1";
    out << '\n';
  }
}

}  // namespace maler
