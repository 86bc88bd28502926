#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "maler/experiment.hpp"
#include "maler/libsvm.hpp"
#include "maler/tasks.hpp"
#include "maler/trace_io.hpp"

namespace maler {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("maler_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Ridge, SingleExample) {
  Matrix X = Matrix::Zero(1, 3);
  X(0, 0) = 1.0;
  RidgeBatchLoss f(X, Vector::Zero(1), 0.0);
  const Vector w = Vector::Unit(3, 0);
  EXPECT_DOUBLE_EQ(f.value(w), 1.0);
  EXPECT_EQ(f.gradient(w), 2.0 * Vector::Unit(3, 0));
}

TEST(Ridge, GradientMatchesFiniteDifferences) {
  Rng rng(41);
  RegressionConfig cfg;
  cfg.T = 5;
  cfg.d = 8;
  cfg.n = 20;
  const auto task = gen_regression(cfg, rng);
  for (int i = 0; i < 1000; ++i) {
    const auto& f = *task.losses[i % task.losses.size()];
    const Vector w = uniform_in_ball(8, 0.5, rng);
    auto val = [&](const Vector& x) { return f.value(x); };
    ASSERT_LE(relative_error(f.gradient(w), finite_difference_gradient(val, w)), 1e-6);
  }
}

TEST(Ridge, GradientBoundHoldsOnBall) {
  Rng rng(42);
  RegressionConfig cfg;
  cfg.T = 10;
  cfg.d = 6;
  cfg.n = 30;
  const auto task = gen_regression(cfg, rng);
  EXPECT_DOUBLE_EQ(task.problem.D(), 1.0);
  for (int i = 0; i < 2000; ++i) {
    const Vector w = uniform_in_ball(6, 0.5, rng);
    ASSERT_LE(task.losses[i % 10]->gradient(w).norm(), task.problem.G());
  }
  EXPECT_EQ(task.curvature.kind, Curvature::Kind::kStronglyConvex);
  EXPECT_DOUBLE_EQ(task.curvature.modulus, 2.0 * cfg.lambda);
}

TEST(Ridge, SameSeedSameStream) {
  RegressionConfig cfg;
  cfg.T = 4;
  cfg.d = 3;
  cfg.n = 5;
  Rng a(7), b(7);
  const auto ta = gen_regression(cfg, a);
  const auto tb = gen_regression(cfg, b);
  EXPECT_EQ(ta.w_star, tb.w_star);
  const Vector w = Vector::Constant(3, 0.1);
  for (int t = 0; t < 4; ++t) EXPECT_EQ(ta.losses[t]->value(w), tb.losses[t]->value(w));
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  Rng rng(43);
  const fs::path dir = scratch_dir("logistic_fd");
  write_synthetic_libsvm((dir / "d.svm").string(), 300, 20, 4, rng);
  ClassificationConfig cfg;
  cfg.T = 10;
  cfg.n = 30;
  const auto task = make_classification(parse_libsvm((dir / "d.svm").string()), cfg, rng);
  const int d = task.problem.d();
  for (int i = 0; i < 1000; ++i) {
    const auto& f = *task.losses[i % 10];
    const Vector w = uniform_in_ball(d, 0.5, rng);
    auto val = [&](const Vector& x) { return f.value(x); };
    ASSERT_LE(relative_error(f.gradient(w), finite_difference_gradient(val, w)), 1e-6);
    ASSERT_LE(f.gradient(w).norm(), task.problem.G() * (1 + 1e-12));
  }
  EXPECT_EQ(task.curvature.kind, Curvature::Kind::kExpConcave);
  EXPECT_NEAR(task.curvature.modulus, std::exp(-0.5), 1e-15);
}

TEST(Logistic, ExpConcavityOnBall) {
  // exp(-alpha f) concave along random lines: second difference <= 0
  Rng rng(44);
  const double r = 0.5;
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    SparseMatrix X(3, 4);
    std::vector<Eigen::Triplet<double>> trip;
    for (int row = 0; row < 3; ++row)
      for (int c = 0; c < 4; ++c) trip.emplace_back(row, c, n(rng) / 2.0);
    X.setFromTriplets(trip.begin(), trip.end());
    double max_norm = 0.0;
    for (int row = 0; row < 3; ++row) max_norm = std::max(max_norm, X.row(row).norm());
    Vector y(3);
    y << 1, -1, 1;
    const double alpha = logistic_exp_concavity(r, max_norm);
    LogisticBatchLoss f(X, y, alpha);
    const Vector a = uniform_in_ball(4, r, rng), b = uniform_in_ball(4, r, rng);
    auto h = [&](double s) { return std::exp(-alpha * f.value(a + s * (b - a))); };
    for (double s = 0.05; s < 0.96; s += 0.05) {
      const double eps = 1e-3;
      ASSERT_LE(h(s - eps) - 2 * h(s) + h(s + eps), 1e-12);
    }
  }
}

TEST(Libsvm, ParseExamples) {
  const auto data = parse_libsvm_text("+1 3:0.5 7:1\n-1\n");
  ASSERT_EQ(data.rows.size(), 2u);
  EXPECT_EQ(data.rows[0].label, 1);
  ASSERT_EQ(data.rows[0].features.size(), 2u);
  EXPECT_EQ(data.rows[0].features[0], std::make_pair(3, 0.5));
  EXPECT_EQ(data.rows[0].features[1], std::make_pair(7, 1.0));
  EXPECT_EQ(data.rows[1].label, -1);
  EXPECT_TRUE(data.rows[1].features.empty());
  EXPECT_EQ(data.max_index, 7);
  EXPECT_EQ(parse_libsvm_text("0 1:2\n").rows[0].label, -1);
  EXPECT_EQ(parse_libsvm_text("# header\n\n1 2:1 # trailing\n").rows.size(), 1u);
}

TEST(Libsvm, ParseErrorsCarryLine) {
  try {
    parse_libsvm_text("+1 1:1\n1 2:x\n");
    FAIL() << "expected a parse error";
  } catch (const LibsvmParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_libsvm_text("1 0:1\n"), LibsvmParseError);
  EXPECT_THROW(parse_libsvm_text("1 -3:1\n"), LibsvmParseError);
  EXPECT_THROW(parse_libsvm_text("1 2:1 2:3\n"), LibsvmParseError);
  EXPECT_THROW(parse_libsvm_text("2 1:1\n"), LibsvmParseError);
  EXPECT_THROW(parse_libsvm_text("1 1\n"), LibsvmParseError);
  EXPECT_THROW(parse_libsvm("/nonexistent/file.svm"), std::runtime_error);
}

TEST(Libsvm, RoundTripIsCanonical) {
  Rng rng(45);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_int_distribution<int> idx(1, 50);
  for (int trial = 0; trial < 100; ++trial) {
    std::ostringstream os;
    for (int r = 0; r < 10; ++r) {
      os << (idx(rng) % 2 ? "+1" : "0");
      std::vector<int> used;
      for (int k = 0; k < 5; ++k) {
        const int j = idx(rng);
        if (std::find(used.begin(), used.end(), j) != used.end()) continue;
        used.push_back(j);
        os << ' ' << j << ':' << u(rng);
      }
      os << '\n';
    }
    const auto first = parse_libsvm_text(os.str());
    const std::string canon = serialize_libsvm(first);
    const auto second = parse_libsvm_text(canon);
    ASSERT_EQ(serialize_libsvm(second), canon);
    ASSERT_EQ(second.rows.size(), first.rows.size());
    for (std::size_t r = 0; r < first.rows.size(); ++r) {
      ASSERT_EQ(second.rows[r].label, first.rows[r].label);
      ASSERT_EQ(second.rows[r].features, first.rows[r].features);
    }
  }
}

TEST(Comparator, QuadraticAndLinear) {
  Vector a(3);
  a << 0.1, -0.2, 0.3;
  std::vector<LossPtr> quad(5, std::make_shared<SquaredDistanceLoss>(a, 2.0));
  const auto ball = DecisionSet::Ball(3, 0.5);
  EXPECT_LE((offline_comparator(quad, ball).point - a).norm(), 1e-6);

  Vector g(3);
  g << 1.0, 2.0, -2.0;
  std::vector<LossPtr> lin(7, std::make_shared<LinearLoss>(g));
  EXPECT_LE((offline_comparator(lin, ball).point + 0.5 * g / g.norm()).norm(), 1e-6);
}

// Independent oracle: exhaustive grid at spacing 5e-4 over the bounding square,
// evaluated on the hand-expanded quadratic.
TEST(Comparator, AgreesWithDenseGridInTwoDimensions) {
  Rng rng(46);
  const auto ball = DecisionSet::Ball(2, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<LossPtr> losses;
    for (int t = 0; t < 20; ++t) losses.push_back(std::make_shared<SquaredDistanceLoss>(uniform_in_ball(2, 1.2, rng), 1.0));
    Vector lin = uniform_in_ball(2, 1.0, rng);
    losses.push_back(std::make_shared<LinearLoss>(lin));
    // grad0 = -sum a_t; sum_t (1/2)||x - a_t||^2 + lin^T x = 10 ||x||^2 + (lin - sum a)^T x + const
    Vector grad0 = Vector::Zero(2);
    for (int t = 0; t < 20; ++t) grad0 += static_cast<const SquaredDistanceLoss&>(*losses[t]).gradient(Vector::Zero(2));
    const double bx = lin[0] + grad0[0], by = lin[1] + grad0[1];
    double best_u = 0.0, best_v = 0.0, best_val = 0.0;
    const int n = 2000;
    for (int i = 0; i <= n; ++i) {
      const double u = -0.5 + static_cast<double>(i) / n;
      for (int j = 0; j <= n; ++j) {
        const double v = -0.5 + static_cast<double>(j) / n;
        if (u * u + v * v > 0.25) continue;
        const double f = 10.0 * (u * u + v * v) + bx * u + by * v;
        if (f < best_val) {
          best_val = f;
          best_u = u;
          best_v = v;
        }
      }
    }
    Vector best(2);
    best << best_u, best_v;
    const auto cmp = offline_comparator(losses, ball);
    EXPECT_LE((cmp.point - best).norm(), 2e-3) << "trial " << trial;
    EXPECT_TRUE(cmp.grid_checked);
  }
}

TEST(Experiment, ZeroNoiseRegressionHasNonnegativeRegret) {
  Rng rng(47);
  RegressionConfig cfg;
  cfg.T = 40;
  cfg.d = 5;
  cfg.n = 20;
  cfg.noise_std = 0.0;
  cfg.w_star_radius = 0.0;
  const auto task = gen_regression(cfg, rng);
  RunOptions opts;
  opts.learner.strong_convexity = task.curvature.modulus;
  const auto run = run_task(task, learner_names(), opts);
  EXPECT_LE(run.comparator.point.norm(), 1e-6);
  for (const auto& r : run.runs) {
    for (double v : r.cum_regret) {
      ASSERT_TRUE(std::isfinite(v)) << r.name;
      ASSERT_GE(v, -1e-9) << r.name;
    }
  }
}

TEST(Experiment, StronglyConvexRegretGrowsSublinearly) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ExperimentConfig cfg = ExperimentConfig::regression_defaults();
    cfg.T = 128;
    cfg.d = 10;
    cfg.n = 50;
    cfg.seed = seed;
    cfg.algos = {"maler"};
    cfg.certify = false;
    const auto res = run_experiment(cfg);
    const auto& cr = res.run.get("maler").cum_regret;
    for (int T = 64; T <= 128; T *= 2) {
      EXPECT_LT(cr[T - 1], 2.0 * cr[T / 2 - 1]) << "seed " << seed << " T " << T;
    }
  }
}

TEST(Experiment, CsvReproducedFromSavedTraces) {
  ExperimentConfig cfg = ExperimentConfig::regression_defaults();
  cfg.T = 30;
  cfg.d = 4;
  cfg.n = 20;
  cfg.algos = {"maler", "metagrad", "ogd-convex", "ogd-sc", "ons"};
  cfg.out_dir = scratch_dir("csv").string();
  const auto res = run_experiment(cfg);

  std::ifstream csv(fs::path(cfg.out_dir) / "regret.csv");
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "round,algo,cum_regret,V_s,V_ell,log_phi");
  std::map<std::string, std::vector<double>> from_csv;
  while (std::getline(csv, line)) {
    std::stringstream ss(line);
    std::string round, algo, cum;
    std::getline(ss, round, ',');
    std::getline(ss, algo, ',');
    std::getline(ss, cum, ',');
    from_csv[algo].push_back(std::stod(cum));
  }
  for (const auto& name : cfg.algos) {
    const auto saved = read_trace(fs::path(cfg.out_dir) / ("trace_" + name + ".json"));
    const auto recomputed = cumulative_regret(saved);
    ASSERT_EQ(recomputed.size(), from_csv[name].size());
    for (std::size_t t = 0; t < recomputed.size(); ++t) {
      ASSERT_NEAR(recomputed[t], from_csv[name][t], 1e-9) << name << " round " << t + 1;
    }
    const auto report = certify_trace(saved);
    EXPECT_TRUE(report.grid_matches);
    EXPECT_EQ(report.meta_regret.has_value(), name == "maler" || name == "metagrad");
  }
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "regret.svg"));
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "report.json"));
  EXPECT_EQ(regret_svg(res.run.runs), regret_svg(res.run.runs));
}

TEST(Experiment, TraceJsonRoundTripIsExact) {
  ExperimentConfig cfg = ExperimentConfig::regression_defaults();
  cfg.T = 10;
  cfg.d = 3;
  cfg.n = 10;
  cfg.algos = {"maler"};
  const auto res = run_experiment(cfg);
  const auto& run = res.run.get("maler");
  const auto saved = trace_from_json(
      nlohmann::json::parse(trace_to_json(run, res.task.problem, res.run.comparator.point).dump()));
  ASSERT_EQ(saved.rounds.size(), run.trace.size());
  for (std::size_t t = 0; t < run.trace.size(); ++t) {
    EXPECT_EQ(saved.rounds[t].play, run.trace[t].play);
    EXPECT_EQ(saved.rounds[t].log_weights, run.trace[t].log_weights);
    EXPECT_EQ(saved.rounds[t].loss_value, run.trace[t].loss_value);
  }
}

}  // namespace
}  // namespace maler
