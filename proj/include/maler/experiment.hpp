#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "maler/core.hpp"
#include "maler/meta.hpp"
#include "maler/tasks.hpp"
#include "maler/universal.hpp"

namespace maler {

struct ComparatorOptions {
  int iterations = 10000;
  int lipschitz_samples = 16;
  bool grid_check = true;  // d <= 2 only
  double grid_resolution = 1e-3;
  std::uint64_t seed = 0x5eed;
};

struct ComparatorResult {
  Vector point;
  double value = 0.0;
  double gradient_mapping_norm = 0.0;
  bool converged = false;
  bool grid_checked = false;
  Vector grid_point;
  double grid_distance = 0.0;  // ||PGD point - grid point||
};

/// Approximate argmin over the set of sum_t f_t by projected gradient descent
/// with step 1/(L sqrt(k)), L estimated from gradient differences at sampled
/// points. For d <= 2 a coarse-to-fine grid search cross-checks the answer and
/// the better of the two points is returned.
ComparatorResult offline_comparator(const std::vector<LossPtr>& losses, const DecisionSet& set,
                                    const ComparatorOptions& options = {});

/// Minimizer of f over a 1-D or 2-D set on a coarse grid refined to the given
/// resolution around the best coarse cell.
Vector grid_search_minimizer(const std::function<double(const Vector&)>& f, const DecisionSet& set,
                             double resolution);

/// One learner's run against a shared comparator.
struct AlgoRun {
  std::string name;
  std::vector<RoundTrace> trace;  // loss_value filled; meta fields only for meta learners
  std::vector<double> comparator_losses;
  std::vector<double> cum_regret;
  std::vector<double> V_s;    // cumulative
  std::vector<double> V_ell;  // cumulative
  std::vector<double> log_phi;  // NaN for learners without a potential
  std::optional<ExpertGrid> grid;
  std::optional<MetaRegretReport> meta_regret;
  std::vector<ExpertRegretReport> expert_regret;
  std::optional<RegretBoundReport> regret_bounds;

  double final_regret() const { return cum_regret.empty() ? 0.0 : cum_regret.back(); }
};

/// Plays learner against the losses. The round's trace record carries
/// f_t(x_t) and, for meta learners, every expert-level field.
AlgoRun run_learner(Learner& learner, const std::vector<LossPtr>& losses, const Vector& comparator);

struct RunOptions {
  LearnerOptions learner;
  ComparatorOptions comparator;
  bool certify = true;
};

struct TaskRun {
  ComparatorResult comparator;
  std::vector<AlgoRun> runs;
  const AlgoRun& get(const std::string& name) const;
};

/// Runs every named algorithm on the task; algorithms execute concurrently.
TaskRun run_task(const TaskInstance& task, const std::vector<std::string>& algos, const RunOptions& options);

struct ExperimentConfig {
  std::string task = "regression";  // regression | classification
  std::vector<std::string> algos = {"maler", "metagrad"};
  int T = 200;
  int d = 50;
  int n = 200;
  double lambda = 0.001;
  double noise_std = 0.1;
  std::uint64_t seed = 1;
  std::string data_path;
  double radius = 0.5;
  std::string out_dir;
  bool svg = true;
  bool certify = true;
  std::optional<double> sc_modulus;

  static ExperimentConfig regression_defaults();
  static ExperimentConfig classification_defaults();
};

struct ExperimentResult {
  ExperimentConfig config;
  TaskInstance task;
  TaskRun run;
};

/// Builds the task from the config, runs the algorithms, and when out_dir is
/// set writes regret.csv, regret.svg, report.json and trace_<algo>.json.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// header: round,algo,cum_regret,V_s,V_ell,log_phi
std::string regret_csv(const std::vector<AlgoRun>& runs);
std::string regret_svg(const std::vector<AlgoRun>& runs);

}  // namespace maler
