#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "maler/experiment.hpp"

namespace maler {

/// A learner run as stored on disk: enough to re-derive every certificate.
struct SavedTrace {
  std::string learner;
  Problem problem;
  Vector comparator;
  std::optional<ExpertGrid> grid;
  std::vector<RoundTrace> rounds;
  std::vector<double> comparator_losses;
};

nlohmann::json problem_to_json(const Problem& problem);
Problem problem_from_json(const nlohmann::json& j);

nlohmann::json trace_to_json(const AlgoRun& run, const Problem& problem, const Vector& comparator);
SavedTrace trace_from_json(const nlohmann::json& j);

void write_trace(const std::filesystem::path& path, const AlgoRun& run, const Problem& problem,
                 const Vector& comparator);
SavedTrace read_trace(const std::filesystem::path& path);

/// Cumulative regret per round recomputed from the stored loss values.
std::vector<double> cumulative_regret(const SavedTrace& trace);

struct CertifyReport {
  std::optional<MetaRegretReport> meta_regret;
  std::vector<ExpertRegretReport> expert_regret;
  RegretBoundReport regret_bounds;
  bool grid_matches = true;  // stored etas/priors agree with a fresh build

  std::size_t violations() const;
  std::string summary() const;
};

/// Rebuilds the grid from the stored parameters and re-runs the meta-regret,
/// expert-regret and regret-bound checks.
CertifyReport certify_trace(const SavedTrace& trace);

nlohmann::json experiment_report_json(const ExperimentConfig& config, const TaskInstance& task,
                                      const TaskRun& run);

}  // namespace maler
