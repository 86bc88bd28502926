#pragma once

#include <limits>
#include <vector>

#include "maler/core.hpp"
#include "maler/surrogates.hpp"

namespace maler {

struct ExpertSlot {
  SurrogateKind kind = SurrogateKind::kLinear;
  int index = 0;  // position i on the eta grid; 0 for the convex expert
  double eta = 0.0;
  double prior = 0.0;
};

/// Learning rates and prior weights of every expert, in play order: the
/// convex expert first, then s-experts i = 0..k, then l-experts i = 0..k.
struct ExpertGrid {
  int horizon_T = 1;
  int k = 0;                 // ceil(log2(T) / 2)
  std::vector<double> etas;  // eta_i = 2^-i / (5DG), i = 0..k
  double eta_c = 0.0;        // 1/(2GD sqrt(T))
  double C = 1.0;            // 1 + 1/(1 + k)
  std::vector<ExpertSlot> slots;

  std::size_t size() const { return slots.size(); }
};

/// ceil(log2(T) / 2), computed exactly as the least k with 4^k >= T.
int half_log2_ceil(int T);

/// Full grid: one convex expert (prior 1/3) plus s- and l-experts with priors
/// C/(3(i+1)(i+2)).
ExpertGrid build_grid(const ProblemParams& params);

/// l-experts only, priors renormalized to (k+2)/(k+1) / ((i+1)(i+2)).
ExpertGrid build_metagrad_grid(const ProblemParams& params);

/// Subset of a grid restricted to one family, priors renormalized to sum to 1.
ExpertGrid restrict_grid(const ExpertGrid& grid, SurrogateKind kind);

struct MetaState {
  Vector log_weights;  // log pi_t, normalized
  Vector last_play;
  double log_potential = 0.0;  // log Phi_t, starts at log Phi_0 = 0
  int round = 0;
};

MetaState init_meta(const ExpertGrid& grid, int dim);

/// Eta-tilted weighted average of the experts' points.
Vector aggregate_play(const MetaState& state, const ExpertGrid& grid,
                      const std::vector<Vector>& expert_points);

/// Multiplicative update in the log domain; losses[e] is expert e's surrogate
/// loss at its own point. Throws InvalidArgument on non-finite losses.
MetaState update_weights(const MetaState& state, const ExpertGrid& grid,
                         const std::vector<double>& surrogate_losses);

/// One round of the aggregate -> broadcast -> update protocol as recorded.
struct RoundTrace {
  int t = 0;
  Vector play;
  Vector grad;
  std::vector<Vector> expert_points;
  std::vector<double> expert_losses;  // surrogate_e(x^e_t)
  std::vector<double> play_losses;    // surrogate_e(x_t)
  Vector log_weights;                 // after the update
  double log_potential = 0.0;         // after the update
  double loss_value = std::numeric_limits<double>::quiet_NaN();  // f_t(x_t), when known
};

double log_sum_exp(const Vector& v);

/// 2 ln(sqrt(3) (log2(T)/2 + 3))
double meta_regret_constant(int T);

struct MetaRegretEntry {
  ExpertSlot slot;
  double regret = 0.0;
  double bound = 0.0;
  bool violated = false;
};

struct MetaRegretReport {
  std::vector<MetaRegretEntry> entries;
  bool potential_monotone = true;
  double max_log_potential = 0.0;
  std::size_t violations() const;
};

/// Compares sum_t surrogate_e(x_t) against sum_t surrogate_e(x^e_t) for every
/// expert, and re-checks that log Phi never increased and stayed <= 0.
MetaRegretReport meta_regret_certificate(const std::vector<RoundTrace>& history,
                                         const ExpertGrid& grid);

}  // namespace maler
