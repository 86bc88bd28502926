#include "maler/meta.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace maler {

int half_log2_ceil(int T) {
  if (T < 1) throw InvalidArgument("grid: T must be >= 1");
  int k = 0;
  long long power = 1;
  while (power < T) {
    power *= 4;
    ++k;
  }
  return k;
}

namespace {

std::vector<double> eta_ladder(const ProblemParams& params, int k) {
  std::vector<double> etas(k + 1);
  etas[0] = 1.0 / (5.0 * params.diameter_D * params.grad_bound_G);
  for (int i = 1; i <= k; ++i) etas[i] = etas[i - 1] / 2.0;
  return etas;
}

}  // namespace

ExpertGrid build_grid(const ProblemParams& params) {
  params.validate();
  ExpertGrid grid;
  grid.horizon_T = params.horizon_T;
  grid.k = half_log2_ceil(params.horizon_T);
  grid.etas = eta_ladder(params, grid.k);
  grid.eta_c = linear_eta(params.grad_bound_G, params.diameter_D, params.horizon_T);
  grid.C = 1.0 + 1.0 / (1.0 + grid.k);

  grid.slots.push_back({SurrogateKind::kLinear, 0, grid.eta_c, 1.0 / 3.0});
  for (SurrogateKind kind : {SurrogateKind::kStrong, SurrogateKind::kEll}) {
    for (int i = 0; i <= grid.k; ++i) {
      grid.slots.push_back({kind, i, grid.etas[i], grid.C / (3.0 * (i + 1) * (i + 2))});
    }
  }
  return grid;
}

ExpertGrid restrict_grid(const ExpertGrid& grid, SurrogateKind kind) {
  ExpertGrid out = grid;
  out.slots.clear();
  double total = 0.0;
  for (const auto& s : grid.slots) {
    if (s.kind == kind) {
      out.slots.push_back(s);
      total += s.prior;
    }
  }
  if (out.slots.empty()) throw InvalidArgument("grid: no experts of the requested family");
  for (auto& s : out.slots) s.prior /= total;
  return out;
}

ExpertGrid build_metagrad_grid(const ProblemParams& params) {
  ExpertGrid grid = build_grid(params);
  grid.slots.clear();
  const double c = (grid.k + 2.0) / (grid.k + 1.0);
  for (int i = 0; i <= grid.k; ++i) {
    grid.slots.push_back({SurrogateKind::kEll, i, grid.etas[i], c / ((i + 1.0) * (i + 2.0))});
  }
  return grid;
}

MetaState init_meta(const ExpertGrid& grid, int dim) {
  MetaState state;
  state.log_weights.resize(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t e = 0; e < grid.size(); ++e) state.log_weights[e] = std::log(grid.slots[e].prior);
  state.last_play = Vector::Zero(dim);
  return state;
}

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

Vector aggregate_play(const MetaState& state, const ExpertGrid& grid,
                      const std::vector<Vector>& expert_points) {
  if (expert_points.size() != grid.size() ||
      static_cast<std::size_t>(state.log_weights.size()) != grid.size())
    throw InvalidArgument("aggregate_play: need one point and one weight per expert");
  Vector tilt(state.log_weights.size());
  for (std::size_t e = 0; e < grid.size(); ++e) tilt[e] = state.log_weights[e] + std::log(grid.slots[e].eta);
  const double shift = tilt.maxCoeff();
  if (!std::isfinite(shift)) throw std::logic_error("aggregate_play: degenerate weights");

  const Eigen::Index d = expert_points.front().size();
  Vector num = Vector::Zero(d);
  double den = 0.0;
  for (std::size_t e = 0; e < grid.size(); ++e) {
    require_dim(expert_points[e], static_cast<int>(d), "aggregate_play");
    const double w = std::exp(tilt[e] - shift);
    num += w * expert_points[e];
    den += w;
  }
  if (!(den > 0.0)) throw std::logic_error("aggregate_play: degenerate denominator");
  return num / den;
}

MetaState update_weights(const MetaState& state, const ExpertGrid& grid,
                         const std::vector<double>& surrogate_losses) {
  if (surrogate_losses.size() != grid.size())
    throw InvalidArgument("update_weights: need one loss per expert");
  Vector shifted(state.log_weights.size());
  for (std::size_t e = 0; e < grid.size(); ++e) {
    if (!std::isfinite(surrogate_losses[e]))
      throw InvalidArgument("update_weights: non-finite loss for expert " + std::to_string(e));
    shifted[e] = state.log_weights[e] - surrogate_losses[e];
  }
  // Phi_t / Phi_{t-1} = sum_e pi_t^e exp(-loss_e)
  const double log_ratio = log_sum_exp(shifted);
  MetaState next = state;
  next.log_weights = shifted.array() - log_ratio;
  next.log_potential = state.log_potential + log_ratio;
  next.round = state.round + 1;
  return next;
}

double meta_regret_constant(int T) {
  return 2.0 * std::log(std::sqrt(3.0) * (0.5 * std::log2(static_cast<double>(T)) + 3.0));
}

std::size_t MetaRegretReport::violations() const {
  std::size_t n = potential_monotone ? 0 : 1;
  for (const auto& e : entries) n += e.violated ? 1 : 0;
  return n;
}

MetaRegretReport meta_regret_certificate(const std::vector<RoundTrace>& history,
                                         const ExpertGrid& grid) {
  constexpr double kSlack = 1e-9;
  MetaRegretReport report;
  const int T = static_cast<int>(history.size());
  if (T == 0) return report;
  for (std::size_t e = 0; e < grid.size(); ++e) {
    MetaRegretEntry entry;
    entry.slot = grid.slots[e];
    for (const auto& r : history) entry.regret += r.play_losses.at(e) - r.expert_losses.at(e);
    entry.bound = grid.slots[e].kind == SurrogateKind::kLinear ? std::log(3.0) : meta_regret_constant(T);
    entry.violated = entry.regret > entry.bound + kSlack;
    report.entries.push_back(entry);
  }
  double previous = 0.0;
  report.max_log_potential = -std::numeric_limits<double>::infinity();
  for (const auto& r : history) {
    if (r.log_potential > previous + kSlack || r.log_potential > kSlack) report.potential_monotone = false;
    report.max_log_potential = std::max(report.max_log_potential, r.log_potential);
    previous = r.log_potential;
  }
  return report;
}

}  // namespace maler
