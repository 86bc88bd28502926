#include "maler/trace_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace maler {

using nlohmann::json;

namespace {

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vec_from(const json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

// JSON has no NaN; missing values are written as null.
json num_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

const char* kind_name(SurrogateKind k) {
  switch (k) {
    case SurrogateKind::kLinear: return "convex";
    case SurrogateKind::kStrong: return "strongly_convex";
    case SurrogateKind::kEll: return "exp_concave";
  }
  return "?";
}

SurrogateKind kind_from(const std::string& s) {
  if (s == "convex") return SurrogateKind::kLinear;
  if (s == "strongly_convex") return SurrogateKind::kStrong;
  if (s == "exp_concave") return SurrogateKind::kEll;
  throw InvalidArgument("trace: unknown expert family '" + s + "'");
}

json grid_json(const ExpertGrid& g) {
  json slots = json::array();
  for (const auto& s : g.slots) {
    slots.push_back({{"family", kind_name(s.kind)}, {"index", s.index}, {"eta", s.eta}, {"prior", s.prior}});
  }
  return {{"T", g.horizon_T}, {"k", g.k}, {"k_log_base", 2}, {"eta_c", g.eta_c}, {"C", g.C},
          {"etas", g.etas}, {"slots", slots}};
}

ExpertGrid grid_from(const json& j) {
  ExpertGrid g;
  g.horizon_T = j.at("T").get<int>();
  g.k = j.at("k").get<int>();
  g.eta_c = j.at("eta_c").get<double>();
  g.C = j.at("C").get<double>();
  g.etas = j.at("etas").get<std::vector<double>>();
  for (const auto& s : j.at("slots")) {
    g.slots.push_back({kind_from(s.at("family").get<std::string>()), s.at("index").get<int>(),
                       s.at("eta").get<double>(), s.at("prior").get<double>()});
  }
  return g;
}

bool same_grid(const ExpertGrid& a, const ExpertGrid& b) {
  if (a.slots.size() != b.slots.size() || a.k != b.k) return false;
  for (std::size_t i = 0; i < a.slots.size(); ++i) {
    const auto& x = a.slots[i];
    const auto& y = b.slots[i];
    if (x.kind != y.kind || x.index != y.index) return false;
    if (std::abs(x.eta - y.eta) > 1e-15 * x.eta || std::abs(x.prior - y.prior) > 1e-15) return false;
  }
  return true;
}

}  // namespace

json problem_to_json(const Problem& p) {
  json set;
  if (p.set.is_ball()) {
    set = {{"shape", "ball"}, {"center", vec_json(p.set.center())}, {"radius", p.set.radius()}};
  } else {
    set = {{"shape", "box"}, {"lower", vec_json(p.set.lower())}, {"upper", vec_json(p.set.upper())}};
  }
  return {{"T", p.T()}, {"d", p.d()}, {"G", p.G()}, {"D", p.D()}, {"set", set}};
}

Problem problem_from_json(const json& j) {
  ProblemParams params{j.at("T").get<int>(), j.at("d").get<int>(), j.at("G").get<double>(),
                       j.at("D").get<double>()};
  const json& s = j.at("set");
  const std::string shape = s.at("shape").get<std::string>();
  if (shape == "ball") {
    return Problem(params, DecisionSet::Ball(vec_from(s.at("center")), s.at("radius").get<double>()));
  }
  if (shape == "box") return Problem(params, DecisionSet::Box(vec_from(s.at("lower")), vec_from(s.at("upper"))));
  throw InvalidArgument("trace: unknown set shape '" + shape + "'");
}

json trace_to_json(const AlgoRun& run, const Problem& problem, const Vector& comparator) {
  json rounds = json::array();
  for (std::size_t t = 0; t < run.trace.size(); ++t) {
    const RoundTrace& r = run.trace[t];
    json rec = {{"t", r.t},
                {"x", vec_json(r.play)},
                {"g", vec_json(r.grad)},
                {"loss", num_json(r.loss_value)},
                {"comparator_loss", run.comparator_losses.at(t)}};
    if (run.grid) {
      json pts = json::array();
      for (const auto& p : r.expert_points) pts.push_back(vec_json(p));
      rec["expert_points"] = std::move(pts);
      rec["expert_losses"] = r.expert_losses;
      rec["play_losses"] = r.play_losses;
      rec["log_weights"] = vec_json(r.log_weights);
      rec["log_phi"] = r.log_potential;
    }
    rounds.push_back(std::move(rec));
  }
  json j = {{"learner", run.name},
            {"problem", problem_to_json(problem)},
            {"comparator", vec_json(comparator)},
            {"rounds", std::move(rounds)}};
  if (run.grid) j["grid"] = grid_json(*run.grid);
  return j;
}

SavedTrace trace_from_json(const json& j) {
  SavedTrace s{j.at("learner").get<std::string>(), problem_from_json(j.at("problem")),
               vec_from(j.at("comparator")), std::nullopt, {}, {}};
  if (j.contains("grid")) s.grid = grid_from(j.at("grid"));
  for (const auto& rec : j.at("rounds")) {
    RoundTrace r;
    r.t = rec.at("t").get<int>();
    r.play = vec_from(rec.at("x"));
    r.grad = vec_from(rec.at("g"));
    r.loss_value = num_from(rec.at("loss"));
    if (rec.contains("expert_points")) {
      for (const auto& p : rec.at("expert_points")) r.expert_points.push_back(vec_from(p));
      r.expert_losses = rec.at("expert_losses").get<std::vector<double>>();
      r.play_losses = rec.at("play_losses").get<std::vector<double>>();
      r.log_weights = vec_from(rec.at("log_weights"));
      r.log_potential = rec.at("log_phi").get<double>();
    }
    s.comparator_losses.push_back(rec.at("comparator_loss").get<double>());
    s.rounds.push_back(std::move(r));
  }
  return s;
}

void write_trace(const std::filesystem::path& path, const AlgoRun& run, const Problem& problem,
                 const Vector& comparator) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace '" + path.string() + "'");
  out << trace_to_json(run, problem, comparator).dump() << '\n';
}

SavedTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read trace '" + path.string() + "'");
  return trace_from_json(json::parse(in));
}

std::vector<double> cumulative_regret(const SavedTrace& trace) {
  std::vector<double> out;
  double cum = 0.0;
  for (std::size_t t = 0; t < trace.rounds.size(); ++t) {
    cum += trace.rounds[t].loss_value - trace.comparator_losses[t];
    out.push_back(cum);
  }
  return out;
}

std::size_t CertifyReport::violations() const {
  std::size_t n = regret_bounds.violations() + (grid_matches ? 0 : 1);
  if (meta_regret) n += meta_regret->violations();
  for (const auto& e : expert_regret) n += e.violated ? 1 : 0;
  return n;
}

std::string CertifyReport::summary() const {
  std::ostringstream os;
  os.precision(6);
  if (meta_regret) {
    os << "meta regret (per expert):\n";
    for (const auto& e : meta_regret->entries) {
      os << "  " << kind_name(e.slot.kind) << "[" << e.slot.index << "] eta=" << e.slot.eta
         << " regret=" << e.regret << " bound=" << e.bound << (e.violated ? "  VIOLATED" : "") << '\n';
    }
    os << "  potential monotone: " << (meta_regret->potential_monotone ? "yes" : "NO")
       << " (max log phi " << meta_regret->max_log_potential << ")\n";
  }
  if (!expert_regret.empty()) {
    os << "expert regret on own surrogate:\n";
    for (const auto& e : expert_regret) {
      os << "  " << kind_name(e.kind) << " eta=" << e.eta << " regret=" << e.regret << " bound=" << e.bound
         << (e.violated ? "  VIOLATED" : "") << '\n';
    }
  }
  const auto& d = regret_bounds.diagnostics;
  os << "regret=" << d.regret << " V_s=" << d.V_s << " V_ell=" << d.V_ell << '\n';
  os << "  convex bound " << regret_bounds.convex_bound << (regret_bounds.convex_violated ? "  VIOLATED" : "") << '\n';
  os << "  exp-concave bound " << regret_bounds.exp_concave_bound
     << (regret_bounds.exp_concave_violated ? "  VIOLATED" : "") << '\n';
  os << "  strongly convex bound " << regret_bounds.strongly_convex_bound
     << (regret_bounds.strongly_convex_violated ? "  VIOLATED" : "") << '\n';
  if (regret_bounds.variation_order_violated) os << "  V_ell > V_s  VIOLATED\n";
  if (!grid_matches) os << "stored grid differs from a fresh build  VIOLATED\n";
  os << "violations: " << violations() << '\n';
  return os.str();
}

CertifyReport certify_trace(const SavedTrace& trace) {
  CertifyReport report;
  if (trace.grid) {
    const ExpertGrid fresh = trace.learner == "metagrad" ? build_metagrad_grid(trace.problem.params)
                                                         : build_grid(trace.problem.params);
    report.grid_matches = same_grid(fresh, *trace.grid);
    report.meta_regret = meta_regret_certificate(trace.rounds, *trace.grid);
    report.expert_regret = expert_certificates(trace.rounds, *trace.grid, trace.problem);
  }
  report.regret_bounds = regret_bound_certificate(trace.rounds, trace.comparator_losses, trace.comparator, trace.problem);
  return report;
}

json experiment_report_json(const ExperimentConfig& config, const TaskInstance& task, const TaskRun& run) {
  json algos = json::array();
  for (const auto& r : run.runs) {
    json a = {{"algo", r.name}, {"final_regret", r.final_regret()}};
    if (r.regret_bounds) {
      const auto& t = *r.regret_bounds;
      a["regret_bounds"] = {{"regret", t.diagnostics.regret}, {"V_s", t.diagnostics.V_s},
                       {"V_ell", t.diagnostics.V_ell}, {"convex_bound", t.convex_bound},
                       {"exp_concave_bound", t.exp_concave_bound},
                       {"strongly_convex_bound", t.strongly_convex_bound},
                       {"violations", t.violations()}};
    }
    if (r.meta_regret) a["meta_regret_violations"] = r.meta_regret->violations();
    if (!r.expert_regret.empty()) {
      std::size_t v = 0;
      for (const auto& e : r.expert_regret) v += e.violated ? 1 : 0;
      a["expert_regret_violations"] = v;
    }
    algos.push_back(std::move(a));
  }
  return {{"task", config.task},
          {"seed", config.seed},
          {"T", task.problem.T()},
          {"d", task.problem.d()},
          {"n", config.n},
          {"lambda", config.lambda},
          {"noise_std", config.noise_std},
          {"radius", config.radius},
          {"G", task.problem.G()},
          {"D", task.problem.D()},
          {"expert_count_log_base", 2},
          {"comparator", {{"point", vec_json(run.comparator.point)},
                          {"gradient_mapping_norm", run.comparator.gradient_mapping_norm},
                          {"converged", run.comparator.converged}}},
          {"algorithms", std::move(algos)}};
}

}  // namespace maler
