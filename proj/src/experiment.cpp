#include "maler/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <stdexcept>

#include "maler/trace_io.hpp"

namespace maler {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vector sample_in_set(const DecisionSet& set, Rng& rng) {
  if (set.is_ball()) return set.center() + uniform_in_ball(set.dim(), set.radius(), rng);
  Vector x(set.dim());
  for (int i = 0; i < set.dim(); ++i) {
    std::uniform_real_distribution<double> u(set.lower()[i], set.upper()[i]);
    x[i] = u(rng);
  }
  return x;
}

struct Objective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

Objective summed_objective(const std::vector<LossPtr>& losses, int d) {
  bool quadratic = true;
  for (const auto& l : losses) quadratic = quadratic && dynamic_cast<const QuadraticForm*>(l.get()) != nullptr;
  if (quadratic) {
    auto Q = std::make_shared<Matrix>(Matrix::Zero(d, d));
    auto b = std::make_shared<Vector>(Vector::Zero(d));
    auto c = std::make_shared<double>(0.0);
    for (const auto& l : losses) dynamic_cast<const QuadraticForm&>(*l).accumulate(*Q, *b, *c);
    return {[Q, b, c](const Vector& x) { return x.dot(*Q * x) + b->dot(x) + *c; },
            [Q, b](const Vector& x) -> Vector { return 2.0 * (*Q * x) + *b; }};
  }
  return {[&losses](const Vector& x) {
            double s = 0.0;
            for (const auto& l : losses) s += l->value(x);
            return s;
          },
          [&losses, d](const Vector& x) -> Vector {
            Vector g = Vector::Zero(d);
            for (const auto& l : losses) g += l->gradient(x);
            return g;
          }};
}

std::vector<double> axis_points(double lo, double hi, double step) {
  std::vector<double> pts;
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  for (int i = 0; i <= n; ++i) pts.push_back(lo + i * step);
  if (pts.back() < hi) pts.push_back(hi);
  return pts;
}

}  // namespace

Vector grid_search_minimizer(const std::function<double(const Vector&)>& f, const DecisionSet& set,
                             double resolution) {
  const int d = set.dim();
  if (d > 2) throw InvalidArgument("grid search: only d <= 2 is supported");
  Vector lo(d), hi(d);
  if (set.is_ball()) {
    lo = set.center().array() - set.radius();
    hi = set.center().array() + set.radius();
  } else {
    lo = set.lower();
    hi = set.upper();
  }
  const double extent = (hi - lo).maxCoeff();
  Vector best = project_euclidean(set, Vector::Zero(d));
  double best_value = f(best);

  auto scan = [&](const Vector& a, const Vector& b, double step) {
    const auto xs = axis_points(a[0], b[0], step);
    const auto ys = d == 2 ? axis_points(a[1], b[1], step) : std::vector<double>{0.0};
    Vector p(d);
    for (double x : xs) {
      for (double y : ys) {
        p[0] = x;
        if (d == 2) p[1] = y;
        if (!contains(set, p)) continue;
        const double v = f(p);
        if (v < best_value) {
          best_value = v;
          best = p;
        }
      }
    }
  };

  const double coarse = std::max(10.0 * resolution, extent / 100.0);
  scan(lo, hi, coarse);
  const Vector center = best;
  const Vector wlo = (center.array() - 2.0 * coarse).max(lo.array());
  const Vector whi = (center.array() + 2.0 * coarse).min(hi.array());
  const double fine = std::max(resolution, (whi - wlo).maxCoeff() / 400.0);
  scan(wlo, whi, fine);
  return best;
}

ComparatorResult offline_comparator(const std::vector<LossPtr>& losses, const DecisionSet& set,
                                    const ComparatorOptions& options) {
  if (losses.empty()) throw InvalidArgument("offline_comparator: no losses");
  const int d = set.dim();
  for (const auto& l : losses) {
    if (l->dim() != d) throw InvalidArgument("offline_comparator: loss dimension mismatch");
  }
  const Objective F = summed_objective(losses, d);

  Rng rng(options.seed);
  double L = 0.0;
  for (int s = 0; s < options.lipschitz_samples; ++s) {
    const Vector a = sample_in_set(set, rng);
    const Vector b = sample_in_set(set, rng);
    const double gap = (a - b).norm();
    if (gap > 0.0) L = std::max(L, (F.gradient(a) - F.gradient(b)).norm() / gap);
  }

  MinimizeOptions opts;
  opts.iterations = options.iterations;
  const Vector start = project_euclidean(set, Vector::Zero(d));
  if (L > 1e-12 * std::max(1.0, F.gradient(start).norm())) {
    opts.lipschitz = L;
  } else {
    // Linear objective: a step of length D from anywhere lands on the optimal face.
    const double gnorm = F.gradient(start).norm();
    if (gnorm == 0.0) {
      ComparatorResult r;
      r.point = start;
      r.value = F.value(start);
      r.converged = true;
      return r;
    }
    opts.fixed_step = 2.0 * set.diameter() / gnorm;
  }
  const MinimizeResult m = minimize_over_set(F.value, F.gradient, set, start, opts);

  ComparatorResult r;
  r.point = m.point;
  r.value = m.value;
  r.gradient_mapping_norm = m.gradient_mapping_norm;
  r.converged = m.gradient_mapping_norm <= 1e-6 * std::max(1.0, static_cast<double>(losses.size()));

  if (options.grid_check && d <= 2) {
    r.grid_checked = true;
    r.grid_point = grid_search_minimizer(F.value, set, options.grid_resolution);
    r.grid_distance = (r.grid_point - r.point).norm();
    const double gv = F.value(r.grid_point);
    if (gv < r.value) {
      r.point = r.grid_point;
      r.value = gv;
    }
  }
  return r;
}

AlgoRun run_learner(Learner& learner, const std::vector<LossPtr>& losses, const Vector& comparator) {
  const Problem& p = learner.problem();
  if (static_cast<int>(losses.size()) != p.T())
    throw InvalidArgument("run_learner: need exactly T losses");
  auto* meta = dynamic_cast<MetaLearner*>(&learner);

  AlgoRun run;
  run.name = learner.name();
  if (meta) run.grid = meta->grid();
  const double G = p.G();
  double cum = 0.0, vs = 0.0, vl = 0.0;
  for (int t = 0; t < p.T(); ++t) {
    const LossOracle& f = *losses[t];
    const Vector x = learner.predict();
    const Vector g = f.gradient(x);
    const double fx = f.value(x);
    learner.observe(g);

    RoundTrace rec;
    if (meta) {
      rec = meta->trace().back();
    } else {
      rec.t = t + 1;
      rec.play = x;
      rec.grad = g;
    }
    rec.loss_value = fx;
    const double fstar = f.value(comparator);
    run.comparator_losses.push_back(fstar);

    cum += fx - fstar;
    const Vector diff = x - comparator;
    vs += G * G * diff.squaredNorm();
    const double h = diff.dot(g);
    vl += h * h;
    run.cum_regret.push_back(cum);
    run.V_s.push_back(vs);
    run.V_ell.push_back(vl);
    run.log_phi.push_back(meta ? rec.log_potential : kNaN);
    run.trace.push_back(std::move(rec));
  }
  return run;
}

const AlgoRun& TaskRun::get(const std::string& name) const {
  for (const auto& r : runs) {
    if (r.name == name) return r;
  }
  throw InvalidArgument("no run named '" + name + "'");
}

TaskRun run_task(const TaskInstance& task, const std::vector<std::string>& algos, const RunOptions& options) {
  TaskRun out;
  out.comparator = offline_comparator(task.losses, task.problem.set, options.comparator);

  LearnerOptions lopts = options.learner;
  if (!lopts.strong_convexity && task.curvature.kind == Curvature::Kind::kStronglyConvex)
    lopts.strong_convexity = task.curvature.modulus;
  if (!lopts.exp_concavity && task.curvature.kind == Curvature::Kind::kExpConcave)
    lopts.exp_concavity = task.curvature.modulus;

  const Vector& xstar = out.comparator.point;
  std::vector<std::future<AlgoRun>> cells;
  for (const auto& name : algos) {
    cells.push_back(std::async(std::launch::async, [&, name] {
      auto learner = make_learner(name, task.problem, lopts);
      AlgoRun run = run_learner(*learner, task.losses, xstar);
      if (options.certify && run.grid) {
        run.meta_regret = meta_regret_certificate(run.trace, *run.grid);
        run.expert_regret = expert_certificates(run.trace, *run.grid, task.problem);
      }
      if (options.certify) run.regret_bounds = regret_bound_certificate(run.trace, run.comparator_losses, xstar, task.problem);
      return run;
    }));
  }
  for (auto& c : cells) out.runs.push_back(c.get());
  return out;
}

ExperimentConfig ExperimentConfig::regression_defaults() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::classification_defaults() {
  ExperimentConfig c;
  c.task = "classification";
  c.T = 100;
  c.n = 200;
  c.d = 0;
  c.radius = 0.5;
  return c;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  Rng rng(config.seed);
  std::optional<TaskInstance> task;
  if (config.task == "regression") {
    RegressionConfig rc;
    rc.T = config.T;
    rc.d = config.d;
    rc.n = config.n;
    rc.lambda = config.lambda;
    rc.noise_std = config.noise_std;
    rc.radius = config.radius;
    task = gen_regression(rc, rng);
  } else if (config.task == "classification") {
    if (config.data_path.empty()) throw InvalidArgument("classification needs a LIBSVM data path");
    const LibsvmDataset data = parse_libsvm(config.data_path);
    ClassificationConfig cc;
    cc.T = config.T;
    cc.n = config.n;
    cc.radius = config.radius;
    cc.dim = config.d;
    task = make_classification(data, cc, rng);
  } else {
    throw InvalidArgument("unknown task '" + config.task + "'");
  }

  RunOptions opts;
  opts.certify = config.certify;
  opts.learner.strong_convexity = config.sc_modulus;
  opts.comparator.grid_check = task->problem.d() <= 2;
  TaskRun run = run_task(*task, config.algos, opts);

  if (!config.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    const fs::path dir(config.out_dir);
    {
      std::ofstream csv(dir / "regret.csv", std::ios::binary);
      csv << regret_csv(run.runs);
    }
    if (config.svg) {
      std::ofstream svg(dir / "regret.svg", std::ios::binary);
      svg << regret_svg(run.runs);
    }
    for (const auto& r : run.runs) {
      write_trace(dir / ("trace_" + r.name + ".json"), r, task->problem, run.comparator.point);
    }
    std::ofstream report(dir / "report.json", std::ios::binary);
    report << experiment_report_json(config, *task, run).dump(2) << '\n';
  }
  return ExperimentResult{config, std::move(*task), std::move(run)};
}

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string regret_csv(const std::vector<AlgoRun>& runs) {
  std::string out = "round,algo,cum_regret,V_s,V_ell,log_phi\n";
  for (const auto& r : runs) {
    for (std::size_t t = 0; t < r.cum_regret.size(); ++t) {
      out += std::to_string(t + 1) + ',' + r.name + ',' + fmt_double(r.cum_regret[t]) + ',' +
             fmt_double(r.V_s[t]) + ',' + fmt_double(r.V_ell[t]) + ',' + fmt_double(r.log_phi[t]) + '\n';
    }
  }
  return out;
}

std::string regret_svg(const std::vector<AlgoRun>& runs) {
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 20, kTop = 20, kBottom = 40;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::size_t rounds = 1;
  double ymin = 0.0, ymax = 1e-12;
  for (const auto& r : runs) {
    rounds = std::max(rounds, r.cum_regret.size());
    for (double v : r.cum_regret) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double t) { return kLeft + pw * t / static_cast<double>(rounds); };
  auto py = [&](double v) { return kTop + ph * (1.0 - (v - ymin) / (ymax - ymin)); };

  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" font-family=\"sans-serif\" font-size=\"12\">\n",
                kW, kH);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"#000\"/>\n",
                kLeft, kTop, pw, ph);
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">round (T = %zu)</text>\n",
                kLeft + pw / 2, kH - 8, rounds);
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"4\" y=\"%.1f\">%.4g</text>\n<text x=\"4\" y=\"%.1f\">%.4g</text>\n",
                kTop + 10, ymax, kTop + ph, ymin);
  out += buf;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const char* color = kColors[i % 6];
    out += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"";
    out += color;
    out += "\" points=\"";
    for (std::size_t t = 0; t < runs[i].cum_regret.size(); ++t) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(static_cast<double>(t + 1)), py(runs[i].cum_regret[t]));
      out += buf;
    }
    out += "\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" fill=\"%s\">%s</text>\n", kLeft + 10,
                  kTop + 16 + 14.0 * i, color, runs[i].name.c_str());
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace maler
