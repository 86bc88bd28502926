#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maler/experiment.hpp"
#include "maler/trace_io.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Universal online convex optimization: experiments and certificates"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run learners on a regression or classification stream");
  std::string task = "regression";
  std::string algos = "maler,metagrad";
  std::optional<int> rounds, dim, batch;
  double lambda = 0.001, noise_std = 0.1, radius = 0.5;
  std::uint64_t seed = 1;
  std::string data, out = "results";
  std::optional<double> sc_modulus;
  bool no_svg = false;
  run->add_option("--task", task, "regression | classification")
      ->check(CLI::IsMember({"regression", "classification"}));
  run->add_option("--algos", algos, "comma-separated: maler,metagrad,ogd-convex,ogd-sc,ons");
  run->add_option("--rounds", rounds, "horizon T (default 200 regression, 100 classification)");
  run->add_option("--dim", dim, "dimension d (regression; classification: minimum feature count)");
  run->add_option("--batch", batch, "batch size n (default 200)");
  run->add_option("--lambda", lambda, "ridge coefficient");
  run->add_option("--noise-std", noise_std, "label noise standard deviation");
  run->add_option("--seed", seed, "random seed");
  run->add_option("--data", data, "LIBSVM file for classification");
  run->add_option("--radius", radius, "radius of the decision ball");
  run->add_option("--sc-modulus", sc_modulus, "strong convexity modulus for ogd-sc");
  run->add_option("--out", out, "output directory");
  run->add_flag("--no-svg", no_svg, "skip the SVG plot");

  auto* certify = app.add_subcommand("certify", "Re-run all regret certificates on a saved trace");
  std::string trace_path;
  certify->add_option("--trace", trace_path, "trace_<algo>.json written by run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      maler::ExperimentConfig cfg = task == "classification" ? maler::ExperimentConfig::classification_defaults()
                                                             : maler::ExperimentConfig::regression_defaults();
      cfg.algos = split_csv(algos);
      if (rounds) cfg.T = *rounds;
      if (dim) cfg.d = *dim;
      if (batch) cfg.n = *batch;
      cfg.lambda = lambda;
      cfg.noise_std = noise_std;
      cfg.seed = seed;
      cfg.data_path = data;
      cfg.radius = radius;
      cfg.out_dir = out;
      cfg.svg = !no_svg;
      cfg.sc_modulus = sc_modulus;

      const auto result = maler::run_experiment(cfg);
      const auto& p = result.task.problem;
      std::printf("task=%s T=%d d=%d G=%.6g D=%.6g\n", cfg.task.c_str(), p.T(), p.d(), p.G(), p.D());
      for (const auto& r : result.run.runs) {
        std::printf("%-11s final regret %.6g", r.name.c_str(), r.final_regret());
        if (r.meta_regret) std::printf("  meta-regret violations %zu", r.meta_regret->violations());
        if (r.regret_bounds && r.name == "maler") std::printf("  bound violations %zu", r.regret_bounds->violations());
        std::printf("\n");
      }
      std::printf("wrote %s/regret.csv\n", out.c_str());
      return 0;
    }
    const auto saved = maler::read_trace(trace_path);
    const auto report = maler::certify_trace(saved);
    std::cout << "learner: " << saved.learner << "  rounds: " << saved.rounds.size() << '\n' << report.summary();
    return report.violations() == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
