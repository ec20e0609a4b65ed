// Command-line runner for the sweep experiments: `run` executes a plan file
// cell by cell, `summarize` aggregates a results CSV, `trace` emits the
// convergence CSV of one trial.

#include <cstdint>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "aircran/experiments.hpp"

using namespace aircran;

int main(int argc, char** argv) {
  CLI::App app{"Cloud-RAN over-the-air inference experiment runner"};
  app.require_subcommand(1);

  std::string plan_path;
  std::string csv_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 1;
  int trial = 0;

  auto* run_cmd = app.add_subcommand("run", "run every cell of a plan file");
  run_cmd->add_option("plan", plan_path, "plan file")->required();
  run_cmd->add_option("--seed", seed, "override the plan rng_seed")
      ->each([&](const std::string&) { seed_given = true; });
  run_cmd->add_option("--workers", workers, "worker threads")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", out_path, "override the plan output path");

  auto* sum_cmd = app.add_subcommand("summarize",
                                     "per (sweep value, scheme) means");
  sum_cmd->add_option("csv", csv_path, "results CSV")->required();

  auto* trace_cmd =
      app.add_subcommand("trace", "convergence trace of one trial");
  trace_cmd->add_option("plan", plan_path, "plan file")->required();
  trace_cmd->add_option("--trial", trial, "trial index");
  trace_cmd->add_option("--seed", seed, "override the plan rng_seed")
      ->each([&](const std::string&) { seed_given = true; });
  trace_cmd->add_option("--out", out_path, "write CSV here (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      ExperimentPlan plan = plan_from_file(KeyValueFile::parse_file(plan_path));
      std::uint64_t s = seed_given ? seed : plan.base.rng_seed;
      std::string out = out_path.empty() ? plan.output_path : out_path;
      auto rows = run_plan(plan, s, workers, out);
      int failures = 0;
      for (const auto& r : rows)
        if (r.status != "ok") ++failures;
      std::cerr << rows.size() << " cells, " << failures << " failed, wrote "
                << out << "\n";
      return failures == 0 ? 0 : 1;
    }
    if (sum_cmd->parsed()) {
      auto rows = read_results_csv(csv_path);
      write_summary_csv(summarize(rows), std::cout);
      return 0;
    }
    if (trace_cmd->parsed()) {
      ExperimentPlan plan = plan_from_file(KeyValueFile::parse_file(plan_path));
      std::uint64_t s = seed_given ? seed : plan.base.rng_seed;
      ScaState state = run_trace(plan, trial, s);
      if (out_path.empty()) {
        write_trace_csv(state, std::cout);
      } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open '" + out_path + "'");
        write_trace_csv(state, out);
      }
      return state.status == SolveStatus::optimal ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
