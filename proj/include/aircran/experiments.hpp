#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "aircran/config_io.hpp"
#include "aircran/scenario.hpp"
#include "aircran/sca.hpp"
#include "aircran/types.hpp"

namespace aircran {

struct ExperimentPlan {
  SystemConfig base;
  std::string sweep_axis = "energy_budget";  // fronthaul_capacity | energy_budget | power
  std::vector<double> sweep_values;
  std::vector<std::string> schemes;  // proposed, baseline1, baseline2, baseline3
  int n_trials = 1;
  long long n_inference_samples = 10000;
  std::string output_path = "results.csv";
  GeometryParams geometry;
  double feature_separation = 2.0;
  double eps_stop = 1e-3;
  int max_iters = 50;
  std::string features_csv;  // optional labeled data to fit the mixture from
};

ExperimentPlan plan_from_file(const KeyValueFile& kv);

struct ResultRow {
  int trial = 0;
  std::string sweep_axis;
  double sweep_value = 0.0;
  std::string scheme;
  double disc_gain = 0.0;
  double accuracy = 0.0;
  double acc_stderr = 0.0;
  int iterations = 0;
  double wall_ms = 0.0;
  std::string status = "ok";
};

/// Feature statistics for a plan: synthesized from the plan seed, or fitted
/// from the labeled CSV via PCA when features_csv is set.
FeatureStatistics plan_feature_statistics(const ExperimentPlan& plan,
                                          std::uint64_t seed);

/**
 * Runs every (trial, sweep value, scheme) cell. Channels are drawn once per
 * trial (stream seed + trial) and shared by all schemes and sweep values of
 * that trial. Rows are appended and flushed per completed cell; on normal
 * completion the file is rewritten in canonical cell order so identical
 * plans and seeds give identical files for any worker count. Per-cell
 * failures are recorded in the status column and the run continues.
 */
std::vector<ResultRow> run_plan(const ExperimentPlan& plan, std::uint64_t seed,
                                int workers, const std::string& out_path);

struct SummaryRow {
  double sweep_value = 0.0;
  std::string scheme;
  int n = 0;  // successful cells
  double mean_gain = 0.0;
  double stderr_gain = 0.0;
  double mean_accuracy = 0.0;
  double stderr_accuracy = 0.0;
  int failures = 0;
};

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out);
std::vector<ResultRow> read_results_csv(const std::string& path);
void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out);

/// Convergence trace of the proposed algorithm on one trial's channels at the
/// plan's base configuration.
ScaState run_trace(const ExperimentPlan& plan, int trial, std::uint64_t seed);

}  // namespace aircran
