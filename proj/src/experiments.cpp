#include "aircran/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "aircran/baselines.hpp"
#include "aircran/inference.hpp"
#include "aircran/metrics.hpp"

namespace aircran {

namespace {

const char* kResultHeader =
    "trial,sweep_axis,sweep_value,scheme,disc_gain,accuracy,acc_stderr,"
    "iterations,wall_ms,status";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_row(std::ostream& out, const ResultRow& r) {
  out << r.trial << ',' << r.sweep_axis << ',' << fmt(r.sweep_value) << ','
      << r.scheme << ',' << fmt(r.disc_gain) << ',' << fmt(r.accuracy) << ','
      << fmt(r.acc_stderr) << ',' << r.iterations << ',' << fmt(r.wall_ms)
      << ',' << r.status << '\n';
}

SystemConfig apply_sweep(SystemConfig cfg, const std::string& axis,
                         double value) {
  if (axis == "fronthaul_capacity")
    cfg.fronthaul_capacity = value;
  else if (axis == "energy_budget")
    cfg.energy_budget = value;
  else if (axis == "power")
    cfg.max_precoding_power.setConstant(value);
  else
    throw ConfigError("sweep_axis: unknown axis '" + axis + "'");
  return validate_config(cfg);
}

BaselineKind baseline_kind_of(const std::string& scheme) {
  if (scheme == "baseline1") return BaselineKind::uniform_quantization;
  if (scheme == "baseline2") return BaselineKind::uniform_beamforming;
  if (scheme == "baseline3") return BaselineKind::fixed_precoding;
  throw ConfigError("schemes: unknown scheme '" + scheme + "'");
}

}  // namespace

ExperimentPlan plan_from_file(const KeyValueFile& kv) {
  ExperimentPlan plan;
  plan.base = config_from_file(kv);
  plan.sweep_axis = kv.get_string_or("sweep_axis", "energy_budget");
  if (plan.sweep_axis != "fronthaul_capacity" &&
      plan.sweep_axis != "energy_budget" && plan.sweep_axis != "power")
    throw ConfigError("sweep_axis: must be fronthaul_capacity, energy_budget "
                      "or power");
  plan.sweep_values = kv.has("sweep_values")
                          ? kv.get_real_list("sweep_values")
                          : std::vector<double>{};
  if (plan.sweep_values.empty())
    throw ConfigError("sweep_values: need a non-empty list");
  plan.schemes = kv.has("schemes")
                     ? kv.get_string_list("schemes")
                     : std::vector<std::string>{"proposed"};
  for (const auto& s : plan.schemes)
    if (s != "proposed") baseline_kind_of(s);  // validates the name
  plan.n_trials = static_cast<int>(kv.get_int_or("n_trials", 1));
  if (plan.n_trials < 1) throw ConfigError("n_trials: must be >= 1");
  plan.n_inference_samples = kv.get_int_or("n_inference_samples", 10000);
  plan.output_path = kv.get_string_or("output", "results.csv");
  plan.geometry.inner_radius = kv.get_real_or("inner_radius", 100.0);
  plan.geometry.outer_radius = kv.get_real_or("outer_radius", 500.0);
  plan.feature_separation = kv.get_real_or("feature_separation", 2.0);
  plan.eps_stop = kv.get_real_or("eps_stop", 1e-3);
  plan.max_iters = static_cast<int>(kv.get_int_or("max_iters", 50));
  plan.features_csv = kv.get_string_or("features_csv", "");
  return plan;
}

FeatureStatistics plan_feature_statistics(const ExperimentPlan& plan,
                                          std::uint64_t seed) {
  if (!plan.features_csv.empty()) {
    LabeledFeatures data = load_labeled_csv(plan.features_csv);
    PcaBasis basis = fit_pca(data.features, plan.base.D);
    LabeledFeatures projected;
    projected.labels = data.labels;
    projected.features = pca_project(basis, data.features);
    return fit_mixture(projected, plan.base.L);
  }
  Rng rng(derive_seed(seed, 0xfea7u));
  return synthesize_feature_statistics(plan.base.L, plan.base.D,
                                       plan.feature_separation, rng);
}

std::vector<ResultRow> run_plan(const ExperimentPlan& plan, std::uint64_t seed,
                                int workers, const std::string& out_path) {
  const int T = plan.n_trials;
  const int S = static_cast<int>(plan.sweep_values.size());
  const int C = static_cast<int>(plan.schemes.size());
  const int n_cells = T * S * C;

  FeatureStatistics stats = plan_feature_statistics(plan, seed);

  // One channel realization per trial, shared by all schemes and sweep
  // values of that trial.
  std::vector<ChannelSet> channels(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    Rng rng(seed + static_cast<std::uint64_t>(t));
    Placements pl = sample_geometry(plan.base, plan.geometry, rng);
    channels[static_cast<std::size_t>(t)] =
        generate_channels(pl, plan.base, rng);
  }

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open '" + out_path + "'");
  out << kResultHeader << '\n';
  out.flush();

  std::vector<ResultRow> rows(static_cast<std::size_t>(n_cells));
  std::vector<char> done(static_cast<std::size_t>(n_cells), 0);
  std::mutex io_mutex;
  std::atomic<int> next{0};

  auto run_cell = [&](int cell) {
    const int t = cell / (S * C);
    const int si = (cell / C) % S;
    const int ci = cell % C;
    ResultRow row;
    row.trial = t;
    row.sweep_axis = plan.sweep_axis;
    row.sweep_value = plan.sweep_values[static_cast<std::size_t>(si)];
    row.scheme = plan.schemes[static_cast<std::size_t>(ci)];
    auto t_start = std::chrono::steady_clock::now();
    try {
      SystemConfig cfg = apply_sweep(plan.base, plan.sweep_axis,
                                     row.sweep_value);
      const ChannelSet& ch = channels[static_cast<std::size_t>(t)];
      DesignSolution sol;
      ScaState state;
      if (row.scheme == "proposed") {
        std::tie(sol, state) =
            run_algorithm1(cfg, ch, stats, plan.eps_stop, plan.max_iters);
      } else {
        BaselineSpec spec;
        spec.kind = baseline_kind_of(row.scheme);
        std::tie(sol, state) =
            run_baseline(spec, cfg, ch, stats, plan.eps_stop, plan.max_iters);
      }
      row.iterations = state.iterations;
      row.disc_gain = received_discriminant_gain(sol, stats, cfg);
      Rng inf_rng(derive_seed(seed, static_cast<std::uint64_t>(t),
                              static_cast<std::uint64_t>(si),
                              static_cast<std::uint64_t>(ci) + 0x1000u));
      Classifier clf =
          make_map_classifier(aggregate_statistics(sol, stats, cfg));
      AccuracyEstimate est = estimate_accuracy(
          clf, sol, stats, ch, cfg, plan.n_inference_samples, inf_rng);
      row.accuracy = est.accuracy;
      row.acc_stderr = est.stderr_;
      if (state.status != SolveStatus::optimal)
        row.status = std::string("error: ") + state.message;
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
    std::lock_guard<std::mutex> lock(io_mutex);
    rows[static_cast<std::size_t>(cell)] = row;
    done[static_cast<std::size_t>(cell)] = 1;
    write_row(out, row);
    out.flush();
  };

  int n_workers = std::max(1, workers);
  if (n_workers == 1) {
    for (int cell = 0; cell < n_cells; ++cell) run_cell(cell);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w)
      pool.emplace_back([&] {
        while (true) {
          int cell = next.fetch_add(1);
          if (cell >= n_cells) break;
          run_cell(cell);
        }
      });
    for (auto& th : pool) th.join();
  }
  out.close();

  // Canonical order on completion: identical plan+seed gives an identical
  // file for any worker count.
  std::ofstream final_out(out_path, std::ios::trunc);
  final_out << kResultHeader << '\n';
  for (const auto& r : rows) write_row(final_out, r);
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("summarize: no rows");
  // Group by (sweep_value, scheme), preserving first-appearance order.
  std::vector<SummaryRow> out;
  auto find = [&](double v, const std::string& s) -> SummaryRow& {
    for (auto& r : out)
      if (r.sweep_value == v && r.scheme == s) return r;
    out.push_back({});
    out.back().sweep_value = v;
    out.back().scheme = s;
    return out.back();
  };
  // Two passes: accumulate means, then spread.
  for (const auto& r : rows) {
    SummaryRow& s = find(r.sweep_value, r.scheme);
    if (r.status != "ok") {
      ++s.failures;
      continue;
    }
    ++s.n;
    s.mean_gain += r.disc_gain;
    s.mean_accuracy += r.accuracy;
  }
  for (auto& s : out) {
    if (s.n > 0) {
      s.mean_gain /= s.n;
      s.mean_accuracy /= s.n;
    }
  }
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    SummaryRow& s = find(r.sweep_value, r.scheme);
    double dg = r.disc_gain - s.mean_gain;
    double da = r.accuracy - s.mean_accuracy;
    s.stderr_gain += dg * dg;
    s.stderr_accuracy += da * da;
  }
  for (auto& s : out) {
    if (s.n > 1) {
      s.stderr_gain = std::sqrt(s.stderr_gain / (s.n - 1)) / std::sqrt(s.n);
      s.stderr_accuracy =
          std::sqrt(s.stderr_accuracy / (s.n - 1)) / std::sqrt(s.n);
    } else {
      s.stderr_gain = 0.0;
      s.stderr_accuracy = 0.0;
    }
  }
  return out;
}

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kResultHeader << '\n';
  for (const auto& r : rows) write_row(out, r);
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open results CSV '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kResultHeader)
    throw std::runtime_error("results CSV '" + path + "': bad header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    ResultRow r;
    auto next_cell = [&]() {
      if (!std::getline(ss, cell, ','))
        throw std::runtime_error("results CSV: truncated row");
      return cell;
    };
    r.trial = std::stoi(next_cell());
    r.sweep_axis = next_cell();
    r.sweep_value = std::strtod(next_cell().c_str(), nullptr);
    r.scheme = next_cell();
    r.disc_gain = std::strtod(next_cell().c_str(), nullptr);
    r.accuracy = std::strtod(next_cell().c_str(), nullptr);
    r.acc_stderr = std::strtod(next_cell().c_str(), nullptr);
    r.iterations = std::stoi(next_cell());
    r.wall_ms = std::strtod(next_cell().c_str(), nullptr);
    std::getline(ss, r.status);  // status may contain commas
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << "sweep_value,scheme,n,mean_gain,stderr_gain,mean_accuracy,"
         "stderr_accuracy,failures\n";
  for (const auto& r : rows)
    out << fmt(r.sweep_value) << ',' << r.scheme << ',' << r.n << ','
        << fmt(r.mean_gain) << ',' << fmt(r.stderr_gain) << ','
        << fmt(r.mean_accuracy) << ',' << fmt(r.stderr_accuracy) << ','
        << r.failures << '\n';
}

ScaState run_trace(const ExperimentPlan& plan, int trial, std::uint64_t seed) {
  if (trial < 0 || trial >= plan.n_trials)
    throw std::invalid_argument("run_trace: trial out of range");
  FeatureStatistics stats = plan_feature_statistics(plan, seed);
  Rng rng(seed + static_cast<std::uint64_t>(trial));
  Placements pl = sample_geometry(plan.base, plan.geometry, rng);
  ChannelSet ch = generate_channels(pl, plan.base, rng);
  auto [sol, state] =
      run_algorithm1(plan.base, ch, stats, plan.eps_stop, plan.max_iters);
  (void)sol;
  return state;
}

}  // namespace aircran
