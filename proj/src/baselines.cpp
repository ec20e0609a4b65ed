#include "aircran/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace aircran {

double uniform_quantization_lambda(const ConstraintConstants& constants,
                                   double C) {
  if (!(C > 0.0))
    throw std::invalid_argument("uniform_quantization_lambda: C must be > 0");
  const int MN = static_cast<int>(constants.A.rows());
  auto rate_at = [&](double lam) {
    return fronthaul_rate(VectorXd::Constant(MN, lam), constants);
  };
  // Bracket the root: rate is strictly decreasing in lambda.
  double lo = 1.0, hi = 1.0;
  while (rate_at(lo) < C) {
    lo *= 0.5;
    if (lo < 1e-300)
      throw std::runtime_error("uniform_quantization_lambda: bracketing failed");
  }
  while (rate_at(hi) > C) {
    hi *= 2.0;
    if (hi > 1e300)
      throw std::runtime_error("uniform_quantization_lambda: bracketing failed");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double r = rate_at(mid);
    if (std::abs(r - C) <= 1e-8) return mid;
    (r > C ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

std::vector<int> active_dims_of(const ConstraintConstants& cc) {
  std::vector<int> active;
  for (int d = 0; d < static_cast<int>(cc.kappa.size()); ++d)
    if (cc.kappa[d] > 0.0) active.push_back(d);
  return active;
}

void set_alpha_with_margin(DesignSolution& sol, const FeatureStatistics& stats,
                           const SystemConfig& cfg,
                           const std::vector<int>& active, double margin) {
  VectorXd eq = equality_alpha(sol, stats, cfg);
  for (int d : active) sol.aux_gain[d] = margin * eq[d];
}

// Shared accept/reject bookkeeping for one half-step.
struct StepGate {
  double gain;
  bool failed = false;
  std::string message;

  bool take(ScaState& state, int iter, int half, int subproblem,
            const SolveReport& rep) {
    if (rep.status != SolveStatus::optimal) {
      failed = true;
      message = std::string("subproblem ") + std::to_string(subproblem) + " " +
                to_string(rep.status) + " at iteration " + std::to_string(iter);
      return false;
    }
    bool accept = rep.objective >= gain;
    if (accept) gain = rep.objective;
    state.rows.push_back(
        {iter, half, gain, subproblem, rep.newton_steps, rep.max_violation});
    return accept;
  }
};

// Baseline 1: uniform quantization at the capacity-tight level, then
// alternate only subproblem 1.
std::pair<DesignSolution, ScaState> run_uniform_quantization(
    const SystemConfig& cfg, const ChannelSet& channels,
    const FeatureStatistics& stats, double eps_stop, int max_iters) {
  ConstraintConstants cc = build_constants(cfg, channels, stats);
  std::vector<int> active = active_dims_of(cc);
  DesignSolution sol = initial_feasible_point(cfg, channels, stats);
  double lam = uniform_quantization_lambda(cc, cfg.fronthaul_capacity);
  sol.quantization_diag.setConstant(lam);
  set_alpha_with_margin(sol, stats, cfg, active, 0.99);

  ScaState state;
  StepGate gate;
  gate.gain = sol.aux_gain.sum();
  state.objective_trace.push_back(gate.gain);
  for (int it = 1; it <= max_iters; ++it) {
    double before = gate.gain;
    Subproblem sub1 = build_subproblem1(sol, cfg, stats, channels);
    SolveReport rep = solve(sub1.prog, sub1.anchor_point);
    if (gate.take(state, it, 1, 1, rep))
      apply_subproblem_solution(sub1, rep.x, sol);
    if (gate.failed) break;
    state.objective_trace.push_back(gate.gain);
    state.iterations = it;
    if (gate.gain - before < eps_stop) break;
  }
  state.status = gate.failed ? SolveStatus::numerical_failure
                             : SolveStatus::optimal;
  state.message = gate.message;
  state.solution = sol;
  return {sol, state};
}

// Baseline 2: m_d = 1 (not renormalized), alternate the reduced
// (alpha, c, beta) subproblem and the (alpha, q) subproblem.
std::pair<DesignSolution, ScaState> run_uniform_beamforming(
    const SystemConfig& cfg, const ChannelSet& channels,
    const FeatureStatistics& stats, double eps_stop, int max_iters) {
  ConstraintConstants cc = build_constants(cfg, channels, stats);
  std::vector<int> active = active_dims_of(cc);
  const int K = cfg.K;
  const int D = cfg.D;
  const int MN = cfg.antennas_total();
  const int Da = static_cast<int>(active.size());

  VectorXcd ones = VectorXcd::Constant(MN, cplx(1.0, 0.0));
  VectorXd g(K);
  for (int k = 0; k < K; ++k) {
    g[k] = std::norm(ones.dot(channels.h[static_cast<std::size_t>(k)]));
    if (!(g[k] > 0.0))
      throw std::runtime_error(
          "baseline 2: all-ones beamformer orthogonal to device " +
          std::to_string(k));
  }

  DesignSolution sol;
  sol.receive_strength = MatrixXd::Zero(K, D);
  sol.beamformers.assign(static_cast<std::size_t>(D), ones);
  sol.aux_gain = VectorXd::Zero(D);
  sol.aux_energy = MatrixXd::Constant(K, D, kBetaFloor);
  double lam = uniform_quantization_lambda(cc, cfg.fronthaul_capacity);
  sol.quantization_diag = VectorXd::Constant(MN, 1.05 * lam);

  double ebar = normalized_energy(cfg);
  for (int d : active)
    for (int k = 0; k < K; ++k) {
      double t2 = g[k] * std::min(0.5 * cfg.max_precoding_power[k],
                                  0.5 * ebar / (cfg.signal_second_moment[k] *
                                                K * Da));
      sol.receive_strength(k, d) = std::sqrt(t2);
      sol.aux_energy(k, d) =
          std::max(1.01 * t2 * cfg.signal_second_moment[k] / g[k],
                   2.0 * kBetaFloor);
    }
  set_alpha_with_margin(sol, stats, cfg, active, 0.99);

  ScaState state;
  StepGate gate;
  gate.gain = sol.aux_gain.sum();
  state.objective_trace.push_back(gate.gain);
  for (int it = 1; it <= max_iters; ++it) {
    double before = gate.gain;
    Subproblem sub1 = build_subproblem1(sol, cfg, stats, channels,
                                        /*optimize_beamformers=*/false);
    SolveReport rep1 = solve(sub1.prog, sub1.anchor_point);
    if (gate.take(state, it, 1, 1, rep1))
      apply_subproblem_solution(sub1, rep1.x, sol);
    if (gate.failed) break;

    Subproblem sub2 = build_subproblem2(sol, cfg, stats, cc);
    SolveReport rep2 = solve(sub2.prog, sub2.anchor_point);
    if (gate.take(state, it, 2, 2, rep2))
      apply_subproblem_solution(sub2, rep2.x, sol);
    if (gate.failed) break;

    state.objective_trace.push_back(gate.gain);
    state.iterations = it;
    if (gate.gain - before < eps_stop) break;
  }
  state.status = gate.failed ? SolveStatus::numerical_failure
                             : SolveStatus::optimal;
  state.message = gate.message;
  state.solution = sol;
  return {sol, state};
}

// Induced receive strength of the fixed-precoding scheme (real part of the
// end-to-end coefficient; may be negative during optimization).
MatrixXd induced_receive_strength(const DesignSolution& sol,
                                  const ChannelSet& channels, double b0,
                                  const std::vector<int>& active) {
  const int K = channels.devices();
  const int D = sol.dims();
  MatrixXd c = MatrixXd::Zero(K, D);
  for (int d : active) {
    const VectorXcd& m = sol.beamformers[static_cast<std::size_t>(d)];
    for (int k = 0; k < K; ++k)
      c(k, d) =
          b0 * std::real(m.dot(channels.h[static_cast<std::size_t>(k)]));
  }
  return c;
}

// Subproblem of baseline 3 over (alpha, m-lift): Lambda(c(m), m) <= Gamma1
// linearized at the anchor, with c an affine function of the lifted
// beamformer.
Subproblem build_fixed_precoding_subproblem(const DesignSolution& anchor,
                                            const SystemConfig& cfg,
                                            const FeatureStatistics& stats,
                                            const ChannelSet& channels,
                                            const ConstraintConstants& cc,
                                            double b0) {
  std::vector<int> active = active_dims_of(cc);
  const int K = cfg.K;
  const int MN = cfg.antennas_total();
  const int Da = static_cast<int>(active.size());

  Subproblem sub;
  sub.kind = 1;
  sub.K = 0;  // no c/beta blocks; idx_mt offsets below account for that
  sub.MN = MN;
  sub.active_dims = active;
  sub.has_beamformers = true;

  ConvexProgram& prog = sub.prog;
  prog.num_vars = Da + 2 * MN * Da;
  prog.blocks = {{"alpha", 0, Da}, {"mt", Da, 2 * MN * Da}};
  prog.objective = VectorXd::Zero(prog.num_vars);
  for (int di = 0; di < Da; ++di) prog.objective[di] = 1.0;

  auto idx_mt = [&](int j, int di) { return Da + di * 2 * MN + j; };

  std::vector<VectorXd> h_lift(static_cast<std::size_t>(K));
  VectorXd h_sum = VectorXd::Zero(2 * MN);
  for (int k = 0; k < K; ++k) {
    h_lift[static_cast<std::size_t>(k)] =
        lift_vector(channels.h[static_cast<std::size_t>(k)]);
    h_sum += h_lift[static_cast<std::size_t>(k)];
  }

  VectorXd noise_diag(2 * MN);
  for (int i = 0; i < MN; ++i) {
    double v = 0.5 * (cfg.awgn_power + anchor.quantization_diag[i]);
    noise_diag[i] = v;
    noise_diag[MN + i] = v;
  }

  sub.anchor_point = VectorXd::Zero(prog.num_vars);
  for (int di = 0; di < Da; ++di) {
    const int d = active[di];
    sub.anchor_point[di] = anchor.aux_gain[d];
    VectorXd mt0 = lift_vector(anchor.beamformers[static_cast<std::size_t>(d)]);
    for (int j = 0; j < 2 * MN; ++j) sub.anchor_point[idx_mt(j, di)] = mt0[j];
  }

  for (int di = 0; di < Da; ++di) {
    const int d = active[di];
    double kappa = cc.kappa[d];
    Gamma1Linearization g1 = linearize_gamma1(
        anchor.aux_gain[d], anchor.receive_strength.col(d));

    ConvexQuadLE lam;
    lam.quad_index.resize(static_cast<std::size_t>(2 * MN));
    for (int j = 0; j < 2 * MN; ++j)
      lam.quad_index[static_cast<std::size_t>(j)] = idx_mt(j, di);
    lam.P = MatrixXd::Zero(2 * MN, 2 * MN);
    lam.P += (stats.feature_variances[d] * b0 * b0 / kappa) *
             (h_sum * h_sum.transpose());
    for (int k = 0; k < K; ++k)
      lam.P += (cfg.sensing_noise_power[k] * b0 * b0 / kappa) *
               (h_lift[static_cast<std::size_t>(k)] *
                h_lift[static_cast<std::size_t>(k)].transpose());
    for (int j = 0; j < 2 * MN; ++j) lam.P(j, j) += noise_diag[j] / kappa;

    lam.a.push_back({di, g1.grad_alpha});
    for (int j = 0; j < 2 * MN; ++j) {
      double coef = g1.grad_c * b0 * h_sum[j];
      if (coef != 0.0) lam.a.push_back({idx_mt(j, di), coef});
    }
    lam.b = g1.constant;
    lam.label = "lambda[" + std::to_string(d) + "]";
    prog.constraints.emplace_back(std::move(lam));
  }

  for (int di = 0; di < Da; ++di) {
    AffineLE afloor;
    afloor.a = {{di, -1.0}};
    afloor.b = -kAlphaFloor;
    afloor.label = "alpha_floor[" + std::to_string(active[di]) + "]";
    prog.constraints.emplace_back(std::move(afloor));
  }
  return sub;
}

std::pair<DesignSolution, ScaState> run_fixed_precoding(
    const BaselineSpec& spec, const SystemConfig& cfg,
    const ChannelSet& channels, const FeatureStatistics& stats,
    double eps_stop, int max_iters) {
  ConstraintConstants cc = build_constants(cfg, channels, stats);
  std::vector<int> active = active_dims_of(cc);
  const int K = cfg.K;
  const int D = cfg.D;
  const int MN = cfg.antennas_total();

  double b0 = spec.fixed_precoding_level;
  if (!(b0 > 0.0)) {
    // Largest uniform level within every power cap and 90% of the energy
    // budget across all D slots.
    double cap = cfg.max_precoding_power.minCoeff();
    double wsum = cfg.signal_second_moment.sum();
    double energy_cap = 0.9 * normalized_energy(cfg) / (D * wsum);
    b0 = std::sqrt(std::min(cap, energy_cap));
  }

  VectorXcd msum = VectorXcd::Zero(MN);
  for (const auto& hk : channels.h) msum += hk;
  double norm = msum.norm();
  if (!(norm > 0.0))
    throw std::runtime_error("baseline 3: degenerate channels");

  DesignSolution sol;
  sol.receive_strength = MatrixXd::Zero(K, D);
  sol.beamformers.assign(static_cast<std::size_t>(D), VectorXcd::Zero(MN));
  for (int d : active)
    sol.beamformers[static_cast<std::size_t>(d)] = msum / norm;
  double lam = uniform_quantization_lambda(cc, cfg.fronthaul_capacity);
  sol.quantization_diag = VectorXd::Constant(MN, 1.05 * lam);
  sol.aux_gain = VectorXd::Zero(D);
  sol.aux_energy = MatrixXd::Constant(K, D, kBetaFloor);
  sol.receive_strength = induced_receive_strength(sol, channels, b0, active);
  set_alpha_with_margin(sol, stats, cfg, active, 0.99);

  ScaState state;
  StepGate gate;
  gate.gain = sol.aux_gain.sum();
  state.objective_trace.push_back(gate.gain);
  for (int it = 1; it <= max_iters; ++it) {
    double before = gate.gain;
    Subproblem sub1 = build_fixed_precoding_subproblem(sol, cfg, stats,
                                                       channels, cc, b0);
    SolveReport rep1 = solve(sub1.prog, sub1.anchor_point);
    if (gate.take(state, it, 1, 1, rep1)) {
      const int Da = static_cast<int>(active.size());
      for (int di = 0; di < Da; ++di) {
        const int d = active[static_cast<std::size_t>(di)];
        sol.aux_gain[d] = rep1.x[di];
        VectorXd mt(2 * MN);
        for (int j = 0; j < 2 * MN; ++j) mt[j] = rep1.x[Da + di * 2 * MN + j];
        sol.beamformers[static_cast<std::size_t>(d)] = unlift_vector(mt);
      }
      sol.receive_strength =
          induced_receive_strength(sol, channels, b0, active);
    }
    if (gate.failed) break;

    Subproblem sub2 = build_subproblem2(sol, cfg, stats, cc);
    SolveReport rep2 = solve(sub2.prog, sub2.anchor_point);
    if (gate.take(state, it, 2, 2, rep2))
      apply_subproblem_solution(sub2, rep2.x, sol);
    if (gate.failed) break;

    state.objective_trace.push_back(gate.gain);
    state.iterations = it;
    if (gate.gain - before < eps_stop) break;
  }

  // Deliverable solution: clamp the induced strengths at zero, rebuild the
  // auxiliaries at equality.
  for (int d = 0; d < D; ++d)
    for (int k = 0; k < K; ++k)
      sol.receive_strength(k, d) = std::max(0.0, sol.receive_strength(k, d));
  for (int d : active) {
    const VectorXcd& m = sol.beamformers[static_cast<std::size_t>(d)];
    for (int k = 0; k < K; ++k) {
      double ck = sol.receive_strength(k, d);
      if (ck == 0.0) {
        sol.aux_energy(k, d) = kBetaFloor;
        continue;
      }
      double g = std::norm(m.dot(channels.h[static_cast<std::size_t>(k)]));
      sol.aux_energy(k, d) = ck * ck * cfg.signal_second_moment[k] / g;
    }
  }
  VectorXd eq = equality_alpha(sol, stats, cfg);
  for (int d : active) sol.aux_gain[d] = eq[d];

  state.status = gate.failed ? SolveStatus::numerical_failure
                             : SolveStatus::optimal;
  state.message = gate.message;
  state.solution = sol;
  return {sol, state};
}

}  // namespace

std::pair<DesignSolution, ScaState> run_baseline(const BaselineSpec& spec,
                                                 const SystemConfig& cfg,
                                                 const ChannelSet& channels,
                                                 const FeatureStatistics& stats,
                                                 double eps_stop,
                                                 int max_iters) {
  if (!(eps_stop > 0.0))
    throw std::invalid_argument("run_baseline: eps_stop must be > 0");

  NormalizedInstance norm = normalize_instance(cfg, channels);
  std::pair<DesignSolution, ScaState> result;
  switch (spec.kind) {
    case BaselineKind::uniform_quantization:
      result = run_uniform_quantization(norm.cfg, norm.channels, stats,
                                        eps_stop, max_iters);
      break;
    case BaselineKind::uniform_beamforming:
      result = run_uniform_beamforming(norm.cfg, norm.channels, stats,
                                       eps_stop, max_iters);
      break;
    case BaselineKind::fixed_precoding:
      result = run_fixed_precoding(spec, norm.cfg, norm.channels, stats,
                                   eps_stop, max_iters);
      break;
    default:
      throw std::invalid_argument("run_baseline: unknown baseline kind");
  }
  result.first = denormalize_solution(result.first, norm.theta);
  result.second.solution = result.first;
  return result;
}

}  // namespace aircran
