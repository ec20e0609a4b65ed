#include "aircran/sca.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "aircran/baselines.hpp"

namespace aircran {

VectorXd lift_vector(const VectorXcd& m) {
  const int n = static_cast<int>(m.size());
  VectorXd mt(2 * n);
  mt.head(n) = m.real();
  mt.tail(n) = m.imag();
  return mt;
}

VectorXcd unlift_vector(const VectorXd& mt) {
  const int n = static_cast<int>(mt.size()) / 2;
  VectorXcd m(n);
  m.real() = mt.head(n);
  m.imag() = mt.tail(n);
  return m;
}

MatrixXd lift_hermitian(const MatrixXcd& G) {
  const int n = static_cast<int>(G.rows());
  MatrixXd Gt(2 * n, 2 * n);
  Gt.topLeftCorner(n, n) = G.real();
  Gt.topRightCorner(n, n) = -G.imag();
  Gt.bottomLeftCorner(n, n) = G.imag();
  Gt.bottomRightCorner(n, n) = G.real();
  return Gt;
}

RealLift complex_to_real_lift(const ChannelSet& channels, const VectorXd& q) {
  const int MN = channels.antennas_total();
  RealLift lift;
  lift.H_tilde.reserve(channels.h.size());
  for (const auto& hk : channels.h)
    lift.H_tilde.push_back(lift_hermitian(hk * hk.adjoint()));
  MatrixXcd Q = MatrixXcd::Zero(MN, MN);
  Q.diagonal().real() = q;
  lift.Q_tilde = lift_hermitian(Q);
  return lift;
}

Gamma1Linearization linearize_gamma1(double alpha0, const VectorXd& c0) {
  if (!(alpha0 > 0.0))
    throw std::invalid_argument("linearize_gamma1: anchor alpha must be > 0");
  double sc = c0.sum();
  Gamma1Linearization lin;
  lin.grad_alpha = -(sc / alpha0) * (sc / alpha0);
  lin.grad_c = 2.0 * sc / alpha0;
  double anchor_value = sc * sc / alpha0;
  lin.constant = anchor_value - lin.grad_alpha * alpha0 - lin.grad_c * sc;
  return lin;
}

Gamma2Linearization linearize_gamma2(const VectorXd& mt0, const MatrixXd& H) {
  Gamma2Linearization lin;
  lin.grad = 2.0 * (H * mt0);
  lin.constant = -mt0.dot(H * mt0);
  return lin;
}

int Subproblem::idx_alpha(int di) const { return di; }
int Subproblem::idx_c(int k, int di) const {
  return static_cast<int>(active_dims.size()) + di * K + k;
}
int Subproblem::idx_beta(int k, int di) const {
  int Da = static_cast<int>(active_dims.size());
  return Da + Da * K + di * K + k;
}
int Subproblem::idx_mt(int j, int di) const {
  int Da = static_cast<int>(active_dims.size());
  return Da + 2 * Da * K + di * 2 * MN + j;
}
int Subproblem::idx_q(int i) const {
  return static_cast<int>(active_dims.size()) + i;
}

namespace {

std::vector<int> active_dimensions(const VectorXd& kappa) {
  std::vector<int> active;
  for (int d = 0; d < static_cast<int>(kappa.size()); ++d)
    if (kappa[d] > 0.0) active.push_back(d);
  return active;
}

std::string tag(const char* base, int a, int b = -1) {
  std::string s = base;
  s += "[" + std::to_string(a);
  if (b >= 0) s += "," + std::to_string(b);
  s += "]";
  return s;
}

}  // namespace

Subproblem build_subproblem1(const DesignSolution& anchor,
                             const SystemConfig& cfg,
                             const FeatureStatistics& stats,
                             const ChannelSet& channels,
                             bool optimize_beamformers) {
  ConstraintConstants cc = build_constants(cfg, channels, stats);
  std::vector<int> active = active_dimensions(cc.kappa);
  if (active.empty())
    throw std::invalid_argument(
        "build_subproblem1: inactive problem (all class means equal)");

  const int K = cfg.K;
  const int MN = cfg.antennas_total();
  const int Da = static_cast<int>(active.size());
  const int nm = optimize_beamformers ? 2 * MN : 0;

  Subproblem sub;
  sub.kind = 1;
  sub.K = K;
  sub.MN = MN;
  sub.active_dims = active;
  sub.has_beamformers = optimize_beamformers;

  ConvexProgram& prog = sub.prog;
  prog.num_vars = Da * (1 + 2 * K + nm);
  prog.blocks = {{"alpha", 0, Da},
                 {"c", Da, K * Da},
                 {"beta", Da + K * Da, K * Da}};
  if (optimize_beamformers)
    prog.blocks.push_back({"mt", Da + 2 * K * Da, 2 * MN * Da});
  prog.objective = VectorXd::Zero(prog.num_vars);
  for (int di = 0; di < Da; ++di) prog.objective[sub.idx_alpha(di)] = 1.0;

  RealLift lift = complex_to_real_lift(channels, anchor.quantization_diag);
  VectorXd noise_diag(2 * MN);
  for (int i = 0; i < MN; ++i) {
    double v = 0.5 * (cfg.awgn_power + anchor.quantization_diag[i]);
    noise_diag[i] = v;
    noise_diag[MN + i] = v;
  }

  sub.anchor_point = VectorXd::Zero(prog.num_vars);

  for (int di = 0; di < Da; ++di) {
    const int d = active[di];
    const VectorXcd& m0 = anchor.beamformers[static_cast<std::size_t>(d)];
    VectorXd mt0 = lift_vector(m0);
    sub.anchor_point[sub.idx_alpha(di)] = anchor.aux_gain[d];
    for (int k = 0; k < K; ++k) {
      sub.anchor_point[sub.idx_c(k, di)] = anchor.receive_strength(k, d);
      sub.anchor_point[sub.idx_beta(k, di)] = anchor.aux_energy(k, d);
    }
    if (optimize_beamformers)
      for (int j = 0; j < 2 * MN; ++j)
        sub.anchor_point[sub.idx_mt(j, di)] = mt0[j];

    for (int k = 0; k < K; ++k) {
      Gamma2Linearization g2 =
          linearize_gamma2(mt0, lift.H_tilde[static_cast<std::size_t>(k)]);
      double gamma2_anchor = g2.value(mt0);
      double w_k = cfg.signal_second_moment[k];

      ConvexQuadLE power;
      power.quad_index = {sub.idx_c(k, di)};
      power.P = MatrixXd::Constant(1, 1, 1.0);
      if (optimize_beamformers) {
        for (int j = 0; j < 2 * MN; ++j)
          if (g2.grad[j] != 0.0)
            power.a.push_back(
                {sub.idx_mt(j, di), cfg.max_precoding_power[k] * g2.grad[j]});
        power.b = cfg.max_precoding_power[k] * g2.constant;
      } else {
        power.b = cfg.max_precoding_power[k] * gamma2_anchor;
      }
      power.label = tag("power", k, d);
      prog.constraints.emplace_back(std::move(power));

      QuadOverLinLE qol;
      qol.u = sub.idx_c(k, di);
      qol.v = sub.idx_beta(k, di);
      if (optimize_beamformers) {
        for (int j = 0; j < 2 * MN; ++j)
          if (g2.grad[j] != 0.0)
            qol.ell_terms.push_back({sub.idx_mt(j, di), g2.grad[j] / w_k});
        qol.ell_constant = g2.constant / w_k;
      } else {
        qol.ell_constant = gamma2_anchor / w_k;
      }
      qol.label = tag("energy_qol", k, d);
      prog.constraints.emplace_back(std::move(qol));
    }
  }

  {
    AffineLE energy;
    for (int di = 0; di < Da; ++di)
      for (int k = 0; k < K; ++k)
        energy.a.push_back({sub.idx_beta(k, di), 1.0});
    energy.b = normalized_energy(cfg);
    energy.label = "energy_budget";
    prog.constraints.emplace_back(std::move(energy));
  }

  for (int di = 0; di < Da; ++di) {
    const int d = active[di];
    double kappa = cc.kappa[d];
    Gamma1Linearization g1 = linearize_gamma1(
        anchor.aux_gain[d], anchor.receive_strength.col(d));

    ConvexQuadLE lam;
    const int nq = K + nm;
    lam.quad_index.reserve(static_cast<std::size_t>(nq));
    for (int k = 0; k < K; ++k) lam.quad_index.push_back(sub.idx_c(k, di));
    if (optimize_beamformers)
      for (int j = 0; j < 2 * MN; ++j)
        lam.quad_index.push_back(sub.idx_mt(j, di));
    lam.P = MatrixXd::Zero(nq, nq);
    double var_d = stats.feature_variances[d];
    for (int k = 0; k < K; ++k)
      for (int kp = 0; kp < K; ++kp)
        lam.P(k, kp) = var_d / kappa;
    for (int k = 0; k < K; ++k)
      lam.P(k, k) += cfg.sensing_noise_power[k] / kappa;
    if (optimize_beamformers)
      for (int j = 0; j < 2 * MN; ++j)
        lam.P(K + j, K + j) = noise_diag[j] / kappa;

    lam.a.push_back({sub.idx_alpha(di), g1.grad_alpha});
    for (int k = 0; k < K; ++k)
      lam.a.push_back({sub.idx_c(k, di), g1.grad_c});
    lam.b = g1.constant;
    if (!optimize_beamformers) {
      // Equivalent-noise term is a constant when m is fixed.
      const VectorXcd& m0 = anchor.beamformers[static_cast<std::size_t>(d)];
      VectorXcd noisy = (cfg.awgn_power * m0.array() +
                         anchor.quantization_diag.array() * m0.array())
                            .matrix();
      lam.b -= 0.5 * std::real(m0.dot(noisy)) / kappa;
    }
    lam.label = tag("lambda", d);
    prog.constraints.emplace_back(std::move(lam));
  }

  for (int di = 0; di < Da; ++di) {
    const int d = active[di];
    for (int k = 0; k < K; ++k) {
      AffineLE cpos;
      cpos.a = {{sub.idx_c(k, di), -1.0}};
      cpos.b = 0.0;
      cpos.label = tag("c_nonneg", k, d);
      prog.constraints.emplace_back(std::move(cpos));
      AffineLE bfloor;
      bfloor.a = {{sub.idx_beta(k, di), -1.0}};
      bfloor.b = -kBetaFloor;
      bfloor.label = tag("beta_floor", k, d);
      prog.constraints.emplace_back(std::move(bfloor));
    }
    AffineLE afloor;
    afloor.a = {{sub.idx_alpha(di), -1.0}};
    afloor.b = -kAlphaFloor;
    afloor.label = tag("alpha_floor", d);
    prog.constraints.emplace_back(std::move(afloor));
  }

  return sub;
}

Subproblem build_subproblem2(const DesignSolution& anchor,
                             const SystemConfig& cfg,
                             const FeatureStatistics& stats,
                             const ConstraintConstants& constants) {
  std::vector<int> active = active_dimensions(constants.kappa);
  if (active.empty())
    throw std::invalid_argument(
        "build_subproblem2: inactive problem (all class means equal)");

  const int K = cfg.K;
  const int MN = cfg.antennas_total();
  const int Da = static_cast<int>(active.size());

  Subproblem sub;
  sub.kind = 2;
  sub.K = K;
  sub.MN = MN;
  sub.active_dims = active;
  sub.has_beamformers = false;

  ConvexProgram& prog = sub.prog;
  prog.num_vars = Da + MN;
  prog.blocks = {{"alpha", 0, Da}, {"q", Da, MN}};
  prog.objective = VectorXd::Zero(prog.num_vars);
  for (int di = 0; di < Da; ++di) prog.objective[sub.idx_alpha(di)] = 1.0;

  sub.anchor_point = VectorXd::Zero(prog.num_vars);
  for (int di = 0; di < Da; ++di)
    sub.anchor_point[sub.idx_alpha(di)] = anchor.aux_gain[active[di]];
  for (int i = 0; i < MN; ++i)
    sub.anchor_point[sub.idx_q(i)] = anchor.quantization_diag[i];

  {
    LogDetRatioLE rate;
    rate.A = constants.A;
    rate.q_offset = sub.idx_q(0);
    rate.q_size = MN;
    rate.bound = cfg.fronthaul_capacity;
    rate.label = "fronthaul";
    prog.constraints.emplace_back(std::move(rate));
  }

  for (int di = 0; di < Da; ++di) {
    const int d = active[di];
    double kappa = constants.kappa[d];
    const VectorXcd& m = anchor.beamformers[static_cast<std::size_t>(d)];
    double sc = anchor.receive_strength.col(d).sum();
    double a0 = anchor.aux_gain[d];
    if (!(a0 > 0.0))
      throw std::invalid_argument("build_subproblem2: anchor alpha must be > 0");
    double sensing = 0.0;
    for (int k = 0; k < K; ++k) {
      double ck = anchor.receive_strength(k, d);
      sensing += ck * ck * cfg.sensing_noise_power[k];
    }
    double signal = sc * sc * stats.feature_variances[d] + sensing;
    double base_noise = 0.5 * cfg.awgn_power * m.squaredNorm();

    AffineLE lam;
    lam.a.push_back({sub.idx_alpha(di), (sc / a0) * (sc / a0)});
    for (int i = 0; i < MN; ++i) {
      double coef = 0.5 * std::norm(m[i]) / kappa;
      if (coef != 0.0) lam.a.push_back({sub.idx_q(i), coef});
    }
    lam.b = 2.0 * sc * sc / a0 - (signal + base_noise) / kappa;
    lam.label = tag("lambda", d);
    prog.constraints.emplace_back(std::move(lam));
  }

  for (int di = 0; di < Da; ++di) {
    AffineLE afloor;
    afloor.a = {{sub.idx_alpha(di), -1.0}};
    afloor.b = -kAlphaFloor;
    afloor.label = tag("alpha_floor", active[di]);
    prog.constraints.emplace_back(std::move(afloor));
  }
  for (int i = 0; i < MN; ++i) {
    AffineLE qfloor;
    qfloor.a = {{sub.idx_q(i), -1.0}};
    qfloor.b = -kQFloor;
    qfloor.label = tag("q_floor", i);
    prog.constraints.emplace_back(std::move(qfloor));
  }

  return sub;
}

void apply_subproblem_solution(const Subproblem& sub, const VectorXd& x,
                               DesignSolution& sol) {
  const int Da = static_cast<int>(sub.active_dims.size());
  if (sub.kind == 1) {
    for (int di = 0; di < Da; ++di) {
      const int d = sub.active_dims[static_cast<std::size_t>(di)];
      sol.aux_gain[d] = x[sub.idx_alpha(di)];
      for (int k = 0; k < sub.K; ++k) {
        sol.receive_strength(k, d) = std::max(0.0, x[sub.idx_c(k, di)]);
        sol.aux_energy(k, d) = x[sub.idx_beta(k, di)];
      }
      if (sub.has_beamformers) {
        VectorXd mt(2 * sub.MN);
        for (int j = 0; j < 2 * sub.MN; ++j) mt[j] = x[sub.idx_mt(j, di)];
        sol.beamformers[static_cast<std::size_t>(d)] = unlift_vector(mt);
      }
    }
  } else {
    for (int di = 0; di < Da; ++di)
      sol.aux_gain[sub.active_dims[static_cast<std::size_t>(di)]] =
          x[sub.idx_alpha(di)];
    for (int i = 0; i < sub.MN; ++i)
      sol.quantization_diag[i] = x[sub.idx_q(i)];
  }
}

VectorXd equality_alpha(const DesignSolution& sol,
                        const FeatureStatistics& stats,
                        const SystemConfig& cfg) {
  AggregateStatistics agg = aggregate_statistics(sol, stats, cfg);
  const int L = stats.classes();
  const int D = stats.dims();
  double pair_norm = 2.0 / (static_cast<double>(L) * (L - 1));
  VectorXd alpha = VectorXd::Zero(D);
  for (int d = 0; d < D; ++d) {
    double kappa = 0.0;
    for (int l = 0; l < L; ++l)
      for (int lp = l + 1; lp < L; ++lp) {
        double diff = stats.class_means(l, d) - stats.class_means(lp, d);
        kappa += pair_norm * diff * diff;
      }
    if (kappa <= 0.0 || !(agg.post_variances[d] > 0.0)) continue;
    double sc = sol.receive_strength.col(d).sum();
    alpha[d] = kappa * sc * sc / agg.post_variances[d];
  }
  return alpha;
}

DesignSolution initial_feasible_point(const SystemConfig& cfg,
                                      const ChannelSet& channels,
                                      const FeatureStatistics& stats) {
  ConstraintConstants cc = build_constants(cfg, channels, stats);
  std::vector<int> active = active_dimensions(cc.kappa);
  if (active.empty())
    throw std::invalid_argument(
        "initial_feasible_point: inactive problem (all class means equal)");

  const int K = cfg.K;
  const int D = cfg.D;
  const int MN = cfg.antennas_total();
  const int Da = static_cast<int>(active.size());

  VectorXcd msum = VectorXcd::Zero(MN);
  for (const auto& hk : channels.h) msum += hk;
  double norm = msum.norm();
  if (!(norm > 0.0))
    throw std::runtime_error("initial_feasible_point: degenerate channels");
  VectorXcd m = msum / norm;

  VectorXd g(K);
  for (int k = 0; k < K; ++k) {
    g[k] = std::norm(m.dot(channels.h[static_cast<std::size_t>(k)]));
    if (!(g[k] > 0.0))
      throw std::runtime_error(
          "initial_feasible_point: matched filter orthogonal to device " +
          std::to_string(k));
  }

  // Uniform receive strength at 50% power and energy margin.
  double t2 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k)
    t2 = std::min(t2, 0.5 * cfg.max_precoding_power[k] * g[k]);
  double denom = 0.0;
  for (int k = 0; k < K; ++k) denom += cfg.signal_second_moment[k] / g[k];
  t2 = std::min(t2, 0.5 * normalized_energy(cfg) / (Da * denom));
  double t = std::sqrt(t2);

  double lam = uniform_quantization_lambda(cc, cfg.fronthaul_capacity);

  DesignSolution sol;
  sol.receive_strength = MatrixXd::Zero(K, D);
  sol.beamformers.assign(static_cast<std::size_t>(D), VectorXcd::Zero(MN));
  sol.quantization_diag = VectorXd::Constant(MN, 1.05 * lam);
  sol.aux_gain = VectorXd::Zero(D);
  sol.aux_energy = MatrixXd::Constant(K, D, kBetaFloor);

  for (int d : active) {
    sol.beamformers[static_cast<std::size_t>(d)] = m;
    for (int k = 0; k < K; ++k) {
      sol.receive_strength(k, d) = t;
      sol.aux_energy(k, d) = std::max(
          1.01 * t2 * cfg.signal_second_moment[k] / g[k], 2.0 * kBetaFloor);
    }
  }
  VectorXd alpha_eq = equality_alpha(sol, stats, cfg);
  for (int d : active) sol.aux_gain[d] = 0.99 * alpha_eq[d];
  return sol;
}

NormalizedInstance normalize_instance(const SystemConfig& cfg,
                                      const ChannelSet& channels) {
  double acc = 0.0;
  long count = 0;
  for (const auto& hk : channels.h) {
    acc += hk.squaredNorm();
    count += hk.size();
  }
  double theta2 = count > 0 ? acc / static_cast<double>(count) : 1.0;
  NormalizedInstance out;
  out.theta = theta2 > 0.0 ? std::sqrt(theta2) : 1.0;
  out.cfg = cfg;
  out.cfg.awgn_power = cfg.awgn_power / (out.theta * out.theta);
  out.channels = channels;
  for (auto& hk : out.channels.h) hk /= out.theta;
  return out;
}

DesignSolution denormalize_solution(DesignSolution sol, double theta) {
  for (auto& m : sol.beamformers) m /= theta;
  sol.quantization_diag *= theta * theta;
  return sol;
}

std::pair<DesignSolution, ScaState> run_algorithm1(
    const SystemConfig& cfg, const ChannelSet& channels,
    const FeatureStatistics& stats, double eps_stop, int max_iters) {
  if (!(eps_stop > 0.0))
    throw std::invalid_argument("run_algorithm1: eps_stop must be > 0");
  if (max_iters < 1)
    throw std::invalid_argument("run_algorithm1: max_iters must be >= 1");

  NormalizedInstance norm = normalize_instance(cfg, channels);
  ConstraintConstants ncc = build_constants(norm.cfg, norm.channels, stats);

  ScaState state;
  DesignSolution sol = initial_feasible_point(norm.cfg, norm.channels, stats);
  double gain = sol.aux_gain.sum();
  state.objective_trace.push_back(gain);

  for (int it = 1; it <= max_iters; ++it) {
    Subproblem sub1 = build_subproblem1(sol, norm.cfg, stats, norm.channels);
    SolveReport rep1 = solve(sub1.prog, sub1.anchor_point);
    if (rep1.status != SolveStatus::optimal) {
      state.status = rep1.status;
      state.message = std::string("subproblem 1 ") + to_string(rep1.status) +
                      " at iteration " + std::to_string(it);
      break;
    }
    double g_half = gain;
    if (rep1.objective >= gain) {
      apply_subproblem_solution(sub1, rep1.x, sol);
      g_half = rep1.objective;
    }
    state.rows.push_back(
        {it, 1, g_half, 1, rep1.newton_steps, rep1.max_violation});

    Subproblem sub2 = build_subproblem2(sol, norm.cfg, stats, ncc);
    SolveReport rep2 = solve(sub2.prog, sub2.anchor_point);
    if (rep2.status != SolveStatus::optimal) {
      state.status = rep2.status;
      state.message = std::string("subproblem 2 ") + to_string(rep2.status) +
                      " at iteration " + std::to_string(it);
      break;
    }
    double g_full = g_half;
    if (rep2.objective >= g_half) {
      apply_subproblem_solution(sub2, rep2.x, sol);
      g_full = rep2.objective;
    }
    state.rows.push_back(
        {it, 2, g_full, 2, rep2.newton_steps, rep2.max_violation});

    state.objective_trace.push_back(g_full);
    state.iterations = it;
    double increase = g_full - gain;
    gain = g_full;
    if (increase < eps_stop) break;
  }

  state.solution = denormalize_solution(sol, norm.theta);
  return {state.solution, state};
}

void write_trace_csv(const ScaState& state, std::ostream& out,
                     const std::string& scheme) {
  out << "iter,half,objective,subproblem,newton_steps,violation";
  if (!scheme.empty()) out << ",scheme";
  out << "\n";
  char buf[64];
  for (const auto& r : state.rows) {
    out << r.iter << ',' << r.half << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.objective);
    out << buf << ',' << r.subproblem << ',' << r.newton_steps << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.violation);
    out << buf;
    if (!scheme.empty()) out << ',' << scheme;
    out << "\n";
  }
}

}  // namespace aircran
