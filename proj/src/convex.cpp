#include "aircran/convex.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace aircran {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.69314718055994530942;

double sparse_dot(const std::vector<LinTerm>& terms, const VectorXd& x,
                  double constant = 0.0) {
  double v = constant;
  for (const auto& t : terms) v += t.coeff * x[t.index];
  return v;
}

void add_scaled(VectorXd& g, const std::vector<LinTerm>& terms, double s) {
  for (const auto& t : terms) g[t.index] += s * t.coeff;
}

void add_outer(MatrixXd& H, const std::vector<LinTerm>& a, double s) {
  for (const auto& ti : a)
    for (const auto& tj : a)
      H(ti.index, tj.index) += s * ti.coeff * tj.coeff;
}

void add_cross(MatrixXd& H, const std::vector<LinTerm>& a,
               const std::vector<LinTerm>& b, double s) {
  for (const auto& ti : a)
    for (const auto& tj : b) {
      H(ti.index, tj.index) += s * ti.coeff * tj.coeff;
      H(tj.index, ti.index) += s * ti.coeff * tj.coeff;
    }
}

// ---------------------------------------------------------------------------
// Barrier terms
// ---------------------------------------------------------------------------

struct BarrierTerm {
  virtual ~BarrierTerm() = default;
  virtual int log_count() const = 0;
  // max_i f_i(x) over the inequalities this term guards.
  virtual double residual(const VectorXd& x) const = 0;
  // Barrier value; +inf outside the domain.
  virtual double value(const VectorXd& x) const = 0;
  // Adds gradient and Hessian; returns false outside the domain.
  virtual bool accumulate(const VectorXd& x, VectorXd& grad,
                          MatrixXd& hess) const = 0;
};

struct AffineTerm final : BarrierTerm {
  std::vector<LinTerm> a;
  double b = 0.0;

  int log_count() const override { return 1; }
  double residual(const VectorXd& x) const override {
    return sparse_dot(a, x) - b;
  }
  double value(const VectorXd& x) const override {
    double s = b - sparse_dot(a, x);
    return s > 0.0 ? -std::log(s) : kInf;
  }
  bool accumulate(const VectorXd& x, VectorXd& grad,
                  MatrixXd& hess) const override {
    double s = b - sparse_dot(a, x);
    if (!(s > 0.0)) return false;
    add_scaled(grad, a, 1.0 / s);
    add_outer(hess, a, 1.0 / (s * s));
    return true;
  }
};

struct QuadTerm final : BarrierTerm {
  std::vector<int> idx;
  MatrixXd P;
  std::vector<LinTerm> lin;  // combined (r - a) side
  double b = 0.0;            // f = xq'Pxq + lin.x - b <= 0

  double f_value(const VectorXd& x) const {
    const int nq = static_cast<int>(idx.size());
    VectorXd xq(nq);
    for (int i = 0; i < nq; ++i) xq[i] = x[idx[static_cast<std::size_t>(i)]];
    return xq.dot(P * xq) + sparse_dot(lin, x) - b;
  }

  int log_count() const override { return 1; }
  double residual(const VectorXd& x) const override { return f_value(x); }
  double value(const VectorXd& x) const override {
    double s = -f_value(x);
    return s > 0.0 ? -std::log(s) : kInf;
  }
  bool accumulate(const VectorXd& x, VectorXd& grad,
                  MatrixXd& hess) const override {
    double s = -f_value(x);
    if (!(s > 0.0)) return false;
    const int nq = static_cast<int>(idx.size());
    VectorXd xq(nq);
    for (int i = 0; i < nq; ++i) xq[i] = x[idx[static_cast<std::size_t>(i)]];
    VectorXd Pq = 2.0 * (P * xq);
    // grad f = 2 P xq (scattered) + lin
    std::vector<LinTerm> gf = lin;
    gf.reserve(gf.size() + static_cast<std::size_t>(nq));
    for (int i = 0; i < nq; ++i)
      gf.push_back({idx[static_cast<std::size_t>(i)], Pq[i]});
    add_scaled(grad, gf, 1.0 / s);
    add_outer(hess, gf, 1.0 / (s * s));
    // + 2P/s on the quad block
    for (int i = 0; i < nq; ++i)
      for (int j = 0; j < nq; ++j)
        hess(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]) +=
            2.0 * P(i, j) / s;
    return true;
  }
};

struct QolTerm final : BarrierTerm {
  int u = 0;
  int v = 0;
  std::vector<LinTerm> ell;
  double ell_c = 0.0;

  int log_count() const override { return 3; }
  double residual(const VectorXd& x) const override {
    double lv = sparse_dot(ell, x, ell_c);
    double s = x[v] * lv - x[u] * x[u];
    return std::max({-s, -x[v], -lv});
  }
  double value(const VectorXd& x) const override {
    double lv = sparse_dot(ell, x, ell_c);
    double s = x[v] * lv - x[u] * x[u];
    if (!(s > 0.0 && x[v] > 0.0 && lv > 0.0)) return kInf;
    return -std::log(s) - std::log(x[v]) - std::log(lv);
  }
  bool accumulate(const VectorXd& x, VectorXd& grad,
                  MatrixXd& hess) const override {
    double lv = sparse_dot(ell, x, ell_c);
    double s = x[v] * lv - x[u] * x[u];
    if (!(s > 0.0 && x[v] > 0.0 && lv > 0.0)) return false;
    // grad s = v*ell + lv*e_v - 2u*e_u
    std::vector<LinTerm> gs;
    gs.reserve(ell.size() + 2);
    for (const auto& t : ell) gs.push_back({t.index, x[v] * t.coeff});
    gs.push_back({v, lv});
    gs.push_back({u, -2.0 * x[u]});
    add_scaled(grad, gs, -1.0 / s);
    grad[v] -= 1.0 / x[v];
    add_scaled(grad, ell, -1.0 / lv);

    add_outer(hess, gs, 1.0 / (s * s));
    // -(hess s)/s: hess s = e_v ell' + ell e_v' - 2 e_u e_u'
    std::vector<LinTerm> ev{{v, 1.0}};
    add_cross(hess, ev, ell, -1.0 / s);
    hess(u, u) += 2.0 / s;
    hess(v, v) += 1.0 / (x[v] * x[v]);
    add_outer(hess, ell, 1.0 / (lv * lv));
    return true;
  }
};

// Shared by the fronthaul-rate constraint and its phase-I variant.
struct LogDetCore {
  MatrixXcd A;
  int q_offset = 0;
  int q_size = 0;

  bool derivatives(const VectorXd& x, double* rate, VectorXd* grad_q,
                   MatrixXd* hess_q) const {
    VectorXd q(q_size);
    for (int i = 0; i < q_size; ++i) {
      q[i] = x[q_offset + i];
      if (!(q[i] > 0.0)) return false;
    }
    MatrixXcd Aq = A;
    Aq.diagonal().real() += q;
    Eigen::LLT<MatrixXcd> llt(Aq);
    if (llt.info() != Eigen::Success) return false;
    double log2det = 0.0;
    for (int i = 0; i < q_size; ++i)
      log2det += 2.0 * std::log2(std::real(llt.matrixL()(i, i)));
    double r = log2det;
    for (int i = 0; i < q_size; ++i) r -= std::log2(q[i]);
    *rate = r;
    if (grad_q) {
      MatrixXcd S = llt.solve(MatrixXcd::Identity(q_size, q_size));
      grad_q->resize(q_size);
      for (int i = 0; i < q_size; ++i)
        (*grad_q)[i] = (std::real(S(i, i)) - 1.0 / q[i]) / kLn2;
      if (hess_q) {
        hess_q->resize(q_size, q_size);
        for (int i = 0; i < q_size; ++i)
          for (int j = 0; j < q_size; ++j) {
            double sij2 = std::norm(S(i, j));
            (*hess_q)(i, j) = ((i == j ? 1.0 / (q[i] * q[i]) : 0.0) - sij2) / kLn2;
          }
      }
    }
    return true;
  }
};

struct LogDetTerm final : BarrierTerm {
  LogDetCore core;
  double bound = 0.0;

  int log_count() const override { return 1; }
  double residual(const VectorXd& x) const override {
    double r;
    if (!core.derivatives(x, &r, nullptr, nullptr)) return kInf;
    return r - bound;
  }
  double value(const VectorXd& x) const override {
    double r;
    if (!core.derivatives(x, &r, nullptr, nullptr)) return kInf;
    double w = bound - r;
    return w > 0.0 ? -std::log(w) : kInf;
  }
  bool accumulate(const VectorXd& x, VectorXd& grad,
                  MatrixXd& hess) const override {
    double r;
    VectorXd gq;
    MatrixXd hq;
    if (!core.derivatives(x, &r, &gq, &hq)) return false;
    double w = bound - r;
    if (!(w > 0.0)) return false;
    for (int i = 0; i < core.q_size; ++i) grad[core.q_offset + i] += gq[i] / w;
    for (int i = 0; i < core.q_size; ++i)
      for (int j = 0; j < core.q_size; ++j)
        hess(core.q_offset + i, core.q_offset + j) +=
            gq[i] * gq[j] / (w * w) + hq(i, j) / w;
    return true;
  }
};

// Phase-I terms ------------------------------------------------------------

// Smoothed second-order-cone residual of a rotated-cone constraint, shifted
// by the slack variable: sqrt(4u^2 + (v-l)^2 + mu^2) - (v+l) - s <= 0.
struct SocSlackTerm final : BarrierTerm {
  int u = 0;
  int v = 0;
  std::vector<LinTerm> ell;
  double ell_c = 0.0;
  int slack = 0;
  static constexpr double kMu2 = 1e-18;

  double g_value(const VectorXd& x, double* rho_out = nullptr) const {
    double lv = sparse_dot(ell, x, ell_c);
    double y1 = 2.0 * x[u];
    double y2 = x[v] - lv;
    double rho = std::sqrt(y1 * y1 + y2 * y2 + kMu2);
    if (rho_out) *rho_out = rho;
    return x[slack] + x[v] + lv - rho;
  }

  int log_count() const override { return 1; }
  double residual(const VectorXd& x) const override { return -g_value(x); }
  double value(const VectorXd& x) const override {
    double g = g_value(x);
    return g > 0.0 ? -std::log(g) : kInf;
  }
  bool accumulate(const VectorXd& x, VectorXd& grad,
                  MatrixXd& hess) const override {
    double rho;
    double g = g_value(x, &rho);
    if (!(g > 0.0)) return false;
    double lv = sparse_dot(ell, x, ell_c);
    double y1 = 2.0 * x[u];
    double y2 = x[v] - lv;
    // grad y1 = 2 e_u ; grad y2 = e_v - ell ; grad w = e_v + ell
    std::vector<LinTerm> gy2{{v, 1.0}};
    for (const auto& t : ell) gy2.push_back({t.index, -t.coeff});
    std::vector<LinTerm> grho;
    grho.push_back({u, 2.0 * y1 / rho});
    for (const auto& t : gy2) grho.push_back({t.index, y2 * t.coeff / rho});
    // grad g = e_s + e_v + ell - grad rho
    std::vector<LinTerm> gg{{slack, 1.0}, {v, 1.0}};
    for (const auto& t : ell) gg.push_back({t.index, t.coeff});
    for (const auto& t : grho) gg.push_back({t.index, -t.coeff});

    add_scaled(grad, gg, -1.0 / g);
    add_outer(hess, gg, 1.0 / (g * g));
    // hess rho = (gy1 gy1' + gy2 gy2')/rho - grho grho'/rho
    std::vector<LinTerm> gy1{{u, 2.0}};
    add_outer(hess, gy1, 1.0 / (rho * g));
    add_outer(hess, gy2, 1.0 / (rho * g));
    add_outer(hess, grho, -1.0 / (rho * g));
    return true;
  }
};

struct LogDetSlackTerm final : BarrierTerm {
  LogDetCore core;
  double bound = 0.0;
  int slack = 0;

  int log_count() const override { return 1; }
  double residual(const VectorXd& x) const override {
    double r;
    if (!core.derivatives(x, &r, nullptr, nullptr)) return kInf;
    return r - bound - x[slack];
  }
  double value(const VectorXd& x) const override {
    double r;
    if (!core.derivatives(x, &r, nullptr, nullptr)) return kInf;
    double w = x[slack] + bound - r;
    return w > 0.0 ? -std::log(w) : kInf;
  }
  bool accumulate(const VectorXd& x, VectorXd& grad,
                  MatrixXd& hess) const override {
    double r;
    VectorXd gq;
    MatrixXd hq;
    if (!core.derivatives(x, &r, &gq, &hq)) return false;
    double w = x[slack] + bound - r;
    if (!(w > 0.0)) return false;
    // grad w = e_s - grad r
    std::vector<LinTerm> gw{{slack, 1.0}};
    for (int i = 0; i < core.q_size; ++i)
      gw.push_back({core.q_offset + i, -gq[i]});
    add_scaled(grad, gw, -1.0 / w);
    add_outer(hess, gw, 1.0 / (w * w));
    for (int i = 0; i < core.q_size; ++i)
      for (int j = 0; j < core.q_size; ++j)
        hess(core.q_offset + i, core.q_offset + j) += hq(i, j) / w;
    return true;
  }
};

using TermList = std::vector<std::unique_ptr<BarrierTerm>>;

TermList build_terms(const ConvexProgram& prog) {
  TermList terms;
  for (const auto& con : prog.constraints) {
    if (const auto* c = std::get_if<AffineLE>(&con)) {
      auto t = std::make_unique<AffineTerm>();
      t->a = c->a;
      t->b = c->b;
      terms.push_back(std::move(t));
    } else if (const auto* c = std::get_if<ConvexQuadLE>(&con)) {
      auto t = std::make_unique<QuadTerm>();
      t->idx = c->quad_index;
      t->P = c->P;
      t->lin = c->r;
      for (const auto& at : c->a) t->lin.push_back({at.index, -at.coeff});
      t->b = c->b;
      terms.push_back(std::move(t));
    } else if (const auto* c = std::get_if<QuadOverLinLE>(&con)) {
      auto t = std::make_unique<QolTerm>();
      t->u = c->u;
      t->v = c->v;
      t->ell = c->ell_terms;
      t->ell_c = c->ell_constant;
      terms.push_back(std::move(t));
    } else if (const auto* c = std::get_if<LogDetRatioLE>(&con)) {
      auto t = std::make_unique<LogDetTerm>();
      t->core.A = c->A;
      t->core.q_offset = c->q_offset;
      t->core.q_size = c->q_size;
      t->bound = c->bound;
      terms.push_back(std::move(t));
    }
  }
  return terms;
}

int total_log_count(const TermList& terms) {
  int m = 0;
  for (const auto& t : terms) m += t->log_count();
  return m;
}

double max_residual(const TermList& terms, const VectorXd& x) {
  double r = -kInf;
  for (const auto& t : terms) r = std::max(r, t->residual(x));
  return r;
}

bool strictly_feasible(const TermList& terms, const VectorXd& x) {
  for (const auto& t : terms)
    if (!(t->residual(x) < 0.0) || !std::isfinite(t->value(x))) return false;
  return true;
}

double barrier_objective(const TermList& terms, const VectorXd& cost, double t,
                         const VectorXd& x) {
  double phi = t * cost.dot(x);
  for (const auto& term : terms) {
    double v = term->value(x);
    if (!std::isfinite(v)) return kInf;
    phi += v;
  }
  return phi;
}

bool solve_newton_system(MatrixXd H, const VectorXd& g, VectorXd& dx) {
  double scale = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
  double reg = 0.0;
  for (int attempt = 0; attempt < 14; ++attempt) {
    Eigen::LLT<MatrixXd> llt(H);
    if (llt.info() == Eigen::Success) {
      dx = -llt.solve(g);
      if (dx.allFinite()) return true;
    }
    reg = (reg == 0.0) ? 1e-12 * scale : reg * 10.0;
    H.diagonal().array() += reg;
  }
  return false;
}

struct CenterOutcome {
  bool converged = false;
  int steps = 0;
};

// Damped Newton minimization of t*cost.x + sum(barriers) from a strictly
// feasible x.
CenterOutcome center(const TermList& terms, const VectorXd& cost, double t,
                     VectorXd& x, const SolverOptions& opt) {
  const int n = static_cast<int>(x.size());
  CenterOutcome out;
  for (int it = 0; it < opt.max_newton_per_stage; ++it) {
    VectorXd grad = t * cost;
    MatrixXd hess = MatrixXd::Zero(n, n);
    bool ok = true;
    for (const auto& term : terms)
      if (!term->accumulate(x, grad, hess)) {
        ok = false;
        break;
      }
    if (!ok) return out;  // left the domain: caller treats as failure

    VectorXd dx;
    if (!solve_newton_system(hess, grad, dx)) return out;
    double decrement2 = -grad.dot(dx);
    if (decrement2 < 0.0) decrement2 = 0.0;
    if (decrement2 / 2.0 <= opt.newton_tol) {
      out.converged = true;
      return out;
    }

    double phi0 = barrier_objective(terms, cost, t, x);
    double slope = grad.dot(dx);
    // Near the end of the schedule phi is huge while per-step decrements are
    // tiny; the slack keeps the Armijo test meaningful at float resolution.
    double slack = 1e-13 * (1.0 + std::abs(phi0));
    double step = 1.0;
    int backtracks = 0;
    bool stalled = false;
    while (true) {
      VectorXd xn = x + step * dx;
      double phi = barrier_objective(terms, cost, t, xn);
      if (phi <= phi0 + opt.ls_alpha * step * slope + slack) break;
      step *= opt.ls_beta;
      if (++backtracks > 400 || step < 1e-16) {
        stalled = true;
        break;
      }
    }
    if (stalled) {
      // No measurable progress left; accept as centered when the decrement
      // is already small.
      out.converged = decrement2 / 2.0 <= 1e-6;
      return out;
    }
    x += step * dx;
    ++out.steps;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface
// ---------------------------------------------------------------------------

int ConvexProgram::block_offset(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b.offset;
  throw std::invalid_argument("no variable block named '" + name + "'");
}

std::size_t ConvexProgram::count_kind(const char* kind) const {
  std::string k = kind;
  std::size_t n = 0;
  for (const auto& c : constraints) {
    if (k == "affine" && std::holds_alternative<AffineLE>(c)) ++n;
    if (k == "quad" && std::holds_alternative<ConvexQuadLE>(c)) ++n;
    if (k == "qol" && std::holds_alternative<QuadOverLinLE>(c)) ++n;
    if (k == "logdet" && std::holds_alternative<LogDetRatioLE>(c)) ++n;
  }
  return n;
}

void validate_program(const ConvexProgram& prog) {
  auto check_index = [&](int i, const std::string& where) {
    if (i < 0 || i >= prog.num_vars)
      throw std::invalid_argument("program: index out of range in " + where);
  };
  if (prog.objective.size() != prog.num_vars)
    throw std::invalid_argument("program: objective size mismatch");
  for (const auto& con : prog.constraints) {
    if (const auto* c = std::get_if<AffineLE>(&con)) {
      for (const auto& t : c->a) check_index(t.index, "affine '" + c->label + "'");
    } else if (const auto* c = std::get_if<ConvexQuadLE>(&con)) {
      for (int i : c->quad_index) check_index(i, "quad '" + c->label + "'");
      for (const auto& t : c->r) check_index(t.index, "quad '" + c->label + "'");
      for (const auto& t : c->a) check_index(t.index, "quad '" + c->label + "'");
      if (c->P.rows() != c->P.cols() ||
          c->P.rows() != static_cast<int>(c->quad_index.size()))
        throw std::invalid_argument("program: P shape mismatch in '" +
                                    c->label + "'");
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (c->P + c->P.transpose()));
      double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
      if (es.eigenvalues().minCoeff() < -1e-10 * scale)
        throw std::invalid_argument("program: P not PSD in '" + c->label + "'");
    } else if (const auto* c = std::get_if<QuadOverLinLE>(&con)) {
      check_index(c->u, "qol '" + c->label + "'");
      check_index(c->v, "qol '" + c->label + "'");
      for (const auto& t : c->ell_terms)
        check_index(t.index, "qol '" + c->label + "'");
    } else if (const auto* c = std::get_if<LogDetRatioLE>(&con)) {
      check_index(c->q_offset, "logdet '" + c->label + "'");
      check_index(c->q_offset + c->q_size - 1, "logdet '" + c->label + "'");
      if ((c->A - c->A.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("program: A not Hermitian in '" +
                                    c->label + "'");
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(c->A);
      double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
      if (es.eigenvalues().minCoeff() < -1e-10 * scale)
        throw std::invalid_argument("program: A not PSD in '" + c->label + "'");
    }
  }
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

double max_constraint_residual(const ConvexProgram& prog, const VectorXd& x) {
  TermList terms = build_terms(prog);
  return max_residual(terms, x);
}

LogDetDerivatives logdet_gradient_hessian(const MatrixXcd& A,
                                          const VectorXd& q) {
  const int n = static_cast<int>(q.size());
  for (int i = 0; i < n; ++i)
    if (!(q[i] > 0.0))
      throw std::invalid_argument("logdet_gradient_hessian: q must be positive");
  LogDetCore core;
  core.A = A;
  core.q_offset = 0;
  core.q_size = n;
  LogDetDerivatives out;
  VectorXd x = q;
  if (!core.derivatives(x, &out.value, &out.gradient, &out.hessian))
    throw std::runtime_error("logdet_gradient_hessian: A + diag(q) not PD");
  return out;
}

FeasibilityResult feasibility_phase(const ConvexProgram& prog,
                                    const std::optional<VectorXd>& hint,
                                    const SolverOptions& opt) {
  TermList true_terms = build_terms(prog);
  FeasibilityResult res;

  if (hint && hint->size() == prog.num_vars &&
      strictly_feasible(true_terms, *hint)) {
    res.feasible = true;
    res.point = *hint;
    res.slack = max_residual(true_terms, *hint);
    res.newton_steps = 0;
    return res;
  }

  // Phase-I program over (x, s): minimize s with every constraint relaxed
  // by s. Positivity of q variables under a log-det constraint is kept hard.
  const int n = prog.num_vars;
  const int si = n;
  TermList terms;
  std::vector<char> has_logdet_q(static_cast<std::size_t>(n), 0);
  for (const auto& con : prog.constraints) {
    if (const auto* c = std::get_if<AffineLE>(&con)) {
      auto t = std::make_unique<AffineTerm>();
      t->a = c->a;
      t->a.push_back({si, -1.0});
      t->b = c->b;
      terms.push_back(std::move(t));
    } else if (const auto* c = std::get_if<ConvexQuadLE>(&con)) {
      auto t = std::make_unique<QuadTerm>();
      t->idx = c->quad_index;
      t->P = c->P;
      t->lin = c->r;
      for (const auto& at : c->a) t->lin.push_back({at.index, -at.coeff});
      t->lin.push_back({si, -1.0});
      t->b = c->b;
      terms.push_back(std::move(t));
    } else if (const auto* c = std::get_if<QuadOverLinLE>(&con)) {
      auto t = std::make_unique<SocSlackTerm>();
      t->u = c->u;
      t->v = c->v;
      t->ell = c->ell_terms;
      t->ell_c = c->ell_constant;
      t->slack = si;
      terms.push_back(std::move(t));
      auto tv = std::make_unique<AffineTerm>();
      tv->a = {{c->v, -1.0}, {si, -1.0}};
      tv->b = 0.0;
      terms.push_back(std::move(tv));
      auto tl = std::make_unique<AffineTerm>();
      for (const auto& lt : c->ell_terms) tl->a.push_back({lt.index, -lt.coeff});
      tl->a.push_back({si, -1.0});
      tl->b = c->ell_constant;
      terms.push_back(std::move(tl));
    } else if (const auto* c = std::get_if<LogDetRatioLE>(&con)) {
      auto t = std::make_unique<LogDetSlackTerm>();
      t->core.A = c->A;
      t->core.q_offset = c->q_offset;
      t->core.q_size = c->q_size;
      t->bound = c->bound;
      t->slack = si;
      terms.push_back(std::move(t));
      for (int i = 0; i < c->q_size; ++i)
        has_logdet_q[static_cast<std::size_t>(c->q_offset + i)] = 1;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!has_logdet_q[static_cast<std::size_t>(i)]) continue;
    auto t = std::make_unique<AffineTerm>();  // hard q_i > 0
    t->a = {{i, -1.0}};
    t->b = 0.0;
    terms.push_back(std::move(t));
  }

  VectorXd z = VectorXd::Zero(n + 1);
  if (hint && hint->size() == n) z.head(n) = *hint;
  for (int i = 0; i < n; ++i)
    if (has_logdet_q[static_cast<std::size_t>(i)] && !(z[i] > 0.0)) z[i] = 1.0;

  // Box every variable so the phase-I centering stays bounded.
  double box = 1e6 * std::max(1.0, z.head(n).cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i) {
    auto up = std::make_unique<AffineTerm>();
    up->a = {{i, 1.0}};
    up->b = box;
    terms.push_back(std::move(up));
    auto dn = std::make_unique<AffineTerm>();
    dn->a = {{i, -1.0}};
    dn->b = box;
    terms.push_back(std::move(dn));
  }

  // Initial slack above every residual (ignore the hard q>0 terms, already
  // satisfied).
  double worst = 0.0;
  {
    VectorXd z0 = z;
    z0[si] = 0.0;
    for (const auto& t : terms) {
      double r = t->residual(z0);
      if (std::isfinite(r)) worst = std::max(worst, r);
    }
  }
  z[si] = worst + 1.0;
  double cap = std::abs(z[si]) + 10.0;  // keep phase-I bounded below
  {
    auto t = std::make_unique<AffineTerm>();
    t->a = {{si, -1.0}};
    t->b = cap;
    terms.push_back(std::move(t));
  }

  VectorXd cost = VectorXd::Zero(n + 1);
  cost[si] = 1.0;
  int m = total_log_count(terms);
  double t_barrier = opt.t0;
  int total_steps = 0;
  while (true) {
    CenterOutcome c = center(terms, cost, t_barrier, z, opt);
    total_steps += c.steps;
    if (!c.converged) break;
    if (static_cast<double>(m) / t_barrier <= opt.gap_tol) break;
    if (total_steps > opt.max_total_newton) break;
    t_barrier *= opt.mu;
  }

  res.newton_steps = total_steps;
  res.slack = z[si];
  res.point = z.head(n);
  res.feasible = strictly_feasible(true_terms, res.point);
  if (res.feasible && !(res.slack < 0.0)) res.slack = max_residual(true_terms, res.point);
  return res;
}

SolveReport solve(const ConvexProgram& prog,
                  const std::optional<VectorXd>& warm_start,
                  const SolverOptions& opt) {
  TermList terms = build_terms(prog);
  const int n = prog.num_vars;
  const int m = total_log_count(terms);
  SolveReport rep;

  VectorXd x;
  if (warm_start && warm_start->size() == n &&
      strictly_feasible(terms, *warm_start)) {
    x = *warm_start;
  } else {
    FeasibilityResult ph = feasibility_phase(prog, warm_start, opt);
    rep.phase1_newton_steps = ph.newton_steps;
    if (!ph.feasible) {
      rep.status = SolveStatus::infeasible;
      rep.x = ph.point;
      rep.max_violation = max_residual(terms, ph.point);
      return rep;
    }
    if (warm_start && warm_start->size() == n) {
      // Shrink the warm start toward the interior point until strictly
      // feasible.
      x = *warm_start;
      double f = 1.0;
      for (int j = 0; j < 5000 && !strictly_feasible(terms, x); ++j) {
        f *= 0.99;
        x = ph.point + f * (*warm_start - ph.point);
      }
      if (!strictly_feasible(terms, x)) x = ph.point;
    } else {
      x = ph.point;
    }
  }

  VectorXd cost = -prog.objective;  // maximize -> minimize
  double t = opt.t0;
  bool schedule_done = false;
  while (true) {
    CenterOutcome c = center(terms, cost, t, x, opt);
    rep.newton_steps += c.steps;
    ++rep.barrier_iterations;
    rep.outer_objectives.push_back(prog.objective.dot(x));
    if (!c.converged) break;
    if (static_cast<double>(m) / t <= opt.gap_tol) {
      schedule_done = true;
      break;
    }
    if (rep.newton_steps > opt.max_total_newton) break;
    t *= opt.mu;
  }

  rep.x = x;
  rep.objective = prog.objective.dot(x);
  rep.max_violation = max_residual(terms, x);

  VectorXd grad = t * cost;
  MatrixXd hess = MatrixXd::Zero(n, n);
  bool in_domain = true;
  for (const auto& term : terms)
    if (!term->accumulate(x, grad, hess)) {
      in_domain = false;
      break;
    }
  rep.kkt_residual = in_domain ? grad.lpNorm<Eigen::Infinity>() / t : kInf;

  if (schedule_done && rep.max_violation <= 1e-7 && rep.kkt_residual <= 1e-6)
    rep.status = SolveStatus::optimal;
  else
    rep.status = SolveStatus::numerical_failure;
  return rep;
}

void dump_program(const ConvexProgram& prog, std::ostream& out) {
  auto put_terms = [&](const std::vector<LinTerm>& ts) {
    for (const auto& t : ts) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), " x%d*%.9e", t.index, t.coeff);
      out << buf;
    }
  };
  out << "vars " << prog.num_vars << "\n";
  out << "maximize";
  for (int i = 0; i < prog.num_vars; ++i) {
    if (prog.objective[i] == 0.0) continue;
    char buf[48];
    std::snprintf(buf, sizeof(buf), " x%d*%.9e", i, prog.objective[i]);
    out << buf;
  }
  out << "\n";
  for (const auto& con : prog.constraints) {
    if (const auto* c = std::get_if<AffineLE>(&con)) {
      out << "affine " << c->label << " :";
      put_terms(c->a);
      char buf[40];
      std::snprintf(buf, sizeof(buf), " <= %.9e", c->b);
      out << buf << "\n";
    } else if (const auto* c = std::get_if<ConvexQuadLE>(&con)) {
      out << "quad " << c->label << " : xq=[";
      for (std::size_t i = 0; i < c->quad_index.size(); ++i)
        out << (i ? "," : "") << c->quad_index[i];
      out << "] P=[";
      for (int i = 0; i < c->P.rows(); ++i)
        for (int j = 0; j < c->P.cols(); ++j) {
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%s%.9e", (i || j) ? "," : "",
                        c->P(i, j));
          out << buf;
        }
      out << "] r=";
      put_terms(c->r);
      out << " a=";
      put_terms(c->a);
      char buf[40];
      std::snprintf(buf, sizeof(buf), " b=%.9e", c->b);
      out << buf << "\n";
    } else if (const auto* c = std::get_if<QuadOverLinLE>(&con)) {
      out << "qol " << c->label << " : u=x" << c->u << " v=x" << c->v
          << " ell=";
      put_terms(c->ell_terms);
      char buf[40];
      std::snprintf(buf, sizeof(buf), " +%.9e", c->ell_constant);
      out << buf << "\n";
    } else if (const auto* c = std::get_if<LogDetRatioLE>(&con)) {
      out << "logdet " << c->label << " : q_offset=" << c->q_offset
          << " q_size=" << c->q_size;
      char buf[40];
      std::snprintf(buf, sizeof(buf), " C=%.9e", c->bound);
      out << buf << "\n";
    }
  }
}

}  // namespace aircran
