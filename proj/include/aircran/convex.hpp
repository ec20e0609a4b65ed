#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "aircran/types.hpp"

namespace aircran {

/// One coefficient of a sparse linear form.
struct LinTerm {
  int index = 0;
  double coeff = 0.0;
};

/// a . x <= b
struct AffineLE {
  std::vector<LinTerm> a;
  double b = 0.0;
  std::string label;
};

/// x_q^T P x_q + r . x <= a . x + b, with x_q the subvector at quad_index and
/// P symmetric PSD.
struct ConvexQuadLE {
  std::vector<int> quad_index;
  MatrixXd P;
  std::vector<LinTerm> r;
  std::vector<LinTerm> a;
  double b = 0.0;
  std::string label;
};

/// x[u]^2 <= x[v] * ell(x), with x[v] >= 0 and ell(x) = ell_terms . x +
/// ell_constant >= 0 (rotated-cone constraint).
struct QuadOverLinLE {
  int u = 0;
  int v = 0;
  std::vector<LinTerm> ell_terms;
  double ell_constant = 0.0;
  std::string label;
};

/// log2 det(A + diag(q)) - sum_i log2 q_i <= bound, over the contiguous
/// variable range [q_offset, q_offset + q_size). A Hermitian PSD.
struct LogDetRatioLE {
  MatrixXcd A;
  int q_offset = 0;
  int q_size = 0;
  double bound = 0.0;
  std::string label;
};

using Constraint =
    std::variant<AffineLE, ConvexQuadLE, QuadOverLinLE, LogDetRatioLE>;

struct VariableBlock {
  std::string name;
  int offset = 0;
  int size = 0;
};

/// Canonical convex program: maximize objective . x subject to the tagged
/// constraint records.
struct ConvexProgram {
  int num_vars = 0;
  std::vector<VariableBlock> blocks;
  VectorXd objective;
  std::vector<Constraint> constraints;

  int block_offset(const std::string& name) const;
  std::size_t count_kind(const char* kind) const;  // "affine","quad","qol","logdet"
};

/// Structural checks: selector ranges, P PSD within 1e-10 eigenvalue
/// tolerance, A Hermitian PSD. Throws std::invalid_argument on violation.
void validate_program(const ConvexProgram& prog);

enum class SolveStatus { optimal, infeasible, numerical_failure };

const char* to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::numerical_failure;
  VectorXd x;
  double objective = 0.0;
  int barrier_iterations = 0;      // outer barrier rounds
  int newton_steps = 0;            // total centering steps
  int phase1_newton_steps = 0;     // 0 when a warm start was accepted
  double max_violation = 0.0;      // max_i f_i(x), <= 0 when interior
  double kkt_residual = 0.0;
  std::vector<double> outer_objectives;
};

/// Solver tolerances; defaults follow the artifact-wide choices.
struct SolverOptions {
  double t0 = 1.0;
  double mu = 10.0;               // barrier parameter growth
  double gap_tol = 1e-8;          // stop when m_constraints / t <= gap_tol
  double newton_tol = 1e-10;      // stop centering at decrement^2/2 <= this
  double ls_alpha = 0.3;
  double ls_beta = 0.8;
  int max_newton_per_stage = 250;
  int max_total_newton = 20000;
};

struct FeasibilityResult {
  bool feasible = false;
  VectorXd point;       // strictly feasible point when feasible
  double slack = 0.0;   // optimal phase-I slack (negative iff feasible)
  int newton_steps = 0; // 0 when the hint was accepted directly
};

/// Phase-I: minimize s subject to every constraint relaxed by s. A hint that
/// is already strictly feasible is accepted without Newton iterations.
FeasibilityResult feasibility_phase(
    const ConvexProgram& prog,
    const std::optional<VectorXd>& hint = std::nullopt,
    const SolverOptions& opt = SolverOptions{});

/// Logarithmic-barrier interior-point method with damped Newton centering and
/// backtracking line search. Warm starts on a boundary are shrunk toward the
/// phase-I point (factor 0.99) until strictly interior.
SolveReport solve(const ConvexProgram& prog,
                  const std::optional<VectorXd>& warm_start = std::nullopt,
                  const SolverOptions& opt = SolverOptions{});

/// Value, gradient and Hessian over q of the fronthaul-rate function
/// log2 det(A + diag(q)) - sum log2 q_i. The Hessian is PSD.
struct LogDetDerivatives {
  double value = 0.0;
  VectorXd gradient;
  MatrixXd hessian;
};

LogDetDerivatives logdet_gradient_hessian(const MatrixXcd& A,
                                          const VectorXd& q);

/// Max over constraints of f_i(x); negative means strictly feasible.
double max_constraint_residual(const ConvexProgram& prog, const VectorXd& x);

/// Line-oriented text dump, one constraint per line, coefficients in
/// scientific notation.
void dump_program(const ConvexProgram& prog, std::ostream& out);

}  // namespace aircran
