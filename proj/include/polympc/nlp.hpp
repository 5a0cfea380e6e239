#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace polympc {

using Triplet = Eigen::Triplet<double>;

/// Index map of the optimal control decision vector:
/// states x(k), k = 1..N, then inputs u(k), k = 1..N-1, then one line
/// (a, b, c) per obstacle and step k = 1..N when separating lines are used.
struct VarLayout {
  int horizon = 0;
  int num_lines = 0;  // obstacles carrying a separating line per step

  int num_core() const { return 7 * horizon - 2; }
  int num_vars() const { return num_core() + 3 * num_lines * horizon; }
  int state(int k) const { return 5 * (k - 1); }
  int input(int k) const { return 5 * horizon + 2 * (k - 1); }
  int line(int obstacle, int k) const { return num_core() + 3 * (obstacle * horizon + (k - 1)); }
  friend bool operator==(const VarLayout&, const VarLayout&) = default;
};

struct NlpEvalRequest {
  bool derivatives = false;
  double objective_scale = 1.0;
  const Eigen::VectorXd* y_eq = nullptr;    // multipliers for the Hessian
  const Eigen::VectorXd* y_ineq = nullptr;
};

/// One evaluation of the model. Jacobian and Hessian are triplet lists;
/// the Hessian of the Lagrangian
///   objective_scale * f + y_eq' c_eq + y_ineq' c_ineq
/// is reported as lower-triangle entries (duplicates are summed).
struct NlpEvaluation {
  double objective = 0.0;
  Eigen::VectorXd c_eq;
  Eigen::VectorXd c_ineq;  // feasible when >= 0
  Eigen::VectorXd gradient;
  std::vector<Triplet> jac_eq;
  std::vector<Triplet> jac_ineq;
  std::vector<Triplet> hess_lower;
};

using NlpEvaluator = std::function<void(const Eigen::VectorXd&, const NlpEvalRequest&, NlpEvaluation&)>;

/// min f(x) s.t. c_eq(x) = 0, c_ineq(x) >= 0, lower <= x <= upper.
struct NlpProblem {
  int num_vars = 0;
  int num_eq = 0;
  int num_ineq = 0;
  Eigen::VectorXd lower;  // -inf / +inf for free variables
  Eigen::VectorXd upper;
  std::optional<VarLayout> layout;
  NlpEvaluator evaluate;
};

enum class SolveStatus { Converged, MaxIterations, Diverged, Stalled };

std::string_view to_string(SolveStatus s);

struct SolverOptions {
  double tol = 1e-6;
  int max_iterations = 500;
  double mu_init = 0.1;
  double mu_factor = 0.2;
  double mu_power = 1.5;  // barrier update: mu <- min(mu_factor * mu, mu^mu_power)
  double slack_floor = 1e-4;
  double bound_push = 1e-2;
  double barrier_tol_factor = 10.0;  // leave a barrier subproblem once its error <= factor * mu
  double max_gradient = 100.0;       // objective scaled so the initial gradient is at most this
  bool verbose = false;
};

/// Merit values around one accepted line-search step, at fixed mu and penalty.
struct MeritStep {
  double before = 0.0;
  double after = 0.0;
  double mu = 0.0;
};

struct SolveResult {
  Eigen::VectorXd x;
  SolveStatus status = SolveStatus::MaxIterations;
  int iterations = 0;
  double solve_time = 0.0;           // seconds
  double constraint_violation = 0.0; // max norm of equality and inequality violation
  double objective = 0.0;
  Eigen::VectorXd y_eq;
  Eigen::VectorXd y_ineq;
  std::vector<MeritStep> merit_log;
  std::string message;
};

/// Primal-dual interior-point method with a log barrier on slacks and bounds,
/// l1-penalty merit backtracking and inertia-corrected sparse LDL^T steps.
SolveResult solve(const NlpProblem& problem, const std::optional<Eigen::VectorXd>& warm_start = std::nullopt,
                  const SolverOptions& options = {});

/// Max violation of equalities and inequalities at x (bounds excluded).
double constraint_violation(const NlpProblem& problem, const Eigen::VectorXd& x);

}  // namespace polympc
