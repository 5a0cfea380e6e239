#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "polympc/nlp.hpp"

namespace polympc {

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Diverged: return "diverged";
    case SolveStatus::Stalled: return "stalled";
  }
  return "unknown";
}

namespace {

using Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double violation(const NlpEvaluation& ev) {
  double v = max_abs(ev.c_eq);
  if (ev.c_ineq.size()) v = std::max(v, (-ev.c_ineq).cwiseMax(0.0).maxCoeff());
  return v;
}

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// Symmetric quasi-definite KKT factorization in a fixed ordering: AMD over
/// the whole pattern, then a stable partition placing every primal index
/// before every equality multiplier. With the primal block positive definite
/// this ordering needs no pivoting.
class KktFactor {
 public:
  KktFactor(int n, int m) : n_(n), m_(m) {}

  void set_ordering(const SparseMatrix& lower) {
    Eigen::AMDOrdering<int> amd;
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv;
    amd(lower, pinv);
    std::vector<int> order(pinv.indices().data(), pinv.indices().data() + pinv.size());
    std::stable_partition(order.begin(), order.end(), [&](int i) { return i < n_; });
    pos_.assign(static_cast<std::size_t>(n_ + m_), 0);
    for (int k = 0; k < n_ + m_; ++k) pos_[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = k;
    ordered_ = true;
  }
  bool ordered() const { return ordered_; }

  /// Factorizes base + diag(delta_w on primal, -delta_c on duals).
  /// Returns true when the factorization succeeded with inertia (n, m, 0).
  bool factorize(const std::vector<Triplet>& base, double delta_w, double delta_c, bool& singular) {
    std::vector<Triplet> t;
    t.reserve(base.size() + static_cast<std::size_t>(n_ + m_));
    for (const Triplet& e : base) add(t, e.row(), e.col(), e.value());
    for (int i = 0; i < n_; ++i) add(t, i, i, delta_w);
    for (int i = 0; i < m_; ++i) add(t, n_ + i, n_ + i, -delta_c);
    k_ = from_triplets(n_ + m_, n_ + m_, t);
    ldlt_.compute(k_);
    singular = false;
    if (ldlt_.info() != Eigen::Success) {
      singular = true;
      return false;
    }
    const VectorXd& d = ldlt_.vectorD();
    int pos = 0;
    int neg = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (!std::isfinite(d(i)) || std::abs(d(i)) < 1e-300) {
        singular = true;
        return false;
      }
      (d(i) > 0 ? pos : neg)++;
    }
    return pos == n_ && neg == m_;
  }

  VectorXd solve(const VectorXd& rhs) const {
    VectorXd b(rhs.size());
    for (Eigen::Index i = 0; i < rhs.size(); ++i) b(pos_[static_cast<std::size_t>(i)]) = rhs(i);
    VectorXd sol = ldlt_.solve(b);
    for (int it = 0; it < 2; ++it) {
      const VectorXd r = b - k_.selfadjointView<Eigen::Lower>() * sol;
      if (max_abs(r) <= 1e-14 * (1.0 + max_abs(b))) break;
      sol += ldlt_.solve(r);
    }
    VectorXd out(rhs.size());
    for (Eigen::Index i = 0; i < rhs.size(); ++i) out(i) = sol(pos_[static_cast<std::size_t>(i)]);
    return out;
  }

 private:
  void add(std::vector<Triplet>& t, int r, int c, double v) const {
    int pr = pos_[static_cast<std::size_t>(r)];
    int pc = pos_[static_cast<std::size_t>(c)];
    if (pr < pc) std::swap(pr, pc);
    t.emplace_back(pr, pc, v);
  }

  int n_;
  int m_;
  bool ordered_ = false;
  std::vector<int> pos_;
  SparseMatrix k_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> ldlt_;
};

struct Direction {
  VectorXd dx, ds, dy_eq, dy_ineq, dz_l, dz_u, dz_s;
};

class InteriorPoint {
 public:
  InteriorPoint(const NlpProblem& p, const SolverOptions& o)
      : p_(p), o_(o), n_(p.num_vars), m_eq_(p.num_eq), m_in_(p.num_ineq), kkt_(p.num_vars, p.num_eq) {
    has_l_.resize(n_);
    has_u_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      has_l_[i] = std::isfinite(p.lower(i));
      has_u_[i] = std::isfinite(p.upper(i));
    }
  }

  SolveResult run(const std::optional<VectorXd>& warm) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult result = iterate(warm);
    result.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }

 private:
  bool eval(const VectorXd& x, bool derivatives, NlpEvaluation& ev) const {
    NlpEvalRequest req;
    req.derivatives = derivatives;
    req.objective_scale = scale_;
    req.y_eq = &y_eq_;
    req.y_ineq = &y_in_;
    p_.evaluate(x, req, ev);
    if (!std::isfinite(ev.objective) || !ev.c_eq.allFinite() || !ev.c_ineq.allFinite()) return false;
    if (ev.c_eq.size() != m_eq_ || ev.c_ineq.size() != m_in_) return false;
    if (derivatives) {
      if (!ev.gradient.allFinite() || ev.gradient.size() != n_) return false;
      for (const auto* list : {&ev.jac_eq, &ev.jac_ineq, &ev.hess_lower}) {
        for (const Triplet& t : *list) {
          if (!std::isfinite(t.value())) return false;
        }
      }
    }
    return true;
  }

  double barrier(const VectorXd& x, const VectorXd& s, double f) const {
    double phi = scale_ * f;
    for (int i = 0; i < n_; ++i) {
      if (has_l_[i]) phi -= mu_ * std::log(x(i) - p_.lower(i));
      if (has_u_[i]) phi -= mu_ * std::log(p_.upper(i) - x(i));
    }
    for (int i = 0; i < m_in_; ++i) phi -= mu_ * std::log(s(i));
    return phi;
  }

  double infeasibility_l1(const NlpEvaluation& ev, const VectorXd& s) const {
    return ev.c_eq.lpNorm<1>() + (ev.c_ineq - s).lpNorm<1>();
  }

  double merit(const VectorXd& x, const VectorXd& s, const NlpEvaluation& ev) const {
    return barrier(x, s, ev.objective) + nu_ * infeasibility_l1(ev, s);
  }

  void push_into_bounds(VectorXd& x) const {
    const double k = o_.bound_push;
    for (int i = 0; i < n_; ++i) {
      const double lo = p_.lower(i);
      const double hi = p_.upper(i);
      double push_l = has_l_[i] ? k * std::max(1.0, std::abs(lo)) : 0.0;
      double push_u = has_u_[i] ? k * std::max(1.0, std::abs(hi)) : 0.0;
      if (has_l_[i] && has_u_[i]) {
        push_l = std::min(push_l, k * (hi - lo));
        push_u = std::min(push_u, k * (hi - lo));
      }
      if (has_l_[i]) x(i) = std::max(x(i), lo + push_l);
      if (has_u_[i]) x(i) = std::min(x(i), hi - push_u);
    }
  }

  // Largest step in (0, 1] keeping v + alpha dv >= (1 - tau) v componentwise.
  static double fraction_to_boundary(const VectorXd& v, const VectorXd& dv, double tau) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (dv(i) < 0.0) alpha = std::min(alpha, -tau * v(i) / dv(i));
    }
    return alpha;
  }

  VectorXd dist_lower(const VectorXd& x) const {
    VectorXd d = VectorXd::Ones(n_);
    for (int i = 0; i < n_; ++i) if (has_l_[i]) d(i) = x(i) - p_.lower(i);
    return d;
  }
  VectorXd dist_upper(const VectorXd& x) const {
    VectorXd d = VectorXd::Ones(n_);
    for (int i = 0; i < n_; ++i) if (has_u_[i]) d(i) = p_.upper(i) - x(i);
    return d;
  }

  struct Errors {
    double dual = 0.0;
    double primal = 0.0;
    double compl_mu = 0.0;
    double compl_zero = 0.0;
    double total(bool at_zero) const { return std::max({dual, primal, at_zero ? compl_zero : compl_mu}); }
  };

  Errors errors(const NlpEvaluation& ev, const SparseMatrix& j_eq, const SparseMatrix& j_in) const {
    VectorXd rx = scale_ * ev.gradient - z_l_ + z_u_;
    if (m_eq_) rx += j_eq.transpose() * y_eq_;
    if (m_in_) rx += j_in.transpose() * y_in_;
    const VectorXd rs = -y_in_ - z_s_;

    const double z_norm = z_l_.lpNorm<1>() + z_u_.lpNorm<1>() + z_s_.lpNorm<1>();
    const double y_norm = y_eq_.lpNorm<1>() + y_in_.lpNorm<1>();
    const double count = std::max(1, n_ + m_eq_ + 2 * m_in_);
    constexpr double s_max = 100.0;
    const double s_d = std::max(s_max, (z_norm + y_norm) / count) / s_max;
    const double n_z = std::max(1, num_bounds_ + m_in_);
    const double s_c = std::max(s_max, z_norm / n_z) / s_max;

    Errors e;
    e.dual = std::max(max_abs(rx), max_abs(rs)) / s_d;
    e.primal = std::max(max_abs(ev.c_eq), max_abs(ev.c_ineq - s_));
    const VectorXd dl = dist_lower(x_);
    const VectorXd du = dist_upper(x_);
    double cm = 0.0;
    double c0 = 0.0;
    for (int i = 0; i < n_; ++i) {
      if (has_l_[i]) {
        cm = std::max(cm, std::abs(dl(i) * z_l_(i) - mu_));
        c0 = std::max(c0, std::abs(dl(i) * z_l_(i)));
      }
      if (has_u_[i]) {
        cm = std::max(cm, std::abs(du(i) * z_u_(i) - mu_));
        c0 = std::max(c0, std::abs(du(i) * z_u_(i)));
      }
    }
    for (int i = 0; i < m_in_; ++i) {
      cm = std::max(cm, std::abs(s_(i) * z_s_(i) - mu_));
      c0 = std::max(c0, std::abs(s_(i) * z_s_(i)));
    }
    e.compl_mu = cm / s_c;
    e.compl_zero = c0 / s_c;
    return e;
  }

  // Reduced system assembled in original indices (lower triangle).
  void assemble_kkt(const NlpEvaluation& ev, const SparseMatrix& j_eq, const SparseMatrix& j_in,
                    std::vector<Triplet>& k) const {
    k.clear();
    for (const Triplet& t : ev.hess_lower) {
      if (t.row() >= t.col()) k.push_back(t);
      else k.emplace_back(t.col(), t.row(), t.value());
    }
    const VectorXd dl = dist_lower(x_);
    const VectorXd du = dist_upper(x_);
    for (int i = 0; i < n_; ++i) {
      double sigma = 0.0;
      if (has_l_[i]) sigma += z_l_(i) / dl(i);
      if (has_u_[i]) sigma += z_u_(i) / du(i);
      k.emplace_back(i, i, sigma);
    }
    if (m_in_) {
      const VectorXd sigma_s = z_s_.cwiseQuotient(s_);
      const SparseMatrix weighted = sigma_s.asDiagonal() * j_in;
      const SparseMatrix m = SparseMatrix(j_in.transpose()) * weighted;
      for (int col = 0; col < m.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
          if (it.row() >= it.col()) k.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
      }
    }
    for (int col = 0; col < j_eq.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(j_eq, col); it; ++it) {
        k.emplace_back(n_ + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      }
    }
  }

  // Factorizes with inertia correction. Returns false if no regularization works.
  bool factorize(const std::vector<Triplet>& k, double min_delta_w) {
    if (!kkt_.ordered()) {
      std::vector<Triplet> pattern = k;
      for (int i = 0; i < n_ + m_eq_; ++i) pattern.emplace_back(i, i, 1.0);
      kkt_.set_ordering(from_triplets(n_ + m_eq_, n_ + m_eq_, pattern));
    }
    double delta_c = 0.0;
    bool singular = false;
    double delta_w = min_delta_w;
    if (kkt_.factorize(k, delta_w, delta_c, singular)) {
      delta_w_ = delta_w;
      return true;
    }
    if (singular) delta_c = 1e-8 * std::pow(mu_, 0.25);
    delta_w = std::max(min_delta_w, delta_w_ > 0.0 ? std::max(1e-20, delta_w_ / 3.0) : 1e-4);
    const double growth = delta_w_ > 0.0 ? 8.0 : 100.0;
    for (int attempt = 0; attempt < 60 && delta_w < 1e40; ++attempt) {
      if (kkt_.factorize(k, delta_w, delta_c, singular)) {
        delta_w_ = delta_w;
        return true;
      }
      if (singular && delta_c == 0.0) delta_c = 1e-8 * std::pow(mu_, 0.25);
      delta_w *= growth;
    }
    return false;
  }

  // Solves the condensed Newton system for the given residual blocks.
  void solve_direction(const SparseMatrix& j_in, const VectorXd& rx, const VectorXd& rs,
                       const VectorXd& rc_eq, const VectorXd& rc_in, Direction& d) const {
    const VectorXd sigma_s = z_s_.cwiseQuotient(s_);
    VectorXd rhs(n_ + m_eq_);
    rhs.head(n_) = -rx;
    if (m_in_) rhs.head(n_) -= j_in.transpose() * (sigma_s.cwiseProduct(rc_in) + rs);
    rhs.tail(m_eq_) = -rc_eq;
    const VectorXd sol = kkt_.solve(rhs);
    d.dx = sol.head(n_);
    d.dy_eq = sol.tail(m_eq_);
    d.ds = m_in_ ? VectorXd(j_in * d.dx + rc_in) : VectorXd(0);
    d.dy_ineq = sigma_s.cwiseProduct(d.ds) + rs;
  }

  void bound_multiplier_steps(Direction& d) const {
    const VectorXd dl = dist_lower(x_);
    const VectorXd du = dist_upper(x_);
    d.dz_l = VectorXd::Zero(n_);
    d.dz_u = VectorXd::Zero(n_);
    for (int i = 0; i < n_; ++i) {
      if (has_l_[i]) d.dz_l(i) = mu_ / dl(i) - z_l_(i) - z_l_(i) / dl(i) * d.dx(i);
      if (has_u_[i]) d.dz_u(i) = mu_ / du(i) - z_u_(i) + z_u_(i) / du(i) * d.dx(i);
    }
    d.dz_s = mu_ * s_.cwiseInverse() - z_s_ - z_s_.cwiseQuotient(s_).cwiseProduct(d.ds);
  }

  double max_primal_step(const Direction& d, double tau) const {
    double alpha = 1.0;
    for (int i = 0; i < n_; ++i) {
      if (has_l_[i] && d.dx(i) < 0.0) alpha = std::min(alpha, -tau * (x_(i) - p_.lower(i)) / d.dx(i));
      if (has_u_[i] && d.dx(i) > 0.0) alpha = std::min(alpha, tau * (p_.upper(i) - x_(i)) / d.dx(i));
    }
    return std::min(alpha, fraction_to_boundary(s_, d.ds, tau));
  }

  double max_dual_step(const Direction& d, double tau) const {
    double alpha = 1.0;
    for (int i = 0; i < n_; ++i) {
      if (has_l_[i] && d.dz_l(i) < 0.0) alpha = std::min(alpha, -tau * z_l_(i) / d.dz_l(i));
      if (has_u_[i] && d.dz_u(i) < 0.0) alpha = std::min(alpha, -tau * z_u_(i) / d.dz_u(i));
    }
    return std::min(alpha, fraction_to_boundary(z_s_, d.dz_s, tau));
  }

  // Keeps every bound multiplier within a factor of the centrality target.
  void safeguard_multipliers() {
    constexpr double kappa = 1e10;
    const VectorXd dl = dist_lower(x_);
    const VectorXd du = dist_upper(x_);
    for (int i = 0; i < n_; ++i) {
      if (has_l_[i]) z_l_(i) = std::clamp(z_l_(i), mu_ / (kappa * dl(i)), kappa * mu_ / dl(i));
      if (has_u_[i]) z_u_(i) = std::clamp(z_u_(i), mu_ / (kappa * du(i)), kappa * mu_ / du(i));
    }
    for (int i = 0; i < m_in_; ++i) {
      z_s_(i) = std::clamp(z_s_(i), mu_ / (kappa * s_(i)), kappa * mu_ / s_(i));
    }
  }

  void track_best(const NlpEvaluation& ev) {
    const double viol = violation(ev);
    const bool feasible = viol <= o_.tol;
    const bool better = !has_best_ || (feasible && !best_feasible_) ||
                        (feasible == best_feasible_ &&
                         (feasible ? ev.objective < best_obj_ : viol < best_viol_));
    if (better) {
      has_best_ = true;
      best_feasible_ = feasible;
      best_viol_ = viol;
      best_obj_ = ev.objective;
      best_x_ = x_;
      best_y_eq_ = y_eq_;
      best_y_in_ = y_in_;
    }
  }

  SolveResult finish(SolveStatus status, int iterations, const NlpEvaluation* current, std::string msg) {
    SolveResult r;
    r.status = status;
    r.iterations = iterations;
    r.merit_log = std::move(merit_log_);
    r.message = std::move(msg);
    if (status == SolveStatus::Converged && current) {
      r.x = x_;
      r.y_eq = y_eq_;
      r.y_ineq = y_in_;
      r.objective = current->objective;
      r.constraint_violation = violation(*current);
      return r;
    }
    if (has_best_) {
      r.x = best_x_;
      r.y_eq = best_y_eq_;
      r.y_ineq = best_y_in_;
      r.objective = best_obj_;
      r.constraint_violation = best_viol_;
    } else {
      r.x = x_;
      r.y_eq = y_eq_;
      r.y_ineq = y_in_;
      r.objective = std::numeric_limits<double>::quiet_NaN();
      r.constraint_violation = std::numeric_limits<double>::infinity();
    }
    return r;
  }

  SolveResult iterate(const std::optional<VectorXd>& warm) {
    num_bounds_ = 0;
    for (int i = 0; i < n_; ++i) num_bounds_ += int(has_l_[i]) + int(has_u_[i]);

    x_ = warm ? *warm : VectorXd::Zero(n_);
    if (x_.size() != n_) return finish(SolveStatus::Diverged, 0, nullptr, "warm start has wrong length");
    push_into_bounds(x_);
    mu_ = o_.mu_init;
    y_eq_ = VectorXd::Zero(m_eq_);
    y_in_ = VectorXd::Zero(m_in_);

    NlpEvaluation ev;
    scale_ = 1.0;
    if (!eval(x_, true, ev)) return finish(SolveStatus::Diverged, 0, nullptr, "non-finite value at the starting point");
    const double g_max = max_abs(ev.gradient);
    if (g_max > o_.max_gradient) scale_ = o_.max_gradient / g_max;

    s_ = ev.c_ineq.cwiseMax(o_.slack_floor);
    const VectorXd dl = dist_lower(x_);
    const VectorXd du = dist_upper(x_);
    z_l_ = VectorXd::Zero(n_);
    z_u_ = VectorXd::Zero(n_);
    for (int i = 0; i < n_; ++i) {
      if (has_l_[i]) z_l_(i) = mu_ / dl(i);
      if (has_u_[i]) z_u_(i) = mu_ / du(i);
    }
    z_s_ = mu_ * s_.cwiseInverse();
    y_in_ = -z_s_;

    const double mu_min = o_.tol / 10.0;
    std::vector<Triplet> kkt;
    int iter = 0;
    for (;; ++iter) {
      if (iter > 0 && !eval(x_, true, ev)) {
        return finish(SolveStatus::Diverged, iter, nullptr, "non-finite value in model evaluation");
      }
      if (max_abs(x_) > 1e20) return finish(SolveStatus::Diverged, iter, nullptr, "iterates diverged");
      track_best(ev);
      const SparseMatrix j_eq = from_triplets(m_eq_, n_, ev.jac_eq);
      const SparseMatrix j_in = from_triplets(m_in_, n_, ev.jac_ineq);

      Errors err = errors(ev, j_eq, j_in);
      if (o_.verbose) {
        std::fprintf(stderr, "iter %3d  f % .6e  inf_pr %.2e  inf_du %.2e  mu %.1e  nu %.1e  dw %.1e  a %.1e/%.1e%s\n",
                     iter, ev.objective, err.primal, err.dual, mu_, nu_, delta_w_, last_alpha_, last_alpha_max_,
                     last_soc_ ? " soc" : "");
      }
      if (err.total(true) <= o_.tol) return finish(SolveStatus::Converged, iter, &ev, "");
      if (iter >= o_.max_iterations) return finish(SolveStatus::MaxIterations, iter, &ev, "iteration limit");

      while (mu_ > mu_min && err.total(false) <= o_.barrier_tol_factor * mu_) {
        mu_ = std::max(mu_min, std::min(o_.mu_factor * mu_, std::pow(mu_, o_.mu_power)));
        err = errors(ev, j_eq, j_in);
      }

      // Barrier gradient and residuals.
      VectorXd grad_phi = scale_ * ev.gradient;
      const VectorXd dlo = dist_lower(x_);
      const VectorXd dup = dist_upper(x_);
      for (int i = 0; i < n_; ++i) {
        if (has_l_[i]) grad_phi(i) -= mu_ / dlo(i);
        if (has_u_[i]) grad_phi(i) += mu_ / dup(i);
      }
      VectorXd rx = grad_phi;
      if (m_eq_) rx += j_eq.transpose() * y_eq_;
      if (m_in_) rx += j_in.transpose() * y_in_;
      const VectorXd grad_phi_s = -mu_ * s_.cwiseInverse();
      const VectorXd rs = grad_phi_s - y_in_;
      const VectorXd rc_in = ev.c_ineq - s_;

      assemble_kkt(ev, j_eq, j_in, kkt);
      const double tau = std::max(0.99, 1.0 - mu_);
      bool accepted = false;
      double extra_reg = damping_;
      for (int attempt = 0; attempt < 5 && !accepted; ++attempt) {
        if (!factorize(kkt, extra_reg)) {
          return finish(SolveStatus::Stalled, iter, nullptr, "KKT system could not be regularized");
        }
        Direction d;
        solve_direction(j_in, rx, rs, ev.c_eq, rc_in, d);
        bound_multiplier_steps(d);
        if (!d.dx.allFinite() || !d.ds.allFinite()) {
          return finish(SolveStatus::Diverged, iter, nullptr, "non-finite search direction");
        }
        accepted = line_search(ev, j_in, rx, rs, grad_phi, grad_phi_s, d, tau);
        extra_reg = std::max(1e-4, 10.0 * delta_w_);
      }
      if (!accepted) return finish(SolveStatus::Stalled, iter, nullptr, "line search failed");
      // Steps cut far back by the line search mean the quadratic model is
      // trusted too far; damp the next step, and relax again on full steps.
      if (last_alpha_ < 0.1) {
        damping_ = std::min(1e6, damping_ > 0.0 ? 10.0 * damping_ : 1e-2);
      } else if (last_alpha_ >= 0.5) {
        damping_ = damping_ > 1e-4 ? damping_ / 10.0 : 0.0;
      }
    }
  }

  bool line_search(const NlpEvaluation& ev, const SparseMatrix& j_in, const VectorXd& rx, const VectorXd& rs,
                   const VectorXd& grad_phi, const VectorXd& grad_phi_s, const Direction& d, double tau) {
    const double theta = infeasibility_l1(ev, s_);
    const double slope_phi = grad_phi.dot(d.dx) + grad_phi_s.dot(d.ds);
    // Curvature of the barrier model along the step.
    double curvature = 0.0;
    {
      const SparseMatrix h = from_triplets(n_, n_, ev.hess_lower);
      curvature = d.dx.dot(h.selfadjointView<Eigen::Lower>() * d.dx);
      const VectorXd dl = dist_lower(x_);
      const VectorXd du = dist_upper(x_);
      for (int i = 0; i < n_; ++i) {
        double sigma = 0.0;
        if (has_l_[i]) sigma += z_l_(i) / dl(i);
        if (has_u_[i]) sigma += z_u_(i) / du(i);
        curvature += sigma * d.dx(i) * d.dx(i);
      }
      curvature += d.ds.dot(z_s_.cwiseQuotient(s_).cwiseProduct(d.ds));
    }
    // The penalty is re-chosen every iteration: above the multiplier norm, which
    // keeps the l1 merit exact, and large enough for the model to descend. A
    // penalty inflated by an early infeasible iterate would otherwise force
    // tiny steps once the iterate is nearly feasible.
    nu_ = std::max(max_abs(y_eq_), max_abs(y_in_)) + 1.0;
    if (theta > 0.0) {
      constexpr double rho = 0.1;
      const double required = (slope_phi + 0.5 * std::max(0.0, curvature)) / ((1.0 - rho) * theta);
      if (nu_ < required) nu_ = required + 1.0;
    }
    const double slope = slope_phi - nu_ * theta;
    const double phi0 = barrier(x_, s_, ev.objective) + nu_ * theta;

    const double alpha_max = max_primal_step(d, tau);
    const double alpha_dual = max_dual_step(d, tau);
    last_alpha_max_ = alpha_max;
    last_soc_ = false;

    // Step too small to matter relative to the iterate: take it.
    double rel = 0.0;
    for (int i = 0; i < n_; ++i) rel = std::max(rel, std::abs(d.dx(i)) / (1.0 + std::abs(x_(i))));
    for (int i = 0; i < m_in_; ++i) rel = std::max(rel, std::abs(d.ds(i)) / (1.0 + std::abs(s_(i))));
    if (rel < 1e-14) {
      take_step(d, alpha_max, alpha_dual, x_ + alpha_max * d.dx, s_ + alpha_max * d.ds);
      return true;
    }
    if (slope >= 0.0) return false;

    constexpr double eta = 1e-4;
    NlpEvaluation trial;
    double alpha = alpha_max;
    for (int k = 0; k < 50 && alpha > 1e-16; ++k, alpha *= 0.5) {
      const VectorXd xt = x_ + alpha * d.dx;
      const VectorXd st = s_ + alpha * d.ds;
      if (!eval(xt, false, trial)) continue;
      const double phit = merit(xt, st, trial);
      if (std::isfinite(phit) && phit <= phi0 + eta * alpha * slope) {
        last_alpha_ = alpha;
        merit_log_.push_back({phi0, phit, mu_});
        take_step(d, alpha, alpha_dual, xt, st);
        return true;
      }
      if (k == 0 && m_eq_ + m_in_ > 0 && try_soc(ev, j_in, rx, rs, phi0, eta * alpha * slope, alpha, trial, st, tau)) {
        return true;
      }
    }
    return false;
  }

  // Second-order corrections: re-solve with constraint values accumulated
  // from the rejected trial point, up to four times while they keep improving.
  bool try_soc(const NlpEvaluation& ev, const SparseMatrix& j_in, const VectorXd& rx, const VectorXd& rs,
               double phi0, double required_decrease, double alpha, const NlpEvaluation& trial, const VectorXd& st,
               double tau) {
    VectorXd c_eq = alpha * ev.c_eq + trial.c_eq;
    VectorXd c_in = alpha * (ev.c_ineq - s_) + (trial.c_ineq - st);
    double theta_old = infeasibility_l1(trial, st);
    NlpEvaluation corrected;
    for (int p = 0; p < 4; ++p) {
      Direction soc;
      solve_direction(j_in, rx, rs, c_eq, c_in, soc);
      bound_multiplier_steps(soc);
      const double a_soc = max_primal_step(soc, tau);
      const VectorXd xc = x_ + a_soc * soc.dx;
      const VectorXd sc = s_ + a_soc * soc.ds;
      if (!eval(xc, false, corrected)) return false;
      const double phic = merit(xc, sc, corrected);
      if (std::isfinite(phic) && phic <= phi0 + required_decrease) {
        last_alpha_ = a_soc;
        last_soc_ = true;
        merit_log_.push_back({phi0, phic, mu_});
        take_step(soc, a_soc, max_dual_step(soc, tau), xc, sc);
        return true;
      }
      const double theta_c = infeasibility_l1(corrected, sc);
      if (!(theta_c <= 0.99 * theta_old)) return false;
      theta_old = theta_c;
      c_eq = a_soc * c_eq + corrected.c_eq;
      c_in = a_soc * c_in + (corrected.c_ineq - sc);
    }
    return false;
  }

  void take_step(const Direction& d, double alpha, double alpha_dual, const VectorXd& x_new, const VectorXd& s_new) {
    x_ = x_new;
    s_ = s_new;
    y_eq_ += alpha * d.dy_eq;
    y_in_ += alpha * d.dy_ineq;
    z_l_ += alpha_dual * d.dz_l;
    z_u_ += alpha_dual * d.dz_u;
    z_s_ += alpha_dual * d.dz_s;
    safeguard_multipliers();
  }

  const NlpProblem& p_;
  const SolverOptions& o_;
  int n_;
  int m_eq_;
  int m_in_;
  int num_bounds_ = 0;
  std::vector<bool> has_l_;
  std::vector<bool> has_u_;
  KktFactor kkt_;

  VectorXd x_, s_, y_eq_, y_in_, z_l_, z_u_, z_s_;
  double mu_ = 0.1;
  double nu_ = 1.0;
  double scale_ = 1.0;
  double delta_w_ = 0.0;
  double damping_ = 0.0;
  double last_alpha_ = 0.0;
  double last_alpha_max_ = 0.0;
  bool last_soc_ = false;
  std::vector<MeritStep> merit_log_;

  bool has_best_ = false;
  bool best_feasible_ = false;
  double best_viol_ = kInf;
  double best_obj_ = kInf;
  VectorXd best_x_, best_y_eq_, best_y_in_;
};

}  // namespace

SolveResult solve(const NlpProblem& problem, const std::optional<Eigen::VectorXd>& warm_start,
                  const SolverOptions& options) {
  InteriorPoint ipm(problem, options);
  return ipm.run(warm_start);
}

double constraint_violation(const NlpProblem& problem, const Eigen::VectorXd& x) {
  NlpEvaluation ev;
  problem.evaluate(x, NlpEvalRequest{}, ev);
  return violation(ev);
}

}  // namespace polympc
