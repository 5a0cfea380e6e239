#include "polympc/ocp.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace polympc {

double stage_cost(const VehicleState& x, const VehicleInput& u, const VehicleInput& u_prev,
                  const VehicleState& x_ref, const OcpWeights& w) {
  const auto e = x.as_array();
  const auto r = x_ref.as_array();
  double cost = 0.0;
  for (int i = 0; i < kStateDim; ++i) cost += w.Q[i] * (e[i] - r[i]) * (e[i] - r[i]);
  const double dv = u.v_dot - u_prev.v_dot;
  const double dd = u.delta_dot - u_prev.delta_dot;
  return cost + w.R[0] * dv * dv + w.R[1] * dd * dd;
}

double terminal_cost(const VehicleState& x_n, const VehicleState& x_ref, const OcpWeights& w) {
  const auto e = x_n.as_array();
  const auto r = x_ref.as_array();
  double cost = 0.0;
  for (int i = 0; i < kStateDim; ++i) cost += w.S_f[i] * (e[i] - r[i]) * (e[i] - r[i]);
  return cost;
}

VarLayout layout_for(const Scenario& scenario, Method method) {
  VarLayout l;
  l.horizon = scenario.horizon;
  l.num_lines = method == Method::Svm ? static_cast<int>(scenario.obstacles.size()) : 0;
  return l;
}

VehicleState state_at(const Eigen::VectorXd& z, const VarLayout& layout, int k) {
  if (k < 1 || k > layout.horizon) throw std::out_of_range("state index outside 1..N");
  return VehicleState::from_array(std::span<const double>(z.data() + layout.state(k), kStateDim));
}

VehicleInput input_at(const Eigen::VectorXd& z, const VarLayout& layout, int k) {
  if (k < 1 || k > layout.horizon - 1) throw std::out_of_range("input index outside 1..N-1");
  return {z(layout.input(k)), z(layout.input(k) + 1)};
}

SeparatingLine line_at(const Eigen::VectorXd& z, const VarLayout& layout, int obstacle, int k) {
  if (obstacle < 0 || obstacle >= layout.num_lines || k < 1 || k > layout.horizon) {
    throw std::out_of_range("line index outside the layout");
  }
  const int i = layout.line(obstacle, k);
  return {z(i), z(i + 1), z(i + 2)};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ObstacleModel {
  std::optional<ObstacleShape> polygon;
  CircleObstacle circle;
  BodyShape octagon;  // body-frame offset region, circles only
  int residuals = 0;
};

// Immutable data shared by every evaluation of one assembled problem.
struct OcpModel {
  VarLayout layout;
  Method method = Method::Msde;
  double dtau = 0.2;
  double wheelbase = 2.5;
  OcpWeights weights;
  VehicleState x_ref;
  VehicleState x0;
  VehicleInput u_prev;
  BodyShape ego;
  std::vector<ObstacleModel> obstacles;
  int num_ineq = 0;

  void evaluate(const Eigen::VectorXd& z, const NlpEvalRequest& req, NlpEvaluation& ev) const;

 private:
  void add_costs(const Eigen::VectorXd& z, const NlpEvalRequest& req, NlpEvaluation& ev) const;
  void add_dynamics(const Eigen::VectorXd& z, const NlpEvalRequest& req, NlpEvaluation& ev) const;
  void add_collisions(const Eigen::VectorXd& z, const NlpEvalRequest& req, NlpEvaluation& ev) const;
};

void OcpModel::evaluate(const Eigen::VectorXd& z, const NlpEvalRequest& req, NlpEvaluation& ev) const {
  const int n = layout.num_vars();
  ev.objective = 0.0;
  ev.gradient.setZero(n);
  ev.c_eq.setZero(kStateDim * layout.horizon);
  ev.c_ineq.setZero(num_ineq);
  ev.jac_eq.clear();
  ev.jac_ineq.clear();
  ev.hess_lower.clear();
  add_costs(z, req, ev);
  add_dynamics(z, req, ev);
  add_collisions(z, req, ev);
}

void OcpModel::add_costs(const Eigen::VectorXd& z, const NlpEvalRequest& req, NlpEvaluation& ev) const {
  const int N = layout.horizon;
  const double sc = req.objective_scale;
  const auto ref = x_ref.as_array();
  auto add_state_term = [&](int k, const std::array<double, kStateDim>& w) {
    const int s = layout.state(k);
    for (int i = 0; i < kStateDim; ++i) {
      const double e = z(s + i) - ref[i];
      ev.objective += w[i] * e * e;
      ev.gradient(s + i) += 2.0 * w[i] * e;
      if (req.derivatives && w[i] != 0.0) ev.hess_lower.emplace_back(s + i, s + i, 2.0 * sc * w[i]);
    }
  };
  for (int k = 1; k <= N - 1; ++k) {
    add_state_term(k, weights.Q);
    const int u = layout.input(k);
    for (int i = 0; i < kInputDim; ++i) {
      const double prev = k == 1 ? (i == 0 ? u_prev.v_dot : u_prev.delta_dot) : z(layout.input(k - 1) + i);
      const double du = z(u + i) - prev;
      const double w = weights.R[i];
      ev.objective += w * du * du;
      ev.gradient(u + i) += 2.0 * w * du;
      if (k > 1) ev.gradient(layout.input(k - 1) + i) -= 2.0 * w * du;
      if (req.derivatives && w != 0.0) {
        ev.hess_lower.emplace_back(u + i, u + i, 2.0 * sc * w);
        if (k > 1) {
          ev.hess_lower.emplace_back(layout.input(k - 1) + i, layout.input(k - 1) + i, 2.0 * sc * w);
          ev.hess_lower.emplace_back(u + i, layout.input(k - 1) + i, -2.0 * sc * w);
        }
      }
    }
  }
  add_state_term(N, weights.S_f);

  for (int o = 0; o < layout.num_lines; ++o) {
    for (int k = 1; k <= N; ++k) {
      const int l = layout.line(o, k);
      const LineRegularizer reg = svm_regularizer({z(l), z(l + 1), z(l + 2)});
      ev.objective += reg.value;
      ev.gradient.segment<3>(l) += reg.gradient;
      if (req.derivatives) {
        ev.hess_lower.emplace_back(l, l, 2.0 * sc * kSvmAlpha);
        ev.hess_lower.emplace_back(l + 1, l + 1, 2.0 * sc * kSvmAlpha);
      }
    }
  }
}

void OcpModel::add_dynamics(const Eigen::VectorXd& z, const NlpEvalRequest& req, NlpEvaluation& ev) const {
  const int N = layout.horizon;
  const double h = dtau;
  const double lf = wheelbase;
  for (int k = 0; k < N; ++k) {
    std::array<double, kStateDim> x{};
    std::array<double, kInputDim> u{};
    if (k == 0) {
      x = x0.as_array();
      u = {u_prev.v_dot, u_prev.delta_dot};
    } else {
      for (int i = 0; i < kStateDim; ++i) x[i] = z(layout.state(k) + i);
      u = {z(layout.input(k)), z(layout.input(k) + 1)};
    }
    const double v = x[2];
    const double c = std::cos(x[3]);
    const double s = std::sin(x[3]);
    const double t = std::tan(x[4]);
    const double sec2 = 1.0 + t * t;
    const std::array<double, kStateDim> next = {x[0] + v * c * h, x[1] + v * s * h, v + u[0] * h,
                                                x[3] + v / lf * t * h, x[4] + u[1] * h};
    const int row = kStateDim * k;
    const int nx = layout.state(k + 1);
    for (int i = 0; i < kStateDim; ++i) ev.c_eq(row + i) = z(nx + i) - next[i];
    if (!req.derivatives) continue;

    for (int i = 0; i < kStateDim; ++i) ev.jac_eq.emplace_back(row + i, nx + i, 1.0);
    if (k == 0) continue;
    const int sx = layout.state(k);
    const int su = layout.input(k);
    // -d(next)/d(x, u)
    for (int i = 0; i < kStateDim; ++i) ev.jac_eq.emplace_back(row + i, sx + i, -1.0);
    ev.jac_eq.emplace_back(row + 0, sx + 2, -c * h);
    ev.jac_eq.emplace_back(row + 0, sx + 3, v * s * h);
    ev.jac_eq.emplace_back(row + 1, sx + 2, -s * h);
    ev.jac_eq.emplace_back(row + 1, sx + 3, -v * c * h);
    ev.jac_eq.emplace_back(row + 2, su + 0, -h);
    ev.jac_eq.emplace_back(row + 3, sx + 2, -t * h / lf);
    ev.jac_eq.emplace_back(row + 3, sx + 4, -v * sec2 * h / lf);
    ev.jac_eq.emplace_back(row + 4, su + 1, -h);

    if (req.y_eq == nullptr) continue;
    const Eigen::VectorXd& y = *req.y_eq;
    const double y0 = y(row + 0);
    const double y1 = y(row + 1);
    const double y3 = y(row + 3);
    ev.hess_lower.emplace_back(sx + 3, sx + 2, (y0 * s - y1 * c) * h);
    ev.hess_lower.emplace_back(sx + 3, sx + 3, (y0 * c + y1 * s) * v * h);
    ev.hess_lower.emplace_back(sx + 4, sx + 2, -y3 * sec2 * h / lf);
    ev.hess_lower.emplace_back(sx + 4, sx + 4, -y3 * 2.0 * v * sec2 * t * h / lf);
  }
}

void OcpModel::add_collisions(const Eigen::VectorXd& z, const NlpEvalRequest& req, NlpEvaluation& ev) const {
  std::vector<LocalResidual> local;
  int row = 0;
  for (int k = 1; k <= layout.horizon; ++k) {
    const int s = layout.state(k);
    const Pose2 pose{z(s), z(s + 1), z(s + 3)};
    for (std::size_t o = 0; o < obstacles.size(); ++o) {
      const ObstacleModel& obs = obstacles[o];
      const bool lines = method == Method::Svm;
      const int l = lines ? layout.line(static_cast<int>(o), k) : -1;
      const SeparatingLine line = lines ? SeparatingLine{z(l), z(l + 1), z(l + 2)} : SeparatingLine{};
      local.clear();
      if (obs.polygon) {
        if (lines) {
          svm_pose_residuals(ego, pose, obs.polygon->polygon.vertices(), line, kSvmEpsilon, local);
        } else {
          msde_pose_residuals(ego, pose, *obs.polygon, local);
        }
      } else {
        circle_pose_residuals(ego, obs.octagon, pose, obs.circle, method, line, kSvmEpsilon, local);
      }
      const std::array<int, kLocalVars> idx = {s, s + 1, s + 3, l, l + 1, l + 2};
      const int used = lines ? kLocalVars : 3;
      for (const LocalResidual& r : local) {
        ev.c_ineq(row) = r.value;
        if (req.derivatives) {
          for (int i = 0; i < used; ++i) {
            if (r.grad(i) != 0.0) ev.jac_ineq.emplace_back(row, idx[i], r.grad(i));
          }
          if (req.y_ineq != nullptr) {
            const double y = (*req.y_ineq)(row);
            for (int i = 0; i < used; ++i) {
              for (int j = 0; j <= i; ++j) {
                if (r.hess(i, j) != 0.0) ev.hess_lower.emplace_back(idx[i], idx[j], y * r.hess(i, j));
              }
            }
          }
        }
        ++row;
      }
    }
  }
}

std::shared_ptr<const OcpModel> build_model(const Scenario& sc, const VehicleState& x_current,
                                            const VehicleInput& u_prev, Method method) {
  auto m = std::make_shared<OcpModel>();
  m->layout = layout_for(sc, method);
  m->method = method;
  m->dtau = sc.dtau;
  m->wheelbase = sc.vehicle.l_f;
  m->weights = sc.weights;
  m->x_ref = sc.x_ref;
  m->x0 = x_current;
  m->u_prev = u_prev;
  const auto body = footprint_body(sc.vehicle);
  const ConvexPolygon body_poly(std::vector<Point2>(body.begin(), body.end()));
  m->ego = BodyShape::from(body_poly);
  const int n_ego = static_cast<int>(m->ego.vertices.size());
  int per_step = 0;
  for (const Obstacle& o : sc.obstacles) {
    ObstacleModel om;
    if (const auto* poly = std::get_if<ConvexPolygon>(&o)) {
      om.polygon.emplace(*poly);
      om.residuals = polygon_residual_count(n_ego, static_cast<int>(poly->size()));
    } else {
      om.circle = std::get<CircleObstacle>(o);
      om.octagon = BodyShape::from(offset_region(body_poly, om.circle.radius).octagon);
      om.residuals = circle_residual_count(n_ego, static_cast<int>(om.octagon.vertices.size()), method);
    }
    per_step += om.residuals;
    m->obstacles.push_back(std::move(om));
  }
  m->num_ineq = per_step * sc.horizon;
  return m;
}

std::vector<VehicleState> predicted_rollout(const Scenario& sc, const VehicleState& x_current,
                                            const VehicleInput& u_prev) {
  std::vector<VehicleInput> inputs(static_cast<std::size_t>(sc.horizon));
  inputs[0] = u_prev;
  return rollout(x_current, inputs, sc.dtau, sc.vehicle.l_f);
}

Point2 obstacle_center(const Obstacle& o) {
  if (const auto* poly = std::get_if<ConvexPolygon>(&o)) return poly->centroid();
  return std::get<CircleObstacle>(o).center;
}

}  // namespace

NlpProblem assemble(const Scenario& scenario, const VehicleState& x_current, const VehicleInput& u_prev,
                    Method method) {
  auto model = build_model(scenario, x_current, u_prev, method);
  const VarLayout& L = model->layout;
  const VehicleParams& vp = scenario.vehicle;

  NlpProblem p;
  p.num_vars = L.num_vars();
  p.num_eq = kStateDim * L.horizon;
  p.num_ineq = model->num_ineq;
  p.layout = L;
  p.lower = Eigen::VectorXd::Constant(p.num_vars, -kInf);
  p.upper = Eigen::VectorXd::Constant(p.num_vars, kInf);
  for (int k = 2; k <= L.horizon; ++k) {
    const int s = L.state(k);
    p.lower(s + 2) = -vp.v_lim;
    p.upper(s + 2) = vp.v_lim;
    p.lower(s + 4) = -vp.delta_lim;
    p.upper(s + 4) = vp.delta_lim;
  }
  for (int k = 1; k <= L.horizon - 1; ++k) {
    const int u = L.input(k);
    p.lower(u) = -vp.v_dot_lim;
    p.upper(u) = vp.v_dot_lim;
    p.lower(u + 1) = -vp.delta_dot_lim;
    p.upper(u + 1) = vp.delta_dot_lim;
  }
  p.evaluate = [model](const Eigen::VectorXd& z, const NlpEvalRequest& req, NlpEvaluation& ev) {
    model->evaluate(z, req, ev);
  };
  return p;
}

Eigen::VectorXd cold_start(const Scenario& scenario, const VehicleState& x_current, const VehicleInput& u_prev,
                           Method method) {
  const VarLayout L = layout_for(scenario, method);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(L.num_vars());
  const auto states = predicted_rollout(scenario, x_current, u_prev);
  for (int k = 1; k <= L.horizon; ++k) {
    const auto a = states[static_cast<std::size_t>(k - 1)].as_array();
    for (int i = 0; i < kStateDim; ++i) z(L.state(k) + i) = a[i];
  }
  for (int o = 0; o < L.num_lines; ++o) {
    const Point2 target = obstacle_center(scenario.obstacles[static_cast<std::size_t>(o)]);
    for (int k = 1; k <= L.horizon; ++k) {
      const Point2 ego = footprint(states[static_cast<std::size_t>(k - 1)], scenario.vehicle).centroid();
      const SeparatingLine line = initial_separating_line(ego, target);
      z.segment<3>(L.line(o, k)) << line.a, line.b, line.c;
    }
  }
  return z;
}

Eigen::VectorXd shift_warm_start(const Eigen::VectorXd& prev, const VarLayout& L) {
  if (prev.size() != L.num_vars()) throw std::invalid_argument("warm start does not match the variable layout");
  Eigen::VectorXd z = prev;
  const int N = L.horizon;
  for (int k = 1; k < N; ++k) z.segment<kStateDim>(L.state(k)) = prev.segment<kStateDim>(L.state(k + 1));
  for (int k = 1; k < N - 1; ++k) z.segment<kInputDim>(L.input(k)) = prev.segment<kInputDim>(L.input(k + 1));
  for (int o = 0; o < L.num_lines; ++o) {
    for (int k = 1; k < N; ++k) z.segment<3>(L.line(o, k)) = prev.segment<3>(L.line(o, k + 1));
  }
  return z;
}

}  // namespace polympc
