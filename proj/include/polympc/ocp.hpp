#pragma once

#include <Eigen/Core>

#include "polympc/constraints.hpp"
#include "polympc/nlp.hpp"
#include "polympc/scenario.hpp"

namespace polympc {

/// (x - x_ref)' Q (x - x_ref) + (u - u_prev)' R (u - u_prev).
double stage_cost(const VehicleState& x, const VehicleInput& u, const VehicleInput& u_prev,
                  const VehicleState& x_ref, const OcpWeights& w);

/// (x_N - x_ref)' S_f (x_N - x_ref).
double terminal_cost(const VehicleState& x_n, const VehicleState& x_ref, const OcpWeights& w);

/// Optimal control problem over x(1..N), u(1..N-1) and, for Method::Svm, one
/// separating line per obstacle and step.
///
/// x(0) = x_current and u(0) = u_prev are fixed. The defect of step k is
/// x(k+1) - kbm_step(x(k), u(k)) for k = 0..N-1, so x(1) is pinned by the
/// input already being applied while the solve runs. Collision residuals are
/// imposed at k = 1..N, ordered by step, then obstacle, then as produced by
/// the constraint generators. Speed and steering bounds apply to x(2..N);
/// x(1) is fully determined by the fixed data.
NlpProblem assemble(const Scenario& scenario, const VehicleState& x_current, const VehicleInput& u_prev,
                    Method method);

VarLayout layout_for(const Scenario& scenario, Method method);

/// Rollout of [u_prev, 0, ..., 0] from x_current, zero inputs, and lines
/// through the centroid midpoint between each predicted footprint and obstacle.
Eigen::VectorXd cold_start(const Scenario& scenario, const VehicleState& x_current, const VehicleInput& u_prev,
                           Method method);

/// Moves every state, input and line one step earlier and repeats the last one.
/// Throws std::invalid_argument if `prev` does not match `layout`.
Eigen::VectorXd shift_warm_start(const Eigen::VectorXd& prev, const VarLayout& layout);

VehicleState state_at(const Eigen::VectorXd& z, const VarLayout& layout, int k);
VehicleInput input_at(const Eigen::VectorXd& z, const VarLayout& layout, int k);
SeparatingLine line_at(const Eigen::VectorXd& z, const VarLayout& layout, int obstacle, int k);

}  // namespace polympc
