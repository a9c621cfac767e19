#pragma once

// The "first equilibrium": the endpoint of the convex-linear homotopy that
// deforms the trivially-solved system p = z (uniform profile) into the
// fixed-point system p = v(p). With t running from 0 to 1 and eps = 1 - t,
//
//   F_eps(p) = p - f_eps(p),   f_eps(p) = eps*z + (1-eps)*v(p),
//
// the path starts at (z, t=0) and is tracked by an Euler predictor (implicit
// function theorem) plus a Newton corrector with adaptive step control. The
// endpoint at t = endpoint_t is snapped to its face, polished at t = 1, and
// classified. Degenerate games (corrector failure at the minimum step) are
// retried under a slight random multiplicative payoff perturbation.

#include <cstdint>
#include <vector>

#include "gnet/equilibrium.hpp"
#include "gnet/expectations.hpp"
#include "gnet/model.hpp"
#include "gnet/profile.hpp"

namespace gnet {

struct TrackerConfig {
  double initial_step = 0.01;
  double min_step = 1e-8;
  double max_step = 0.1;
  double corrector_tol = 1e-10;
  int max_newton_iters = 20;
  double endpoint_t = 1.0 - 1e-8;
  double payoff_perturbation_scale = 1e-6;
  std::uint64_t rng_seed = 0;
};

struct HomotopyState {
  Profile p;
  double t = 0.0;
  double residual = 0.0;  // ||F_{1-t}(p)|| after correction (max norm)
  double step = 0.0;      // step size that produced this state
};

struct TrackedPath {
  std::vector<HomotopyState> states;  // accepted states, strictly increasing t
  int rejected_steps = 0;
  int newton_iterations = 0;
  int perturbation_attempts = 0;  // 0 = original payoffs
};

// eps*z + (1-eps)*v(p). Throws on non-interior p (the map needs D_j > 0).
Eigen::VectorXd f_epsilon(const GNet& net, const Profile& p, double eps);

// p - f_eps(p); zero exactly at fixed points of the relaxed map.
Eigen::VectorXd residual_F_eps(const GNet& net, const Profile& p, double eps);

// Analytic Jacobian of F_eps: I - (1-eps) * Dv(p).
Eigen::MatrixXd jacobian_F_eps(const GNet& net, const Profile& p, double eps);

struct FirstEquilibriumResult {
  Profile profile;
  EquilibriumClass cls;
  TrackedPath path;
};

FirstEquilibriumResult track_first_equilibrium(const GNet& net,
                                               const TrackerConfig& cfg = {});

struct ComponentRun {
  std::vector<NodeId> nodes;  // original node ids of the component
  FirstEquilibriumResult result;
};

struct DecomposedFirstEquilibrium {
  Profile profile;  // full-net profile assembled from the components
  EquilibriumClass cls;
  std::vector<ComponentRun> components;
};

// Tracks each strategically independent component separately; the assembled
// profile matches the joint tracking to tracking accuracy.
DecomposedFirstEquilibrium first_equilibrium_decomposed(
    const GNet& net, const TrackerConfig& cfg = {});

// Damped fixed-point iteration p <- p + damping*(f_eps(p) - p) until the
// relaxed residual drops below tol. Used to re-converge path states at frozen
// eps (monotonicity checks) and as an independent cross-check of the tracker.
Profile converge_relaxed_fixed_point(const GNet& net, const Profile& start,
                                     double eps, double tol = 1e-12,
                                     int max_iters = 200000,
                                     double damping = 0.5);

}  // namespace gnet
