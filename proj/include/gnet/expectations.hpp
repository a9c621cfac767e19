#pragma once

// Expected payoffs and the per-coordinate value decomposition driving every
// solver. For a behavior profile p and a decision coordinate j = (node k,
// parent assignment a, value v) of the agent owning k:
//
//   numer[j]    = sum over { x : parents of k take a, x_k = v } of u(x) p(x)
//   denom[j]    = sum over { x : parents of k take a }          of u(x) p(x)
//   cond_num[j] = numer[j] with the factor p_j divided out of every state
//                 term (exact as a polynomial, so well defined at p_j = 0)
//
// numer[j] == p_j * cond_num[j] identically, denom is block-constant, and
// within each block sum_v numer == denom, so the p-weighted mean of the
// conditional payoffs cond_num/denom over a reachable block is exactly 1.

#include <vector>

#include <Eigen/Dense>

#include "gnet/model.hpp"
#include "gnet/polynomial.hpp"
#include "gnet/profile.hpp"

namespace gnet {

struct ValueDecomposition {
  Eigen::VectorXd numer;     // N_j; zero on Nature coordinates
  Eigen::VectorXd denom;     // D_j; zero on Nature coordinates
  Eigen::VectorXd cond_num;  // N_j / p_j taken exactly
};

ValueDecomposition decompose_values(const GNet& net, const Profile& p);

// sum_x u(x) p(x) for one agent.
double expected_utility(const GNet& net, const Profile& p, int player);

// Conditional expected payoff cond_num/denom per coordinate; NaN where the
// information set has probability zero (and on Nature coordinates).
Eigen::VectorXd conditional_utilities(const GNet& net, const Profile& p);

// The value map v whose simplex fixed points are exactly the equilibria:
//   v_j = numer_j / denom_j        on available decision coordinates,
//   v_j = the frozen row entry     on frozen coordinates,
//   v_j = 0                        on structurally-zero coordinates.
// Maps valid profiles to valid profiles (each free block still sums to 1).
Eigen::VectorXd value_map(const GNet& net, const Profile& p);

struct ValueJacobian {
  Eigen::VectorXd value;
  Eigen::MatrixXd jac;  // exact analytic derivative; zero rows on pinned coords
};

ValueJacobian value_map_with_jacobian(const GNet& net, const Profile& p);

// Symbolic counterpart over the full coordinate vector, one bundle per free
// decision block. numer[v] sums the states with x_node = v (one polynomial per
// domain value, including a structurally-zero one if present); frozen
// coordinates appear as variables and are meant to be folded to constants by
// the caller. sum_v numer[v] == denom holds coefficient-wise.
struct BlockPolys {
  int block = 0;  // index into layout().blocks()
  std::vector<Poly> numer;
  Poly denom;
};

std::vector<BlockPolys> value_polynomials(const GNet& net);

}  // namespace gnet
