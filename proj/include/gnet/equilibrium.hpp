#pragma once

// Equilibrium tests. Equilibrium is per information set (agent form): at every
// reachable decision block, the acting agent's conditional expected payoff
// cannot be raised by reweighting that block alone. With normal payoffs the
// block's p-weighted mean conditional payoff is identically 1, which yields
// the fixed-point characterization
//   (1) u_j <= 1 for every available value, and
//   (2) u_j == 1 wherever p_j > 0,
// with u_j = cond_num[j] / denom[j]. Blocks reached with probability ~0 give
// 0/0; they are flagged and excluded from the tests instead of being judged.

#include <string>
#include <vector>

#include "gnet/expectations.hpp"
#include "gnet/model.hpp"
#include "gnet/profile.hpp"

namespace gnet {

struct InfosetReport {
  int block = 0;  // index into layout().blocks()
  bool reachable = true;
  double max_cond_eu = 0.0;
  std::vector<char> support;  // per domain value, p_j > tol
};

struct NashVerdict {
  bool is_nash = false;
  double worst_violation = 0.0;  // max fixed-point slack over all blocks
  std::vector<InfosetReport> per_infoset;
  std::vector<int> unreachable_blocks;
  std::vector<std::string> violations;
};

// The fixed-point characterization above.
NashVerdict is_nash_prop3(const GNet& net, const Profile& p, double tol = 1e-6,
                          double unreachable_tol = 1e-9);

// The deviation inequality: at each reachable block the realized conditional
// payoff sum_v p_v u_v is at least the payoff u_v of every pure deviation.
// Pure deviations suffice because the block payoff is linear in the block.
NashVerdict is_nash_inequality(const GNet& net, const Profile& p,
                               double tol = 1e-6,
                               double unreachable_tol = 1e-9);

// Monotonicity at fixed points of the relaxed map eps*z + (1-eps)*v: within a
// block, strictly higher conditional payoff (margin 10*tol) must come with
// strictly higher probability. Throws Error unless p satisfies the relaxed
// fixed-point equations to within tol.
struct MonotonicityCheck {
  bool holds = true;
  std::vector<std::string> witnesses;  // violating pairs if any
};

MonotonicityCheck check_prop4_monotonicity(const GNet& net, const Profile& p,
                                           double eps, double tol = 1e-8);

enum class Provenance { HomotopyEndpoint, PolynomialRoot, UserSupplied };

enum class EquilibriumLabel {
  Nash,              // passes the Nash tests
  RobustCandidate,   // homotopy endpoint that passes the Nash tests
  FixedPointNonNash, // value-map fixed point with a profitable deviation
  NotEquilibrium,    // neither a fixed point nor Nash
};

struct EquilibriumClass {
  EquilibriumLabel label = EquilibriumLabel::NotEquilibrium;
  double f_residual = 0.0;   // ||p - v(p)|| (max norm)
  double prop3_slack = 0.0;  // NashVerdict::worst_violation
  NashVerdict verdict;
};

EquilibriumClass classify(const GNet& net, const Profile& p,
                          Provenance provenance, double tol = 1e-6,
                          double residual_tol = 1e-8,
                          double unreachable_tol = 1e-9);

const char* to_string(EquilibriumLabel label);

}  // namespace gnet
