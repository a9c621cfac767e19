#pragma once

// Finite extensive-form game trees and their conversion to networks.
//
// Each decision/chance point carries a stage label; information sets are
// written "stage@observation". A stage becomes one network variable whose
// probability parents are earlier stages the actor observes: parent values
// pick out the information set (or the chance node's outcome row). Stages
// that some plays skip get a distinguished trailing "inactive" value, forced
// deterministically wherever the parent configuration says the stage is not
// reached. Leaf payoffs are factored multiplicatively along the stage order
// by telescoping ratios of reference-completed payoffs, then each factor's
// neighbor list is pruned by a ratio test and factors identically 1 are
// dropped.
//
// The agent form (one pseudo-player per free decision block, payoff = the
// owner's expected utility under pure block choices, averaged over Nature)
// backs the support-enumeration oracle used to cross-check the solvers.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gnet/model.hpp"
#include "gnet/profile.hpp"

namespace gnet {

struct EfTree {
  enum class Kind { Chance, Decision, Leaf };
  struct Node {
    Kind kind = Kind::Leaf;
    std::string name;
    int parent = -1;        // -1 for the root
    int parent_action = -1; // index into the parent's actions
    int player = -1;        // decision nodes
    std::string stage;      // decision/chance stage label
    std::string infoset;    // full "stage@obs" label (decision), or stage
    std::vector<std::string> actions;  // decision actions / chance outcomes
    std::vector<double> probs;         // chance outcome probabilities
    Eigen::VectorXd payoffs;           // leaf: per player, strictly positive
  };
  std::vector<std::string> players;
  std::vector<Node> nodes;  // parents precede children; node 0 is the root
};

// Structural checks: rooted-tree shape, chance rows summing to 1, positive
// leaf payoffs, consistent action sets per information set and per stage,
// and perfect recall (nodes sharing an information set have identical
// own-action histories).
std::vector<std::string> validate_ef(const EfTree& tree);
void require_valid_ef(const EfTree& tree);

// The constructive conversion described above. Throws Error with an
// "unsupported structure" message when no parent set can simultaneously
// respect the information sets and determine stage reachability.
GNet ef_to_gframe(const EfTree& tree);

struct AgentForm {
  struct PseudoPlayer {
    int block = 0;   // layout block index in the source net
    int offset = 0;  // first profile coordinate of that block
    int owner = 0;   // real player whose payoff this agent maximizes
    std::vector<int> actions;  // available value indices
  };
  std::vector<PseudoPlayer> players;
  // payoff[i]: expected utility of real player i for every joint pure choice,
  // flattened mixed-radix (first pseudo-player most significant).
  std::vector<Eigen::ArrayXd> payoff;
  Profile base;  // source-net profile with frozen rows filled in
  long long joint_count = 1;
};

// Expectation over Nature and forced rows for every joint pure assignment.
// Refuses tensors beyond max_entries (the oracle is desk-scale only).
AgentForm to_agent_form(const GNet& net, long long max_entries = 1000000);

std::string dump_agent_form(const AgentForm& agent);

// One equilibrium or a one-dimensional family of them, as source-net
// profiles. Families arise from indifference systems with a one-dimensional
// null space; their endpoints are exact interval bounds.
struct OracleSolution {
  Profile lo, hi;
  bool segment = false;
  bool certified = true;  // affine indifference system verified
};

struct OracleReport {
  std::vector<OracleSolution> solutions;
  bool complete = true;       // false if any support needed the Newton fallback
  int unresolved_supports = 0;  // solution sets of dimension >= 2, skipped
};

// Enumerates support patterns, solves the indifference systems (exactly when
// they are affine, which holds whenever every play crosses at most two free
// blocks), checks the deviation inequalities, and dedupes points into
// segments that contain them.
OracleReport oracle_support_enumeration(const AgentForm& agent,
                                        double tol = 1e-9,
                                        long long max_profiles = 100000);

}  // namespace gnet
