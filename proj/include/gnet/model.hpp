#pragma once

// Core data model: networks of decision variables with factored probabilities
// (directed acyclic conditional structure) and factored multiplicative payoffs
// (per-player potential tables attached to nodes). Payoffs are "normal": every
// potential entry is strictly positive and equals 1 whenever the node takes its
// reference value, so the joint utility of the reference state is exactly 1.

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gnet {

using NodeId = int;
inline constexpr int kNature = -1;

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Full joint assignment: one value index per node, in node order.
using Assignment = std::vector<int>;

// Partial assignment (event): value index per node, or -1 where unconstrained.
using Event = std::vector<int>;

// One player's multiplicative payoff factor at a node. `entries(v, a)` is the
// factor contributed when the node takes value v and the neighbors take the
// joint assignment with mixed-radix index a (first neighbor most significant).
// Row `reference_value` of the owning node is identically 1.
struct PotentialTable {
  int player = 0;
  NodeId node = 0;
  std::vector<NodeId> neighbors;
  Eigen::ArrayXXd entries;  // |domain| x (product of neighbor domain sizes)
};

// Conditional probability table of a Nature node. `rows(a, v)` = probability of
// value v given the parent assignment with mixed-radix index a.
struct Cpt {
  NodeId node = 0;
  Eigen::ArrayXXd rows;  // (product of parent domain sizes) x |domain|
};

// Structurally forced conditional row of a decision node: under parent
// assignment `parent_assignment` the node takes `value` with probability one.
// Produced by extensive-form conversion for stages that a parent configuration
// makes unreachable; hand-authored nets normally have none.
struct ForcedRow {
  int parent_assignment = 0;
  int value = 0;
};

struct GNode {
  std::string name;
  int player = kNature;  // kNature or index into GNet::players
  std::vector<std::string> domain;
  std::vector<NodeId> prob_parents;
  int reference_value = 0;
  std::vector<ForcedRow> forced_rows;
  // Index of the padding value inserted by extensive-form conversion for
  // stages that some plays skip; nullopt for ordinary nodes.
  std::optional<int> inactive_value;
};

class ProfileLayout;  // profile.hpp

struct GNet {
  std::vector<std::string> players;  // agent names; Nature is implicit
  std::vector<GNode> nodes;
  std::vector<PotentialTable> potentials;
  std::vector<Cpt> cpts;  // exactly one per Nature node

  int node_index(const std::string& name) const;         // -1 if absent
  const Cpt* cpt_for(NodeId k) const;                     // nullptr if none
  const PotentialTable* potential_for(int player, NodeId k) const;

  // Lazily built coordinate layout; valid only after validate() passes.
  const ProfileLayout& layout() const;

 private:
  mutable std::shared_ptr<const ProfileLayout> layout_;
};

// Mixed-radix helpers shared by tables, CPTs and layouts. Index 0 corresponds
// to all-first-values; the first id in `ids` is the most significant digit.
int assignment_index(const GNet& net, const std::vector<NodeId>& ids,
                     const Assignment& x);
int assignment_count(const GNet& net, const std::vector<NodeId>& ids);
std::vector<int> assignment_values(const GNet& net,
                                   const std::vector<NodeId>& ids, int index);

// Structural + numeric validation. Returns a human-readable violation list;
// empty means the net is well-formed (acyclic probability arcs, complete
// strictly positive tables with unit reference rows, CPT rows summing to 1
// within 1e-12, coherent forced rows).
std::vector<std::string> validate(const GNet& net);

// Throws Error with the first violation if validate() is non-empty.
void require_valid(const GNet& net);

// Probability of the full assignment x under profile p (product rule).
double joint_probability(const GNet& net, const Eigen::VectorXd& p,
                         const Assignment& x);

// Player's payoff at x: product of that player's potential entries.
// Exactly 1 at the all-reference assignment. Throws on player == kNature.
double utility(const GNet& net, int player, const Assignment& x);

// (free potential entries across players, leaf payoffs of the equivalent
// extensive form = product of all domain sizes x number of players).
std::pair<long long, long long> parameter_count(const GNet& net);

struct InfoSet {
  NodeId node = 0;
  int parent_assignment = 0;             // mixed-radix index over prob_parents
  std::vector<int> parent_values;        // decoded, for display
};

// All information sets (one per node per parent assignment), node-major.
std::vector<InfoSet> information_sets(const GNet& net);

// Enumerate all full assignments, first node most significant.
long long state_count(const GNet& net);
Assignment state_at(const GNet& net, long long index);

std::string format_infoset(const GNet& net, const InfoSet& is);

}  // namespace gnet
