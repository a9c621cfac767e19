#include "gnet/model.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "gnet/profile.hpp"

namespace gnet {

int GNet::node_index(const std::string& name) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].name == name) return static_cast<int>(i);
  return -1;
}

const Cpt* GNet::cpt_for(NodeId k) const {
  for (const auto& c : cpts)
    if (c.node == k) return &c;
  return nullptr;
}

const PotentialTable* GNet::potential_for(int player, NodeId k) const {
  for (const auto& t : potentials)
    if (t.player == player && t.node == k) return &t;
  return nullptr;
}

const ProfileLayout& GNet::layout() const {
  if (!layout_) layout_ = std::make_shared<const ProfileLayout>(*this);
  return *layout_;
}

int assignment_index(const GNet& net, const std::vector<NodeId>& ids,
                     const Assignment& x) {
  int idx = 0;
  for (NodeId m : ids) idx = idx * static_cast<int>(net.nodes[m].domain.size()) + x[m];
  return idx;
}

int assignment_count(const GNet& net, const std::vector<NodeId>& ids) {
  int n = 1;
  for (NodeId m : ids) n *= static_cast<int>(net.nodes[m].domain.size());
  return n;
}

std::vector<int> assignment_values(const GNet& net,
                                   const std::vector<NodeId>& ids, int index) {
  std::vector<int> vals(ids.size());
  for (int i = static_cast<int>(ids.size()) - 1; i >= 0; --i) {
    int d = static_cast<int>(net.nodes[ids[i]].domain.size());
    vals[i] = index % d;
    index /= d;
  }
  return vals;
}

long long state_count(const GNet& net) {
  long long n = 1;
  for (const auto& nd : net.nodes) n *= static_cast<long long>(nd.domain.size());
  return n;
}

Assignment state_at(const GNet& net, long long index) {
  Assignment x(net.nodes.size());
  for (int k = static_cast<int>(net.nodes.size()) - 1; k >= 0; --k) {
    long long d = static_cast<long long>(net.nodes[k].domain.size());
    x[k] = static_cast<int>(index % d);
    index /= d;
  }
  return x;
}

namespace {

bool acyclic(const GNet& net, std::vector<int>* topo_order) {
  int n = static_cast<int>(net.nodes.size());
  std::vector<int> indeg(n, 0);
  std::vector<std::vector<int>> children(n);
  for (int k = 0; k < n; ++k)
    for (NodeId m : net.nodes[k].prob_parents) {
      if (m < 0 || m >= n) return false;
      children[m].push_back(k);
      ++indeg[k];
    }
  std::vector<int> order;
  for (int k = 0; k < n; ++k)
    if (indeg[k] == 0) order.push_back(k);
  for (size_t i = 0; i < order.size(); ++i)
    for (int c : children[order[i]])
      if (--indeg[c] == 0) order.push_back(c);
  if (topo_order) *topo_order = order;
  return static_cast<int>(order.size()) == n;
}

}  // namespace

std::vector<std::string> validate(const GNet& net) {
  std::vector<std::string> out;
  auto fail = [&](const std::string& s) { out.push_back(s); };

  int n = static_cast<int>(net.nodes.size());
  std::set<std::string> names;
  for (int k = 0; k < n; ++k) {
    const GNode& nd = net.nodes[k];
    if (!names.insert(nd.name).second)
      fail("node " + nd.name + ": duplicate node name");
    if (nd.domain.empty()) fail("node " + nd.name + ": empty domain");
    if (nd.player != kNature &&
        (nd.player < 0 || nd.player >= static_cast<int>(net.players.size())))
      fail("node " + nd.name + ": unknown player index");
    if (nd.reference_value < 0 ||
        nd.reference_value >= static_cast<int>(nd.domain.size()))
      fail("node " + nd.name + ": reference value out of range");
    std::set<NodeId> seen;
    for (NodeId m : nd.prob_parents) {
      if (m < 0 || m >= n) {
        fail("node " + nd.name + ": parent index out of range");
        continue;
      }
      if (m == k) fail("node " + nd.name + ": is its own probability parent");
      if (!seen.insert(m).second)
        fail("node " + nd.name + ": duplicate probability parent " +
             net.nodes[m].name);
    }
    if (nd.inactive_value &&
        (*nd.inactive_value < 0 ||
         *nd.inactive_value >= static_cast<int>(nd.domain.size())))
      fail("node " + nd.name + ": inactive value out of range");
  }
  if (!out.empty()) return out;  // indices unsafe below otherwise

  if (!acyclic(net, nullptr))
    fail("acyclicity: probability arcs contain a directed cycle");

  // Potential tables: complete positive grids, unit reference rows, sane
  // neighbor lists, at most one table per (player, node).
  std::set<std::pair<int, int>> tkeys;
  for (const auto& t : net.potentials) {
    std::string where = "potential(player=" +
                        (t.player >= 0 && t.player < (int)net.players.size()
                             ? net.players[t.player]
                             : std::to_string(t.player)) +
                        ", node=" + net.nodes[t.node].name + ")";
    if (t.player < 0 || t.player >= static_cast<int>(net.players.size())) {
      fail(where + ": tables must belong to an agent, not Nature");
      continue;
    }
    if (!tkeys.insert({t.player, t.node}).second)
      fail(where + ": duplicate table for this player and node");
    std::set<NodeId> seen;
    for (NodeId m : t.neighbors) {
      if (m == t.node) fail(where + ": node listed as its own neighbor");
      if (!seen.insert(m).second) fail(where + ": duplicate neighbor");
    }
    int rows = static_cast<int>(net.nodes[t.node].domain.size());
    int cols = assignment_count(net, t.neighbors);
    if (t.entries.rows() != rows || t.entries.cols() != cols) {
      fail(where + ": entry grid is incomplete");
      continue;
    }
    for (int v = 0; v < rows; ++v)
      for (int a = 0; a < cols; ++a) {
        double w = t.entries(v, a);
        if (!(w > 0.0))
          fail(where + ": entry (" + net.nodes[t.node].domain[v] + "|col " +
               std::to_string(a) + ") is not strictly positive");
        if (v == net.nodes[t.node].reference_value && w != 1.0)
          fail(where + ": reference-value entry differs from 1");
      }
  }

  // CPTs: exactly one per Nature node, complete rows summing to 1.
  std::set<NodeId> cpt_nodes;
  for (const auto& c : net.cpts) {
    const GNode& nd = net.nodes[c.node];
    std::string where = "cpt(" + nd.name + ")";
    if (nd.player != kNature) fail(where + ": node is not a Nature node");
    if (!cpt_nodes.insert(c.node).second) fail(where + ": duplicate CPT");
    int rows = assignment_count(net, nd.prob_parents);
    int cols = static_cast<int>(nd.domain.size());
    if (c.rows.rows() != rows || c.rows.cols() != cols) {
      fail(where + ": row grid is incomplete");
      continue;
    }
    for (int a = 0; a < rows; ++a) {
      double s = 0;
      for (int v = 0; v < cols; ++v) {
        double q = c.rows(a, v);
        if (q < 0.0 || q > 1.0)
          fail(where + ": probability out of [0,1] in row " + std::to_string(a));
        s += q;
      }
      if (std::abs(s - 1.0) > 1e-12)
        fail(where + ": row " + std::to_string(a) + " sums to " +
             std::to_string(s) + ", not 1");
    }
  }
  for (int k = 0; k < n; ++k) {
    if (net.nodes[k].player == kNature && !cpt_nodes.count(k))
      fail("node " + net.nodes[k].name + ": Nature node without a CPT");
    if (net.nodes[k].player != kNature && cpt_nodes.count(k))
      fail("node " + net.nodes[k].name + ": decision node carries a CPT");
  }

  // Forced rows: decision nodes only, coherent indices, no duplicates.
  for (int k = 0; k < n; ++k) {
    const GNode& nd = net.nodes[k];
    std::set<int> rows;
    for (const auto& fr : nd.forced_rows) {
      std::string where = "node " + nd.name + " forced row " +
                          std::to_string(fr.parent_assignment);
      if (nd.player == kNature) fail(where + ": Nature rows come from the CPT");
      if (fr.parent_assignment < 0 ||
          fr.parent_assignment >= assignment_count(net, nd.prob_parents))
        fail(where + ": parent assignment out of range");
      if (fr.value < 0 || fr.value >= static_cast<int>(nd.domain.size()))
        fail(where + ": value out of range");
      if (!rows.insert(fr.parent_assignment).second)
        fail(where + ": duplicate forced row");
    }
  }
  if (!out.empty()) return out;

  // Every non-forced decision block must be reachable under some interior
  // profile, i.e. some full state must hit its parent assignment using only
  // structurally possible values (positive CPT entries, forced values,
  // non-inactive free values). Otherwise conditional payoffs are 0/0 there
  // and the caller should declare a forced row instead.
  auto structurally_possible = [&](const Assignment& x) {
    for (int m = 0; m < n; ++m) {
      const GNode& nd = net.nodes[m];
      int a = assignment_index(net, nd.prob_parents, x);
      if (nd.player == kNature) {
        if (!(net.cpt_for(m)->rows(a, x[m]) > 0.0)) return false;
        continue;
      }
      bool forced = false;
      for (const auto& fr : nd.forced_rows)
        if (fr.parent_assignment == a) {
          forced = true;
          if (x[m] != fr.value) return false;
        }
      if (!forced && nd.inactive_value && x[m] == *nd.inactive_value)
        return false;
    }
    return true;
  };
  long long S = state_count(net);
  for (int k = 0; k < n; ++k) {
    const GNode& nd = net.nodes[k];
    if (nd.player == kNature) continue;
    int m = assignment_count(net, nd.prob_parents);
    std::vector<char> reachable(m, 0);
    for (const auto& fr : nd.forced_rows) reachable[fr.parent_assignment] = 1;
    for (long long s = 0; s < S; ++s) {
      Assignment x = state_at(net, s);
      int a = assignment_index(net, nd.prob_parents, x);
      if (!reachable[a] && structurally_possible(x)) reachable[a] = 1;
    }
    for (int a = 0; a < m; ++a)
      if (!reachable[a])
        fail("node " + nd.name + ": parent assignment " + std::to_string(a) +
             " is unreachable under every profile; declare a forced row");
  }
  return out;
}

void require_valid(const GNet& net) {
  auto v = validate(net);
  if (!v.empty()) throw Error("invalid net: " + v.front());
}

double joint_probability(const GNet& net, const Eigen::VectorXd& p,
                         const Assignment& x) {
  const ProfileLayout& L = net.layout();
  if (p.size() != L.dim()) throw Error("joint_probability: profile has wrong dimension");
  if (x.size() != net.nodes.size()) throw Error("joint_probability: incomplete assignment");
  double prob = 1.0;
  for (int k = 0; k < static_cast<int>(net.nodes.size()) && prob != 0.0; ++k)
    prob *= p[L.coord_at(net, k, x)];
  return prob;
}

double utility(const GNet& net, int player, const Assignment& x) {
  if (player == kNature) throw Error("utility: Nature has no payoff");
  if (player < 0 || player >= static_cast<int>(net.players.size()))
    throw Error("utility: unknown player");
  double u = 1.0;
  for (const auto& t : net.potentials) {
    if (t.player != player) continue;
    u *= t.entries(x[t.node], assignment_index(net, t.neighbors, x));
  }
  return u;
}

std::pair<long long, long long> parameter_count(const GNet& net) {
  long long pot = 0;
  for (const auto& t : net.potentials) {
    long long rows = static_cast<long long>(net.nodes[t.node].domain.size());
    pot += (rows - 1) * t.entries.cols();  // reference row is pinned to 1
  }
  long long leaves = 1;
  for (const auto& nd : net.nodes) leaves *= static_cast<long long>(nd.domain.size());
  long long ef = net.players.empty() ? 0 : leaves * static_cast<long long>(net.players.size());
  return {pot, ef};
}

std::vector<InfoSet> information_sets(const GNet& net) {
  std::vector<InfoSet> out;
  for (int k = 0; k < static_cast<int>(net.nodes.size()); ++k) {
    int m = assignment_count(net, net.nodes[k].prob_parents);
    for (int a = 0; a < m; ++a)
      out.push_back({k, a, assignment_values(net, net.nodes[k].prob_parents, a)});
  }
  return out;
}

std::string format_infoset(const GNet& net, const InfoSet& is) {
  std::ostringstream os;
  os << net.nodes[is.node].name << " |";
  const auto& parents = net.nodes[is.node].prob_parents;
  for (size_t i = 0; i < parents.size(); ++i)
    os << ' ' << net.nodes[parents[i]].name << '='
       << net.nodes[parents[i]].domain[is.parent_values[i]];
  return os.str();
}

}  // namespace gnet
