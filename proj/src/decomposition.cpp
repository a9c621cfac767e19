#include "gnet/decomposition.hpp"

#include <algorithm>
#include <numeric>

namespace gnet {

namespace {

int find_root(std::vector<int>& parent, int a) {
  while (parent[a] != a) a = parent[a] = parent[parent[a]];
  return a;
}

void unite(std::vector<int>& parent, int a, int b) {
  parent[find_root(parent, a)] = find_root(parent, b);
}

}  // namespace

std::vector<Component> strategic_components(const GNet& net) {
  const int n = static_cast<int>(net.nodes.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (int k = 0; k < n; ++k)
    for (NodeId m : net.nodes[k].prob_parents) unite(parent, k, m);
  for (const auto& t : net.potentials)
    for (NodeId m : t.neighbors) unite(parent, t.node, m);

  std::vector<std::vector<NodeId>> groups;
  std::vector<int> group_of(n, -1);
  for (int k = 0; k < n; ++k) {
    int r = find_root(parent, k);
    if (group_of[r] < 0) {
      group_of[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[group_of[r]].push_back(k);  // ascending by construction
  }

  std::vector<Component> out;
  for (auto& g : groups) {
    Component c;
    c.nodes = g;
    c.net.players = net.players;
    std::vector<int> local(n, -1);
    for (size_t i = 0; i < g.size(); ++i) local[g[i]] = static_cast<int>(i);
    for (NodeId k : g) {
      GNode nd = net.nodes[k];
      for (NodeId& m : nd.prob_parents) m = local[m];
      c.net.nodes.push_back(std::move(nd));
    }
    for (const auto& t : net.potentials) {
      if (local[t.node] < 0) continue;
      PotentialTable nt = t;
      nt.node = local[t.node];
      for (NodeId& m : nt.neighbors) m = local[m];
      c.net.potentials.push_back(std::move(nt));
    }
    for (const auto& cp : net.cpts) {
      if (local[cp.node] < 0) continue;
      Cpt nc = cp;
      nc.node = local[cp.node];
      c.net.cpts.push_back(std::move(nc));
    }
    out.push_back(std::move(c));
  }
  return out;
}

void scatter_profile(const GNet& net, const Component& comp, const Profile& sub,
                     Profile& full) {
  const ProfileLayout& L = net.layout();
  const ProfileLayout& Ls = comp.net.layout();
  for (const auto& b : Ls.blocks()) {
    int bi = L.block_index(comp.nodes[b.node], b.parent_assignment);
    full.segment(L.block(bi).offset, b.size) = sub.segment(b.offset, b.size);
  }
}

Profile gather_profile(const GNet& net, const Component& comp,
                       const Profile& full) {
  const ProfileLayout& L = net.layout();
  const ProfileLayout& Ls = comp.net.layout();
  Profile sub(Ls.dim());
  for (const auto& b : Ls.blocks()) {
    int bi = L.block_index(comp.nodes[b.node], b.parent_assignment);
    sub.segment(b.offset, b.size) = full.segment(L.block(bi).offset, b.size);
  }
  return sub;
}

}  // namespace gnet
