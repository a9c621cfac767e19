#include "gnet/extensive_form.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace gnet {

namespace {

constexpr double kChanceRowTol = 1e-12;
constexpr double kRatioPruneTol = 1e-9;   // neighbor-independence ratio test
constexpr double kUnitTableTol = 1e-12;   // drop factors identically one

std::string node_label(const EfTree& tree, int n) {
  const auto& nd = tree.nodes[static_cast<size_t>(n)];
  if (!nd.name.empty()) return nd.name;
  return "#" + std::to_string(n);
}

bool same_actions(const std::vector<std::string>& a,
                  const std::vector<std::string>& b) {
  return a == b;
}

}  // namespace

std::vector<std::string> validate_ef(const EfTree& tree) {
  std::vector<std::string> out;
  auto fail = [&](const std::string& m) { out.push_back(m); };

  if (tree.players.empty()) fail("no players declared");
  if (tree.nodes.empty()) {
    fail("empty tree");
    return out;
  }
  const int n_nodes = static_cast<int>(tree.nodes.size());
  const int n_players = static_cast<int>(tree.players.size());

  if (tree.nodes[0].parent != -1) fail("node 0 must be the root (parent -1)");

  std::vector<std::vector<int>> children(tree.nodes.size());
  for (int n = 0; n < n_nodes; ++n) {
    const auto& nd = tree.nodes[static_cast<size_t>(n)];
    if (n > 0) {
      if (nd.parent < 0 || nd.parent >= n) {
        fail("node " + node_label(tree, n) +
             ": parent must be an earlier node");
        continue;
      }
      const auto& par = tree.nodes[static_cast<size_t>(nd.parent)];
      if (par.kind == EfTree::Kind::Leaf) {
        fail("node " + node_label(tree, n) + ": parent is a leaf");
        continue;
      }
      if (nd.parent_action < 0 ||
          nd.parent_action >= static_cast<int>(par.actions.size())) {
        fail("node " + node_label(tree, n) + ": parent action out of range");
        continue;
      }
      children[static_cast<size_t>(nd.parent)].push_back(n);
    }
    switch (nd.kind) {
      case EfTree::Kind::Chance: {
        if (nd.actions.empty())
          fail("chance node " + node_label(tree, n) + ": no outcomes");
        if (nd.stage.empty())
          fail("chance node " + node_label(tree, n) + ": missing stage label");
        if (nd.probs.size() != nd.actions.size()) {
          fail("chance node " + node_label(tree, n) +
               ": outcome/probability count mismatch");
          break;
        }
        double sum = 0.0;
        for (double q : nd.probs) {
          if (!(q > 0.0))
            fail("chance node " + node_label(tree, n) +
                 ": outcome probabilities must be strictly positive");
          sum += q;
        }
        if (std::abs(sum - 1.0) > kChanceRowTol)
          fail("chance node " + node_label(tree, n) +
               ": outcome probabilities must sum to 1");
        break;
      }
      case EfTree::Kind::Decision: {
        if (nd.player < 0 || nd.player >= n_players)
          fail("decision node " + node_label(tree, n) + ": bad player");
        if (nd.actions.empty())
          fail("decision node " + node_label(tree, n) + ": no actions");
        if (nd.stage.empty())
          fail("decision node " + node_label(tree, n) +
               ": missing stage label");
        if (nd.infoset.empty())
          fail("decision node " + node_label(tree, n) +
               ": missing information-set label");
        else if (nd.infoset != nd.stage &&
                 nd.infoset.rfind(nd.stage + "@", 0) != 0)
          fail("decision node " + node_label(tree, n) +
               ": information-set label must be <stage> or <stage>@<obs>");
        break;
      }
      case EfTree::Kind::Leaf: {
        if (nd.payoffs.size() != n_players) {
          fail("leaf " + node_label(tree, n) + ": payoff count mismatch");
          break;
        }
        for (int i = 0; i < n_players; ++i)
          if (!(nd.payoffs[i] > 0.0))
            fail("leaf " + node_label(tree, n) +
                 ": payoffs must be strictly positive");
        break;
      }
    }
    for (const auto& an : nd.actions)
      if (an.empty()) fail("node " + node_label(tree, n) + ": empty action name");
  }
  if (!out.empty()) return out;

  // Every action of every internal node must lead to exactly one child.
  for (int n = 0; n < n_nodes; ++n) {
    const auto& nd = tree.nodes[static_cast<size_t>(n)];
    if (nd.kind == EfTree::Kind::Leaf) continue;
    std::vector<int> hit(nd.actions.size(), 0);
    for (int c : children[static_cast<size_t>(n)])
      hit[static_cast<size_t>(
          tree.nodes[static_cast<size_t>(c)].parent_action)]++;
    for (size_t a = 0; a < hit.size(); ++a) {
      if (hit[a] == 0)
        fail("node " + node_label(tree, n) + ": action '" + nd.actions[a] +
             "' has no child");
      else if (hit[a] > 1)
        fail("node " + node_label(tree, n) + ": action '" + nd.actions[a] +
             "' has several children");
    }
  }
  for (int n = 1; n < n_nodes; ++n)
    if (tree.nodes[static_cast<size_t>(n)].parent == -1)
      fail("node " + node_label(tree, n) + ": second root");

  // Stage consistency: one kind/player/action list per stage label, and a
  // stage may appear at most once along any play.
  std::map<std::string, int> stage_rep;
  for (int n = 0; n < n_nodes; ++n) {
    const auto& nd = tree.nodes[static_cast<size_t>(n)];
    if (nd.kind == EfTree::Kind::Leaf) continue;
    auto [it, fresh] = stage_rep.emplace(nd.stage, n);
    if (!fresh) {
      const auto& rep = tree.nodes[static_cast<size_t>(it->second)];
      if (rep.kind != nd.kind)
        fail("stage '" + nd.stage + "': mixes chance and decision nodes");
      else if (nd.kind == EfTree::Kind::Decision && rep.player != nd.player)
        fail("stage '" + nd.stage + "': used by several players");
      if (!same_actions(rep.actions, nd.actions))
        fail("stage '" + nd.stage + "': action lists differ between nodes");
    }
    for (int m = nd.parent; m != -1;
         m = tree.nodes[static_cast<size_t>(m)].parent) {
      const auto& anc = tree.nodes[static_cast<size_t>(m)];
      if (anc.kind != EfTree::Kind::Leaf && anc.stage == nd.stage)
        fail("stage '" + nd.stage + "': repeats along one play (node " +
             node_label(tree, n) + "); unsupported structure");
    }
  }

  // Information sets: same player, same actions, and perfect recall (equal
  // own-action histories).
  std::map<std::string, std::vector<int>> infosets;
  for (int n = 0; n < n_nodes; ++n) {
    const auto& nd = tree.nodes[static_cast<size_t>(n)];
    if (nd.kind == EfTree::Kind::Decision)
      infosets[nd.infoset].push_back(n);
  }
  auto own_history = [&](int n) {
    const auto& nd = tree.nodes[static_cast<size_t>(n)];
    std::vector<std::pair<std::string, int>> h;
    int cur = n;
    while (cur != -1) {
      int par = tree.nodes[static_cast<size_t>(cur)].parent;
      if (par != -1) {
        const auto& pn = tree.nodes[static_cast<size_t>(par)];
        if (pn.kind == EfTree::Kind::Decision && pn.player == nd.player)
          h.emplace_back(pn.infoset,
                         tree.nodes[static_cast<size_t>(cur)].parent_action);
      }
      cur = par;
    }
    std::reverse(h.begin(), h.end());
    return h;
  };
  for (const auto& [label, members] : infosets) {
    const auto& rep = tree.nodes[static_cast<size_t>(members.front())];
    for (int n : members) {
      const auto& nd = tree.nodes[static_cast<size_t>(n)];
      if (nd.player != rep.player)
        fail("information set '" + label + "': used by several players");
      if (nd.stage != rep.stage)
        fail("information set '" + label + "': spans several stages");
      if (!same_actions(nd.actions, rep.actions))
        fail("information set '" + label + "': action lists differ");
    }
    auto h0 = own_history(members.front());
    for (size_t i = 1; i < members.size(); ++i)
      if (own_history(members[i]) != h0)
        fail("information set '" + label +
             "': perfect recall violated (own-action histories differ); "
             "unsupported structure");
  }
  return out;
}

void require_valid_ef(const EfTree& tree) {
  auto v = validate_ef(tree);
  if (!v.empty()) throw Error("invalid game tree: " + v.front());
}

namespace {

constexpr int kInactiveSig = -1;  // signature marker: stage never played

struct StageInfo {
  std::string name;
  EfTree::Kind kind = EfTree::Kind::Decision;
  int player = kNature;
  std::vector<std::string> actions;
  std::vector<int> nodes;                   // EF nodes, increasing
  std::vector<std::vector<int>> instances;  // info sets / chance singletons
  std::vector<std::string> instance_labels;
  int first_depth = 0;
  bool padded = false;  // some play skips the stage
};

struct Conversion {
  const EfTree& tree;
  std::vector<StageInfo> stages;           // in network-node order
  std::vector<int> stage_of_node;          // EF node -> stage, -1 for leaves
  std::vector<std::vector<int>> sigma;     // EF node -> per-stage value before it
  std::vector<std::vector<char>> below;    // EF node -> stage occurs in subtree
  std::vector<std::vector<int>> child_at;  // EF node x action -> child
  std::vector<int> leaves;
  std::vector<std::vector<int>> leaf_vals;  // leaf -> per-stage final value
};

Conversion analyze(const EfTree& tree) {
  Conversion cv{tree, {}, {}, {}, {}, {}, {}, {}};
  const int n_nodes = static_cast<int>(tree.nodes.size());

  std::vector<int> depth(tree.nodes.size(), 0);
  for (int n = 1; n < n_nodes; ++n)
    depth[static_cast<size_t>(n)] =
        depth[static_cast<size_t>(tree.nodes[static_cast<size_t>(n)].parent)] +
        1;

  // Collect stages in file order first, then sort by first appearance.
  std::map<std::string, int> index_of;
  std::vector<StageInfo> raw;
  cv.stage_of_node.assign(tree.nodes.size(), -1);
  for (int n = 0; n < n_nodes; ++n) {
    const auto& nd = tree.nodes[static_cast<size_t>(n)];
    if (nd.kind == EfTree::Kind::Leaf) continue;
    auto [it, fresh] = index_of.emplace(nd.stage, static_cast<int>(raw.size()));
    if (fresh) {
      StageInfo s;
      s.name = nd.stage;
      s.kind = nd.kind;
      s.player = nd.kind == EfTree::Kind::Chance ? kNature : nd.player;
      s.actions = nd.actions;
      s.first_depth = depth[static_cast<size_t>(n)];
      raw.push_back(std::move(s));
    }
    auto& s = raw[static_cast<size_t>(it->second)];
    s.nodes.push_back(n);
    s.first_depth = std::min(s.first_depth, depth[static_cast<size_t>(n)]);
  }
  std::vector<int> order(raw.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& sa = raw[static_cast<size_t>(a)];
    const auto& sb = raw[static_cast<size_t>(b)];
    if (sa.first_depth != sb.first_depth)
      return sa.first_depth < sb.first_depth;
    return sa.nodes.front() < sb.nodes.front();
  });
  for (int idx : order) cv.stages.push_back(std::move(raw[static_cast<size_t>(idx)]));
  for (size_t s = 0; s < cv.stages.size(); ++s)
    for (int n : cv.stages[s].nodes)
      cv.stage_of_node[static_cast<size_t>(n)] = static_cast<int>(s);

  // Instances: information sets for decision stages (in order of first
  // member), chance nodes individually.
  for (auto& s : cv.stages) {
    if (s.kind == EfTree::Kind::Chance) {
      for (int n : s.nodes) {
        s.instances.push_back({n});
        s.instance_labels.push_back(node_label(tree, n));
      }
    } else {
      std::map<std::string, int> pos;
      for (int n : s.nodes) {
        const auto& label = tree.nodes[static_cast<size_t>(n)].infoset;
        auto [it, fresh] =
            pos.emplace(label, static_cast<int>(s.instances.size()));
        if (fresh) {
          s.instances.push_back({});
          s.instance_labels.push_back(label);
        }
        s.instances[static_cast<size_t>(it->second)].push_back(n);
      }
    }
  }

  const int n_stages = static_cast<int>(cv.stages.size());
  cv.sigma.assign(tree.nodes.size(), {});
  cv.sigma[0].assign(static_cast<size_t>(n_stages), kInactiveSig);
  cv.child_at.assign(tree.nodes.size(), {});
  for (int n = 0; n < n_nodes; ++n) {
    const auto& nd = tree.nodes[static_cast<size_t>(n)];
    if (nd.kind != EfTree::Kind::Leaf)
      cv.child_at[static_cast<size_t>(n)].assign(nd.actions.size(), -1);
  }
  for (int n = 1; n < n_nodes; ++n) {
    const auto& nd = tree.nodes[static_cast<size_t>(n)];
    cv.sigma[static_cast<size_t>(n)] = cv.sigma[static_cast<size_t>(nd.parent)];
    int ps = cv.stage_of_node[static_cast<size_t>(nd.parent)];
    cv.sigma[static_cast<size_t>(n)][static_cast<size_t>(ps)] =
        nd.parent_action;
    cv.child_at[static_cast<size_t>(nd.parent)]
               [static_cast<size_t>(nd.parent_action)] = n;
  }

  cv.below.assign(tree.nodes.size(),
                  std::vector<char>(static_cast<size_t>(n_stages), 0));
  for (int n = n_nodes - 1; n >= 0; --n) {
    int s = cv.stage_of_node[static_cast<size_t>(n)];
    if (s >= 0) cv.below[static_cast<size_t>(n)][static_cast<size_t>(s)] = 1;
    if (n > 0) {
      int par = tree.nodes[static_cast<size_t>(n)].parent;
      for (int t = 0; t < n_stages; ++t)
        cv.below[static_cast<size_t>(par)][static_cast<size_t>(t)] |=
            cv.below[static_cast<size_t>(n)][static_cast<size_t>(t)];
    }
  }

  for (int n = 0; n < n_nodes; ++n) {
    if (tree.nodes[static_cast<size_t>(n)].kind != EfTree::Kind::Leaf) continue;
    cv.leaves.push_back(n);
    cv.leaf_vals.push_back(cv.sigma[static_cast<size_t>(n)]);
  }
  for (int t = 0; t < n_stages; ++t)
    for (const auto& lv : cv.leaf_vals)
      if (lv[static_cast<size_t>(t)] == kInactiveSig)
        cv.stages[static_cast<size_t>(t)].padded = true;
  return cv;
}

// Effective value of earlier stage t from the viewpoint of EF node n:
// the action already taken, kInactiveSig when t can no longer occur, and
// nullopt when t would only be decided later (t is then unusable as a
// parent of n's stage).
std::optional<int> effective_value(const Conversion& cv, int n, int t) {
  int v = cv.sigma[static_cast<size_t>(n)][static_cast<size_t>(t)];
  if (v >= 0) return v;
  if (cv.below[static_cast<size_t>(n)][static_cast<size_t>(t)])
    return std::nullopt;
  return kInactiveSig;
}

// Parent signatures for one stage: per instance and per skipping play,
// over the candidate stages listed in cand.
struct Signatures {
  std::vector<int> cand;  // admissible earlier stages
  // sig[i] aligned with cand; instances first, then skip plays.
  std::vector<std::vector<int>> inst;
  std::vector<std::vector<int>> skip;
};

Signatures collect_signatures(const Conversion& cv, int s) {
  const auto& st = cv.stages[static_cast<size_t>(s)];
  Signatures sg;
  for (int t = 0; t < s; ++t) {
    bool ok = true;
    std::vector<int> vals;
    for (const auto& inst : st.instances) {
      std::optional<int> common;
      for (int n : inst) {
        auto ev = effective_value(cv, n, t);
        if (!ev) {
          ok = false;
          break;
        }
        if (!common)
          common = *ev;
        else if (*common != *ev)
          ok = false;
        if (!ok) break;
      }
      if (!ok) break;
      vals.push_back(*common);
    }
    if (!ok) continue;
    sg.cand.push_back(t);
    for (size_t i = 0; i < vals.size(); ++i) {
      if (sg.inst.size() <= i) sg.inst.emplace_back();
      sg.inst[i].push_back(vals[i]);
    }
  }
  if (sg.inst.empty()) sg.inst.resize(st.instances.size());
  for (size_t l = 0; l < cv.leaves.size(); ++l) {
    if (cv.leaf_vals[l][static_cast<size_t>(s)] != kInactiveSig) continue;
    std::vector<int> row;
    for (int t : sg.cand)
      row.push_back(cv.leaf_vals[l][static_cast<size_t>(t)]);
    sg.skip.push_back(std::move(row));
  }
  return sg;
}

// Number of indistinguishable pairs (instance/instance and instance/skip)
// when only the candidate positions in `chosen` are observed.
int conflict_count(const Signatures& sg, const std::vector<char>& chosen) {
  auto same = [&](const std::vector<int>& a, const std::vector<int>& b) {
    for (size_t j = 0; j < chosen.size(); ++j)
      if (chosen[j] && a[j] != b[j]) return false;
    return true;
  };
  int c = 0;
  for (size_t i = 0; i < sg.inst.size(); ++i) {
    for (size_t j = i + 1; j < sg.inst.size(); ++j)
      if (same(sg.inst[i], sg.inst[j])) ++c;
    for (const auto& sk : sg.skip)
      if (same(sg.inst[i], sk)) ++c;
  }
  return c;
}

// Chooses probability parents for stage s: a small admissible set of earlier
// stages whose joint value identifies the information set and decides
// whether the stage is reached at all.
std::vector<int> choose_parents(const Conversion& cv, int s,
                                const Signatures& sg,
                                std::vector<std::vector<int>>* inst_sig) {
  std::vector<char> chosen(sg.cand.size(), 0);
  int cur = conflict_count(sg, chosen);
  while (cur > 0) {
    int best = -1, best_count = cur;
    for (size_t j = 0; j < sg.cand.size(); ++j) {
      if (chosen[j]) continue;
      chosen[j] = 1;
      int c = conflict_count(sg, chosen);
      chosen[j] = 0;
      if (c < best_count) {
        best_count = c;
        best = static_cast<int>(j);
      }
    }
    if (best < 0)
      throw Error("stage '" + cv.stages[static_cast<size_t>(s)].name +
                  "': no observed stages distinguish its information sets "
                  "from one another or from plays that skip it; "
                  "unsupported structure");
    chosen[static_cast<size_t>(best)] = 1;
    cur = best_count;
  }
  for (size_t j = 0; j < chosen.size(); ++j) {
    if (!chosen[j]) continue;
    chosen[j] = 0;
    if (conflict_count(sg, chosen) > 0) chosen[j] = 1;
  }
  std::vector<int> parents;
  for (size_t j = 0; j < chosen.size(); ++j)
    if (chosen[j]) parents.push_back(sg.cand[j]);
  inst_sig->assign(sg.inst.size(), {});
  for (size_t i = 0; i < sg.inst.size(); ++i)
    for (size_t j = 0; j < chosen.size(); ++j)
      if (chosen[j]) (*inst_sig)[i].push_back(sg.inst[i][j]);
  return parents;
}

std::string inactive_name(const std::vector<std::string>& actions) {
  std::string name = "inactive";
  while (std::find(actions.begin(), actions.end(), name) != actions.end())
    name += "_";
  return name;
}

}  // namespace

GNet ef_to_gframe(const EfTree& tree) {
  require_valid_ef(tree);
  Conversion cv = analyze(tree);
  const int n_stages = static_cast<int>(cv.stages.size());
  const int n_players = static_cast<int>(tree.players.size());

  GNet net;
  net.players = tree.players;

  // Nodes: one per stage, actions plus a trailing inactive value if needed.
  std::vector<std::vector<int>> parents(static_cast<size_t>(n_stages));
  std::vector<std::vector<std::vector<int>>> inst_sigs(
      static_cast<size_t>(n_stages));
  for (int s = 0; s < n_stages; ++s) {
    const auto& st = cv.stages[static_cast<size_t>(s)];
    Signatures sg = collect_signatures(cv, s);
    parents[static_cast<size_t>(s)] =
        choose_parents(cv, s, sg, &inst_sigs[static_cast<size_t>(s)]);

    GNode node;
    node.name = st.name;
    node.player = st.player;
    node.domain = st.actions;
    if (st.padded) {
      node.inactive_value = static_cast<int>(node.domain.size());
      node.domain.push_back(inactive_name(st.actions));
    }
    node.reference_value = 0;
    for (int t : parents[static_cast<size_t>(s)])
      node.prob_parents.push_back(t);
    net.nodes.push_back(std::move(node));
  }

  // Per stage: map every parent assignment to its information set (behavior
  // row / chance row) or force the inactive value.
  auto sig_to_assignment = [&](int s, const std::vector<int>& sig) {
    Assignment full(net.nodes.size(), 0);
    const auto& par = net.nodes[static_cast<size_t>(s)].prob_parents;
    for (size_t j = 0; j < par.size(); ++j) {
      const auto& pn = net.nodes[static_cast<size_t>(par[j])];
      int v = sig[j];
      if (v == kInactiveSig) {
        if (!pn.inactive_value)
          throw Error("internal conversion error: stage '" + pn.name +
                      "' skipped but never padded");
        v = *pn.inactive_value;
      }
      full[static_cast<size_t>(par[j])] = v;
    }
    return assignment_index(net, par, full);
  };

  std::vector<std::vector<int>> row_instance(static_cast<size_t>(n_stages));
  for (int s = 0; s < n_stages; ++s) {
    auto& st = cv.stages[static_cast<size_t>(s)];
    auto& node = net.nodes[static_cast<size_t>(s)];
    const int n_rows = assignment_count(net, node.prob_parents);
    row_instance[static_cast<size_t>(s)].assign(static_cast<size_t>(n_rows),
                                                -1);
    for (size_t i = 0; i < st.instances.size(); ++i) {
      int a = sig_to_assignment(s, inst_sigs[static_cast<size_t>(s)][i]);
      if (row_instance[static_cast<size_t>(s)][static_cast<size_t>(a)] != -1)
        throw Error("stage '" + st.name +
                    "': two information sets share one observed context; "
                    "unsupported structure");
      row_instance[static_cast<size_t>(s)][static_cast<size_t>(a)] =
          static_cast<int>(i);
    }
    const int dom = static_cast<int>(node.domain.size());
    int silent = node.inactive_value ? *node.inactive_value : 0;
    if (st.kind == EfTree::Kind::Chance) {
      Cpt cpt;
      cpt.node = s;
      cpt.rows = Eigen::ArrayXXd::Zero(n_rows, dom);
      for (int a = 0; a < n_rows; ++a) {
        int inst = row_instance[static_cast<size_t>(s)][static_cast<size_t>(a)];
        if (inst >= 0) {
          const auto& probs =
              tree.nodes[static_cast<size_t>(st.instances[static_cast<size_t>(
                             inst)][0])].probs;
          for (size_t v = 0; v < probs.size(); ++v)
            cpt.rows(a, static_cast<int>(v)) = probs[v];
        } else {
          cpt.rows(a, silent) = 1.0;
        }
      }
      net.cpts.push_back(std::move(cpt));
    } else {
      for (int a = 0; a < n_rows; ++a)
        if (row_instance[static_cast<size_t>(s)][static_cast<size_t>(a)] < 0)
          node.forced_rows.push_back(ForcedRow{a, silent});
    }
  }

  // Payoffs: telescoped reference-completed ratios along the stage order.
  // eval(vals) walks the tree taking vals[stage] where it names a real
  // action and the reference action otherwise.
  auto eval = [&](const std::vector<int>& vals, int player) {
    int cur = 0;
    while (tree.nodes[static_cast<size_t>(cur)].kind != EfTree::Kind::Leaf) {
      int s = cv.stage_of_node[static_cast<size_t>(cur)];
      int n_real =
          static_cast<int>(cv.stages[static_cast<size_t>(s)].actions.size());
      int v = vals[static_cast<size_t>(s)];
      if (v < 0 || v >= n_real) v = 0;
      cur = cv.child_at[static_cast<size_t>(cur)][static_cast<size_t>(v)];
    }
    return tree.nodes[static_cast<size_t>(cur)].payoffs[player];
  };

  // Consistent (positive-probability) full value vectors: one per leaf.
  std::vector<std::vector<int>> consistent;
  for (const auto& lv : cv.leaf_vals) {
    std::vector<int> vals(lv.size());
    for (size_t t = 0; t < lv.size(); ++t) {
      vals[t] = lv[t] == kInactiveSig
                    ? *net.nodes[t].inactive_value
                    : lv[t];
    }
    consistent.push_back(std::move(vals));
  }

  for (int i = 0; i < n_players; ++i) {
    for (int s = 0; s < n_stages; ++s) {
      const auto& node = net.nodes[static_cast<size_t>(s)];
      const int dom = static_cast<int>(node.domain.size());
      const int n_real =
          static_cast<int>(cv.stages[static_cast<size_t>(s)].actions.size());
      std::vector<NodeId> nbs;
      for (int t = 0; t < s; ++t) nbs.push_back(t);
      int cols = assignment_count(net, nbs);

      Eigen::ArrayXXd entries(dom, cols);
      std::vector<std::vector<char>> meaningful(
          static_cast<size_t>(dom),
          std::vector<char>(static_cast<size_t>(cols), 0));
      for (int a = 0; a < cols; ++a) {
        std::vector<int> prefix = assignment_values(net, nbs, a);
        std::vector<int> vals(static_cast<size_t>(n_stages), -1);
        for (size_t j = 0; j < nbs.size(); ++j)
          vals[static_cast<size_t>(nbs[j])] = prefix[j];
        double den = eval(vals, i);
        for (int v = 0; v < dom; ++v) {
          vals[static_cast<size_t>(s)] = v >= n_real ? -1 : v;
          entries(v, a) = eval(vals, i) / den;
        }
      }
      for (const auto& state : consistent) {
        Assignment full(state.begin(), state.end());
        int a = assignment_index(net, nbs, full);
        meaningful[static_cast<size_t>(state[static_cast<size_t>(s)])]
                  [static_cast<size_t>(a)] = 1;
      }

      // Prune neighbors whose value never changes any meaningful entry
      // (relative ratio test), restarting the scan after each removal.
      bool changed = true;
      while (changed && !nbs.empty()) {
        changed = false;
        for (size_t drop = 0; drop < nbs.size(); ++drop) {
          std::vector<NodeId> kept;
          for (size_t j = 0; j < nbs.size(); ++j)
            if (j != drop) kept.push_back(nbs[j]);
          int kept_cols = assignment_count(net, kept);
          Eigen::ArrayXXd reduced(dom, kept_cols);
          std::vector<std::vector<char>> red_mask(
              static_cast<size_t>(dom),
              std::vector<char>(static_cast<size_t>(kept_cols), 0));
          std::vector<char> have(
              static_cast<size_t>(dom) * static_cast<size_t>(kept_cols), 0);
          bool independent = true;
          for (int a = 0; a < cols && independent; ++a) {
            std::vector<int> vv = assignment_values(net, nbs, a);
            Assignment full(net.nodes.size(), 0);
            for (size_t j = 0; j < nbs.size(); ++j)
              full[static_cast<size_t>(nbs[j])] = vv[j];
            int g = assignment_index(net, kept, full);
            for (int v = 0; v < dom; ++v) {
              size_t slot = static_cast<size_t>(v) *
                                static_cast<size_t>(kept_cols) +
                            static_cast<size_t>(g);
              if (!have[slot]) {
                reduced(v, g) = entries(v, a);  // provisional representative
                have[slot] = 1;
              }
              if (!meaningful[static_cast<size_t>(v)][static_cast<size_t>(a)])
                continue;
              if (red_mask[static_cast<size_t>(v)][static_cast<size_t>(g)]) {
                if (std::abs(entries(v, a) / reduced(v, g) - 1.0) >
                    kRatioPruneTol) {
                  independent = false;
                  break;
                }
              } else {
                reduced(v, g) = entries(v, a);  // meaningful representative
                red_mask[static_cast<size_t>(v)][static_cast<size_t>(g)] = 1;
              }
            }
          }
          if (independent) {
            nbs = kept;
            cols = kept_cols;
            entries = reduced;
            meaningful = red_mask;
            changed = true;
            break;
          }
        }
      }

      bool unit = true;
      for (int v = 0; v < dom && unit; ++v)
        for (int a = 0; a < cols && unit; ++a)
          if (meaningful[static_cast<size_t>(v)][static_cast<size_t>(a)] &&
              std::abs(entries(v, a) - 1.0) > kUnitTableTol)
            unit = false;
      if (unit) continue;

      PotentialTable w;
      w.player = i;
      w.node = s;
      w.neighbors = nbs;
      w.entries = entries;
      // Reference and inactive rows telescope to exactly 1; enforce
      // bit-exactness so validation never sees round-off there.
      for (int a = 0; a < cols; ++a) {
        w.entries(0, a) = 1.0;
        for (int v = n_real; v < dom; ++v) w.entries(v, a) = 1.0;
      }
      net.potentials.push_back(std::move(w));
    }
  }

  require_valid(net);
  return net;
}

}  // namespace gnet
