#include "gnet/profile.hpp"

#include <cmath>
#include <sstream>

namespace gnet {

ProfileLayout::ProfileLayout(const GNet& net) : net_(&net) {
  block_start_.resize(net.nodes.size());
  for (int k = 0; k < static_cast<int>(net.nodes.size()); ++k) {
    const GNode& nd = net.nodes[k];
    block_start_[k] = static_cast<int>(blocks_.size());
    int m = assignment_count(net, nd.prob_parents);
    for (int a = 0; a < m; ++a) {
      BlockInfo b;
      b.node = k;
      b.parent_assignment = a;
      b.offset = dim_;
      b.size = static_cast<int>(nd.domain.size());
      b.frozen = nd.player == kNature;
      for (const auto& fr : nd.forced_rows)
        if (fr.parent_assignment == a) b.frozen = true;
      for (int v = 0; v < b.size; ++v) {
        bool avail = true;
        if (!b.frozen && nd.inactive_value && v == *nd.inactive_value)
          avail = false;  // reachable padded block: inactive mass is zero
        if (avail) b.available.push_back(v);
        coord_block_.push_back(static_cast<int>(blocks_.size()));
        coord_value_.push_back(v);
        coord_available_.push_back(b.frozen ? 1 : static_cast<char>(avail));
      }
      dim_ += b.size;
      blocks_.push_back(std::move(b));
    }
  }
}

int ProfileLayout::block_index(NodeId node, int parent_assignment) const {
  return block_start_[node] + parent_assignment;
}

int ProfileLayout::coord(NodeId node, int value, int parent_assignment) const {
  return blocks_[block_index(node, parent_assignment)].offset + value;
}

int ProfileLayout::coord_at(const GNet& net, NodeId node,
                            const Assignment& x) const {
  int a = assignment_index(net, net.nodes[node].prob_parents, x);
  return coord(node, x[node], a);
}

namespace {

// Deterministic row content of a frozen block, if any.
bool frozen_row(const GNet& net, const BlockInfo& b, Eigen::VectorXd& row) {
  const GNode& nd = net.nodes[b.node];
  if (nd.player == kNature) {
    const Cpt* c = net.cpt_for(b.node);
    if (!c) return false;
    row = c->rows.row(b.parent_assignment).matrix().transpose();
    return true;
  }
  for (const auto& fr : nd.forced_rows)
    if (fr.parent_assignment == b.parent_assignment) {
      row = Eigen::VectorXd::Zero(b.size);
      row[fr.value] = 1.0;
      return true;
    }
  return false;
}

}  // namespace

Profile uniform_profile(const GNet& net) {
  const ProfileLayout& L = net.layout();
  Profile p = Profile::Zero(L.dim());
  for (const auto& b : L.blocks()) {
    Eigen::VectorXd row;
    if (b.frozen && frozen_row(net, b, row)) {
      p.segment(b.offset, b.size) = row;
    } else {
      double w = 1.0 / static_cast<double>(b.available.size());
      for (int v : b.available) p[b.offset + v] = w;
    }
  }
  return p;
}

void impose_frozen(const GNet& net, Profile& p) {
  const ProfileLayout& L = net.layout();
  for (const auto& b : L.blocks()) {
    Eigen::VectorXd row;
    if (b.frozen && frozen_row(net, b, row)) p.segment(b.offset, b.size) = row;
  }
}

std::vector<std::string> check_profile(const GNet& net, const Profile& p,
                                       double sum_tol) {
  std::vector<std::string> out;
  const ProfileLayout& L = net.layout();
  if (p.size() != L.dim()) {
    out.push_back("profile dimension " + std::to_string(p.size()) +
                  " != " + std::to_string(L.dim()));
    return out;
  }
  for (const auto& b : L.blocks()) {
    InfoSet is{b.node, b.parent_assignment,
               assignment_values(net, net.nodes[b.node].prob_parents,
                                 b.parent_assignment)};
    std::string label = format_infoset(net, is);
    double s = p.segment(b.offset, b.size).sum();
    if (std::abs(s - 1.0) > sum_tol)
      out.push_back("block " + label + " sums to " + std::to_string(s));
    for (int v = 0; v < b.size; ++v) {
      double q = p[b.offset + v];
      if (q < -1e-12 || q > 1.0 + 1e-12)
        out.push_back("block " + label + " entry out of [0,1]");
      if (!L.coord_available(b.offset + v) && q > 1e-12)
        out.push_back("block " + label + " puts mass on a structurally zero value");
    }
    Eigen::VectorXd row;
    if (b.frozen && frozen_row(net, b, row)) {
      if ((p.segment(b.offset, b.size) - row).cwiseAbs().maxCoeff() > 1e-12)
        out.push_back("block " + label + " differs from its fixed conditional");
    }
  }
  return out;
}

bool profile_interior(const GNet& net, const Profile& p, double eps) {
  const ProfileLayout& L = net.layout();
  for (const auto& b : L.blocks()) {
    if (b.frozen) continue;
    for (int v : b.available)
      if (p[b.offset + v] < eps || p[b.offset + v] <= 0.0) return false;
  }
  return true;
}

}  // namespace gnet
