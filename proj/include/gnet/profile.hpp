#pragma once

// Flat coordinate layout for behavior profiles. A profile assigns one
// conditional distribution per information set ("block"): decision blocks are
// the unknowns of every solver, Nature blocks always carry the CPT rows, and
// structurally forced blocks carry their deterministic row. Frozen blocks are
// part of the vector so residuals/Jacobians stay square and identity-like on
// them; solvers provably never move them.

#include <vector>

#include <Eigen/Dense>

#include "gnet/model.hpp"

namespace gnet {

using Profile = Eigen::VectorXd;

struct BlockInfo {
  NodeId node = 0;
  int parent_assignment = 0;
  int offset = 0;  // first coordinate in the flat vector
  int size = 0;    // |domain| of the node
  bool frozen = false;
  // Value indices a behavior rule may randomize over. Equals 0..size-1 except
  // on reachable blocks of padded nodes, where the inactive value is excluded
  // (its probability is structurally zero).
  std::vector<int> available;
};

class ProfileLayout {
 public:
  explicit ProfileLayout(const GNet& net);

  int dim() const { return dim_; }
  const std::vector<BlockInfo>& blocks() const { return blocks_; }
  const BlockInfo& block(int b) const { return blocks_[b]; }
  int block_index(NodeId node, int parent_assignment) const;
  int block_of_coord(int coord) const { return coord_block_[coord]; }
  int value_of_coord(int coord) const { return coord_value_[coord]; }
  int coord(NodeId node, int value, int parent_assignment) const;

  // Coordinate of node's value under the full assignment x (selects the block
  // matching x's parent values).
  int coord_at(const GNet& net, NodeId node, const Assignment& x) const;

  bool coord_available(int coord) const { return coord_available_[coord]; }

 private:
  int dim_ = 0;
  std::vector<BlockInfo> blocks_;
  std::vector<int> block_start_;  // per node, index of its first block
  std::vector<int> coord_block_, coord_value_;
  std::vector<char> coord_available_;
  const GNet* net_ = nullptr;
};

// Profile with every frozen block filled in and every free block uniform over
// its available values. This is the canonical start point of the
// first-equilibrium homotopy.
Profile uniform_profile(const GNet& net);

// Copies frozen rows (CPTs, forced rows) into p; free blocks untouched.
void impose_frozen(const GNet& net, Profile& p);

// Checks dimension, [0,1] ranges, per-block sums within sum_tol, frozen blocks
// matching their targets within 1e-12, and unavailable coordinates being zero.
// Returns violations; empty means valid.
std::vector<std::string> check_profile(const GNet& net, const Profile& p,
                                       double sum_tol = 1e-10);

// True if every available coordinate of every free block is >= eps.
bool profile_interior(const GNet& net, const Profile& p, double eps = 0.0);

}  // namespace gnet
