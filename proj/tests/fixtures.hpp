#pragma once

// Shared helpers for the test binaries: fixture loading from the games/
// directory, deterministic RNG, programmatic bimatrix-to-network encoding,
// and random-net generators used by the property tests.

#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gnet/io.hpp"
#include "gnet/model.hpp"
#include "gnet/profile.hpp"

#ifndef GNET_GAMES_DIR
#error "GNET_GAMES_DIR must be defined by the build"
#endif

namespace testutil {

inline std::string games_dir() { return GNET_GAMES_DIR; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixture_text(const std::string& name) {
  return read_file(games_dir() + "/" + name);
}

inline gnet::GNet load_game(const std::string& name) {
  gnet::GNet net = gnet::parse_game(fixture_text(name));
  gnet::require_valid(net);
  return net;
}

// Cross-platform deterministic uniform(0,1): top 53 bits of the raw draw.
inline double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * u01(rng);
}

// Encodes a two-player game in strategic form as a network: node A owned by
// player 0, node B owned by player 1, utility arcs A -> B for both players,
// and telescoped potentials w_A(a) = U(a,0)/U(0,0), w_B(b|a) = U(a,b)/U(a,0).
// The joint utilities come out as U^i(a,b)/U^i(0,0) — the same game up to
// positive scaling. All payoffs must be strictly positive.
inline gnet::GNet make_bimatrix_net(const Eigen::MatrixXd& U1,
                                    const Eigen::MatrixXd& U2) {
  using namespace gnet;
  const int m = static_cast<int>(U1.rows());
  const int n = static_cast<int>(U1.cols());
  if (U2.rows() != m || U2.cols() != n)
    throw std::runtime_error("payoff shape mismatch");
  GNet net;
  net.players = {"p1", "p2"};
  GNode a;
  a.name = "A";
  a.player = 0;
  for (int i = 0; i < m; ++i) a.domain.push_back("r" + std::to_string(i));
  GNode b;
  b.name = "B";
  b.player = 1;
  for (int j = 0; j < n; ++j) b.domain.push_back("c" + std::to_string(j));
  net.nodes = {a, b};
  for (int player = 0; player < 2; ++player) {
    const Eigen::MatrixXd& U = player == 0 ? U1 : U2;
    PotentialTable ta;
    ta.player = player;
    ta.node = 0;
    ta.entries = Eigen::ArrayXXd::Ones(m, 1);
    for (int i = 0; i < m; ++i) ta.entries(i, 0) = U(i, 0) / U(0, 0);
    PotentialTable tb;
    tb.player = player;
    tb.node = 1;
    tb.neighbors = {0};
    tb.entries = Eigen::ArrayXXd::Ones(n, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) tb.entries(j, i) = U(i, j) / U(i, 0);
    net.potentials.push_back(ta);
    net.potentials.push_back(tb);
  }
  require_valid(net);
  return net;
}

inline Eigen::MatrixXd random_payoffs(std::mt19937_64& rng, int m, int n,
                                      double lo = 1.0, double hi = 2.0) {
  Eigen::MatrixXd U(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) U(i, j) = uniform(rng, lo, hi);
  return U;
}

inline gnet::GNet random_bimatrix_2x2(std::mt19937_64& rng) {
  return make_bimatrix_net(random_payoffs(rng, 2, 2),
                           random_payoffs(rng, 2, 2));
}

// Random net with <= max_nodes nodes, <= max_values values per node, random
// DAG probability arcs, random CPTs, and random positive potentials with unit
// reference rows. Always validates.
inline gnet::GNet random_net(std::mt19937_64& rng, int max_nodes = 4,
                             int max_values = 3) {
  using namespace gnet;
  GNet net;
  const int num_players = 1 + static_cast<int>(u01(rng) * 2.0);  // 1 or 2
  for (int i = 0; i < num_players; ++i)
    net.players.push_back("p" + std::to_string(i + 1));
  const int num_nodes = 1 + static_cast<int>(u01(rng) * max_nodes);
  for (int k = 0; k < num_nodes; ++k) {
    GNode node;
    node.name = "n" + std::to_string(k);
    node.player = static_cast<int>(u01(rng) * (num_players + 1)) - 1;
    const int dom = 2 + static_cast<int>(u01(rng) * (max_values - 1));
    for (int v = 0; v < dom; ++v)
      node.domain.push_back("v" + std::to_string(v));
    for (int j = 0; j < k; ++j)
      if (u01(rng) < 0.35) node.prob_parents.push_back(j);
    net.nodes.push_back(node);
  }
  for (int k = 0; k < num_nodes; ++k) {
    if (net.nodes[k].player != kNature) continue;
    Cpt cpt;
    cpt.node = k;
    const int rows = assignment_count(net, net.nodes[k].prob_parents);
    const int dom = static_cast<int>(net.nodes[k].domain.size());
    cpt.rows = Eigen::ArrayXXd::Zero(rows, dom);
    for (int a = 0; a < rows; ++a) {
      double sum = 0.0;
      for (int v = 0; v < dom; ++v) {
        cpt.rows(a, v) = 0.05 + u01(rng);
        sum += cpt.rows(a, v);
      }
      for (int v = 0; v < dom; ++v) cpt.rows(a, v) /= sum;
      // Renormalize exactly: push rounding slack into the last value.
      double partial = 0.0;
      for (int v = 0; v + 1 < dom; ++v) partial += cpt.rows(a, v);
      cpt.rows(a, dom - 1) = 1.0 - partial;
    }
    net.cpts.push_back(cpt);
  }
  for (int player = 0; player < num_players; ++player) {
    for (int k = 0; k < num_nodes; ++k) {
      if (u01(rng) < 0.45) continue;  // this player has no factor at k
      PotentialTable table;
      table.player = player;
      table.node = k;
      for (int j = 0; j < num_nodes; ++j)
        if (j != k && u01(rng) < 0.3) table.neighbors.push_back(j);
      const int cols = assignment_count(net, table.neighbors);
      const int dom = static_cast<int>(net.nodes[k].domain.size());
      table.entries = Eigen::ArrayXXd::Ones(dom, cols);
      for (int v = 0; v < dom; ++v) {
        if (v == net.nodes[k].reference_value) continue;
        for (int c = 0; c < cols; ++c)
          table.entries(v, c) = uniform(rng, 0.5, 2.0);
      }
      net.potentials.push_back(table);
    }
  }
  require_valid(net);
  return net;
}

// Random interior profile: positive random mass on every available value of
// every free block; frozen rows imposed.
inline gnet::Profile random_interior_profile(const gnet::GNet& net,
                                             std::mt19937_64& rng) {
  using namespace gnet;
  const ProfileLayout& layout = net.layout();
  Profile p = Profile::Zero(layout.dim());
  impose_frozen(net, p);
  for (const BlockInfo& block : layout.blocks()) {
    if (block.frozen) continue;
    double sum = 0.0;
    std::vector<double> mass(block.available.size());
    for (std::size_t i = 0; i < mass.size(); ++i) {
      mass[i] = 0.05 + u01(rng);
      sum += mass[i];
    }
    double partial = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      double w = mass[i] / sum;
      if (i + 1 == mass.size()) w = 1.0 - partial;
      partial += w;
      p[block.offset + block.available[i]] = w;
    }
  }
  return p;
}

}  // namespace testutil
