#include "gnet/expectations.hpp"

#include <cmath>
#include <limits>

namespace gnet {

namespace {

// Runs fn(x, coord, q, prefix, suffix, uplayer) for every full assignment.
//   coord[k]  = flat coordinate selected by node k under x
//   q[k]      = p[coord[k]], prefix[k] = q_0..q_{k-1}, suffix[k] = q_k..q_{n-1}
//   uplayer[i]= u^i(x)
// The joint probability of x is prefix[n] == suffix[0], and the product of
// all factors but node k's is prefix[k] * suffix[k+1] (each node contributes
// exactly one distinct coordinate, so state terms are multilinear).
template <typename Fn>
void scan_states(const GNet& net, const Profile& p, Fn&& fn) {
  const ProfileLayout& L = net.layout();
  const int n = static_cast<int>(net.nodes.size());
  const long long S = state_count(net);
  Assignment x(n, 0);
  std::vector<int> coord(n);
  std::vector<double> q(n), prefix(n + 1), suffix(n + 1);
  std::vector<double> uplayer(net.players.size());
  for (long long s = 0; s < S; ++s) {
    if (s > 0) {  // odometer, last node fastest
      for (int k = n - 1; k >= 0; --k) {
        if (++x[k] < static_cast<int>(net.nodes[k].domain.size())) break;
        x[k] = 0;
      }
    }
    for (int k = 0; k < n; ++k) {
      coord[k] = L.coord_at(net, k, x);
      q[k] = p[coord[k]];
    }
    prefix[0] = 1.0;
    for (int k = 0; k < n; ++k) prefix[k + 1] = prefix[k] * q[k];
    suffix[n] = 1.0;
    for (int k = n - 1; k >= 0; --k) suffix[k] = suffix[k + 1] * q[k];
    std::fill(uplayer.begin(), uplayer.end(), 1.0);
    for (const auto& t : net.potentials)
      uplayer[t.player] *= t.entries(x[t.node], assignment_index(net, t.neighbors, x));
    fn(x, coord, q, prefix, suffix, uplayer);
  }
}

}  // namespace

ValueDecomposition decompose_values(const GNet& net, const Profile& p) {
  const ProfileLayout& L = net.layout();
  if (p.size() != L.dim()) throw Error("decompose_values: profile has wrong dimension");
  const int n = static_cast<int>(net.nodes.size());
  ValueDecomposition out;
  out.cond_num = Eigen::VectorXd::Zero(L.dim());
  out.denom = Eigen::VectorXd::Zero(L.dim());
  Eigen::VectorXd block_denom = Eigen::VectorXd::Zero(L.blocks().size());
  scan_states(net, p,
              [&](const Assignment&, const std::vector<int>& coord,
                  const std::vector<double>&, const std::vector<double>& prefix,
                  const std::vector<double>& suffix, const std::vector<double>& uplayer) {
                for (int k = 0; k < n; ++k) {
                  int pl = net.nodes[k].player;
                  if (pl < 0) continue;
                  double w = uplayer[pl];
                  block_denom[L.block_of_coord(coord[k])] += w * prefix[n];
                  out.cond_num[coord[k]] += w * prefix[k] * suffix[k + 1];
                }
              });
  for (size_t b = 0; b < L.blocks().size(); ++b) {
    const BlockInfo& bi = L.block(static_cast<int>(b));
    if (net.nodes[bi.node].player < 0) continue;
    out.denom.segment(bi.offset, bi.size).setConstant(block_denom[b]);
  }
  out.numer = p.cwiseProduct(out.cond_num);
  return out;
}

double expected_utility(const GNet& net, const Profile& p, int player) {
  if (player < 0 || player >= static_cast<int>(net.players.size()))
    throw Error("expected_utility: unknown player");
  const int n = static_cast<int>(net.nodes.size());
  double acc = 0.0;
  scan_states(net, p,
              [&](const Assignment&, const std::vector<int>&,
                  const std::vector<double>&, const std::vector<double>& prefix,
                  const std::vector<double>&, const std::vector<double>& uplayer) {
                acc += uplayer[player] * prefix[n];
              });
  return acc;
}

Eigen::VectorXd conditional_utilities(const GNet& net, const Profile& p) {
  ValueDecomposition d = decompose_values(net, p);
  Eigen::VectorXd u(d.denom.size());
  for (int j = 0; j < u.size(); ++j)
    u[j] = d.denom[j] > 0.0 ? d.cond_num[j] / d.denom[j]
                            : std::numeric_limits<double>::quiet_NaN();
  return u;
}

Eigen::VectorXd value_map(const GNet& net, const Profile& p) {
  const ProfileLayout& L = net.layout();
  ValueDecomposition d = decompose_values(net, p);
  Eigen::VectorXd v = p;
  impose_frozen(net, v);  // frozen coordinates map to their fixed rows
  for (const auto& b : L.blocks()) {
    if (b.frozen || net.nodes[b.node].player < 0) continue;
    for (int val = 0; val < b.size; ++val) {
      int j = b.offset + val;
      if (!L.coord_available(j))
        v[j] = 0.0;
      else
        v[j] = d.denom[j] > 0.0 ? d.numer[j] / d.denom[j] : p[j];
    }
  }
  return v;
}

ValueJacobian value_map_with_jacobian(const GNet& net, const Profile& p) {
  const ProfileLayout& L = net.layout();
  if (p.size() != L.dim()) throw Error("value_map_with_jacobian: profile has wrong dimension");
  const int n = static_cast<int>(net.nodes.size());
  const int dim = L.dim();
  const int nb = static_cast<int>(L.blocks().size());
  Eigen::VectorXd numer = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd block_denom = Eigen::VectorXd::Zero(nb);
  Eigen::MatrixXd grad_numer = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd grad_denom = Eigen::MatrixXd::Zero(nb, dim);
  scan_states(net, p,
              [&](const Assignment&, const std::vector<int>& coord,
                  const std::vector<double>&, const std::vector<double>& prefix,
                  const std::vector<double>& suffix, const std::vector<double>& uplayer) {
                for (int k = 0; k < n; ++k) {
                  int pl = net.nodes[k].player;
                  if (pl < 0) continue;
                  double w = uplayer[pl];
                  int j = coord[k];  // this state lies in both events of j
                  int b = L.block_of_coord(j);
                  numer[j] += w * prefix[n];
                  block_denom[b] += w * prefix[n];
                  // d(term)/dq_m drops node m's factor; exact because state
                  // terms are multilinear in distinct coordinates.
                  for (int m = 0; m < n; ++m) {
                    double g = w * prefix[m] * suffix[m + 1];
                    grad_numer(j, coord[m]) += g;
                    grad_denom(b, coord[m]) += g;
                  }
                }
              });
  ValueJacobian out;
  out.value = p;
  impose_frozen(net, out.value);
  out.jac = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& b : L.blocks()) {
    if (b.frozen || net.nodes[b.node].player < 0) continue;
    int bi = L.block_index(b.node, b.parent_assignment);
    double D = block_denom[bi];
    for (int val = 0; val < b.size; ++val) {
      int j = b.offset + val;
      if (!L.coord_available(j)) {
        out.value[j] = 0.0;
        continue;  // pinned: zero row
      }
      if (D <= 0.0) {
        out.value[j] = p[j];  // degenerate guard; rejected by validation
        out.jac(j, j) = 1.0;
        continue;
      }
      out.value[j] = numer[j] / D;
      out.jac.row(j) =
          (grad_numer.row(j) - (numer[j] / D) * grad_denom.row(bi)) / D;
    }
  }
  return out;
}

std::vector<BlockPolys> value_polynomials(const GNet& net) {
  const ProfileLayout& L = net.layout();
  const int n = static_cast<int>(net.nodes.size());
  std::vector<BlockPolys> out;
  std::vector<int> slot(L.blocks().size(), -1);
  for (size_t b = 0; b < L.blocks().size(); ++b) {
    const BlockInfo& bi = L.block(static_cast<int>(b));
    if (bi.frozen || net.nodes[bi.node].player < 0) continue;
    slot[b] = static_cast<int>(out.size());
    BlockPolys bp;
    bp.block = static_cast<int>(b);
    bp.numer.resize(bi.size);
    out.push_back(std::move(bp));
  }
  const long long S = state_count(net);
  Assignment x(n, 0);
  std::vector<int> coord(n);
  std::vector<double> uplayer(net.players.size());
  for (long long s = 0; s < S; ++s) {
    if (s > 0) {
      for (int k = n - 1; k >= 0; --k) {
        if (++x[k] < static_cast<int>(net.nodes[k].domain.size())) break;
        x[k] = 0;
      }
    }
    for (int k = 0; k < n; ++k) coord[k] = L.coord_at(net, k, x);
    std::fill(uplayer.begin(), uplayer.end(), 1.0);
    for (const auto& t : net.potentials)
      uplayer[t.player] *= t.entries(x[t.node], assignment_index(net, t.neighbors, x));
    for (int k = 0; k < n; ++k) {
      int pl = net.nodes[k].player;
      if (pl < 0) continue;
      int sl = slot[L.block_of_coord(coord[k])];
      if (sl < 0) continue;  // frozen block of a decision node
      out[sl].numer[x[k]].add_product_term(uplayer[pl], coord);
      out[sl].denom.add_product_term(uplayer[pl], coord);
    }
  }
  for (auto& bp : out) {
    for (auto& q : bp.numer) q.finish();
    bp.denom.finish();
  }
  return out;
}

}  // namespace gnet
