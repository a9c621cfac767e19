#include "gnet/equilibrium.hpp"

#include <cmath>
#include <sstream>

namespace gnet {

namespace {

std::string coord_label(const GNet& net, const BlockInfo& b, int value) {
  InfoSet is{b.node, b.parent_assignment,
             assignment_values(net, net.nodes[b.node].prob_parents,
                               b.parent_assignment)};
  return net.nodes[b.node].name + "=" + net.nodes[b.node].domain[value] +
         " at [" + format_infoset(net, is) + "]";
}

// Shared walk over reachable free blocks; check(u, j, b, report) appends
// violations and returns the block's fixed-point slack contributions.
template <typename PerCoord>
NashVerdict run_nash_test(const GNet& net, const Profile& p, double tol,
                          double unreachable_tol, PerCoord&& per_coord) {
  const ProfileLayout& L = net.layout();
  ValueDecomposition d = decompose_values(net, p);
  NashVerdict out;
  for (size_t bi = 0; bi < L.blocks().size(); ++bi) {
    const BlockInfo& b = L.block(static_cast<int>(bi));
    if (b.frozen || net.nodes[b.node].player < 0) continue;
    InfosetReport rep;
    rep.block = static_cast<int>(bi);
    rep.support.assign(b.size, 0);
    for (int v : b.available) rep.support[v] = p[b.offset + v] > tol ? 1 : 0;
    if (d.denom[b.offset] <= unreachable_tol) {
      rep.reachable = false;
      out.unreachable_blocks.push_back(static_cast<int>(bi));
      out.per_infoset.push_back(std::move(rep));
      continue;
    }
    double realized = 0.0;  // sum_v p_v u_v, the block's realized payoff
    for (int v : b.available)
      realized += p[b.offset + v] * d.cond_num[b.offset + v] / d.denom[b.offset];
    for (int v : b.available) {
      int j = b.offset + v;
      double u = d.cond_num[j] / d.denom[j];
      rep.max_cond_eu = std::max(rep.max_cond_eu, u);
      per_coord(out, b, v, p[j], u, realized);
    }
    out.per_infoset.push_back(std::move(rep));
  }
  out.is_nash = out.worst_violation <= tol;
  return out;
}

}  // namespace

NashVerdict is_nash_prop3(const GNet& net, const Profile& p, double tol,
                          double unreachable_tol) {
  return run_nash_test(
      net, p, tol, unreachable_tol,
      [&](NashVerdict& out, const BlockInfo& b, int v, double pj, double u,
          double) {
        double slack = std::max(u - 1.0, 0.0);
        if (pj > tol) slack = std::max(slack, std::abs(u - 1.0));
        out.worst_violation = std::max(out.worst_violation, slack);
        if (slack > tol) {
          std::ostringstream os;
          os << coord_label(net, b, v) << ": conditional payoff " << u
             << " with probability " << pj;
          out.violations.push_back(os.str());
        }
      });
}

NashVerdict is_nash_inequality(const GNet& net, const Profile& p, double tol,
                               double unreachable_tol) {
  return run_nash_test(
      net, p, tol, unreachable_tol,
      [&](NashVerdict& out, const BlockInfo& b, int v, double, double u,
          double realized) {
        double slack = std::max(u - realized, 0.0);
        out.worst_violation = std::max(out.worst_violation, slack);
        if (slack > tol) {
          std::ostringstream os;
          os << coord_label(net, b, v) << ": deviation payoff " << u
             << " exceeds realized " << realized;
          out.violations.push_back(os.str());
        }
      });
}

MonotonicityCheck check_prop4_monotonicity(const GNet& net, const Profile& p,
                                           double eps, double tol) {
  const ProfileLayout& L = net.layout();
  Eigen::VectorXd relaxed =
      eps * uniform_profile(net) + (1.0 - eps) * value_map(net, p);
  double resid = (p - relaxed).cwiseAbs().maxCoeff();
  if (resid > tol) {
    std::ostringstream os;
    os << "check_prop4_monotonicity: input is not a relaxed fixed point "
          "(residual "
       << resid << " > " << tol << ")";
    throw Error(os.str());
  }
  Eigen::VectorXd u = conditional_utilities(net, p);
  MonotonicityCheck out;
  double margin = 10.0 * tol;
  for (const auto& b : L.blocks()) {
    if (b.frozen || net.nodes[b.node].player < 0) continue;
    if (!std::isfinite(u[b.offset + b.available.front()])) continue;
    for (int v1 : b.available)
      for (int v2 : b.available) {
        int j1 = b.offset + v1, j2 = b.offset + v2;
        if (u[j1] > u[j2] + margin && !(p[j1] > p[j2])) {
          std::ostringstream os;
          os << coord_label(net, b, v1) << " vs "
             << net.nodes[b.node].domain[v2] << ": payoffs " << u[j1] << " > "
             << u[j2] << " but probabilities " << p[j1] << " <= " << p[j2];
          out.holds = false;
          out.witnesses.push_back(os.str());
        }
      }
  }
  return out;
}

EquilibriumClass classify(const GNet& net, const Profile& p,
                          Provenance provenance, double tol,
                          double residual_tol, double unreachable_tol) {
  EquilibriumClass out;
  out.verdict = is_nash_prop3(net, p, tol, unreachable_tol);
  out.prop3_slack = out.verdict.worst_violation;
  out.f_residual = (p - value_map(net, p)).cwiseAbs().maxCoeff();
  if (out.verdict.is_nash)
    out.label = provenance == Provenance::HomotopyEndpoint
                    ? EquilibriumLabel::RobustCandidate
                    : EquilibriumLabel::Nash;
  else if (out.f_residual <= residual_tol)
    out.label = EquilibriumLabel::FixedPointNonNash;
  else
    out.label = EquilibriumLabel::NotEquilibrium;
  return out;
}

const char* to_string(EquilibriumLabel label) {
  switch (label) {
    case EquilibriumLabel::Nash: return "Nash";
    case EquilibriumLabel::RobustCandidate: return "RobustCandidate";
    case EquilibriumLabel::FixedPointNonNash: return "FixedPointNonNash";
    case EquilibriumLabel::NotEquilibrium: return "NotEquilibrium";
  }
  return "?";
}

}  // namespace gnet
