#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "gnet/expectations.hpp"
#include "gnet/extensive_form.hpp"

namespace gnet {

namespace {

constexpr double kDedupeTol = 1e-7;   // same-point / point-on-segment radius
constexpr double kRankTol = 1e-10;    // SVD rank threshold (relative)
constexpr double kSolveTol = 1e-8;    // residual for "system consistent"

double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

AgentForm to_agent_form(const GNet& net, long long max_entries) {
  require_valid(net);
  const auto& layout = net.layout();
  AgentForm agent;
  agent.base = uniform_profile(net);

  for (size_t b = 0; b < layout.blocks().size(); ++b) {
    const auto& blk = layout.blocks()[b];
    if (blk.frozen) continue;
    AgentForm::PseudoPlayer pp;
    pp.block = static_cast<int>(b);
    pp.offset = blk.offset;
    pp.owner = net.nodes[static_cast<size_t>(blk.node)].player;
    pp.actions = blk.available;
    agent.joint_count *= static_cast<long long>(pp.actions.size());
    agent.players.push_back(std::move(pp));
    if (agent.joint_count * static_cast<long long>(net.players.size()) >
        max_entries)
      throw Error("agent form too large: more than " +
                  std::to_string(max_entries) + " payoff entries");
  }

  agent.payoff.assign(net.players.size(),
                      Eigen::ArrayXd(static_cast<Eigen::Index>(
                          agent.joint_count)));
  std::vector<int> choice(agent.players.size(), 0);
  for (long long j = 0; j < agent.joint_count; ++j) {
    Profile p = agent.base;
    for (size_t a = 0; a < agent.players.size(); ++a) {
      const auto& pp = agent.players[a];
      const auto& blk = net.layout().block(pp.block);
      p.segment(blk.offset, blk.size).setZero();
      p[pp.offset + pp.actions[static_cast<size_t>(choice[a])]] = 1.0;
    }
    for (size_t i = 0; i < net.players.size(); ++i)
      agent.payoff[i][static_cast<Eigen::Index>(j)] =
          expected_utility(net, p, static_cast<int>(i));
    for (int a = static_cast<int>(choice.size()) - 1; a >= 0; --a) {
      if (++choice[static_cast<size_t>(a)] <
          static_cast<int>(agent.players[static_cast<size_t>(a)].actions.size()))
        break;
      choice[static_cast<size_t>(a)] = 0;
    }
  }
  return agent;
}

std::string dump_agent_form(const AgentForm& agent) {
  std::ostringstream os;
  os.precision(17);
  os << "pseudo_players: " << agent.players.size() << "\n";
  for (size_t a = 0; a < agent.players.size(); ++a) {
    const auto& pp = agent.players[a];
    os << "agent " << a << ": block " << pp.block << " owner " << pp.owner
       << " actions";
    for (int v : pp.actions) os << ' ' << v;
    os << "\n";
  }
  os << "joint_profiles: " << agent.joint_count << "\n";
  for (size_t i = 0; i < agent.payoff.size(); ++i) {
    os << "payoff " << i << ":";
    for (Eigen::Index j = 0; j < agent.payoff[i].size(); ++j)
      os << ' ' << agent.payoff[i][j];
    os << "\n";
  }
  return os.str();
}

namespace {

// Total payoff of every (agent, own action index) pair under the mixed
// behavior sigma (one weight vector per pseudo-player, aligned with its
// action list). Row a of the result spans agent a's actions.
std::vector<Eigen::VectorXd> payoffs_by_action(
    const AgentForm& agent, const std::vector<Eigen::VectorXd>& sigma) {
  const size_t P = agent.players.size();
  std::vector<Eigen::VectorXd> val(P);
  for (size_t a = 0; a < P; ++a)
    val[a] = Eigen::VectorXd::Zero(
        static_cast<Eigen::Index>(agent.players[a].actions.size()));
  std::vector<int> idx(P, 0);
  std::vector<double> pre(P + 1), suf(P + 1);
  for (long long j = 0; j < agent.joint_count; ++j) {
    pre[0] = 1.0;
    for (size_t a = 0; a < P; ++a)
      pre[a + 1] = pre[a] * sigma[a][idx[a]];
    suf[P] = 1.0;
    for (size_t a = P; a-- > 0;) suf[a] = suf[a + 1] * sigma[a][idx[a]];
    for (size_t a = 0; a < P; ++a) {
      double others = pre[a] * suf[a + 1];
      if (others != 0.0)
        val[a][idx[a]] +=
            agent.payoff[static_cast<size_t>(agent.players[a].owner)]
                        [static_cast<Eigen::Index>(j)] *
            others;
    }
    for (int a = static_cast<int>(P) - 1; a >= 0; --a) {
      if (++idx[static_cast<size_t>(a)] <
          static_cast<int>(agent.players[static_cast<size_t>(a)].actions.size()))
        break;
      idx[static_cast<size_t>(a)] = 0;
    }
  }
  return val;
}

struct SupportContext {
  std::vector<std::vector<int>> supp;  // per agent: indices into action list
  std::vector<std::pair<int, int>> unknowns;  // (agent, support position)
  int m = 0;                                  // number of unknowns
};

std::vector<Eigen::VectorXd> sigma_from_vector(const AgentForm& agent,
                                               const SupportContext& ctx,
                                               const Eigen::VectorXd& x) {
  std::vector<Eigen::VectorXd> sigma(agent.players.size());
  for (size_t a = 0; a < agent.players.size(); ++a)
    sigma[a] = Eigen::VectorXd::Zero(
        static_cast<Eigen::Index>(agent.players[a].actions.size()));
  for (int j = 0; j < ctx.m; ++j)
    sigma[static_cast<size_t>(ctx.unknowns[static_cast<size_t>(j)].first)]
         [ctx.supp[static_cast<size_t>(
              ctx.unknowns[static_cast<size_t>(j)].first)]
              [static_cast<size_t>(
                   ctx.unknowns[static_cast<size_t>(j)].second)]] = x[j];
  return sigma;
}

Profile profile_from_vector(const AgentForm& agent, const SupportContext& ctx,
                            const Eigen::VectorXd& x) {
  Profile p = agent.base;
  for (size_t a = 0; a < agent.players.size(); ++a)
    for (int v : agent.players[a].actions)
      p[agent.players[a].offset + v] = 0.0;
  for (int j = 0; j < ctx.m; ++j) {
    const auto [a, pos] = ctx.unknowns[static_cast<size_t>(j)];
    int v = ctx.supp[static_cast<size_t>(a)][static_cast<size_t>(pos)];
    p[agent.players[static_cast<size_t>(a)].offset + v] =
        std::max(0.0, x[j]);
  }
  return p;
}

// Reduced parametrization of the support weights: each agent's last support
// position is the dependent weight 1 - sum(others), so every evaluation point
// lies on the product of normalization hyperplanes. z has one entry per
// non-final support position, agent-major.
int reduced_dim(const SupportContext& ctx) {
  int m = 0;
  for (const auto& supp : ctx.supp) m += static_cast<int>(supp.size()) - 1;
  return m;
}

Eigen::VectorXd z_to_x(const SupportContext& ctx, const Eigen::VectorXd& z) {
  Eigen::VectorXd x(ctx.m);
  int zi = 0, base = 0;
  for (const auto& supp : ctx.supp) {
    double sum = 0.0;
    for (size_t s = 0; s + 1 < supp.size(); ++s) {
      x[base + static_cast<int>(s)] = z[zi];
      sum += z[zi++];
    }
    x[base + static_cast<int>(supp.size()) - 1] = 1.0 - sum;
    base += static_cast<int>(supp.size());
  }
  return x;
}

// Affine model of every (agent, action) payoff DIFFERENCE against the agent's
// dependent support action: d_a(v) ~ c + A z on the normalized subspace.
// Payoffs themselves are multilinear in the other agents' weights, but the
// acting agent's pairwise differences marginalize every block the play does
// not cross, so the restriction to the normalized subspace is exactly affine
// whenever each play crosses at most two free blocks. Verified at a random
// normalized point.
struct AffineModel {
  std::vector<Eigen::VectorXd> c;  // per agent: one entry per action
  std::vector<Eigen::MatrixXd> A;  // per agent: actions x reduced_dim
  double scale = 1.0;              // payoff magnitude for tolerances
  bool verified = false;
};

AffineModel extract_affine(const AgentForm& agent, const SupportContext& ctx,
                           std::mt19937_64& rng) {
  AffineModel mdl;
  const size_t P = agent.players.size();
  const int m = reduced_dim(ctx);
  auto diffs_at = [&](const Eigen::VectorXd& z) {
    auto val = payoffs_by_action(agent, sigma_from_vector(agent, ctx, z_to_x(ctx, z)));
    for (size_t a = 0; a < P; ++a) {
      double anchor = val[a][ctx.supp[a].back()];
      mdl.scale = std::max(mdl.scale, val[a].cwiseAbs().maxCoeff());
      val[a].array() -= anchor;
    }
    return val;
  };
  auto base = diffs_at(Eigen::VectorXd::Zero(m));
  mdl.c.resize(P);
  mdl.A.resize(P);
  for (size_t a = 0; a < P; ++a) {
    mdl.c[a] = base[a];
    mdl.A[a] = Eigen::MatrixXd::Zero(base[a].size(), m);
  }
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e[j] = 1.0;
    auto col = diffs_at(e);
    for (size_t a = 0; a < P; ++a) mdl.A[a].col(j) = col[a] - base[a];
  }
  // Random interior normalized point for the exactness check.
  Eigen::VectorXd r(m);
  {
    int zi = 0;
    for (const auto& supp : ctx.supp) {
      std::vector<double> g(supp.size());
      double sum = 0.0;
      for (double& gi : g) {
        gi = -std::log(std::max(u01(rng), 1e-12));
        sum += gi;
      }
      for (size_t s = 0; s + 1 < supp.size(); ++s) r[zi++] = g[s] / sum;
    }
  }
  auto probe = diffs_at(r);
  double err = 0.0;
  for (size_t a = 0; a < P; ++a) {
    Eigen::VectorXd pred = mdl.c[a] + mdl.A[a] * r;
    err = std::max(err, (probe[a] - pred).cwiseAbs().maxCoeff());
  }
  mdl.verified = err <= 1e-9 * mdl.scale;
  return mdl;
}

// Nash inequality check with exactly evaluated payoffs: every off-support
// action of every agent earns at most the support payoff (within tol), and
// supported actions agree with each other (within tol).
bool candidate_is_nash(const AgentForm& agent, const SupportContext& ctx,
                       const Eigen::VectorXd& x, double tol) {
  for (int j = 0; j < ctx.m; ++j)
    if (x[j] < -tol) return false;
  Eigen::VectorXd xc = x.cwiseMax(0.0);
  auto val = payoffs_by_action(agent, sigma_from_vector(agent, ctx, xc));
  double scale = 1.0;
  for (const auto& v : val)
    scale = std::max(scale, v.cwiseAbs().maxCoeff());
  for (size_t a = 0; a < agent.players.size(); ++a) {
    const auto& supp = ctx.supp[a];
    double lo = val[a][supp.front()], hi = lo;
    for (int pos : supp) {
      lo = std::min(lo, val[a][pos]);
      hi = std::max(hi, val[a][pos]);
    }
    if (hi - lo > tol * scale) return false;
    for (int v = 0; v < val[a].size(); ++v) {
      if (std::find(supp.begin(), supp.end(), v) != supp.end()) continue;
      if (val[a][v] > lo + tol * scale) return false;
    }
  }
  return true;
}

struct RawSolution {
  Eigen::VectorXd lo, hi;  // in profile coordinates
  bool segment = false;
  bool certified = true;
};

// Damped Newton on the square indifference-plus-normalization system, used
// only when the affine extraction fails verification.
void newton_fallback(const AgentForm& agent, const SupportContext& ctx,
                     double tol, std::mt19937_64& rng,
                     std::vector<RawSolution>* out) {
  const int m = ctx.m;
  auto F = [&](const Eigen::VectorXd& x) {
    auto val = payoffs_by_action(agent, sigma_from_vector(agent, ctx, x));
    Eigen::VectorXd f(m);
    int row = 0, base = 0;
    for (size_t a = 0; a < agent.players.size(); ++a) {
      const auto& supp = ctx.supp[a];
      for (size_t s = 1; s < supp.size(); ++s)
        f[row++] = val[a][supp[s]] - val[a][supp[0]];
      double sum = -1.0;
      for (size_t s = 0; s < supp.size(); ++s)
        sum += x[base + static_cast<int>(s)];
      f[row++] = sum;
      base += static_cast<int>(supp.size());
    }
    return f;
  };
  std::vector<Eigen::VectorXd> found;
  for (int start = 0; start < 40; ++start) {
    Eigen::VectorXd x(m);
    if (start == 0) {
      int base = 0;
      for (const auto& supp : ctx.supp) {
        for (size_t s = 0; s < supp.size(); ++s)
          x[base + static_cast<int>(s)] = 1.0 / static_cast<double>(supp.size());
        base += static_cast<int>(supp.size());
      }
    } else {
      int base = 0;
      for (const auto& supp : ctx.supp) {
        double sum = 0.0;
        for (size_t s = 0; s < supp.size(); ++s) {
          double g = -std::log(std::max(u01(rng), 1e-12));
          x[base + static_cast<int>(s)] = g;
          sum += g;
        }
        for (size_t s = 0; s < supp.size(); ++s)
          x[base + static_cast<int>(s)] /= sum;
        base += static_cast<int>(supp.size());
      }
    }
    Eigen::VectorXd f = F(x);
    for (int it = 0; it < 200 && f.cwiseAbs().maxCoeff() > 1e-12; ++it) {
      Eigen::MatrixXd J(m, m);
      const double h = 1e-7;
      for (int j = 0; j < m; ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        J.col(j) = (F(xp) - F(xm)) / (2.0 * h);
      }
      Eigen::VectorXd delta = J.fullPivLu().solve(-f);
      double t = 1.0;
      bool ok = false;
      for (int back = 0; back < 30; ++back) {
        Eigen::VectorXd xn = x + t * delta;
        Eigen::VectorXd fn = F(xn);
        if (fn.cwiseAbs().maxCoeff() < f.cwiseAbs().maxCoeff()) {
          x = xn;
          f = fn;
          ok = true;
          break;
        }
        t *= 0.5;
      }
      if (!ok) break;
    }
    if (f.cwiseAbs().maxCoeff() > 1e-10) continue;
    bool dup = false;
    for (const auto& y : found)
      if ((y - x).cwiseAbs().maxCoeff() <= kDedupeTol) dup = true;
    if (dup || !candidate_is_nash(agent, ctx, x, tol)) continue;
    found.push_back(x);
    RawSolution sol;
    sol.lo = sol.hi = profile_from_vector(agent, ctx, x);
    sol.certified = false;
    out->push_back(std::move(sol));
  }
}

bool point_on_segment(const Eigen::VectorXd& p, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b) {
  Eigen::VectorXd d = b - a;
  double dd = d.squaredNorm();
  if (dd <= kDedupeTol * kDedupeTol)
    return (p - a).cwiseAbs().maxCoeff() <= kDedupeTol;
  double t = d.dot(p - a) / dd;
  if (t < -1e-9 || t > 1.0 + 1e-9) return false;
  return (a + t * d - p).cwiseAbs().maxCoeff() <= kDedupeTol;
}

}  // namespace

OracleReport oracle_support_enumeration(const AgentForm& agent, double tol,
                                        long long max_profiles) {
  OracleReport report;
  if (agent.joint_count > max_profiles)
    throw Error("support enumeration refused: " +
                std::to_string(agent.joint_count) +
                " pure profiles exceed the oracle limit");
  const size_t P = agent.players.size();
  if (P == 0) {
    OracleSolution only;
    only.lo = only.hi = agent.base;
    report.solutions.push_back(std::move(only));
    return report;
  }

  long long combos = 1;
  for (const auto& pp : agent.players) {
    combos *= (1LL << pp.actions.size()) - 1;
    if (combos > 2000000)
      throw Error("support enumeration refused: too many support patterns");
  }

  std::mt19937_64 rng(12345);
  std::vector<RawSolution> raw;

  std::vector<unsigned> mask(P, 1);
  for (long long combo = 0; combo < combos; ++combo) {
    SupportContext ctx;
    ctx.supp.resize(P);
    for (size_t a = 0; a < P; ++a) {
      for (size_t v = 0; v < agent.players[a].actions.size(); ++v)
        if (mask[a] & (1u << v)) {
          ctx.unknowns.emplace_back(static_cast<int>(a),
                                    static_cast<int>(ctx.supp[a].size()));
          ctx.supp[a].push_back(static_cast<int>(v));
        }
    }
    ctx.m = static_cast<int>(ctx.unknowns.size());

    // advance the mixed-radix support mask for the next iteration
    for (size_t a = P; a-- > 0;) {
      unsigned limit =
          (1u << agent.players[a].actions.size()) - 1;
      if (mask[a] < limit) {
        ++mask[a];
        break;
      }
      mask[a] = 1;
    }

    AffineModel mdl = extract_affine(agent, ctx, rng);
    if (!mdl.verified) {
      report.complete = false;
      newton_fallback(agent, ctx, tol, rng, &raw);
      continue;
    }

    // Square affine system in the reduced unknowns: every non-final support
    // action's payoff difference against the dependent action vanishes.
    const int mr = reduced_dim(ctx);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(mr, mr);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mr);
    {
      int row = 0;
      for (size_t a = 0; a < P; ++a) {
        const auto& supp = ctx.supp[a];
        for (size_t s = 0; s + 1 < supp.size(); ++s) {
          M.row(row) = mdl.A[a].row(supp[s]);
          rhs[row] = -mdl.c[a][supp[s]];
          ++row;
        }
      }
    }

    int rank = 0;
    Eigen::VectorXd zstar = Eigen::VectorXd::Zero(mr);
    Eigen::MatrixXd V;
    if (mr > 0) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(
          M, Eigen::ComputeThinU | Eigen::ComputeFullV);
      double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
      double thresh = std::max(mdl.scale, smax) * kRankTol;
      for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > thresh) ++rank;
      Eigen::VectorXd uty = svd.matrixU().transpose() * rhs;
      for (int i = 0; i < rank; ++i)
        zstar += svd.matrixV().col(i) * (uty[i] / svd.singularValues()[i]);
      V = svd.matrixV();
      double scale = std::max(mdl.scale, rhs.cwiseAbs().maxCoeff());
      if ((M * zstar - rhs).cwiseAbs().maxCoeff() > kSolveTol * scale) continue;
    }

    int nullity = mr - rank;
    if (nullity == 0) {
      Eigen::VectorXd xstar = z_to_x(ctx, zstar);
      if (!candidate_is_nash(agent, ctx, xstar, tol)) continue;
      RawSolution sol;
      sol.lo = sol.hi = profile_from_vector(agent, ctx, xstar);
      raw.push_back(std::move(sol));
    } else if (nullity == 1) {
      Eigen::VectorXd w = V.col(mr - 1);
      // Affine feasibility in the line parameter s: support weights
      // (including each agent's dependent one) stay nonnegative and
      // off-support actions stay dominated.
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      bool empty = false;
      auto constrain_ge = [&](double g0, double g1) {
        // g0 + s*g1 >= 0
        if (std::abs(g1) <= 1e-12) {
          if (g0 < -1e-9) empty = true;
          return;
        }
        if (g1 > 0.0)
          lo = std::max(lo, -g0 / g1);
        else
          hi = std::min(hi, -g0 / g1);
      };
      Eigen::VectorXd x0 = z_to_x(ctx, zstar);
      Eigen::VectorXd xdir = z_to_x(ctx, zstar + w) - x0;
      for (int j = 0; j < ctx.m; ++j) constrain_ge(x0[j], xdir[j]);
      for (size_t a = 0; a < P && !empty; ++a) {
        const auto& supp = ctx.supp[a];
        for (int v = 0; v < mdl.c[a].size(); ++v) {
          if (std::find(supp.begin(), supp.end(), v) != supp.end()) continue;
          // dominated: diff against the dependent action stays <= 0
          double g0 = -(mdl.c[a][v] + mdl.A[a].row(v).dot(zstar.transpose()));
          double g1 = -mdl.A[a].row(v).dot(w.transpose());
          constrain_ge(g0, g1);
        }
      }
      if (empty || lo > hi + 1e-9) continue;
      if (!std::isfinite(lo) || !std::isfinite(hi)) {
        ++report.unresolved_supports;
        continue;
      }
      Eigen::VectorXd xlo = z_to_x(ctx, zstar + lo * w);
      Eigen::VectorXd xhi = z_to_x(ctx, zstar + hi * w);
      Eigen::VectorXd xmid = 0.5 * (xlo + xhi);
      if (!candidate_is_nash(agent, ctx, xmid, tol) ||
          !candidate_is_nash(agent, ctx, xlo, tol) ||
          !candidate_is_nash(agent, ctx, xhi, tol)) {
        ++report.unresolved_supports;
        continue;
      }
      RawSolution sol;
      if ((xhi - xlo).cwiseAbs().maxCoeff() <= kDedupeTol) {
        sol.lo = sol.hi = profile_from_vector(agent, ctx, xmid);
      } else {
        sol.lo = profile_from_vector(agent, ctx, xlo);
        sol.hi = profile_from_vector(agent, ctx, xhi);
        sol.segment = true;
      }
      raw.push_back(std::move(sol));
    } else {
      ++report.unresolved_supports;
    }
  }

  // Merge: collinear overlapping segments first, then points absorbed by
  // segments or by earlier points.
  std::vector<RawSolution> segs, pts;
  for (auto& s : raw) (s.segment ? segs : pts).push_back(s);
  std::vector<RawSolution> kept_segs;
  for (auto& s : segs) {
    bool absorbed = false;
    for (auto& k : kept_segs) {
      bool s_in_k = point_on_segment(s.lo, k.lo, k.hi) &&
                    point_on_segment(s.hi, k.lo, k.hi);
      bool k_in_s = point_on_segment(k.lo, s.lo, s.hi) &&
                    point_on_segment(k.hi, s.lo, s.hi);
      if (s_in_k) {
        absorbed = true;
      } else if (k_in_s) {
        k.lo = s.lo;
        k.hi = s.hi;
        k.certified = k.certified && s.certified;
        absorbed = true;
      }
      if (absorbed) break;
    }
    if (!absorbed) kept_segs.push_back(s);
  }
  std::vector<RawSolution> kept_pts;
  for (auto& p : pts) {
    bool absorbed = false;
    for (const auto& k : kept_segs)
      if (point_on_segment(p.lo, k.lo, k.hi)) absorbed = true;
    for (const auto& k : kept_pts)
      if ((p.lo - k.lo).cwiseAbs().maxCoeff() <= kDedupeTol) absorbed = true;
    if (!absorbed) kept_pts.push_back(p);
  }
  for (auto& s : kept_segs) {
    OracleSolution out;
    out.lo = s.lo;
    out.hi = s.hi;
    out.segment = true;
    out.certified = s.certified;
    report.solutions.push_back(std::move(out));
  }
  for (auto& p : kept_pts) {
    OracleSolution out;
    out.lo = p.lo;
    out.hi = p.hi;
    out.segment = false;
    out.certified = p.certified;
    report.solutions.push_back(std::move(out));
  }
  return report;
}

}  // namespace gnet
