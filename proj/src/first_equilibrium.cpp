#include "gnet/first_equilibrium.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "gnet/decomposition.hpp"

namespace gnet {

namespace {

constexpr double kFaceSnapThreshold = 1e-7;
constexpr double kPolishTol = 1e-10;
// Largest coordinate move the predictor may attempt in one step; keeps the
// corrector inside the convergence basin of the tracked branch through the
// sharp final swing as t -> 1.
constexpr double kMaxCoordMove = 0.05;
// Hard ceiling on accepted states per run, so a pathological crawl surfaces
// as a degenerate-game failure instead of an unbounded loop.
constexpr int kMaxAcceptedStates = 200000;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Multiplicative payoff jiggle, the genericity fix: every free potential
// entry is scaled by 1 + scale*U(-1,1); reference rows stay exactly 1.
GNet perturb_payoffs(const GNet& net, double scale, std::mt19937_64& rng) {
  GNet out = net;
  for (auto& t : out.potentials) {
    int ref = out.nodes[t.node].reference_value;
    for (int v = 0; v < t.entries.rows(); ++v) {
      if (v == ref) continue;
      for (int a = 0; a < t.entries.cols(); ++a)
        t.entries(v, a) *= 1.0 + scale * (2.0 * uniform01(rng) - 1.0);
    }
  }
  return out;
}

struct TrackFailure {
  double t = 0.0;
  int accepted = 0;
};

struct CorrectorOutcome {
  bool ok = false;
  Profile p;
  double residual = 0.0;
  int iters = 0;
};

double relaxed_residual_norm(const GNet& net, const Profile& z,
                             const Profile& p, double t, Eigen::VectorXd* r) {
  Eigen::VectorXd res = p - ((1.0 - t) * z + t * value_map(net, p));
  if (r) *r = res;
  return res.cwiseAbs().maxCoeff();
}

// Newton on F at fixed t. Accepts at corrector_tol but keeps iterating toward
// a much tighter target while cheap, so accepted states sit essentially on
// the path (interior bounds then hold with slack far below the tolerance).
CorrectorOutcome newton_correct(const GNet& net, const Profile& z,
                                const Profile& start, double t,
                                const TrackerConfig& cfg) {
  const int dim = static_cast<int>(start.size());
  CorrectorOutcome out;
  out.p = start;
  double tight = std::max(cfg.corrector_tol * 1e-4, 5e-15);
  double resid = relaxed_residual_norm(net, z, out.p, t, nullptr);
  if (!std::isfinite(resid)) return out;
  while (resid > tight && out.iters < cfg.max_newton_iters) {
    ValueJacobian vj = value_map_with_jacobian(net, out.p);
    Eigen::VectorXd r = out.p - ((1.0 - t) * z + t * vj.value);
    Eigen::MatrixXd J =
        Eigen::MatrixXd::Identity(dim, dim) - t * vj.jac;
    Eigen::VectorXd delta = J.partialPivLu().solve(-r);
    if (!delta.allFinite() || delta.cwiseAbs().maxCoeff() > 1.0) return out;
    out.p += delta;
    ++out.iters;
    resid = relaxed_residual_norm(net, z, out.p, t, nullptr);
    if (!std::isfinite(resid)) return out;
  }
  out.residual = resid;
  out.ok = resid <= cfg.corrector_tol;
  return out;
}

// Every point on the tracked branch satisfies p = (1-t)z + t*v(p) with
// v(p) strictly inside (0,1) componentwise, hence
//   (1-t)*z_j < p_j < 1 - (1-t)*(1 - z_j)
// on free coordinates. Spurious algebraic branches (the t->1 continuations
// of non-equilibrium vertices) violate these bounds, so a corrected point
// outside them signals branch jumping and the step is rejected.
bool inside_branch_bounds(const GNet& net, const Profile& z, const Profile& p,
                          double t) {
  const double eps = 1.0 - t;
  const double slack = 1e-12;
  const ProfileLayout& L = net.layout();
  for (const auto& b : L.blocks()) {
    if (b.frozen) continue;
    for (int v : b.available) {
      double zj = z[b.offset + v];
      double q = p[b.offset + v];
      if (q < eps * zj - slack) return false;
      if (q > 1.0 - eps * (1.0 - zj) + slack) return false;
    }
  }
  return true;
}

// Zeroes negligible coordinates of free blocks and renormalizes.
Profile face_snap(const GNet& net, Profile p) {
  const ProfileLayout& L = net.layout();
  for (const auto& b : L.blocks()) {
    if (b.frozen) continue;
    double sum = 0.0;
    for (int v : b.available) {
      double& q = p[b.offset + v];
      if (q < kFaceSnapThreshold) q = 0.0;
      if (q > 1.0) q = 1.0;
      sum += q;
    }
    if (sum > 0.0)
      for (int v : b.available) p[b.offset + v] /= sum;
  }
  return p;
}

// Newton on p = v(p) restricted to the current support (t = 1). Off-support
// coordinates stay exactly zero; restricted block sums are preserved at the
// solution because off-support values contribute nothing to v.
Profile polish_on_face(const GNet& net, Profile p, int max_iters) {
  const ProfileLayout& L = net.layout();
  std::vector<int> support;
  for (const auto& b : L.blocks()) {
    if (b.frozen) continue;
    for (int v : b.available)
      if (p[b.offset + v] > 0.0) support.push_back(b.offset + v);
  }
  if (support.empty()) return p;
  auto restricted_residual = [&](const Profile& q, Eigen::VectorXd& rs) {
    Eigen::VectorXd full = q - value_map(net, q);
    rs = full(support);
    return rs.cwiseAbs().maxCoeff();
  };
  Eigen::VectorXd rs;
  double best = restricted_residual(p, rs);
  if (!std::isfinite(best)) return p;
  for (int it = 0; it < max_iters && best > kPolishTol * 1e-2; ++it) {
    ValueJacobian vj = value_map_with_jacobian(net, p);
    Eigen::MatrixXd J =
        (Eigen::MatrixXd::Identity(vj.jac.rows(), vj.jac.cols()) - vj.jac)(
            support, support);
    // Least-squares step: the restricted system can be rank-deficient when
    // the endpoint lies on a continuum of equilibria; then the step moves
    // only across the solution set, not along it.
    Eigen::VectorXd delta =
        J.completeOrthogonalDecomposition().solve(-rs.matrix());
    if (!delta.allFinite()) break;
    Profile cand = p;
    for (size_t i = 0; i < support.size(); ++i) cand[support[i]] += delta[i];
    Eigen::VectorXd cand_rs;
    double cand_res = restricted_residual(cand, cand_rs);
    if (!std::isfinite(cand_res) || cand_res >= best) break;
    if (cand.minCoeff() < -1e-9 || cand.maxCoeff() > 1.0 + 1e-9) break;
    p = cand;
    rs = cand_rs;
    best = cand_res;
  }
  // Exact cleanup: clamp roundoff and renormalize each free block.
  const ProfileLayout& LL = net.layout();
  for (const auto& b : LL.blocks()) {
    if (b.frozen) continue;
    double sum = 0.0;
    for (int v : b.available) {
      double& q = p[b.offset + v];
      q = std::min(std::max(q, 0.0), 1.0);
      sum += q;
    }
    if (sum > 0.0)
      for (int v : b.available) p[b.offset + v] /= sum;
  }
  impose_frozen(net, p);
  return p;
}

// One full homotopy run on (possibly perturbed) payoffs; throws TrackFailure
// on corrector breakdown at the minimum step.
std::pair<Profile, TrackedPath> track_once(const GNet& net,
                                           const TrackerConfig& cfg) {
  const ProfileLayout& L = net.layout();
  const int dim = L.dim();
  Profile z = uniform_profile(net);
  Profile p = z;
  double t = 0.0;
  double step = cfg.initial_step;
  TrackedPath path;
  path.states.push_back({p, t, 0.0, 0.0});
  while (t < cfg.endpoint_t) {
    ValueJacobian vj = value_map_with_jacobian(net, p);
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(dim, dim) - t * vj.jac;
    Eigen::VectorXd dpdt = J.partialPivLu().solve(vj.value - z);
    double eff = step;
    if (dpdt.allFinite()) {
      double rate = dpdt.cwiseAbs().maxCoeff();
      if (rate * eff > kMaxCoordMove)
        eff = std::max(cfg.min_step, kMaxCoordMove / rate);
    }
    double tn = std::min(t + eff, cfg.endpoint_t);
    Profile predicted =
        dpdt.allFinite() ? Profile(p + (tn - t) * dpdt) : p;
    CorrectorOutcome c = newton_correct(net, z, predicted, tn, cfg);
    path.newton_iterations += c.iters;
    if (c.ok && inside_branch_bounds(net, z, c.p, tn)) {
      p = c.p;
      t = tn;
      path.states.push_back({p, t, c.residual, eff});
      if (static_cast<int>(path.states.size()) > kMaxAcceptedStates)
        throw TrackFailure{t, static_cast<int>(path.states.size())};
      step = c.iters <= 3 ? std::min(eff * 2.0, cfg.max_step) : eff;
    } else {
      ++path.rejected_steps;
      step = eff * 0.5;
      if (step < cfg.min_step)
        throw TrackFailure{t, static_cast<int>(path.states.size())};
    }
  }
  return {p, std::move(path)};
}

}  // namespace

Eigen::VectorXd f_epsilon(const GNet& net, const Profile& p, double eps) {
  if (!(eps > 0.0) || eps > 1.0) throw Error("f_epsilon: eps must be in (0,1]");
  if (!profile_interior(net, p))
    throw Error("f_epsilon: profile is on the boundary");
  return eps * uniform_profile(net) + (1.0 - eps) * value_map(net, p);
}

Eigen::VectorXd residual_F_eps(const GNet& net, const Profile& p, double eps) {
  return p - f_epsilon(net, p, eps);
}

Eigen::MatrixXd jacobian_F_eps(const GNet& net, const Profile& p, double eps) {
  if (!profile_interior(net, p))
    throw Error("jacobian_F_eps: profile is on the boundary");
  ValueJacobian vj = value_map_with_jacobian(net, p);
  int dim = static_cast<int>(vj.jac.rows());
  return Eigen::MatrixXd::Identity(dim, dim) - (1.0 - eps) * vj.jac;
}

FirstEquilibriumResult track_first_equilibrium(const GNet& net,
                                               const TrackerConfig& cfg) {
  require_valid(net);
  if (!(cfg.min_step > 0.0) || cfg.min_step > cfg.initial_step ||
      cfg.initial_step > cfg.max_step || cfg.max_step >= 1.0)
    throw Error("TrackerConfig: need 0 < min_step <= initial_step <= max_step < 1");
  if (!(cfg.endpoint_t > 0.0) || cfg.endpoint_t >= 1.0)
    throw Error("TrackerConfig: endpoint_t must be in (0,1)");
  std::mt19937_64 rng(cfg.rng_seed);
  const int kMaxPerturbations = 3;
  for (int attempt = 0; attempt <= kMaxPerturbations; ++attempt) {
    GNet work = attempt == 0
                    ? net
                    : perturb_payoffs(net, cfg.payoff_perturbation_scale, rng);
    try {
      auto [endpoint, path] = track_once(work, cfg);
      path.perturbation_attempts = attempt;
      FirstEquilibriumResult out;
      out.profile = polish_on_face(net, face_snap(net, endpoint),
                                   cfg.max_newton_iters);
      out.cls = classify(net, out.profile, Provenance::HomotopyEndpoint);
      out.path = std::move(path);
      return out;
    } catch (const TrackFailure& f) {
      if (attempt == kMaxPerturbations) {
        std::ostringstream os;
        os << "degenerate game: corrector failed at the minimum step near t="
           << f.t << " (after " << kMaxPerturbations
           << " payoff perturbations; " << f.accepted
           << " states were accepted on the last attempt)";
        throw Error(os.str());
      }
    }
  }
  throw Error("unreachable");
}

DecomposedFirstEquilibrium first_equilibrium_decomposed(
    const GNet& net, const TrackerConfig& cfg) {
  require_valid(net);
  DecomposedFirstEquilibrium out;
  out.profile = uniform_profile(net);
  for (const auto& comp : strategic_components(net)) {
    ComponentRun run;
    run.nodes = comp.nodes;
    run.result = track_first_equilibrium(comp.net, cfg);
    scatter_profile(net, comp, run.result.profile, out.profile);
    out.components.push_back(std::move(run));
  }
  out.cls = classify(net, out.profile, Provenance::HomotopyEndpoint);
  return out;
}

Profile converge_relaxed_fixed_point(const GNet& net, const Profile& start,
                                     double eps, double tol, int max_iters,
                                     double damping) {
  Profile z = uniform_profile(net);
  Profile p = start;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd f = eps * z + (1.0 - eps) * value_map(net, p);
    double resid = (p - f).cwiseAbs().maxCoeff();
    if (resid <= tol) return p;
    p += damping * (f - p);
  }
  throw Error("converge_relaxed_fixed_point: no convergence");
}

}  // namespace gnet
