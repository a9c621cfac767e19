#include "gnet/all_equilibria.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "gnet/decomposition.hpp"
#include "gnet/expectations.hpp"

namespace gnet {

namespace {

using Cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

CVec eval_system(const std::vector<Poly>& eqs, const CVec& x) {
  CVec out(eqs.size());
  for (size_t i = 0; i < eqs.size(); ++i) out[i] = eqs[i].eval<Cplx>(x);
  return out;
}

CMat eval_jacobian(const PolySystem& sys, const CVec& x) {
  const int n = sys.num_vars();
  CMat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = sys.jacobian[i][j].eval<Cplx>(x);
  return out;
}

CVec eval_start(const StartSystem& start, const PolySystem& sys, const CVec& x) {
  CVec out(sys.num_vars());
  for (int j = 0; j < sys.num_vars(); ++j)
    out[j] = start.alpha[j] * std::pow(x[j], sys.degrees[j]) -
             std::pow(start.beta[j], sys.degrees[j]);
  return out;
}

CMat eval_start_jacobian(const StartSystem& start, const PolySystem& sys,
                         const CVec& x) {
  CMat out = CMat::Zero(sys.num_vars(), sys.num_vars());
  for (int j = 0; j < sys.num_vars(); ++j)
    out(j, j) = start.alpha[j] * static_cast<double>(sys.degrees[j]) *
                std::pow(x[j], sys.degrees[j] - 1);
  return out;
}

ComplexPathResult track_one_path(const PolySystem& sys,
                                 const StartSystem& start, const CVec& root,
                                 const AllEqConfig& cfg) {
  ComplexPathResult res;
  CVec x = root;
  double t = 0.0;
  double step = cfg.initial_step;
  auto diverged = [&](const CVec& v) {
    return !v.allFinite() ||
           v.cwiseAbs().maxCoeff() > cfg.divergence_threshold;
  };
  while (t < 1.0) {
    if (++res.steps > cfg.max_steps_per_path) {
      res.endpoint = x;
      return res;  // truncated
    }
    double tn = std::min(t + step, 1.0);
    // Predictor: h_x dx/dt = G0 - G  (h = (1-t) G0 + t G).
    CMat hx = (1.0 - t) * eval_start_jacobian(start, sys, x) +
              t * eval_jacobian(sys, x);
    CVec rhs = eval_start(start, sys, x) - eval_system(sys.equations, x);
    CVec dxdt = hx.partialPivLu().solve(rhs);
    CVec cand = dxdt.allFinite() ? CVec(x + (tn - t) * dxdt) : x;
    // Corrector at frozen tn.
    bool ok = false;
    for (int it = 0; it <= cfg.max_newton_iters; ++it) {
      if (diverged(cand)) break;
      CVec h = (1.0 - tn) * eval_start(start, sys, cand) +
               tn * eval_system(sys.equations, cand);
      if (h.cwiseAbs().maxCoeff() <= cfg.corrector_tol) {
        ok = true;
        break;
      }
      if (it == cfg.max_newton_iters) break;
      CMat hj = (1.0 - tn) * eval_start_jacobian(start, sys, cand) +
                tn * eval_jacobian(sys, cand);
      CVec delta = hj.partialPivLu().solve(-h);
      if (!delta.allFinite()) break;
      cand += delta;
    }
    if (ok) {
      x = cand;
      t = tn;
      step = std::min(step * 2.0, cfg.max_step);
      if (diverged(x)) {
        res.endpoint = x;
        res.status = PathStatus::Diverged;
        return res;
      }
    } else {
      step *= 0.5;
      if (step < cfg.min_step) {
        if (diverged(cand)) {
          res.endpoint = x;
          res.status = PathStatus::Diverged;
          return res;
        }
        res.endpoint = x;
        return res;  // truncated before t = 1
      }
    }
  }
  // Endpoint polish on G alone; least-squares steps tolerate the singular
  // Jacobians that arise on continua of solutions.
  double best = eval_system(sys.equations, x).cwiseAbs().maxCoeff();
  for (int it = 0; it < 30 && best > 1e-14; ++it) {
    CMat J = eval_jacobian(sys, x);
    CVec g = eval_system(sys.equations, x);
    CVec delta = J.completeOrthogonalDecomposition().solve(-g);
    if (!delta.allFinite()) break;
    CVec cand = x + delta;
    double cres = eval_system(sys.equations, cand).cwiseAbs().maxCoeff();
    if (!std::isfinite(cres) || cres >= best) break;
    x = cand;
    best = cres;
  }
  res.endpoint = x;
  res.residual = best;
  res.status = best <= 1e-10 ? PathStatus::Converged : PathStatus::Truncated;
  return res;
}

}  // namespace

PolySystem build_poly_system(const GNet& net) {
  require_valid(net);
  const ProfileLayout& L = net.layout();
  PolySystem sys;

  // Fold frozen rows and structural zeros to constants.
  Profile fold_values = uniform_profile(net);
  std::vector<char> fold_mask(L.dim(), 0);
  for (const auto& b : L.blocks())
    for (int v = 0; v < b.size; ++v) {
      int j = b.offset + v;
      if (b.frozen || !L.coord_available(j)) fold_mask[j] = 1;
    }

  // Value polynomials are built per strategic component and remapped to full
  // coordinates. Out-of-component factors multiply the numerator and the
  // denominator of every conditional payoff alike, so the component-local
  // sums are the reduced forms of the cleared equations: same simplex
  // solutions, lowest honest degree (a joint build over the full state space
  // would carry those common factors into every equation and inflate the
  // total degree, i.e. the number of homotopy paths).
  std::vector<BlockPolys> vp;
  {
    std::vector<BlockPolys> by_block(L.blocks().size());
    std::vector<char> have(L.blocks().size(), 0);
    for (const Component& comp : strategic_components(net)) {
      const ProfileLayout& Ls = comp.net.layout();
      std::vector<int> to_full(Ls.dim(), -1);
      for (const auto& sb : Ls.blocks()) {
        int bi = L.block_index(comp.nodes[sb.node], sb.parent_assignment);
        for (int v = 0; v < sb.size; ++v)
          to_full[sb.offset + v] = L.block(bi).offset + v;
      }
      std::vector<BlockPolys> sub = value_polynomials(comp.net);
      for (BlockPolys& bp : sub) {
        const BlockInfo& sb = Ls.block(bp.block);
        BlockPolys full;
        full.block = L.block_index(comp.nodes[sb.node], sb.parent_assignment);
        full.denom = bp.denom.remap(to_full);
        full.numer.reserve(bp.numer.size());
        for (const Poly& nv : bp.numer) full.numer.push_back(nv.remap(to_full));
        have[full.block] = 1;
        by_block[full.block] = std::move(full);
      }
    }
    for (size_t i = 0; i < by_block.size(); ++i)
      if (have[i]) vp.push_back(std::move(by_block[i]));
  }
  std::vector<Poly> substitutions(L.dim());  // for eliminated coords
  std::vector<int> reduced_of(L.dim(), -1);
  for (const auto& bp : vp) {
    const BlockInfo& b = L.block(bp.block);
    PolySystem::BlockElimination elim;
    elim.block = bp.block;
    elim.eliminated_coord = b.offset + b.available.back();
    Poly sub = Poly::constant(1.0);
    for (size_t i = 0; i + 1 < b.available.size(); ++i) {
      int j = b.offset + b.available[i];
      elim.kept_coords.push_back(j);
      reduced_of[j] = static_cast<int>(sys.variables.size());
      sys.variables.push_back(j);
      sub -= Poly::variable(j);
    }
    substitutions[elim.eliminated_coord] = std::move(sub);
    sys.blocks.push_back(std::move(elim));
  }

  for (const auto& bp : vp) {
    const BlockInfo& b = L.block(bp.block);
    for (size_t i = 0; i + 1 < b.available.size(); ++i) {
      int v = b.available[i];
      int j = b.offset + v;
      Poly g = Poly::variable(j) * bp.denom - bp.numer[v];
      g = g.partial_eval(fold_mask, fold_values);
      for (const auto& be : sys.blocks)
        g = g.substitute(be.eliminated_coord, substitutions[be.eliminated_coord]);
      g = g.remap(reduced_of);
      if (g.is_zero())
        throw Error(
            "build_poly_system: a block's conditions vanish identically "
            "(every behavior is optimal there); the equilibrium set is not "
            "isolated");
      sys.equations.push_back(std::move(g));
    }
  }
  for (const auto& eq : sys.equations) {
    sys.degrees.push_back(eq.total_degree());
    sys.total_degree *= eq.total_degree();
  }
  sys.jacobian.resize(sys.equations.size());
  for (size_t i = 0; i < sys.equations.size(); ++i)
    for (int v = 0; v < sys.num_vars(); ++v)
      sys.jacobian[i].push_back(sys.equations[i].derivative(v));
  return sys;
}

Profile expand_solution(const GNet& net, const PolySystem& sys,
                        const Eigen::VectorXd& reduced) {
  const ProfileLayout& L = net.layout();
  Profile p = uniform_profile(net);
  for (const auto& be : sys.blocks) {
    const BlockInfo& b = L.block(be.block);
    for (int v : b.available) p[b.offset + v] = 0.0;
  }
  for (int r = 0; r < sys.num_vars(); ++r) p[sys.variables[r]] = reduced[r];
  for (const auto& be : sys.blocks) {
    double kept = 0.0;
    for (int j : be.kept_coords) kept += p[j];
    p[be.eliminated_coord] = 1.0 - kept;
  }
  return p;
}

StartSystem build_start_system(const PolySystem& sys, std::uint64_t seed) {
  if (sys.total_degree < 1) throw Error("build_start_system: empty system");
  StartSystem start;
  std::mt19937_64 rng(seed);
  auto draw = [&]() {
    double modulus = 0.5 + uniform01(rng);
    double phase = 2.0 * M_PI * uniform01(rng);
    return std::polar(modulus, phase);
  };
  for (int j = 0; j < sys.num_vars(); ++j) {
    start.alpha.push_back(draw());
    start.beta.push_back(draw());
  }
  // Roots: x_j ranges over the d_j-th roots of beta_j^{d_j} / alpha_j.
  std::vector<std::vector<Cplx>> per_var(sys.num_vars());
  for (int j = 0; j < sys.num_vars(); ++j) {
    int d = sys.degrees[j];
    Cplx base = std::pow(start.beta[j], d) / start.alpha[j];
    Cplx principal = std::pow(base, 1.0 / static_cast<double>(d));
    for (int k = 0; k < d; ++k)
      per_var[j].push_back(principal *
                           std::polar(1.0, 2.0 * M_PI * k / static_cast<double>(d)));
  }
  std::vector<int> idx(sys.num_vars(), 0);
  for (long long r = 0; r < sys.total_degree; ++r) {
    CVec root(sys.num_vars());
    for (int j = 0; j < sys.num_vars(); ++j) root[j] = per_var[j][idx[j]];
    double check = eval_start(start, sys, root).cwiseAbs().maxCoeff();
    if (!(check <= 1e-12))
      throw Error("build_start_system: start root fails verification");
    start.roots.push_back(std::move(root));
    for (int j = sys.num_vars() - 1; j >= 0; --j) {
      if (++idx[j] < sys.degrees[j]) break;
      idx[j] = 0;
    }
  }
  return start;
}

std::vector<ComplexPathResult> track_all_paths(const PolySystem& sys,
                                               const StartSystem& start,
                                               const AllEqConfig& cfg) {
  const long long d = static_cast<long long>(start.roots.size());
  std::vector<ComplexPathResult> results(d);
  auto work = [&](long long i) {
    results[i] = track_one_path(sys, start, start.roots[i], cfg);
  };
  if (cfg.threads <= 1) {
    for (long long i = 0; i < d; ++i) work(i);
  } else {
    std::atomic<long long> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < cfg.threads; ++w)
      pool.emplace_back([&]() {
        for (long long i = next.fetch_add(1); i < d; i = next.fetch_add(1))
          work(i);
      });
    for (auto& th : pool) th.join();
  }
  // Deterministic clustering by start-root index.
  for (long long i = 0; i < d; ++i) {
    if (results[i].status != PathStatus::Converged || results[i].cluster >= 0)
      continue;
    results[i].cluster = static_cast<int>(i);
    std::vector<long long> members{i};
    for (long long j = i + 1; j < d; ++j) {
      if (results[j].status != PathStatus::Converged || results[j].cluster >= 0)
        continue;
      if ((results[i].endpoint - results[j].endpoint).cwiseAbs().maxCoeff() <
          cfg.cluster_radius) {
        results[j].cluster = static_cast<int>(i);
        members.push_back(j);
      }
    }
    for (long long m : members)
      results[m].multiplicity = static_cast<int>(members.size());
  }
  return results;
}

namespace {

// Real least-squares Newton polish of G from a real start point. Solutions on
// continua have singular Jacobians; the minimum-norm step still settles onto
// the solution set without drifting along it.
bool polish_real(const PolySystem& sys, Eigen::VectorXd& x) {
  const int n = sys.num_vars();
  auto residual = [&](const Eigen::VectorXd& v) {
    double worst = 0.0;
    for (const auto& eq : sys.equations)
      worst = std::max(worst, std::abs(eq.eval<double>(v)));
    return worst;
  };
  double best = residual(x);
  for (int it = 0; it < 30 && best > 1e-14; ++it) {
    Eigen::MatrixXd J(n, n);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) {
      g[i] = sys.equations[i].eval<double>(x);
      for (int j = 0; j < n; ++j) J(i, j) = sys.jacobian[i][j].eval<double>(x);
    }
    Eigen::VectorXd delta = J.completeOrthogonalDecomposition().solve(-g);
    if (!delta.allFinite()) break;
    Eigen::VectorXd cand = x + delta;
    double cres = residual(cand);
    if (!std::isfinite(cres) || cres >= best) break;
    x = cand;
    best = cres;
  }
  return best <= 1e-10;
}

// Clamp-and-renormalize a raw expanded profile onto the simplex faces.
void snap_to_simplex(const GNet& net, const PolySystem& sys, Profile& p) {
  const ProfileLayout& L = net.layout();
  for (const auto& be : sys.blocks) {
    const BlockInfo& b = L.block(be.block);
    double sum = 0.0;
    for (int v : b.available) {
      double& q = p[b.offset + v];
      q = std::min(std::max(q, 0.0), 1.0);
      sum += q;
    }
    if (sum > 0.0)
      for (int v : b.available) p[b.offset + v] /= sum;
  }
}

// A witness with a singular Jacobian sits on a positive-dimensional solution
// family. When the family is a curve (nullity 1) and the witness itself is
// not Nash, probe along the curve's tangent inside the simplex for a point
// that verifies as Nash; every candidate is re-polished and re-classified,
// so nothing unverified is ever reported.
bool slide_to_nash(const GNet& net, const PolySystem& sys,
                   const AllEqConfig& cfg, const Eigen::VectorXd& witness,
                   Eigen::VectorXd& out, EquilibriumClass& out_cls) {
  const int n = sys.num_vars();
  Eigen::MatrixXd J(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      J(i, j) = sys.jacobian[i][j].eval<double>(witness);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
  const Eigen::VectorXd& sing = svd.singularValues();
  double scale = sing.size() ? sing[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < sing.size(); ++i)
    if (sing[i] > std::max(1e-8 * scale, 1e-12)) ++rank;
  if (n - rank != 1) return false;
  Eigen::VectorXd dir = svd.matrixV().col(n - 1);
  // Feasible parameter range: every kept coordinate and every eliminated
  // (1 - sum) coordinate must stay within [0, 1].
  double lo = -2.0, hi = 2.0;
  auto bound = [&](double value, double slope) {
    if (std::abs(slope) < 1e-14) return;
    double a = (0.0 - value) / slope, b = (1.0 - value) / slope;
    if (a > b) std::swap(a, b);
    lo = std::max(lo, a);
    hi = std::min(hi, b);
  };
  for (int r = 0; r < n; ++r) bound(witness[r], dir[r]);
  for (const auto& be : sys.blocks) {
    double value = 1.0, slope = 0.0;
    for (int j : be.kept_coords) {
      int r = 0;
      while (sys.variables[r] != j) ++r;
      value -= witness[r];
      slope -= dir[r];
    }
    bound(value, slope);
  }
  if (!(hi > lo)) return false;
  const int kSamples = 65;
  for (int k = 0; k < kSamples; ++k) {
    double s = lo + (hi - lo) * static_cast<double>(k) / (kSamples - 1);
    Eigen::VectorXd cand = witness + s * dir;
    if (!polish_real(sys, cand)) continue;
    Profile p = expand_solution(net, sys, cand);
    bool feasible = true;
    const ProfileLayout& L = net.layout();
    for (const auto& be : sys.blocks) {
      const BlockInfo& b = L.block(be.block);
      for (int v : b.available) {
        double q = p[b.offset + v];
        if (q < -cfg.imag_tol || q > 1.0 + cfg.imag_tol) feasible = false;
      }
    }
    if (!feasible) continue;
    snap_to_simplex(net, sys, p);
    EquilibriumClass cls = classify(net, p, Provenance::PolynomialRoot,
                                    cfg.nash_tol);
    if (cls.verdict.is_nash) {
      out = std::move(cand);
      out_cls = std::move(cls);
      return true;
    }
  }
  return false;
}

}  // namespace

EquilibriumReport filter_and_classify(const GNet& net, const PolySystem& sys,
                                      const std::vector<ComplexPathResult>& results,
                                      const AllEqConfig& cfg) {
  const ProfileLayout& L = net.layout();
  EquilibriumReport report;
  report.total_paths = static_cast<long long>(results.size());
  for (size_t i = 0; i < results.size(); ++i) {
    const ComplexPathResult& r = results[i];
    switch (r.status) {
      case PathStatus::Converged: ++report.paths_converged; break;
      case PathStatus::Diverged: ++report.paths_diverged; break;
      case PathStatus::Truncated: ++report.paths_truncated; break;
    }
    if (r.status != PathStatus::Converged ||
        r.cluster != static_cast<int>(i))
      continue;  // only cluster representatives are inspected further
    Eigen::VectorXd reduced = r.endpoint.real();
    if (r.endpoint.imag().cwiseAbs().maxCoeff() > cfg.imag_tol) {
      // Genuinely complex endpoints are discarded — unless they sit on the
      // complexification of a real solution continuum, in which case the
      // real part re-polishes to a true real solution (a witness point on
      // the continuum) and is kept if it independently verifies.
      if (!polish_real(sys, reduced)) {
        report.complex_or_infeasible += r.multiplicity;
        continue;
      }
    }
    Profile p = expand_solution(net, sys, reduced);
    bool feasible = true;
    for (const auto& be : sys.blocks) {
      const BlockInfo& b = L.block(be.block);
      for (int v : b.available) {
        double q = p[b.offset + v];
        if (q < -cfg.imag_tol || q > 1.0 + cfg.imag_tol) feasible = false;
      }
    }
    if (!feasible) {
      report.complex_or_infeasible += r.multiplicity;
      continue;
    }
    snap_to_simplex(net, sys, p);
    EquilibriumReport::Solution sol;
    sol.cls = classify(net, p, Provenance::PolynomialRoot, cfg.nash_tol);
    if (!sol.cls.verdict.is_nash) {
      Eigen::VectorXd slid;
      EquilibriumClass slid_cls;
      if (slide_to_nash(net, sys, cfg, reduced, slid, slid_cls)) {
        p = expand_solution(net, sys, slid);
        snap_to_simplex(net, sys, p);
        sol.cls = std::move(slid_cls);
      }
    }
    sol.profile = std::move(p);
    sol.multiplicity = r.multiplicity;
    if (sol.cls.verdict.is_nash)
      report.nash.push_back(std::move(sol));
    else
      report.fixed_points_non_nash.push_back(std::move(sol));
  }
  // Realified witnesses can duplicate endpoints that were already real;
  // merge coincident solutions, keeping first-seen order.
  auto dedupe = [&](std::vector<EquilibriumReport::Solution>& list) {
    std::vector<EquilibriumReport::Solution> unique;
    for (auto& sol : list) {
      bool merged = false;
      for (auto& keep : unique)
        if ((keep.profile - sol.profile).cwiseAbs().maxCoeff() <
            cfg.cluster_radius) {
          keep.multiplicity += sol.multiplicity;
          merged = true;
          break;
        }
      if (!merged) unique.push_back(std::move(sol));
    }
    list = std::move(unique);
  };
  dedupe(report.nash);
  dedupe(report.fixed_points_non_nash);
  return report;
}

EquilibriumReport all_equilibria(const GNet& net, const AllEqConfig& cfg) {
  PolySystem sys = build_poly_system(net);
  if (sys.equations.empty()) {
    // No free decisions at all: the empty system has exactly one solution
    // (its total degree), and the unique profile is trivially Nash.
    EquilibriumReport report;
    report.total_paths = 1;
    report.paths_converged = 1;
    Profile p = uniform_profile(net);
    EquilibriumReport::Solution sol;
    sol.cls = classify(net, p, Provenance::PolynomialRoot, cfg.nash_tol);
    sol.profile = std::move(p);
    report.nash.push_back(std::move(sol));
    return report;
  }
  if (sys.total_degree > cfg.max_total_degree) {
    std::ostringstream os;
    os << "all_equilibria: total degree " << sys.total_degree
       << " exceeds the configured limit " << cfg.max_total_degree;
    throw Error(os.str());
  }
  StartSystem start = build_start_system(sys, cfg.rng_seed);
  return filter_and_classify(net, sys, track_all_paths(sys, start, cfg), cfg);
}

EquilibriumReport all_equilibria_decomposed(const GNet& net,
                                            const AllEqConfig& cfg) {
  require_valid(net);
  std::vector<Component> comps = strategic_components(net);
  if (comps.size() <= 1) return all_equilibria(net, cfg);
  EquilibriumReport report;
  std::vector<EquilibriumReport> parts;
  for (const auto& comp : comps) {
    parts.push_back(all_equilibria(comp.net, cfg));
    const EquilibriumReport& pr = parts.back();
    report.complex_or_infeasible += pr.complex_or_infeasible;
    report.paths_converged += pr.paths_converged;
    report.paths_diverged += pr.paths_diverged;
    report.paths_truncated += pr.paths_truncated;
    report.total_paths += pr.total_paths;
  }
  // Cartesian product of the component Nash lists.
  std::vector<EquilibriumReport::Solution> joint;
  joint.push_back({uniform_profile(net), {}, 1});
  for (size_t c = 0; c < comps.size(); ++c) {
    std::vector<EquilibriumReport::Solution> grown;
    for (const auto& base : joint)
      for (const auto& sol : parts[c].nash) {
        EquilibriumReport::Solution next = base;
        scatter_profile(net, comps[c], sol.profile, next.profile);
        next.multiplicity *= sol.multiplicity;
        grown.push_back(std::move(next));
      }
    joint = std::move(grown);
  }
  for (auto& sol : joint) {
    sol.cls = classify(net, sol.profile, Provenance::PolynomialRoot, cfg.nash_tol);
    report.nash.push_back(std::move(sol));
  }
  return report;
}

}  // namespace gnet
