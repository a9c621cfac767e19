#pragma once

// Complete equilibrium enumeration. Per free block one coordinate is
// eliminated by the normalization constraint; the remaining coordinates j
// satisfy the cleared fixed-point conditions
//
//   G_j = D_j * p_j - N_j = 0
//
// (polynomials after substitution), whose simplex solutions contain every
// equilibrium. All roots are found by a total-degree homotopy: a random start
// system G0_j = alpha_j p_j^{d_j} - beta_j^{d_j} with known roots is deformed
// into G along h = (1-t) G0 + t G, and all d = prod d_j paths are tracked in
// complex space. Endpoints are polished, clustered, filtered to the real
// simplex and classified. Degrees are computed from the expanded polynomials,
// never assumed.

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gnet/equilibrium.hpp"
#include "gnet/model.hpp"
#include "gnet/polynomial.hpp"
#include "gnet/profile.hpp"

namespace gnet {

struct PolySystem {
  struct BlockElimination {
    int block = 0;                 // layout block index
    int eliminated_coord = 0;      // full coordinate substituted by 1 - sum
    std::vector<int> kept_coords;  // full coordinates kept as variables
  };
  std::vector<Poly> equations;  // over reduced variable indices
  std::vector<std::vector<Poly>> jacobian;  // [equation][variable]
  std::vector<int> degrees;
  std::vector<int> variables;  // reduced variable -> full coordinate
  std::vector<BlockElimination> blocks;
  long long total_degree = 1;

  int num_vars() const { return static_cast<int>(variables.size()); }
};

// Equations are assembled per strategic component (out-of-component factors
// divide out of every conditional payoff), so the degrees are the reduced
// ones even when the system is later tracked jointly.
PolySystem build_poly_system(const GNet& net);

// Reduced solution -> full profile: kept coordinates copied, eliminated ones
// reconstructed as 1 - sum(kept), frozen rows and structural zeros filled in.
Profile expand_solution(const GNet& net, const PolySystem& sys,
                        const Eigen::VectorXd& reduced);

struct StartSystem {
  std::vector<std::complex<double>> alpha, beta;
  std::vector<Eigen::VectorXcd> roots;  // all total_degree start roots
};

// Random-phase start system with verified closed-form roots (deterministic
// per seed).
StartSystem build_start_system(const PolySystem& sys, std::uint64_t seed);

struct AllEqConfig {
  std::uint64_t rng_seed = 0;
  double initial_step = 0.02;
  double min_step = 1e-10;
  double max_step = 0.05;
  double corrector_tol = 1e-10;
  int max_newton_iters = 20;
  int max_steps_per_path = 20000;
  double divergence_threshold = 1e8;
  double cluster_radius = 1e-6;
  double imag_tol = 1e-7;
  double nash_tol = 1e-6;
  long long max_total_degree = 1000000;
  int threads = 1;
};

enum class PathStatus { Converged, Diverged, Truncated };

struct ComplexPathResult {
  Eigen::VectorXcd endpoint;
  PathStatus status = PathStatus::Truncated;
  double residual = 0.0;  // ||G(endpoint)|| for converged paths (max norm)
  int steps = 0;
  int cluster = -1;       // index of the cluster representative path
  int multiplicity = 0;   // cluster size, stamped on every member
};

// Tracks every start root; results indexed by start-root order regardless of
// cfg.threads. Converged endpoints are Newton-polished on G (least-squares
// steps, so singular endpoints on solution continua still settle) and
// clustered at cfg.cluster_radius.
std::vector<ComplexPathResult> track_all_paths(const PolySystem& sys,
                                               const StartSystem& start,
                                               const AllEqConfig& cfg = {});

struct EquilibriumReport {
  struct Solution {
    Profile profile;
    EquilibriumClass cls;
    int multiplicity = 1;
  };
  std::vector<Solution> nash;
  std::vector<Solution> fixed_points_non_nash;
  long long complex_or_infeasible = 0;  // converged but filtered out
  long long paths_converged = 0;
  long long paths_diverged = 0;
  long long paths_truncated = 0;
  long long total_paths = 0;
};

// Imaginary-part and simplex filters, then classification. Multiplicities of
// nash/fixed-point/filtered entries plus diverged and truncated paths sum to
// the number of tracked paths.
EquilibriumReport filter_and_classify(const GNet& net, const PolySystem& sys,
                                      const std::vector<ComplexPathResult>& results,
                                      const AllEqConfig& cfg = {});

// Whole pipeline on one net.
EquilibriumReport all_equilibria(const GNet& net, const AllEqConfig& cfg = {});

// Per-component pipelines; the joint Nash list is the Cartesian product of
// the component Nash lists (total paths tracked is the sum, not the product,
// of component total degrees). Non-Nash fixed points are not materialized
// jointly; path statistics are summed.
EquilibriumReport all_equilibria_decomposed(const GNet& net,
                                            const AllEqConfig& cfg = {});

}  // namespace gnet
