#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"

#include "gnet/first_equilibrium.hpp"

using namespace gnet;

TEST_CASE("relaxed map stays on the simplex and is interior for eps > 0") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    GNet net = testutil::random_net(rng);
    Profile p = testutil::random_interior_profile(net, rng);
    for (double eps : {1.0, 0.5, 0.05}) {
      Eigen::VectorXd f = f_epsilon(net, p, eps);
      CHECK(check_profile(net, f, 1e-9).empty());
    }
    // eps = 1 gives back the uniform start regardless of p.
    Eigen::VectorXd f1 = f_epsilon(net, p, 1.0);
    CHECK((f1 - uniform_profile(net)).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("residual Jacobian matches central differences") {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 8; ++rep) {
    GNet net = testutil::random_net(rng, 3, 3);
    Profile p = testutil::random_interior_profile(net, rng);
    const double eps = 0.3;
    Eigen::MatrixXd J = jacobian_F_eps(net, p, eps);
    const double h = 1e-6;
    for (int j = 0; j < p.size(); ++j) {
      Profile pp = p, pm = p;
      pp[j] += h;
      pm[j] -= h;
      Eigen::VectorXd fd =
          (residual_F_eps(net, pp, eps) - residual_F_eps(net, pm, eps)) /
          (2.0 * h);
      for (int i = 0; i < p.size(); ++i)
        CHECK(J(i, j) == doctest::Approx(fd[i]).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("matching pennies tracks to the center") {
  GNet net = testutil::load_game("matching_pennies.gnet");
  FirstEquilibriumResult res = track_first_equilibrium(net);
  for (int j = 0; j < 4; ++j)
    CHECK(res.profile[j] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(res.cls.verdict.is_nash);
  CHECK(res.cls.label == EquilibriumLabel::RobustCandidate);
  CHECK(res.path.perturbation_attempts == 0);
  // The tracked path starts at the uniform profile at t = 0.
  REQUIRE_FALSE(res.path.states.empty());
  CHECK(res.path.states.front().t == 0.0);
  CHECK((res.path.states.front().p - uniform_profile(net)).cwiseAbs().maxCoeff() <=
        1e-15);
  for (size_t i = 1; i < res.path.states.size(); ++i)
    CHECK(res.path.states[i].t > res.path.states[i - 1].t);
}

TEST_CASE("dominance-solvable game reaches its unique equilibrium") {
  GNet net = testutil::load_game("dominance.gnet");
  FirstEquilibriumResult res = track_first_equilibrium(net);
  CHECK(res.profile[0] == doctest::Approx(0.0).epsilon(1e-6));  // a1
  CHECK(res.profile[1] == doctest::Approx(1.0).epsilon(1e-6));  // a2
  CHECK(res.profile[2] == doctest::Approx(0.0).epsilon(1e-6));  // b1
  CHECK(res.profile[3] == doctest::Approx(1.0).epsilon(1e-6));  // b2
  CHECK(res.cls.verdict.is_nash);
}

TEST_CASE("weakly dominated action vanishes at the endpoint") {
  GNet net = testutil::load_game("weak_dominance.gnet");
  FirstEquilibriumResult res = track_first_equilibrium(net);
  CHECK(res.cls.verdict.is_nash);
  CHECK(res.profile[1] < 1e-4);  // P(B), the weakly dominated action
}

TEST_CASE("endpoints of random games verify as Nash") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    GNet net = testutil::random_bimatrix_2x2(rng);
    FirstEquilibriumResult res = track_first_equilibrium(net);
    CHECK(res.cls.verdict.is_nash);
    CHECK(is_nash_prop3(net, res.profile, 1e-6).is_nash);
  }
}

TEST_CASE("frozen blocks never move along the path") {
  GNet net = testutil::load_game("beer_quiche.gnet");
  FirstEquilibriumResult res = track_first_equilibrium(net);
  for (const HomotopyState& s : res.path.states) {
    CHECK(std::abs(s.p[0] - 0.9) <= 1e-12);
    CHECK(std::abs(s.p[1] - 0.1) <= 1e-12);
  }
  // The polished endpoint re-imposes the fixed conditionals exactly.
  CHECK(res.profile[0] == 0.9);
  CHECK(res.profile[1] == 0.1);
  CHECK(res.cls.verdict.is_nash);
}

TEST_CASE("single free node tracks to its best value and snaps the face") {
  GNet net;
  net.players = {"solo"};
  GNode n;
  n.name = "N";
  n.player = 0;
  n.domain = {"low", "high"};
  net.nodes = {n};
  PotentialTable w;
  w.player = 0;
  w.node = 0;
  w.entries = Eigen::ArrayXXd::Ones(2, 1);
  w.entries(1, 0) = 2.0;
  net.potentials.push_back(w);
  require_valid(net);
  FirstEquilibriumResult res = track_first_equilibrium(net);
  CHECK(res.profile[0] == 0.0);
  CHECK(res.profile[1] == 1.0);
  CHECK(res.cls.verdict.is_nash);
}

TEST_CASE("degenerate net where every profile is an equilibrium") {
  // A single potential that is identically 1 makes the value map the
  // identity; the path never leaves the uniform start.
  GNet net;
  net.players = {"solo"};
  GNode n;
  n.name = "N";
  n.player = 0;
  n.domain = {"x", "y"};
  net.nodes = {n};
  require_valid(net);
  FirstEquilibriumResult res = track_first_equilibrium(net);
  CHECK(res.profile[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(res.cls.verdict.is_nash);
}

TEST_CASE("damped iteration reproduces tracker states at fixed eps") {
  GNet net = testutil::load_game("coordination.gnet");
  TrackerConfig cfg;
  FirstEquilibriumResult res = track_first_equilibrium(net, cfg);
  // Re-converge a path state at frozen eps and compare. Pick the accepted
  // state nearest t = 0.35: far enough along to be nontrivial, close enough
  // to the start that the damped iteration is safely contractive.
  REQUIRE(res.path.states.size() >= 3);
  size_t pick = 0;
  for (size_t i = 1; i < res.path.states.size(); ++i)
    if (std::abs(res.path.states[i].t - 0.35) <
        std::abs(res.path.states[pick].t - 0.35))
      pick = i;
  const HomotopyState& mid = res.path.states[pick];
  double eps = 1.0 - mid.t;
  Profile q = converge_relaxed_fixed_point(net, mid.p, eps, 1e-13);
  CHECK((q - mid.p).cwiseAbs().maxCoeff() <= 1e-6);
  Eigen::VectorXd r = residual_F_eps(net, q, eps);
  CHECK(r.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("deterministic: identical runs produce identical paths") {
  GNet net = testutil::load_game("coordination.gnet");
  TrackerConfig cfg;
  cfg.rng_seed = 42;
  FirstEquilibriumResult a = track_first_equilibrium(net, cfg);
  FirstEquilibriumResult b = track_first_equilibrium(net, cfg);
  REQUIRE(a.path.states.size() == b.path.states.size());
  CHECK((a.profile - b.profile).cwiseAbs().maxCoeff() == 0.0);
  for (size_t i = 0; i < a.path.states.size(); ++i) {
    CHECK(a.path.states[i].t == b.path.states[i].t);
    CHECK((a.path.states[i].p - b.path.states[i].p).cwiseAbs().maxCoeff() ==
          0.0);
  }
}

TEST_CASE("decomposed tracking agrees with joint tracking") {
  GNet net = testutil::load_game("pennies_coordination.gnet");
  DecomposedFirstEquilibrium dec = first_equilibrium_decomposed(net);
  CHECK(dec.components.size() == 2);
  CHECK(dec.cls.verdict.is_nash);
  FirstEquilibriumResult joint = track_first_equilibrium(net);
  CHECK((dec.profile - joint.profile).cwiseAbs().maxCoeff() <= 1e-6);
}
