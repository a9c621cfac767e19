#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"

#include "gnet/equilibrium.hpp"
#include "gnet/first_equilibrium.hpp"

using namespace gnet;

namespace {

Profile bimatrix_profile(double p, double q) {
  Profile x(4);
  x << p, 1.0 - p, q, 1.0 - q;
  return x;
}

}  // namespace

TEST_CASE("fixed-point and inequality Nash tests agree on a grid") {
  std::mt19937_64 rng(101);
  for (int game = 0; game < 6; ++game) {
    GNet net = testutil::random_bimatrix_2x2(rng);
    for (int i = 0; i <= 20; ++i)
      for (int j = 0; j <= 20; ++j) {
        Profile x = bimatrix_profile(i / 20.0, j / 20.0);
        NashVerdict a = is_nash_prop3(net, x, 1e-9);
        NashVerdict b = is_nash_inequality(net, x, 1e-9);
        CHECK(a.is_nash == b.is_nash);
      }
  }
}

TEST_CASE("known equilibria of the fixture games") {
  GNet mp = testutil::load_game("matching_pennies.gnet");
  CHECK(is_nash_prop3(mp, bimatrix_profile(0.5, 0.5)).is_nash);
  CHECK_FALSE(is_nash_prop3(mp, bimatrix_profile(1.0, 1.0)).is_nash);
  CHECK_FALSE(is_nash_prop3(mp, bimatrix_profile(0.5, 0.6)).is_nash);

  GNet coord = testutil::load_game("coordination.gnet");
  CHECK(is_nash_prop3(coord, bimatrix_profile(1.0, 0.0)).is_nash);
  CHECK(is_nash_prop3(coord, bimatrix_profile(0.0, 1.0)).is_nash);
  CHECK(is_nash_prop3(coord, bimatrix_profile(1.0 / 3.0, 1.0 / 3.0))
            .is_nash);
  CHECK_FALSE(is_nash_prop3(coord, bimatrix_profile(1.0, 1.0)).is_nash);
  CHECK_FALSE(is_nash_prop3(coord, bimatrix_profile(0.5, 0.5)).is_nash);
}

TEST_CASE("verdicts carry support, reachability and violations") {
  GNet net = testutil::load_game("beer_quiche.gnet");
  const ProfileLayout& layout = net.layout();
  // Pool on Beer with p2 answering N after B and F after Q (sigma = 1).
  Profile p = uniform_profile(net);
  p[layout.coord(1, 0, 0)] = 1.0;
  p[layout.coord(1, 1, 0)] = 0.0;
  p[layout.coord(1, 0, 1)] = 1.0;
  p[layout.coord(1, 1, 1)] = 0.0;
  p[layout.coord(2, 0, 0)] = 1.0;
  p[layout.coord(2, 1, 0)] = 0.0;
  p[layout.coord(2, 0, 1)] = 0.0;
  p[layout.coord(2, 1, 1)] = 1.0;
  NashVerdict v = is_nash_prop3(net, p);
  CHECK(v.is_nash);
  REQUIRE(v.unreachable_blocks.size() == 1);
  CHECK(v.unreachable_blocks[0] == layout.block_index(2, 1));

  // Drop the off-path threat below 2/5: type W now deviates to Quiche.
  p[layout.coord(2, 0, 1)] = 0.8;
  p[layout.coord(2, 1, 1)] = 0.2;
  NashVerdict bad = is_nash_prop3(net, p);
  CHECK_FALSE(bad.is_nash);
  CHECK(bad.worst_violation > 1e-3);
  CHECK_FALSE(bad.violations.empty());
}

TEST_CASE("monotonicity holds at relaxed fixed points") {
  std::mt19937_64 rng(202);
  for (int game = 0; game < 8; ++game) {
    GNet net = testutil::random_bimatrix_2x2(rng);
    for (double eps : {0.5, 0.1, 0.01}) {
      Profile start = uniform_profile(net);
      Profile p = converge_relaxed_fixed_point(net, start, eps);
      MonotonicityCheck mc = check_prop4_monotonicity(net, p, eps);
      CHECK(mc.holds);
      CHECK(mc.witnesses.empty());
    }
  }
}

TEST_CASE("monotonicity check rejects non fixed points") {
  GNet net = testutil::load_game("matching_pennies.gnet");
  Profile p = bimatrix_profile(0.9, 0.2);
  CHECK_THROWS_AS(check_prop4_monotonicity(net, p, 0.5), Error);
}

TEST_CASE("classification labels by provenance and tests") {
  GNet mp = testutil::load_game("matching_pennies.gnet");
  Profile center = bimatrix_profile(0.5, 0.5);
  Profile vertex = bimatrix_profile(1.0, 1.0);
  Profile off = bimatrix_profile(0.3, 0.7);

  EquilibriumClass c1 = classify(mp, center, Provenance::PolynomialRoot);
  CHECK(c1.label == EquilibriumLabel::Nash);
  CHECK(c1.verdict.is_nash);
  CHECK(c1.f_residual <= 1e-12);

  EquilibriumClass c2 = classify(mp, center, Provenance::HomotopyEndpoint);
  CHECK(c2.label == EquilibriumLabel::RobustCandidate);
  CHECK(c2.verdict.is_nash);

  EquilibriumClass c3 = classify(mp, vertex, Provenance::PolynomialRoot);
  CHECK(c3.label == EquilibriumLabel::FixedPointNonNash);
  CHECK(c3.f_residual <= 1e-12);
  CHECK_FALSE(c3.verdict.is_nash);

  EquilibriumClass c4 = classify(mp, off, Provenance::UserSupplied);
  CHECK(c4.label == EquilibriumLabel::NotEquilibrium);
  CHECK(c4.f_residual > 1e-3);

  CHECK(std::string(to_string(c1.label)) == "Nash");
  CHECK(std::string(to_string(c2.label)) == "RobustCandidate");
  CHECK(std::string(to_string(c3.label)) == "FixedPointNonNash");
  CHECK(std::string(to_string(c4.label)) == "NotEquilibrium");
}

TEST_CASE("conditional payoffs average to one on the support") {
  // At any interior profile, each block's p-weighted mean conditional payoff
  // is exactly 1; at equilibrium every supported payoff individually is 1.
  std::mt19937_64 rng(303);
  for (int rep = 0; rep < 10; ++rep) {
    GNet net = testutil::random_net(rng);
    Profile p = testutil::random_interior_profile(net, rng);
    Eigen::VectorXd u = conditional_utilities(net, p);
    const ProfileLayout& layout = net.layout();
    for (const BlockInfo& b : layout.blocks()) {
      if (b.frozen) continue;
      double mean = 0.0;
      bool reachable = true;
      for (int v : b.available) {
        if (std::isnan(u[b.offset + v])) reachable = false;
        else mean += p[b.offset + v] * u[b.offset + v];
      }
      if (reachable) CHECK(mean == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}
