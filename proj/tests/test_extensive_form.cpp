#include <cmath>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"

#include "gnet/extensive_form.hpp"
#include "gnet/first_equilibrium.hpp"
#include "gnet/io.hpp"

using namespace gnet;

namespace {

// Minimal helpers for building trees in code.
int add_decision(EfTree& t, std::string name, int parent, int parent_action,
                 int player, std::string stage, std::string infoset,
                 std::vector<std::string> actions) {
  EfTree::Node n;
  n.kind = EfTree::Kind::Decision;
  n.name = std::move(name);
  n.parent = parent;
  n.parent_action = parent_action;
  n.player = player;
  n.stage = std::move(stage);
  n.infoset = std::move(infoset);
  n.actions = std::move(actions);
  t.nodes.push_back(std::move(n));
  return static_cast<int>(t.nodes.size()) - 1;
}

int add_leaf(EfTree& t, std::string name, int parent, int parent_action,
             std::vector<double> payoffs) {
  EfTree::Node n;
  n.kind = EfTree::Kind::Leaf;
  n.name = std::move(name);
  n.parent = parent;
  n.parent_action = parent_action;
  n.payoffs = Eigen::Map<Eigen::VectorXd>(payoffs.data(),
                                          static_cast<int>(payoffs.size()));
  t.nodes.push_back(std::move(n));
  return static_cast<int>(t.nodes.size()) - 1;
}

bool mentions(const std::vector<std::string>& errs, const std::string& what) {
  for (const auto& e : errs)
    if (e.find(what) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("tree validation catches structural defects") {
  EfTree good = parse_ef(testutil::fixture_text("beer_quiche.ef"));
  CHECK(validate_ef(good).empty());

  SUBCASE("chance probabilities must sum to one") {
    EfTree t = good;
    t.nodes[0].probs = {0.9, 0.2};
    CHECK(mentions(validate_ef(t), "chance node"));
  }
  SUBCASE("leaf payoffs must be strictly positive") {
    EfTree t = good;
    t.nodes[t.nodes.size() - 1].payoffs[0] = 0.0;
    CHECK(mentions(validate_ef(t), "leaf"));
  }
  SUBCASE("leaf payoff count must match the player list") {
    EfTree t = good;
    t.nodes[t.nodes.size() - 1].payoffs = Eigen::VectorXd::Ones(3);
    CHECK(mentions(validate_ef(t), "payoff count"));
  }
  SUBCASE("information sets must agree on the action list") {
    EfTree t = good;
    t.nodes[5].actions = {"N", "F", "X"};  // F_WB, shares infoset F@B
    auto errs = validate_ef(t);
    CHECK(!errs.empty());
  }
  SUBCASE("an information set cannot span two players") {
    EfTree t = good;
    t.nodes[5].player = 0;  // F_WB claimed by p1
    CHECK(mentions(validate_ef(t), "players"));
  }
  SUBCASE("parent references must be sound") {
    EfTree t = good;
    t.nodes[3].parent_action = 7;
    CHECK(mentions(validate_ef(t), "parent action"));
  }
}

TEST_CASE("perfect recall is enforced") {
  // One player moves twice but the second stage pools across the first
  // stage's own action.
  EfTree t;
  t.players = {"p1"};
  int a = add_decision(t, "A", -1, -1, 0, "A", "A@r", {"a1", "a2"});
  int c1 = add_decision(t, "C1", a, 0, 0, "C", "C@same", {"c1", "c2"});
  int c2 = add_decision(t, "C2", a, 1, 0, "C", "C@same", {"c1", "c2"});
  add_leaf(t, "L1", c1, 0, {1.0});
  add_leaf(t, "L2", c1, 1, {2.0});
  add_leaf(t, "L3", c2, 0, {3.0});
  add_leaf(t, "L4", c2, 1, {4.0});
  auto errs = validate_ef(t);
  CHECK(mentions(errs, "perfect recall"));
  CHECK_THROWS_AS(require_valid_ef(t), Error);
}

TEST_CASE("observation patterns without a parent representation are refused") {
  // A third player observes the parity of two earlier binary moves: each of
  // its information sets pools two distinct parent assignments, so no parent
  // set can both respect the information sets and select them by value.
  EfTree t;
  t.players = {"p1", "p2", "p3"};
  int a = add_decision(t, "A", -1, -1, 0, "A", "A@r", {"a1", "a2"});
  int b1 = add_decision(t, "B1", a, 0, 1, "B", "B@o", {"b1", "b2"});
  int b2 = add_decision(t, "B2", a, 1, 1, "B", "B@o", {"b1", "b2"});
  int f11 = add_decision(t, "F11", b1, 0, 2, "F", "F@even", {"f1", "f2"});
  int f12 = add_decision(t, "F12", b1, 1, 2, "F", "F@odd", {"f1", "f2"});
  int f21 = add_decision(t, "F21", b2, 0, 2, "F", "F@odd", {"f1", "f2"});
  int f22 = add_decision(t, "F22", b2, 1, 2, "F", "F@even", {"f1", "f2"});
  int li = 0;
  for (int f : {f11, f12, f21, f22})
    for (int act : {0, 1})
      add_leaf(t, "L" + std::to_string(li++), f, act, {1.0, 1.0, 1.0});
  REQUIRE(validate_ef(t).empty());
  CHECK_THROWS_WITH_AS(ef_to_gframe(t),
                       doctest::Contains("unsupported structure"), Error);
}

TEST_CASE("signaling tree converts to the hand-written network") {
  EfTree tree = parse_ef(testutil::fixture_text("beer_quiche.ef"));
  GNet converted = ef_to_gframe(tree);
  CHECK(validate(converted).empty());
  GNet hand = testutil::load_game("beer_quiche.gnet");
  // The conversion reproduces the fixture exactly, including the numbers:
  // payoffs are telescoped with correctly-rounded divisions.
  CHECK(print_game(converted) == print_game(hand));
  auto [params, leaves] = parameter_count(converted);
  CHECK(params == 8);
  CHECK(leaves == 16);
}

TEST_CASE("skipped stages get padded, forced and pruned") {
  EfTree tree = parse_ef(testutil::fixture_text("single_skip.ef"));
  GNet net = ef_to_gframe(tree);
  CHECK(validate(net).empty());
  REQUIRE(net.nodes.size() == 2);
  CHECK(net.nodes[0].name == "s1");
  CHECK(net.nodes[1].name == "s2");
  REQUIRE(net.nodes[1].inactive_value.has_value());
  CHECK(*net.nodes[1].inactive_value == 2);
  CHECK(net.nodes[1].domain[2] == "inactive");
  REQUIRE(net.nodes[1].forced_rows.size() == 1);
  CHECK(net.nodes[1].forced_rows[0].parent_assignment == 1);  // after "stop"
  CHECK(net.nodes[1].forced_rows[0].value == 2);

  // Payoffs relative to the reference play (go, l): the other full play
  // (go, r) pays 1/4 and stopping pays 1/2.
  auto u = [&](int s1, int s2) {
    Assignment x{s1, s2};
    return utility(net, 0, x);
  };
  CHECK(u(0, 0) == 1.0);
  CHECK(u(0, 1) == 0.25);
  CHECK(u(1, 2) == 0.5);

  FirstEquilibriumResult res = track_first_equilibrium(net);
  CHECK(res.cls.verdict.is_nash);
  CHECK(res.profile[0] == 1.0);  // go
  CHECK(res.profile[2] == 1.0);  // l
  CHECK(res.profile[7] == 1.0);  // forced inactive row after stop
}

TEST_CASE("agent form of a one-shot game is its payoff tensor") {
  GNet net = testutil::load_game("matching_pennies.gnet");
  AgentForm ag = to_agent_form(net);
  REQUIRE(ag.players.size() == 2);
  CHECK(ag.joint_count == 4);
  CHECK(ag.players[0].owner == 0);
  CHECK(ag.players[1].owner == 1);
  CHECK(ag.players[0].actions == std::vector<int>{0, 1});
  REQUIRE(ag.payoff.size() == 2);
  // Joint index: first pseudo-player most significant.
  Eigen::ArrayXd u1(4), u2(4);
  u1 << 1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0;
  u2 << 1.0, 3.0, 3.0, 1.0;
  CHECK((ag.payoff[0] - u1).abs().maxCoeff() == 0.0);
  CHECK((ag.payoff[1] - u2).abs().maxCoeff() == 0.0);
  CHECK(dump_agent_form(ag).find("pseudo_players: 2") != std::string::npos);
}

TEST_CASE("agent form averages over chance and forced rows") {
  GNet net = testutil::load_game("beer_quiche.gnet");
  AgentForm ag = to_agent_form(net);
  REQUIRE(ag.players.size() == 4);  // two type-conditional orders, two meals
  CHECK(ag.joint_count == 16);
  // Pure pooling on the first meal with a pacifist response everywhere:
  // expected payoff of p1 is 0.9*1 + 0.1*1 = 1.
  // Joint choice (B,B,N,N) = index 0 under most-significant-first order.
  CHECK(ag.payoff[0][0] == doctest::Approx(1.0).epsilon(1e-12));
  // Pooling on the second meal with no fighting: 0.9*(1/2) + 0.1*(3/2).
  // Joint choice (Q,Q,N,N) -> index 1*8 + 1*4 = 12.
  CHECK(ag.payoff[0][12] == doctest::Approx(0.6).epsilon(1e-12));
  // The tensor guard refuses oversized enumerations.
  CHECK_THROWS_AS(to_agent_form(net, 8), Error);
}

TEST_CASE("support enumeration oracle on the fixture games") {
  SUBCASE("unique mixed point") {
    AgentForm ag =
        to_agent_form(testutil::load_game("matching_pennies.gnet"));
    OracleReport rep = oracle_support_enumeration(ag);
    CHECK(rep.complete);
    CHECK(rep.unresolved_supports == 0);
    REQUIRE(rep.solutions.size() == 1);
    CHECK_FALSE(rep.solutions[0].segment);
    CHECK(rep.solutions[0].certified);
    CHECK((rep.solutions[0].lo -
           0.5 * Eigen::VectorXd::Ones(4)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("three isolated equilibria") {
    AgentForm ag = to_agent_form(testutil::load_game("coordination.gnet"));
    OracleReport rep = oracle_support_enumeration(ag);
    CHECK(rep.complete);
    REQUIRE(rep.solutions.size() == 3);
    Profile pure1(4), pure2(4), mixed(4);
    pure1 << 1, 0, 0, 1;
    pure2 << 0, 1, 1, 0;
    mixed << 1.0 / 3, 2.0 / 3, 1.0 / 3, 2.0 / 3;
    for (const Profile& want : {pure1, pure2, mixed}) {
      double best = 1.0;
      for (const auto& s : rep.solutions)
        best = std::min(best, (s.lo - want).cwiseAbs().maxCoeff());
      CHECK(best <= 1e-9);
    }
  }
  SUBCASE("full one-dimensional family") {
    AgentForm ag = to_agent_form(testutil::load_game("weak_dominance.gnet"));
    OracleReport rep = oracle_support_enumeration(ag);
    CHECK(rep.complete);
    REQUIRE(rep.solutions.size() == 1);
    const OracleSolution& s = rep.solutions[0];
    CHECK(s.segment);
    CHECK(s.certified);
    // {first action fixed} x (entire second block simplex).
    CHECK(s.lo[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.hi[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::min(s.lo[2], s.hi[2]) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::max(s.lo[2], s.hi[2]) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("two pooling families in the signaling game") {
    AgentForm ag = to_agent_form(testutil::load_game("beer_quiche.gnet"));
    OracleReport rep = oracle_support_enumeration(ag);
    CHECK(rep.complete);
    CHECK(rep.unresolved_supports == 0);
    REQUIRE(rep.solutions.size() == 2);
    int pool_first = -1, pool_second = -1;
    for (int i = 0; i < 2; ++i) {
      if (rep.solutions[i].lo[2] > 0.5) pool_first = i;
      if (rep.solutions[i].lo[3] > 0.5) pool_second = i;
    }
    REQUIRE(pool_first >= 0);
    REQUIRE(pool_second >= 0);
    const OracleSolution& pb = rep.solutions[pool_first];
    CHECK(pb.segment);
    CHECK(pb.certified);
    // Both types order the first meal, observer declines to fight on path,
    // and the off-path fighting threat ranges over [2/5, 1], i.e. the
    // passive weight at the unreached information set spans [0, 3/5].
    CHECK(pb.lo[2] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pb.lo[4] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pb.lo[6] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::min(pb.lo[8], pb.hi[8]) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::max(pb.lo[8], pb.hi[8]) == doctest::Approx(0.6).epsilon(1e-9));
    const OracleSolution& pq = rep.solutions[pool_second];
    CHECK(pq.segment);
    CHECK(pq.certified);
    // Pooling on the second meal: the off-path threat spans [3/4, 1].
    CHECK(pq.lo[3] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pq.lo[5] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pq.lo[8] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::min(pq.lo[6], pq.hi[6]) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::max(pq.lo[6], pq.hi[6]) ==
          doctest::Approx(0.25).epsilon(1e-9));
  }
}

TEST_CASE("oracle certifies random one-shot games against the solver") {
  std::mt19937_64 rng(57);
  for (int rep = 0; rep < 10; ++rep) {
    GNet net = testutil::random_bimatrix_2x2(rng);
    OracleReport oracle = oracle_support_enumeration(to_agent_form(net));
    CHECK(oracle.complete);
    CHECK(oracle.solutions.size() >= 1);
    for (const auto& s : oracle.solutions) {
      CHECK(is_nash_prop3(net, s.lo, 1e-6).is_nash);
      if (s.segment) CHECK(is_nash_prop3(net, s.hi, 1e-6).is_nash);
    }
  }
}
