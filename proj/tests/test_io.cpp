#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"

#include "gnet/extensive_form.hpp"
#include "gnet/first_equilibrium.hpp"
#include "gnet/io.hpp"

using namespace gnet;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

// Runs the command-line driver in-process with captured streams.
CliRun run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("gnet");
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  CliRun r;
  try {
    r.code = cli_main(static_cast<int>(argv.size()), argv.data());
  } catch (...) {
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    throw;
  }
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string game_path(const std::string& name) {
  return testutil::games_dir() + "/" + name;
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("gnet_io_" + std::to_string(::getpid()) + "_" + name))
      .string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

bool has_line(const std::string& text, const std::string& line) {
  std::istringstream in(text);
  std::string cur;
  while (std::getline(in, cur))
    if (cur == line) return true;
  return false;
}

// One strategic component of eight coupled binary nodes: the enumeration's
// path budget (product of equation degrees) overflows any sane cap.
GNet huge_degree_net() {
  GNet net;
  net.players = {"p1"};
  for (int k = 0; k < 8; ++k) {
    GNode node;
    node.name = "n" + std::to_string(k);
    node.player = 0;
    node.domain = {"a", "b"};
    net.nodes.push_back(node);
  }
  PotentialTable table;
  table.player = 0;
  table.node = 7;
  table.neighbors = {0, 1, 2, 3, 4, 5, 6};
  table.entries = Eigen::ArrayXXd::Ones(2, 128);
  for (int c = 0; c < 128; ++c) table.entries(1, c) = 1.0 + 0.001 * (c + 1);
  net.potentials.push_back(table);
  require_valid(net);
  return net;
}

}  // namespace

TEST_CASE("game files round-trip through the printer") {
  for (const char* name :
       {"matching_pennies.gnet", "coordination.gnet", "dominance.gnet",
        "weak_dominance.gnet", "beer_quiche.gnet",
        "pennies_coordination.gnet"}) {
    CAPTURE(name);
    GNet net = testutil::load_game(name);
    std::string printed = print_game(net);
    GNet reparsed = parse_game(printed);
    CHECK(validate(reparsed).empty());
    CHECK(print_game(reparsed) == printed);
    REQUIRE(reparsed.nodes.size() == net.nodes.size());
    REQUIRE(reparsed.potentials.size() == net.potentials.size());
    for (size_t w = 0; w < net.potentials.size(); ++w) {
      // 17 significant digits reproduce every double bit-for-bit.
      CHECK((reparsed.potentials[w].entries == net.potentials[w].entries)
                .all());
    }
    for (size_t c = 0; c < net.cpts.size(); ++c)
      CHECK((reparsed.cpts[c].rows == net.cpts[c].rows).all());
  }
}

TEST_CASE("tree files round-trip through the printer") {
  for (const char* name : {"beer_quiche.ef", "single_skip.ef"}) {
    CAPTURE(name);
    EfTree tree = parse_ef(testutil::fixture_text(name));
    REQUIRE(validate_ef(tree).empty());
    std::string printed = print_ef(tree);
    EfTree reparsed = parse_ef(printed);
    CHECK(print_ef(reparsed) == printed);
    CHECK(print_game(ef_to_gframe(reparsed)) ==
          print_game(ef_to_gframe(tree)));
  }
}

TEST_CASE("parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(parse_game("node A player=p1 domain=x,y\n"),
                       doctest::Contains("line 1"), Error);
  CHECK_THROWS_WITH_AS(
      parse_game("players p1\nnode A player=p1 domain=x,y\nwibble Z\n"),
      doctest::Contains("line 3"), Error);
  CHECK_THROWS_WITH_AS(
      parse_game("players p1\nnode A player=p1 domain=x,y\nwibble Z\n"),
      doctest::Contains("unknown directive"), Error);
  CHECK_THROWS_WITH_AS(parse_ef("players p1\ndecision D\n"),
                       doctest::Contains("line 2"), Error);
}

TEST_CASE("fractions parse to correctly rounded doubles") {
  GNet mp = testutil::load_game("matching_pennies.gnet");
  // Tables come back sorted by (player, node).
  CHECK(mp.potentials[0].entries(1, 0) == 1.0 / 3.0);
  CHECK(mp.potentials[1].entries(1, 1) == 3.0);
  GNet bq = testutil::load_game("beer_quiche.gnet");
  CHECK(bq.cpts[0].rows(0, 0) == 0.9);
  CHECK(bq.cpts[0].rows(0, 1) == 0.1);

  GNet tiny = parse_game(
      "players p1\n"
      "node A player=p1 domain=x,y\n"
      "potential p1 A | : x=1, y=3/4\n");
  CHECK(tiny.potentials[0].entries(1, 0) == 0.75);
}

TEST_CASE("information-set labels name the node and its condition") {
  GNet mp = testutil::load_game("matching_pennies.gnet");
  CHECK(block_label(mp, 0) == "A|");
  CHECK(block_label(mp, 1) == "B|");
  GNet bq = testutil::load_game("beer_quiche.gnet");
  CHECK(block_label(bq, 0) == "T|");
  CHECK(block_label(bq, 1) == "B|T=S");
  CHECK(block_label(bq, 2) == "B|T=W");
  CHECK(block_label(bq, 3) == "F|B=B");
  CHECK(block_label(bq, 4) == "F|B=Q");
}

TEST_CASE("solution files round-trip bit-stably") {
  GNet net = testutil::load_game("beer_quiche.gnet");
  std::mt19937_64 rng(99);
  SolutionRecord tracked;
  tracked.profile = track_first_equilibrium(net).profile;
  tracked.label = "RobustCandidate";
  tracked.residual = 3.0e-12;
  tracked.slack = 1.0e-9;
  SolutionRecord interior;
  interior.profile = testutil::random_interior_profile(net, rng);
  interior.label = "NotEquilibrium";
  std::string text = write_solution(net, {tracked, interior});
  std::vector<SolutionRecord> back = read_solution(net, text);
  REQUIRE(back.size() == 2);
  CHECK((back[0].profile - tracked.profile).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back[1].profile - interior.profile).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back[0].label == "RobustCandidate");
  CHECK(back[1].label == "NotEquilibrium");
  CHECK(back[0].residual == 3.0e-12);
  CHECK(back[0].slack == 1.0e-9);
  CHECK(write_solution(net, back) == text);
}

TEST_CASE("command line: usage errors exit 64") {
  CHECK(run_cli({}).code == 64);
  CHECK(run_cli({"bogus"}).code == 64);
  CHECK(run_cli({"validate"}).code == 64);
  CHECK(run_cli({"solve-first"}).code == 64);
  CHECK(run_cli({"solve-first", game_path("matching_pennies.gnet"),
                 "--endpoint-t", "1.5"})
            .code == 64);
  CHECK(run_cli({"solve-first", game_path("matching_pennies.gnet"), "--seed",
                 "abc"})
            .code == 64);
  CHECK(run_cli({"solve-all", game_path("matching_pennies.gnet"),
                 "--bad-flag", "1"})
            .code == 64);
  CliRun bad = run_cli({"verify", "only-one-arg"});
  CHECK(bad.code == 64);
  CHECK(bad.err.find("usage: gnet") != std::string::npos);
  CliRun help = run_cli({"help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("usage: gnet") != std::string::npos);
}

TEST_CASE("command line: validate") {
  for (const char* name :
       {"matching_pennies.gnet", "coordination.gnet", "dominance.gnet",
        "weak_dominance.gnet", "beer_quiche.gnet",
        "pennies_coordination.gnet"}) {
    CAPTURE(name);
    CliRun r = run_cli({"validate", game_path(name)});
    CHECK(r.code == 0);
    CHECK(has_line(r.out, "status: ok"));
  }
  CliRun missing = run_cli({"validate", tmp_path("no_such_file.gnet")});
  CHECK(missing.code == 1);
  CHECK(has_line(missing.out, "status: invalid"));

  // A chance row that no longer sums to one.
  std::string broken = testutil::fixture_text("beer_quiche.gnet");
  size_t at = broken.find("S=9/10");
  REQUIRE(at != std::string::npos);
  broken.replace(at, 6, "S=8/10");
  std::string path = tmp_path("broken.gnet");
  write_text(path, broken);
  CliRun bad = run_cli({"validate", path});
  CHECK(bad.code == 1);
  CHECK(has_line(bad.out, "status: invalid"));
  CHECK(bad.out.find("violation:") != std::string::npos);
}

TEST_CASE("command line: info reports structure, parameters and degrees") {
  CliRun bq = run_cli({"info", game_path("beer_quiche.gnet")});
  CHECK(bq.code == 0);
  CHECK(has_line(bq.out, "status: ok"));
  CHECK(has_line(bq.out, "components: 1"));
  CHECK(has_line(bq.out, "parameters-potential: 8"));
  CHECK(has_line(bq.out, "parameters-extensive: 16"));

  CliRun pc = run_cli({"info", game_path("pennies_coordination.gnet")});
  CHECK(pc.code == 0);
  CHECK(has_line(pc.out, "components: 2"));
  CHECK(has_line(pc.out, "paths-decomposed: 18"));
}

TEST_CASE("command line: solve, save and verify round trip") {
  std::string sol = tmp_path("mp.sol");
  CliRun solve = run_cli({"solve-first", game_path("matching_pennies.gnet"),
                          "--seed", "7", "-o", sol});
  REQUIRE(solve.code == 0);
  CHECK(has_line(solve.out, "status: ok"));
  CHECK(has_line(solve.out, "label: RobustCandidate"));

  GNet mp = testutil::load_game("matching_pennies.gnet");
  std::vector<SolutionRecord> recs =
      read_solution(mp, testutil::read_file(sol));
  REQUIRE(recs.size() == 1);
  CHECK((recs[0].profile - 0.5 * Profile::Ones(4)).cwiseAbs().maxCoeff() <=
        1e-6);

  CliRun verify = run_cli({"verify", game_path("matching_pennies.gnet"), sol});
  CHECK(verify.code == 0);
  CHECK(has_line(verify.out, "verdict: nash"));
  CHECK(has_line(verify.out, "status: ok"));

  // A claimed equilibrium that is not one: verification names a violating
  // information set and fails.
  SolutionRecord fake;
  fake.profile = Profile(4);
  fake.profile << 1, 0, 1, 0;
  fake.label = "Nash";
  std::string fake_path = tmp_path("fake.sol");
  write_text(fake_path, write_solution(mp, {fake}));
  CliRun rejected =
      run_cli({"verify", game_path("matching_pennies.gnet"), fake_path});
  CHECK(rejected.code == 1);
  CHECK(has_line(rejected.out, "verdict: not-nash"));
  CHECK(rejected.out.find("violating-infoset:") != std::string::npos);
  CHECK(has_line(rejected.out, "status: failed"));

  // Coordinates that are not a distribution at all.
  SolutionRecord off;
  off.profile = Profile(4);
  off.profile << 0.6, 0.6, 0.5, 0.5;
  std::string off_path = tmp_path("off.sol");
  write_text(off_path, write_solution(mp, {off}));
  CliRun malformed =
      run_cli({"verify", game_path("matching_pennies.gnet"), off_path});
  CHECK(malformed.code == 1);
  CHECK(malformed.out.find("profile-error:") != std::string::npos);
}

TEST_CASE("command line: enumeration reports every equilibrium") {
  std::string sol = tmp_path("coord.sol");
  CliRun r = run_cli({"solve-all", game_path("coordination.gnet"), "--seed",
                      "3", "-o", sol});
  REQUIRE(r.code == 0);
  CHECK(has_line(r.out, "status: ok"));
  CHECK(has_line(r.out, "paths-total: 9"));
  CHECK(has_line(r.out, "nash-count: 3"));

  GNet coord = testutil::load_game("coordination.gnet");
  std::vector<SolutionRecord> recs =
      read_solution(coord, testutil::read_file(sol));
  REQUIRE(recs.size() == 3);
  Profile a(4), b(4), c(4);
  a << 1, 0, 0, 1;
  b << 0, 1, 1, 0;
  c << 1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0;
  for (const Profile& want : {a, b, c}) {
    double best = 1.0;
    for (const auto& rec : recs) {
      CHECK(rec.label == "Nash");
      best = std::min(best, (rec.profile - want).cwiseAbs().maxCoeff());
    }
    CHECK(best <= 1e-6);
  }
}

TEST_CASE("command line: tree conversion") {
  std::string out = tmp_path("bq.gnet");
  CliRun conv = run_cli({"convert-ef", game_path("beer_quiche.ef"), "-o", out});
  REQUIRE(conv.code == 0);
  CHECK(has_line(conv.out, "status: ok"));
  CHECK(has_line(conv.out, "parameters-potential: 8"));
  CHECK(has_line(conv.out, "parameters-extensive: 16"));
  GNet direct = ef_to_gframe(parse_ef(testutil::fixture_text("beer_quiche.ef")));
  CHECK(print_game(parse_game(testutil::read_file(out))) ==
        print_game(direct));
  CHECK(run_cli({"validate", out}).code == 0);

  CHECK(run_cli({"convert-ef", game_path("beer_quiche.ef")}).code == 64);
  CliRun not_a_tree = run_cli(
      {"convert-ef", game_path("matching_pennies.gnet"), "-o", out});
  CHECK(not_a_tree.code == 1);
  CHECK(has_line(not_a_tree.out, "status: error"));
}

TEST_CASE("command line: reports are deterministic for a fixed seed") {
  for (std::vector<std::string> args :
       {std::vector<std::string>{"solve-first", game_path("beer_quiche.gnet"),
                                 "--seed", "1"},
        std::vector<std::string>{"solve-all",
                                 game_path("pennies_coordination.gnet"),
                                 "--seed", "11"}}) {
    CliRun first = run_cli(args);
    CliRun second = run_cli(args);
    REQUIRE(first.code == 0);
    CHECK(second.code == 0);
    CHECK(first.out == second.out);  // stderr carries wall-clock time
  }
}

TEST_CASE("command line: an oversized enumeration is a solver failure") {
  std::string path = tmp_path("huge.gnet");
  write_text(path, print_game(huge_degree_net()));
  REQUIRE(run_cli({"validate", path}).code == 0);
  CliRun r = run_cli({"solve-all", path});
  CHECK(r.code == 2);
  CHECK(has_line(r.out, "status: solver-failure"));
  CHECK(r.err.find("solve-all:") != std::string::npos);
  // The structure report still works; it only reports the hopeless budget.
  CHECK(run_cli({"info", path}).code == 0);
}

TEST_CASE("command line: path traces") {
  std::string trace = tmp_path("mp.trace");
  CliRun r = run_cli({"solve-first", game_path("matching_pennies.gnet"),
                      "--trace", trace});
  REQUIRE(r.code == 0);
  std::string text = testutil::read_file(trace);
  CHECK(text.rfind("# accepted states", 0) == 0);
  CHECK(text.find("state 0 0 ") != std::string::npos);  // t = 0 start state

  // Relative trace paths are placed under GNET_TRACE_DIR.
  std::string dir = std::filesystem::temp_directory_path().string();
  ::setenv("GNET_TRACE_DIR", dir.c_str(), 1);
  std::string rel = "gnet_io_" + std::to_string(::getpid()) + "_rel.trace";
  CliRun r2 = run_cli({"solve-first", game_path("matching_pennies.gnet"),
                       "--trace", rel});
  ::unsetenv("GNET_TRACE_DIR");
  REQUIRE(r2.code == 0);
  CHECK(std::filesystem::exists(dir + "/" + rel));
}
