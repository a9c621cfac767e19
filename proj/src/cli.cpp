#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gnet/all_equilibria.hpp"
#include "gnet/decomposition.hpp"
#include "gnet/equilibrium.hpp"
#include "gnet/expectations.hpp"
#include "gnet/extensive_form.hpp"
#include "gnet/first_equilibrium.hpp"
#include "gnet/io.hpp"
#include "gnet/model.hpp"
#include "gnet/profile.hpp"

namespace gnet {

namespace {

constexpr const char* kUsage = R"(usage: gnet <subcommand> [options]

subcommands:
  validate <file>                       check a game file, list violations
  info <file>                           structure, components, degrees
  solve-first <file> [--seed S] [--trace PATH] [--endpoint-t T] [-o OUT]
                                        track the distinguished equilibrium
  solve-all <file> [--seed S] [--tol T] [--threads N] [-o OUT]
                                        enumerate all equilibria
  verify <file> <solution>              recheck a solution file
  convert-ef <ef-file> -o <gnet-file>   convert a game tree to a game file

exit codes: 0 ok, 1 validation/verification failure, 2 solver failure,
64 usage error. Report on stdout as 'key: value' lines; diagnostics on
stderr. GNET_TRACE_DIR prefixes relative --trace paths.
)";

struct Usage : std::runtime_error {
  explicit Usage(const std::string& m) : std::runtime_error(m) {}
};

struct Args {
  std::vector<std::string> positional;
  std::map<std::string, std::string> flags;
};

Args parse_args(const std::vector<std::string>& tokens,
                const std::vector<std::string>& value_flags) {
  Args out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    if (!t.empty() && t[0] == '-' && t != "-") {
      if (std::find(value_flags.begin(), value_flags.end(), t) ==
          value_flags.end())
        throw Usage("unknown option '" + t + "'");
      if (i + 1 >= tokens.size())
        throw Usage("option '" + t + "' needs a value");
      out.flags[t] = tokens[++i];
    } else {
      out.positional.push_back(t);
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

std::string g17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_double(const std::string& s, const std::string& flag) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Usage("option '" + flag + "' needs a number, got '" + s + "'");
  }
}

std::uint64_t parse_seed(const std::string& s) {
  try {
    size_t used = 0;
    unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Usage("option '--seed' needs a nonnegative integer, got '" + s + "'");
  }
}

std::string effective_trace_path(const std::string& arg) {
  if (arg.empty()) return arg;
  const char* dir = std::getenv("GNET_TRACE_DIR");
  if (!dir || !*dir || arg.front() == '/') return arg;
  return std::string(dir) + "/" + arg;
}

void print_profile(std::ostream& os, const GNet& net, const Profile& p) {
  const auto& layout = net.layout();
  for (size_t b = 0; b < layout.blocks().size(); ++b) {
    const auto& blk = layout.blocks()[b];
    const auto& node = net.nodes[static_cast<size_t>(blk.node)];
    for (int v = 0; v < blk.size; ++v)
      os << "coord: " << block_label(net, static_cast<int>(b)) << ' '
         << node.domain[static_cast<size_t>(v)] << ' '
         << g17(p[blk.offset + v]) << "\n";
  }
}

// Loads and parses a game file; on failure prints an invalid report and
// returns false.
bool load_game(const std::string& path, GNet* net) {
  try {
    *net = parse_game(read_file(path));
  } catch (const Error& e) {
    std::cout << "status: invalid\n";
    std::cout << "violation: " << e.what() << "\n";
    return false;
  }
  auto violations = validate(*net);
  if (!violations.empty()) {
    std::cout << "status: invalid\n";
    for (const auto& v : violations) std::cout << "violation: " << v << "\n";
    return false;
  }
  return true;
}

int cmd_validate(const Args& args) {
  if (args.positional.size() != 1) throw Usage("validate needs one file");
  std::cout << "command: validate\n";
  std::cout << "file: " << args.positional[0] << "\n";
  GNet net;
  if (!load_game(args.positional[0], &net)) return 1;
  std::cout << "status: ok\n";
  std::cout << "players: " << net.players.size() << "\n";
  std::cout << "nodes: " << net.nodes.size() << "\n";
  std::cout << "infosets: " << net.layout().blocks().size() << "\n";
  return 0;
}

int cmd_info(const Args& args) {
  if (args.positional.size() != 1) throw Usage("info needs one file");
  std::cout << "command: info\n";
  std::cout << "file: " << args.positional[0] << "\n";
  GNet net;
  if (!load_game(args.positional[0], &net)) return 1;
  std::cout << "status: ok\n";
  std::cout << "players: " << net.players.size() << "\n";
  std::cout << "nodes: " << net.nodes.size() << "\n";
  for (const auto& node : net.nodes) {
    std::cout << "node: " << node.name << " player="
              << (node.player == kNature
                      ? std::string("nature")
                      : net.players[static_cast<size_t>(node.player)])
              << " values=" << node.domain.size() << "\n";
  }
  auto comps = strategic_components(net);
  std::cout << "components: " << comps.size() << "\n";
  for (size_t c = 0; c < comps.size(); ++c) {
    std::cout << "component: " << (c + 1) << " nodes=";
    for (size_t i = 0; i < comps[c].nodes.size(); ++i)
      std::cout << (i ? "," : "")
                << net.nodes[static_cast<size_t>(comps[c].nodes[i])].name;
    std::cout << "\n";
  }
  const auto& layout = net.layout();
  std::cout << "infosets: " << layout.blocks().size() << "\n";
  for (size_t b = 0; b < layout.blocks().size(); ++b) {
    const auto& blk = layout.blocks()[b];
    const auto& node = net.nodes[static_cast<size_t>(blk.node)];
    const char* kind = node.player == kNature ? "nature"
                       : blk.frozen           ? "forced"
                                              : "free";
    std::cout << "infoset: " << block_label(net, static_cast<int>(b))
              << " kind=" << kind << " size=" << blk.size << "\n";
  }
  auto [pot, ef] = parameter_count(net);
  std::cout << "parameters-potential: " << pot << "\n";
  std::cout << "parameters-extensive: " << ef << "\n";
  long long total = 0;
  std::cout << "degrees-by-component:\n";
  try {
    total = 0;
    for (size_t c = 0; c < comps.size(); ++c) {
      PolySystem sys = build_poly_system(comps[c].net);
      for (size_t e = 0; e < sys.equations.size(); ++e) {
        int full = sys.variables[e];
        int blk = comps[c].net.layout().block_of_coord(full);
        int val = comps[c].net.layout().value_of_coord(full);
        std::cout << "equation: component=" << (c + 1) << " "
                  << block_label(comps[c].net, blk) << "="
                  << comps[c]
                         .net.nodes[static_cast<size_t>(
                             comps[c].net.layout().block(blk).node)]
                         .domain[static_cast<size_t>(val)]
                  << " degree=" << sys.degrees[e] << "\n";
      }
      std::cout << "component-total-degree: " << (c + 1) << " "
                << sys.total_degree << "\n";
      total += sys.total_degree;
    }
    std::cout << "paths-decomposed: " << total << "\n";
  } catch (const Error& e) {
    std::cout << "degrees: unavailable\n";
    std::cout << "note: " << e.what() << "\n";
  }
  return 0;
}

int cmd_solve_first(const Args& args) {
  if (args.positional.size() != 1) throw Usage("solve-first needs one file");
  std::cout << "command: solve-first\n";
  std::cout << "file: " << args.positional[0] << "\n";
  GNet net;
  if (!load_game(args.positional[0], &net)) return 1;

  TrackerConfig cfg;
  if (auto it = args.flags.find("--seed"); it != args.flags.end())
    cfg.rng_seed = parse_seed(it->second);
  if (auto it = args.flags.find("--endpoint-t"); it != args.flags.end()) {
    cfg.endpoint_t = parse_double(it->second, "--endpoint-t");
    if (!(cfg.endpoint_t > 0.0 && cfg.endpoint_t < 1.0))
      throw Usage("--endpoint-t must lie strictly between 0 and 1");
  }
  std::cout << "seed: " << cfg.rng_seed << "\n";
  std::cout << "endpoint-t: " << g17(cfg.endpoint_t) << "\n";

  DecomposedFirstEquilibrium res;
  try {
    res = first_equilibrium_decomposed(net, cfg);
  } catch (const Error& e) {
    std::cout << "status: solver-failure\n";
    std::cerr << "solve-first: " << e.what() << "\n";
    return 2;
  }
  std::cout << "status: ok\n";
  std::cout << "components: " << res.components.size() << "\n";
  std::cout << "label: " << to_string(res.cls.label) << "\n";
  std::cout << "residual: " << g17(res.cls.f_residual) << "\n";
  std::cout << "slack: " << g17(res.cls.prop3_slack) << "\n";
  long long accepted = 0, rejected = 0, newton = 0, perturb = 0;
  for (const auto& run : res.components) {
    accepted += static_cast<long long>(run.result.path.states.size());
    rejected += run.result.path.rejected_steps;
    newton += run.result.path.newton_iterations;
    perturb += run.result.path.perturbation_attempts;
  }
  std::cout << "steps-accepted: " << accepted << "\n";
  std::cout << "steps-rejected: " << rejected << "\n";
  std::cout << "newton-iterations: " << newton << "\n";
  std::cout << "perturbation-attempts: " << perturb << "\n";
  print_profile(std::cout, net, res.profile);

  if (auto it = args.flags.find("--trace"); it != args.flags.end()) {
    std::string path = effective_trace_path(it->second);
    std::ostringstream os;
    os.precision(17);
    os << "# accepted states: component index, t, step, residual, profile\n";
    for (size_t c = 0; c < res.components.size(); ++c) {
      for (const auto& st : res.components[c].result.path.states) {
        os << "state " << c << ' ' << st.t << ' ' << st.step << ' '
           << st.residual;
        for (Eigen::Index i = 0; i < st.p.size(); ++i) os << ' ' << st.p[i];
        os << "\n";
      }
    }
    write_file(path, os.str());
    std::cerr << "trace written to " << path << "\n";
  }
  if (auto it = args.flags.find("-o"); it != args.flags.end()) {
    SolutionRecord rec;
    rec.profile = res.profile;
    rec.label = to_string(res.cls.label);
    rec.residual = res.cls.f_residual;
    rec.slack = res.cls.prop3_slack;
    write_file(it->second, write_solution(net, {rec}));
  }
  return 0;
}

int cmd_solve_all(const Args& args) {
  if (args.positional.size() != 1) throw Usage("solve-all needs one file");
  std::cout << "command: solve-all\n";
  std::cout << "file: " << args.positional[0] << "\n";
  GNet net;
  if (!load_game(args.positional[0], &net)) return 1;

  AllEqConfig cfg;
  if (auto it = args.flags.find("--seed"); it != args.flags.end())
    cfg.rng_seed = parse_seed(it->second);
  if (auto it = args.flags.find("--tol"); it != args.flags.end()) {
    cfg.nash_tol = parse_double(it->second, "--tol");
    if (!(cfg.nash_tol > 0.0)) throw Usage("--tol must be positive");
  }
  if (auto it = args.flags.find("--threads"); it != args.flags.end()) {
    cfg.threads = static_cast<int>(parse_double(it->second, "--threads"));
    if (cfg.threads < 1) throw Usage("--threads must be at least 1");
  }
  std::cout << "seed: " << cfg.rng_seed << "\n";
  std::cout << "tol: " << g17(cfg.nash_tol) << "\n";

  EquilibriumReport rep;
  try {
    rep = all_equilibria_decomposed(net, cfg);
  } catch (const Error& e) {
    std::cout << "status: solver-failure\n";
    std::cerr << "solve-all: " << e.what() << "\n";
    return 2;
  }
  std::cout << "status: ok\n";
  std::cout << "components: " << strategic_components(net).size() << "\n";
  std::cout << "paths-total: " << rep.total_paths << "\n";
  std::cout << "paths-converged: " << rep.paths_converged << "\n";
  std::cout << "paths-diverged: " << rep.paths_diverged << "\n";
  std::cout << "paths-truncated: " << rep.paths_truncated << "\n";
  std::cout << "complex-or-infeasible: " << rep.complex_or_infeasible << "\n";
  std::cout << "nash-count: " << rep.nash.size() << "\n";
  for (size_t i = 0; i < rep.nash.size(); ++i) {
    const auto& sol = rep.nash[i];
    std::cout << "nash: " << (i + 1) << "\n";
    std::cout << "label: " << to_string(sol.cls.label) << "\n";
    std::cout << "multiplicity: " << sol.multiplicity << "\n";
    std::cout << "residual: " << g17(sol.cls.f_residual) << "\n";
    std::cout << "slack: " << g17(sol.cls.prop3_slack) << "\n";
    print_profile(std::cout, net, sol.profile);
  }
  std::cout << "fixed-point-non-nash-count: " << rep.fixed_points_non_nash.size()
            << "\n";
  for (size_t i = 0; i < rep.fixed_points_non_nash.size(); ++i) {
    const auto& sol = rep.fixed_points_non_nash[i];
    std::cout << "fixed-point: " << (i + 1) << "\n";
    std::cout << "label: " << to_string(sol.cls.label) << "\n";
    std::cout << "multiplicity: " << sol.multiplicity << "\n";
    std::cout << "residual: " << g17(sol.cls.f_residual) << "\n";
    std::cout << "slack: " << g17(sol.cls.prop3_slack) << "\n";
    print_profile(std::cout, net, sol.profile);
  }

  if (auto it = args.flags.find("-o"); it != args.flags.end()) {
    std::vector<SolutionRecord> recs;
    for (const auto& sol : rep.nash) {
      SolutionRecord rec;
      rec.profile = sol.profile;
      rec.label = to_string(sol.cls.label);
      rec.residual = sol.cls.f_residual;
      rec.slack = sol.cls.prop3_slack;
      recs.push_back(std::move(rec));
    }
    write_file(it->second, write_solution(net, recs));
  }
  return 0;
}

int cmd_verify(const Args& args) {
  if (args.positional.size() != 2)
    throw Usage("verify needs a game file and a solution file");
  std::cout << "command: verify\n";
  std::cout << "file: " << args.positional[0] << "\n";
  std::cout << "solution: " << args.positional[1] << "\n";
  GNet net;
  if (!load_game(args.positional[0], &net)) return 1;

  std::vector<SolutionRecord> records;
  try {
    records = read_solution(net, read_file(args.positional[1]));
  } catch (const Error& e) {
    std::cout << "status: failed\n";
    std::cout << "error: " << e.what() << "\n";
    return 1;
  }
  std::cout << "records: " << records.size() << "\n";
  bool all_ok = !records.empty();
  for (size_t r = 0; r < records.size(); ++r) {
    std::cout << "record: " << (r + 1) << "\n";
    if (!records[r].label.empty())
      std::cout << "label-claimed: " << records[r].label << "\n";
    auto profile_errors = check_profile(net, records[r].profile);
    if (!profile_errors.empty()) {
      for (const auto& pe : profile_errors)
        std::cout << "profile-error: " << pe << "\n";
      all_ok = false;
      continue;
    }
    EquilibriumClass cls =
        classify(net, records[r].profile, Provenance::UserSupplied);
    std::cout << "label: " << to_string(cls.label) << "\n";
    std::cout << "residual: " << g17(cls.f_residual) << "\n";
    std::cout << "slack: " << g17(cls.prop3_slack) << "\n";
    if (cls.label == EquilibriumLabel::Nash) {
      std::cout << "verdict: nash\n";
    } else {
      std::cout << "verdict: not-nash\n";
      // Name the info set with the worst conditional-payoff violation.
      const auto& layout = net.layout();
      Eigen::VectorXd u = conditional_utilities(net, records[r].profile);
      int worst_block = -1;
      double worst = -1.0;
      for (size_t b = 0; b < layout.blocks().size(); ++b) {
        const auto& blk = layout.blocks()[b];
        if (blk.frozen ||
            net.nodes[static_cast<size_t>(blk.node)].player == kNature)
          continue;
        for (int v : blk.available) {
          double uv = u[blk.offset + v];
          if (!std::isfinite(uv)) continue;
          double slack = std::max(uv - 1.0, 0.0);
          if (records[r].profile[blk.offset + v] > 1e-6)
            slack = std::max(slack, std::abs(uv - 1.0));
          if (slack > worst) {
            worst = slack;
            worst_block = static_cast<int>(b);
          }
        }
      }
      if (worst_block >= 0) {
        std::cout << "violating-infoset: " << block_label(net, worst_block)
                  << "\n";
        std::cout << "violation: " << g17(worst) << "\n";
      }
      for (const auto& v : cls.verdict.violations)
        std::cout << "detail: " << v << "\n";
      all_ok = false;
    }
  }
  std::cout << "status: " << (all_ok ? "ok" : "failed") << "\n";
  return all_ok ? 0 : 1;
}

int cmd_convert_ef(const Args& args) {
  if (args.positional.size() != 1)
    throw Usage("convert-ef needs one game-tree file");
  auto it = args.flags.find("-o");
  if (it == args.flags.end()) throw Usage("convert-ef needs -o <output-file>");
  std::cout << "command: convert-ef\n";
  std::cout << "file: " << args.positional[0] << "\n";
  std::cout << "output: " << it->second << "\n";
  GNet net;
  try {
    EfTree tree = parse_ef(read_file(args.positional[0]));
    net = ef_to_gframe(tree);
  } catch (const Error& e) {
    std::cout << "status: error\n";
    std::cout << "error: " << e.what() << "\n";
    return 1;
  }
  write_file(it->second, print_game(net));
  std::cout << "status: ok\n";
  std::cout << "nodes: " << net.nodes.size() << "\n";
  auto [pot, ef] = parameter_count(net);
  std::cout << "parameters-potential: " << pot << "\n";
  std::cout << "parameters-extensive: " << ef << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  auto started = std::chrono::steady_clock::now();
  int code = 0;
  try {
    if (argc < 2) throw Usage("missing subcommand");
    std::string cmd = argv[1];
    std::vector<std::string> rest;
    for (int i = 2; i < argc; ++i) rest.emplace_back(argv[i]);

    if (cmd == "validate") {
      code = cmd_validate(parse_args(rest, {}));
    } else if (cmd == "info") {
      code = cmd_info(parse_args(rest, {}));
    } else if (cmd == "solve-first") {
      code = cmd_solve_first(
          parse_args(rest, {"--seed", "--trace", "--endpoint-t", "-o"}));
    } else if (cmd == "solve-all") {
      code = cmd_solve_all(
          parse_args(rest, {"--seed", "--tol", "--threads", "-o"}));
    } else if (cmd == "verify") {
      code = cmd_verify(parse_args(rest, {}));
    } else if (cmd == "convert-ef") {
      code = cmd_convert_ef(parse_args(rest, {"-o"}));
    } else if (cmd == "--help" || cmd == "-h" || cmd == "help") {
      std::cout << kUsage;
      code = 0;
    } else {
      throw Usage("unknown subcommand '" + cmd + "'");
    }
  } catch (const Usage& u) {
    std::cerr << "error: " << u.what() << "\n\n" << kUsage;
    return 64;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - started)
                     .count();
  std::cerr << "elapsed-ms: " << elapsed << "\n";
  return code;
}

}  // namespace gnet
