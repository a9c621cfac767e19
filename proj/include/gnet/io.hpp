#pragma once

// Text formats and the command-line driver.
//
// Game files are line-oriented UTF-8: `players`, then `node` declarations,
// then `uarc` utility-dependency arcs, then tables (`potential`, `cpt`,
// `forced`) and an optional `reference` line. Numbers may be decimals or
// exact fractions a/b. `#` starts a comment. Parse errors carry line numbers.
//
// Extensive-form files mirror the shape with `chance` / `decision` / `leaf`
// node lines carrying parent references and information-set labels.
//
// Solution files list one block of coordinates per profile (information-set
// label, value label, probability to 17 significant digits) plus the
// classification, and round-trip bit-stably.

#include <string>
#include <vector>

#include "gnet/extensive_form.hpp"
#include "gnet/model.hpp"
#include "gnet/profile.hpp"

namespace gnet {

GNet parse_game(const std::string& text);
std::string print_game(const GNet& net);

EfTree parse_ef(const std::string& text);
std::string print_ef(const EfTree& tree);

// Space-free information-set label used in solution files and reports:
// "node|P1=v1,P2=v2" (just "node|" for parentless nodes).
std::string block_label(const GNet& net, int block);

struct SolutionRecord {
  Profile profile;
  std::string label;      // classification label text
  double residual = 0.0;  // ||p - v(p)||
  double slack = 0.0;     // worst Nash violation
};

std::string write_solution(const GNet& net,
                           const std::vector<SolutionRecord>& records);
std::vector<SolutionRecord> read_solution(const GNet& net,
                                          const std::string& text);

// The command-line driver behind the `gnet` tool. Subcommands: validate,
// info, solve-first, solve-all, verify, convert-ef. Machine-readable
// "key: value" report on stdout, diagnostics on stderr. Exit codes: 0 ok,
// 1 validation/verification failure, 2 solver failure, 64 usage.
int cli_main(int argc, const char* const* argv);

}  // namespace gnet
