#include "gnet/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace gnet {

namespace {

struct Line {
  int number = 0;
  std::string text;
};

[[noreturn]] void fail_at(int line, const std::string& msg) {
  throw Error("line " + std::to_string(line) + ": " + msg);
}

std::vector<Line> logical_lines(const std::string& text) {
  std::vector<Line> out;
  int number = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++number;
    std::string s = text.substr(pos, end - pos);
    if (auto h = s.find('#'); h != std::string::npos) s.erase(h);
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    if (b != std::string::npos)
      out.push_back({number, s.substr(b, e - b + 1)});
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t e = s.find(sep, pos);
    std::string piece =
        e == std::string::npos ? s.substr(pos) : s.substr(pos, e - pos);
    size_t b = piece.find_first_not_of(" \t");
    size_t f = piece.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string()
                                         : piece.substr(b, f - b + 1));
    if (e == std::string::npos) break;
    pos = e + 1;
  }
  return out;
}

double parse_number(const std::string& tok, int line) {
  auto parse_plain = [&](const std::string& s) {
    if (s.empty()) fail_at(line, "malformed number '" + tok + "'");
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      fail_at(line, "malformed number '" + tok + "'");
    }
    if (used != s.size()) fail_at(line, "malformed number '" + tok + "'");
    return v;
  };
  if (auto slash = tok.find('/'); slash != std::string::npos) {
    double num = parse_plain(tok.substr(0, slash));
    double den = parse_plain(tok.substr(slash + 1));
    if (den == 0.0) fail_at(line, "zero denominator in '" + tok + "'");
    return num / den;
  }
  return parse_plain(tok);
}

// "key=value" split; the value may itself contain '=' only for assignments
// handled elsewhere, so a single split is enough here.
std::pair<std::string, std::string> split_kv(const std::string& tok,
                                             int line) {
  auto eq = tok.find('=');
  if (eq == std::string::npos || eq == 0)
    fail_at(line, "expected key=value, got '" + tok + "'");
  return {tok.substr(0, eq), tok.substr(eq + 1)};
}

// Splits "head | assignment : items" used by table lines. The bar and colon
// are mandatory; assignment may be empty.
struct TableLine {
  std::vector<std::string> head;
  std::vector<std::string> assignment;  // "name=value" pieces
  std::string items;
};

TableLine split_table_line(const std::string& s, int line) {
  auto bar = s.find('|');
  if (bar == std::string::npos) fail_at(line, "missing '|'");
  auto colon = s.find(':', bar);
  if (colon == std::string::npos) fail_at(line, "missing ':'");
  TableLine out;
  out.head = split_ws(s.substr(0, bar));
  std::string assign = s.substr(bar + 1, colon - bar - 1);
  for (const auto& piece : split_on(assign, ','))
    for (const auto& sub : split_ws(piece))  // commas and/or spaces both work
      out.assignment.push_back(sub);
  out.items = s.substr(colon + 1);
  return out;
}

int find_value(const GNode& node, const std::string& name, int line) {
  auto it = std::find(node.domain.begin(), node.domain.end(), name);
  if (it == node.domain.end())
    fail_at(line,
            "node " + node.name + " has no value '" + name + "'");
  return static_cast<int>(it - node.domain.begin());
}

std::string g17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

GNet parse_game(const std::string& text) {
  GNet net;
  std::map<std::string, int> player_of, node_of;
  // (player, target) -> neighbor sources in declaration order
  std::map<std::pair<int, int>, std::vector<int>> arcs;
  struct TableKey {
    int player, node;
    bool operator<(const TableKey& o) const {
      return std::tie(player, node) < std::tie(o.player, o.node);
    }
  };
  struct TableFill {
    int first_line = 0;
    std::vector<char> filled;
  };
  std::map<TableKey, std::pair<size_t, TableFill>> pot_index;
  std::map<int, std::pair<size_t, TableFill>> cpt_index;
  int section = 0;  // 0 players, 1 nodes, 2 arcs, 3 tables
  bool have_players = false;

  auto advance_section = [&](int want, int line, const std::string& what) {
    if (want < section)
      fail_at(line, what + " must appear before " +
                        (section >= 3  ? "tables"
                         : section == 2 ? "uarc lines"
                                        : "node lines"));
    section = want;
  };

  auto resolve_node = [&](const std::string& name, int line) {
    auto it = node_of.find(name);
    if (it == node_of.end()) fail_at(line, "unknown node '" + name + "'");
    return it->second;
  };
  auto resolve_player = [&](const std::string& name, int line) {
    auto it = player_of.find(name);
    if (it == player_of.end()) fail_at(line, "unknown player '" + name + "'");
    return it->second;
  };

  for (const auto& ln : logical_lines(text)) {
    auto toks = split_ws(ln.text);
    if (toks.empty()) continue;
    const std::string& kw = toks[0];

    if (kw == "players") {
      if (have_players) fail_at(ln.number, "duplicate players line");
      if (toks.size() < 2) fail_at(ln.number, "players line needs names");
      for (size_t i = 1; i < toks.size(); ++i) {
        if (toks[i] == "nature")
          fail_at(ln.number, "'nature' is reserved and cannot be a player");
        if (!player_of.emplace(toks[i], static_cast<int>(net.players.size()))
                 .second)
          fail_at(ln.number, "duplicate player '" + toks[i] + "'");
        net.players.push_back(toks[i]);
      }
      have_players = true;
      continue;
    }
    if (!have_players) fail_at(ln.number, "players line must come first");

    if (kw == "node") {
      advance_section(1, ln.number, "node declarations");
      if (toks.size() < 3) fail_at(ln.number, "node line needs name and attributes");
      GNode node;
      node.name = toks[1];
      if (node_of.count(node.name))
        fail_at(ln.number, "duplicate node '" + node.name + "'");
      bool have_player = false, have_domain = false;
      std::string inactive_name;
      for (size_t i = 2; i < toks.size(); ++i) {
        auto [k, v] = split_kv(toks[i], ln.number);
        if (k == "player") {
          node.player = v == "nature" ? kNature : resolve_player(v, ln.number);
          have_player = true;
        } else if (k == "domain") {
          for (const auto& d : split_on(v, ',')) {
            if (d.empty()) fail_at(ln.number, "empty domain value");
            node.domain.push_back(d);
          }
          have_domain = true;
        } else if (k == "parents") {
          for (const auto& pn : split_on(v, ','))
            node.prob_parents.push_back(resolve_node(pn, ln.number));
        } else if (k == "inactive") {
          inactive_name = v;
        } else {
          fail_at(ln.number, "unknown node attribute '" + k + "'");
        }
      }
      if (!have_player || !have_domain)
        fail_at(ln.number, "node needs player= and domain=");
      for (size_t a = 0; a < node.domain.size(); ++a)
        for (size_t b = a + 1; b < node.domain.size(); ++b)
          if (node.domain[a] == node.domain[b])
            fail_at(ln.number, "duplicate domain value '" + node.domain[a] + "'");
      if (!inactive_name.empty())
        node.inactive_value = find_value(node, inactive_name, ln.number);
      node_of[node.name] = static_cast<int>(net.nodes.size());
      net.nodes.push_back(std::move(node));
      continue;
    }

    if (kw == "uarc") {
      advance_section(2, ln.number, "uarc lines");
      if (toks.size() != 4) fail_at(ln.number, "uarc needs: player nodeA nodeB");
      int pl = resolve_player(toks[1], ln.number);
      int a = resolve_node(toks[2], ln.number);
      int b = resolve_node(toks[3], ln.number);
      if (a == b) fail_at(ln.number, "uarc endpoints must differ");
      auto& list = arcs[{pl, b}];
      if (std::find(list.begin(), list.end(), a) != list.end())
        fail_at(ln.number, "duplicate uarc");
      list.push_back(a);
      continue;
    }

    if (kw == "potential") {
      advance_section(3, ln.number, "tables");
      TableLine tl = split_table_line(ln.text, ln.number);
      if (tl.head.size() != 3)
        fail_at(ln.number, "potential needs: potential <player> <node> | ... : ...");
      int pl = resolve_player(tl.head[1], ln.number);
      int nd = resolve_node(tl.head[2], ln.number);
      auto& node = net.nodes[static_cast<size_t>(nd)];
      std::vector<int> nbs;
      if (auto it = arcs.find({pl, nd}); it != arcs.end()) {
        nbs = it->second;
        std::sort(nbs.begin(), nbs.end());
      }
      auto key = TableKey{pl, nd};
      auto found = pot_index.find(key);
      if (found == pot_index.end()) {
        PotentialTable w;
        w.player = pl;
        w.node = nd;
        w.neighbors = nbs;
        int cols = assignment_count(net, nbs);
        w.entries = Eigen::ArrayXXd::Zero(
            static_cast<Eigen::Index>(node.domain.size()), cols);
        TableFill fill;
        fill.first_line = ln.number;
        fill.filled.assign(static_cast<size_t>(cols), 0);
        found = pot_index
                    .emplace(key, std::make_pair(net.potentials.size(),
                                                 std::move(fill)))
                    .first;
        net.potentials.push_back(std::move(w));
      }
      auto& table = net.potentials[found->second.first];
      auto& fill = found->second.second;

      Assignment full(net.nodes.size(), 0);
      std::vector<char> seen(net.nodes.size(), 0);
      for (const auto& piece : tl.assignment) {
        auto [nm, val] = split_kv(piece, ln.number);
        int nb = resolve_node(nm, ln.number);
        if (std::find(table.neighbors.begin(), table.neighbors.end(), nb) ==
            table.neighbors.end())
          fail_at(ln.number, "node '" + nm +
                                 "' is not a declared uarc neighbor of this potential");
        if (seen[static_cast<size_t>(nb)])
          fail_at(ln.number, "neighbor '" + nm + "' assigned twice");
        seen[static_cast<size_t>(nb)] = 1;
        full[static_cast<size_t>(nb)] =
            find_value(net.nodes[static_cast<size_t>(nb)], val, ln.number);
      }
      for (int nb : table.neighbors)
        if (!seen[static_cast<size_t>(nb)])
          fail_at(ln.number, "neighbor '" +
                                 net.nodes[static_cast<size_t>(nb)].name +
                                 "' missing from assignment");
      int col = assignment_index(net, table.neighbors, full);
      if (fill.filled[static_cast<size_t>(col)])
        fail_at(ln.number, "duplicate potential column");
      fill.filled[static_cast<size_t>(col)] = 1;

      std::vector<char> got(node.domain.size(), 0);
      for (const auto& piece : split_on(tl.items, ',')) {
        if (piece.empty()) continue;
        auto [vn, wtok] = split_kv(piece, ln.number);
        int v = find_value(node, vn, ln.number);
        if (got[static_cast<size_t>(v)])
          fail_at(ln.number, "value '" + vn + "' listed twice");
        got[static_cast<size_t>(v)] = 1;
        table.entries(v, col) = parse_number(wtok, ln.number);
      }
      for (size_t v = 0; v < got.size(); ++v)
        if (!got[v])
          fail_at(ln.number, "missing weight for value '" + node.domain[v] + "'");
      continue;
    }

    if (kw == "cpt") {
      advance_section(3, ln.number, "tables");
      TableLine tl = split_table_line(ln.text, ln.number);
      if (tl.head.size() != 2) fail_at(ln.number, "cpt needs: cpt <node> | ... : ...");
      int nd = resolve_node(tl.head[1], ln.number);
      auto& node = net.nodes[static_cast<size_t>(nd)];
      if (node.player != kNature)
        fail_at(ln.number, "cpt on non-nature node '" + node.name + "'");
      auto found = cpt_index.find(nd);
      if (found == cpt_index.end()) {
        Cpt cpt;
        cpt.node = nd;
        int rows = assignment_count(net, node.prob_parents);
        cpt.rows = Eigen::ArrayXXd::Zero(
            rows, static_cast<Eigen::Index>(node.domain.size()));
        TableFill fill;
        fill.first_line = ln.number;
        fill.filled.assign(static_cast<size_t>(rows), 0);
        found = cpt_index
                    .emplace(nd, std::make_pair(net.cpts.size(), std::move(fill)))
                    .first;
        net.cpts.push_back(std::move(cpt));
      }
      auto& cpt = net.cpts[found->second.first];
      auto& fill = found->second.second;

      Assignment full(net.nodes.size(), 0);
      std::vector<char> seen(net.nodes.size(), 0);
      for (const auto& piece : tl.assignment) {
        auto [nm, val] = split_kv(piece, ln.number);
        int pn = resolve_node(nm, ln.number);
        if (std::find(node.prob_parents.begin(), node.prob_parents.end(), pn) ==
            node.prob_parents.end())
          fail_at(ln.number, "node '" + nm + "' is not a parent of '" +
                                 node.name + "'");
        if (seen[static_cast<size_t>(pn)])
          fail_at(ln.number, "parent '" + nm + "' assigned twice");
        seen[static_cast<size_t>(pn)] = 1;
        full[static_cast<size_t>(pn)] =
            find_value(net.nodes[static_cast<size_t>(pn)], val, ln.number);
      }
      for (int pn : node.prob_parents)
        if (!seen[static_cast<size_t>(pn)])
          fail_at(ln.number, "parent '" +
                                 net.nodes[static_cast<size_t>(pn)].name +
                                 "' missing from assignment");
      int row = assignment_index(net, node.prob_parents, full);
      if (fill.filled[static_cast<size_t>(row)])
        fail_at(ln.number, "duplicate cpt row");
      fill.filled[static_cast<size_t>(row)] = 1;

      std::vector<char> got(node.domain.size(), 0);
      for (const auto& piece : split_on(tl.items, ',')) {
        if (piece.empty()) continue;
        auto [vn, ptok] = split_kv(piece, ln.number);
        int v = find_value(node, vn, ln.number);
        if (got[static_cast<size_t>(v)])
          fail_at(ln.number, "value '" + vn + "' listed twice");
        got[static_cast<size_t>(v)] = 1;
        cpt.rows(row, v) = parse_number(ptok, ln.number);
      }
      // unlisted values keep probability zero
      continue;
    }

    if (kw == "forced") {
      advance_section(3, ln.number, "tables");
      TableLine tl = split_table_line(ln.text, ln.number);
      if (tl.head.size() != 2)
        fail_at(ln.number, "forced needs: forced <node> | ... : <value>");
      int nd = resolve_node(tl.head[1], ln.number);
      auto& node = net.nodes[static_cast<size_t>(nd)];
      Assignment full(net.nodes.size(), 0);
      std::vector<char> seen(net.nodes.size(), 0);
      for (const auto& piece : tl.assignment) {
        auto [nm, val] = split_kv(piece, ln.number);
        int pn = resolve_node(nm, ln.number);
        if (std::find(node.prob_parents.begin(), node.prob_parents.end(), pn) ==
            node.prob_parents.end())
          fail_at(ln.number, "node '" + nm + "' is not a parent of '" +
                                 node.name + "'");
        if (seen[static_cast<size_t>(pn)])
          fail_at(ln.number, "parent '" + nm + "' assigned twice");
        seen[static_cast<size_t>(pn)] = 1;
        full[static_cast<size_t>(pn)] =
            find_value(net.nodes[static_cast<size_t>(pn)], val, ln.number);
      }
      for (int pn : node.prob_parents)
        if (!seen[static_cast<size_t>(pn)])
          fail_at(ln.number, "parent '" +
                                 net.nodes[static_cast<size_t>(pn)].name +
                                 "' missing from assignment");
      auto vtoks = split_ws(tl.items);
      if (vtoks.size() != 1)
        fail_at(ln.number, "forced row needs exactly one value");
      ForcedRow fr;
      fr.parent_assignment = assignment_index(net, node.prob_parents, full);
      fr.value = find_value(node, vtoks[0], ln.number);
      for (const auto& existing : node.forced_rows)
        if (existing.parent_assignment == fr.parent_assignment)
          fail_at(ln.number, "duplicate forced row");
      node.forced_rows.push_back(fr);
      continue;
    }

    if (kw == "reference") {
      advance_section(3, ln.number, "tables");
      auto rest = ln.text.substr(std::string("reference").size());
      for (const auto& piece : split_on(rest, ',')) {
        if (piece.empty()) continue;
        auto [nm, val] = split_kv(piece, ln.number);
        // tolerate surrounding spaces inside the piece
        std::string name = nm;
        if (auto b = name.find_first_not_of(" \t"); b != std::string::npos)
          name = name.substr(b);
        int nd = resolve_node(name, ln.number);
        net.nodes[static_cast<size_t>(nd)].reference_value =
            find_value(net.nodes[static_cast<size_t>(nd)], val, ln.number);
      }
      continue;
    }

    fail_at(ln.number, "unknown directive '" + kw + "'");
  }

  for (const auto& [key, entry] : pot_index) {
    const auto& fill = entry.second;
    for (char f : fill.filled)
      if (!f)
        fail_at(fill.first_line,
                "potential table starting here is missing a column");
  }
  for (const auto& [key, entry] : cpt_index) {
    const auto& fill = entry.second;
    for (char f : fill.filled)
      if (!f)
        fail_at(fill.first_line, "cpt starting here is missing a row");
  }
  for (const auto& node : net.nodes)
    if (node.player == kNature && !cpt_index.count(node_of[node.name]))
      throw Error("nature node '" + node.name + "' has no cpt");

  std::sort(net.potentials.begin(), net.potentials.end(),
            [](const PotentialTable& a, const PotentialTable& b) {
              return std::tie(a.player, a.node) < std::tie(b.player, b.node);
            });
  std::sort(net.cpts.begin(), net.cpts.end(),
            [](const Cpt& a, const Cpt& b) { return a.node < b.node; });
  return net;
}

std::string print_game(const GNet& net) {
  std::ostringstream os;
  os.precision(17);
  os << "players";
  for (const auto& p : net.players) os << ' ' << p;
  os << "\n\n";
  for (const auto& node : net.nodes) {
    os << "node " << node.name << " player="
       << (node.player == kNature ? std::string("nature")
                                  : net.players[static_cast<size_t>(node.player)])
       << " domain=";
    for (size_t v = 0; v < node.domain.size(); ++v)
      os << (v ? "," : "") << node.domain[v];
    if (!node.prob_parents.empty()) {
      os << " parents=";
      for (size_t i = 0; i < node.prob_parents.size(); ++i)
        os << (i ? "," : "")
           << net.nodes[static_cast<size_t>(node.prob_parents[i])].name;
    }
    if (node.inactive_value)
      os << " inactive=" << node.domain[static_cast<size_t>(*node.inactive_value)];
    os << "\n";
  }
  os << "\n";
  for (const auto& w : net.potentials)
    for (int nb : w.neighbors)
      os << "uarc " << net.players[static_cast<size_t>(w.player)] << ' '
         << net.nodes[static_cast<size_t>(nb)].name << ' '
         << net.nodes[static_cast<size_t>(w.node)].name << "\n";
  os << "\n";
  for (const auto& w : net.potentials) {
    const auto& node = net.nodes[static_cast<size_t>(w.node)];
    for (int col = 0; col < w.entries.cols(); ++col) {
      os << "potential " << net.players[static_cast<size_t>(w.player)] << ' '
         << node.name << " |";
      auto vals = assignment_values(net, w.neighbors, col);
      for (size_t i = 0; i < w.neighbors.size(); ++i)
        os << (i ? ", " : " ")
           << net.nodes[static_cast<size_t>(w.neighbors[i])].name << '='
           << net.nodes[static_cast<size_t>(w.neighbors[i])]
                  .domain[static_cast<size_t>(vals[i])];
      os << " :";
      for (int v = 0; v < w.entries.rows(); ++v)
        os << (v ? ", " : " ") << node.domain[static_cast<size_t>(v)] << '='
           << g17(w.entries(v, col));
      os << "\n";
    }
  }
  for (const auto& cpt : net.cpts) {
    const auto& node = net.nodes[static_cast<size_t>(cpt.node)];
    for (int row = 0; row < cpt.rows.rows(); ++row) {
      os << "cpt " << node.name << " |";
      auto vals = assignment_values(net, node.prob_parents, row);
      for (size_t i = 0; i < node.prob_parents.size(); ++i)
        os << (i ? ", " : " ")
           << net.nodes[static_cast<size_t>(node.prob_parents[i])].name << '='
           << net.nodes[static_cast<size_t>(node.prob_parents[i])]
                  .domain[static_cast<size_t>(vals[i])];
      os << " :";
      bool first = true;
      for (int v = 0; v < cpt.rows.cols(); ++v) {
        os << (first ? " " : ", ") << node.domain[static_cast<size_t>(v)] << '='
           << g17(cpt.rows(row, v));
        first = false;
      }
      os << "\n";
    }
  }
  for (const auto& node : net.nodes) {
    for (const auto& fr : node.forced_rows) {
      os << "forced " << node.name << " |";
      auto vals = assignment_values(net, node.prob_parents, fr.parent_assignment);
      for (size_t i = 0; i < node.prob_parents.size(); ++i)
        os << (i ? ", " : " ")
           << net.nodes[static_cast<size_t>(node.prob_parents[i])].name << '='
           << net.nodes[static_cast<size_t>(node.prob_parents[i])]
                  .domain[static_cast<size_t>(vals[i])];
      os << " : " << node.domain[static_cast<size_t>(fr.value)] << "\n";
    }
  }
  if (!net.nodes.empty()) {
    os << "reference ";
    for (size_t k = 0; k < net.nodes.size(); ++k)
      os << (k ? ", " : "") << net.nodes[k].name << '='
         << net.nodes[k].domain[static_cast<size_t>(net.nodes[k].reference_value)];
    os << "\n";
  }
  return os.str();
}

EfTree parse_ef(const std::string& text) {
  EfTree tree;
  std::map<std::string, int> player_of, node_of;
  bool have_players = false;

  for (const auto& ln : logical_lines(text)) {
    auto toks = split_ws(ln.text);
    if (toks.empty()) continue;
    const std::string& kw = toks[0];

    if (kw == "players") {
      if (have_players) fail_at(ln.number, "duplicate players line");
      for (size_t i = 1; i < toks.size(); ++i) {
        if (!player_of.emplace(toks[i], static_cast<int>(tree.players.size()))
                 .second)
          fail_at(ln.number, "duplicate player '" + toks[i] + "'");
        tree.players.push_back(toks[i]);
      }
      if (tree.players.empty()) fail_at(ln.number, "players line needs names");
      have_players = true;
      continue;
    }
    if (!have_players) fail_at(ln.number, "players line must come first");

    if (kw != "chance" && kw != "decision" && kw != "leaf")
      fail_at(ln.number, "unknown directive '" + kw + "'");
    if (toks.size() < 2) fail_at(ln.number, kw + " line needs a name");

    EfTree::Node node;
    node.name = toks[1];
    if (node_of.count(node.name))
      fail_at(ln.number, "duplicate node '" + node.name + "'");

    std::string body = ln.text;
    std::string items;
    if (kw == "chance") {
      auto colon = body.find(':');
      if (colon == std::string::npos)
        fail_at(ln.number, "chance line needs ': outcome=prob, ...'");
      items = body.substr(colon + 1);
      body = body.substr(0, colon);
    }
    auto attrs = split_ws(body);
    for (size_t i = 2; i < attrs.size(); ++i) {
      auto [k, v] = split_kv(attrs[i], ln.number);
      if (k == "parent") {
        auto sep = v.find(':');
        if (sep == std::string::npos)
          fail_at(ln.number, "parent needs <node>:<action>");
        auto it = node_of.find(v.substr(0, sep));
        if (it == node_of.end())
          fail_at(ln.number, "unknown parent '" + v.substr(0, sep) + "'");
        node.parent = it->second;
        const auto& par = tree.nodes[static_cast<size_t>(node.parent)];
        std::string act = v.substr(sep + 1);
        auto ait = std::find(par.actions.begin(), par.actions.end(), act);
        if (ait == par.actions.end())
          fail_at(ln.number, "parent has no action '" + act + "'");
        node.parent_action = static_cast<int>(ait - par.actions.begin());
      } else if (k == "player" && kw == "decision") {
        auto it = player_of.find(v);
        if (it == player_of.end())
          fail_at(ln.number, "unknown player '" + v + "'");
        node.player = it->second;
      } else if (k == "infoset" && kw == "decision") {
        node.infoset = v;
      } else if (k == "stage" && kw == "chance") {
        node.stage = v;
      } else if (k == "actions" && kw == "decision") {
        for (const auto& a : split_on(v, ',')) node.actions.push_back(a);
      } else if (k == "payoffs" && kw == "leaf") {
        auto pieces = split_on(v, ',');
        node.payoffs.resize(static_cast<Eigen::Index>(pieces.size()));
        for (size_t j = 0; j < pieces.size(); ++j)
          node.payoffs[static_cast<Eigen::Index>(j)] =
              parse_number(pieces[j], ln.number);
      } else {
        fail_at(ln.number, "unknown attribute '" + k + "' on " + kw + " line");
      }
    }

    if (kw == "chance") {
      node.kind = EfTree::Kind::Chance;
      if (node.stage.empty()) node.stage = node.name;
      node.infoset = node.stage;
      for (const auto& piece : split_on(items, ',')) {
        if (piece.empty()) continue;
        auto [on, pv] = split_kv(piece, ln.number);
        std::string name = on;
        if (auto b = name.find_first_not_of(" \t"); b != std::string::npos)
          name = name.substr(b);
        node.actions.push_back(name);
        node.probs.push_back(parse_number(pv, ln.number));
      }
    } else if (kw == "decision") {
      node.kind = EfTree::Kind::Decision;
      if (node.infoset.empty())
        fail_at(ln.number, "decision line needs infoset=");
      auto at = node.infoset.find('@');
      node.stage = at == std::string::npos ? node.infoset
                                           : node.infoset.substr(0, at);
    } else {
      node.kind = EfTree::Kind::Leaf;
    }
    if (node.parent == -1 && !tree.nodes.empty())
      fail_at(ln.number, "only the first node may omit parent=");
    if (node.parent != -1 &&
        tree.nodes[static_cast<size_t>(node.parent)].kind == EfTree::Kind::Leaf)
      fail_at(ln.number, "parent '" +
                             tree.nodes[static_cast<size_t>(node.parent)].name +
                             "' is a leaf");
    node_of[node.name] = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(std::move(node));
  }
  return tree;
}

std::string print_ef(const EfTree& tree) {
  std::ostringstream os;
  os.precision(17);
  os << "players";
  for (const auto& p : tree.players) os << ' ' << p;
  os << "\n";
  for (const auto& node : tree.nodes) {
    switch (node.kind) {
      case EfTree::Kind::Chance:
        os << "chance " << node.name;
        break;
      case EfTree::Kind::Decision:
        os << "decision " << node.name;
        break;
      case EfTree::Kind::Leaf:
        os << "leaf " << node.name;
        break;
    }
    if (node.parent != -1)
      os << " parent=" << tree.nodes[static_cast<size_t>(node.parent)].name
         << ':'
         << tree.nodes[static_cast<size_t>(node.parent)]
                .actions[static_cast<size_t>(node.parent_action)];
    switch (node.kind) {
      case EfTree::Kind::Chance: {
        os << " stage=" << node.stage << " :";
        for (size_t v = 0; v < node.actions.size(); ++v)
          os << (v ? ", " : " ") << node.actions[v] << '=' << g17(node.probs[v]);
        break;
      }
      case EfTree::Kind::Decision: {
        os << " player=" << tree.players[static_cast<size_t>(node.player)]
           << " infoset=" << node.infoset << " actions=";
        for (size_t v = 0; v < node.actions.size(); ++v)
          os << (v ? "," : "") << node.actions[v];
        break;
      }
      case EfTree::Kind::Leaf: {
        os << " payoffs=";
        for (Eigen::Index i = 0; i < node.payoffs.size(); ++i)
          os << (i ? "," : "") << g17(node.payoffs[i]);
        break;
      }
    }
    os << "\n";
  }
  return os.str();
}

std::string block_label(const GNet& net, int block) {
  const auto& blk = net.layout().block(block);
  const auto& node = net.nodes[static_cast<size_t>(blk.node)];
  std::string out = node.name + "|";
  auto vals = assignment_values(net, node.prob_parents, blk.parent_assignment);
  for (size_t i = 0; i < node.prob_parents.size(); ++i) {
    const auto& pn = net.nodes[static_cast<size_t>(node.prob_parents[i])];
    out += (i ? "," : "") + pn.name + "=" +
           pn.domain[static_cast<size_t>(vals[i])];
  }
  return out;
}

std::string write_solution(const GNet& net,
                           const std::vector<SolutionRecord>& records) {
  const auto& layout = net.layout();
  std::ostringstream os;
  os << "profiles: " << records.size() << "\n";
  for (size_t r = 0; r < records.size(); ++r) {
    os << "profile: " << (r + 1) << "\n";
    os << "label: " << records[r].label << "\n";
    os << "residual: " << g17(records[r].residual) << "\n";
    os << "slack: " << g17(records[r].slack) << "\n";
    for (size_t b = 0; b < layout.blocks().size(); ++b) {
      const auto& blk = layout.blocks()[b];
      const auto& node = net.nodes[static_cast<size_t>(blk.node)];
      for (int v = 0; v < blk.size; ++v)
        os << "coord: " << block_label(net, static_cast<int>(b)) << ' '
           << node.domain[static_cast<size_t>(v)] << ' '
           << g17(records[r].profile[blk.offset + v]) << "\n";
    }
    os << "end: " << (r + 1) << "\n";
  }
  return os.str();
}

std::vector<SolutionRecord> read_solution(const GNet& net,
                                          const std::string& text) {
  const auto& layout = net.layout();
  std::vector<SolutionRecord> out;
  SolutionRecord cur;
  bool in_profile = false;

  auto resolve_coord = [&](const std::string& label, const std::string& value,
                           int line) {
    auto bar = label.find('|');
    if (bar == std::string::npos) fail_at(line, "bad info-set label '" + label + "'");
    int nd = net.node_index(label.substr(0, bar));
    if (nd < 0) fail_at(line, "unknown node in label '" + label + "'");
    const auto& node = net.nodes[static_cast<size_t>(nd)];
    Assignment full(net.nodes.size(), 0);
    std::string rest = label.substr(bar + 1);
    std::vector<char> seen(net.nodes.size(), 0);
    if (!rest.empty()) {
      for (const auto& piece : split_on(rest, ',')) {
        auto [nm, val] = split_kv(piece, line);
        int pn = net.node_index(nm);
        if (pn < 0) fail_at(line, "unknown node '" + nm + "' in label");
        seen[static_cast<size_t>(pn)] = 1;
        full[static_cast<size_t>(pn)] =
            find_value(net.nodes[static_cast<size_t>(pn)], val, line);
      }
    }
    for (int pn : node.prob_parents)
      if (!seen[static_cast<size_t>(pn)])
        fail_at(line, "label '" + label + "' misses parent '" +
                          net.nodes[static_cast<size_t>(pn)].name + "'");
    int pa = assignment_index(net, node.prob_parents, full);
    int v = find_value(node, value, line);
    return layout.coord(nd, v, pa);
  };

  for (const auto& ln : logical_lines(text)) {
    auto colon = ln.text.find(':');
    if (colon == std::string::npos)
      fail_at(ln.number, "expected 'key: value'");
    std::string key = ln.text.substr(0, colon);
    std::string value = ln.text.substr(colon + 1);
    if (auto b = value.find_first_not_of(" \t"); b != std::string::npos)
      value = value.substr(b);
    else
      value.clear();

    if (key == "profiles") continue;
    if (key == "profile") {
      if (in_profile) fail_at(ln.number, "nested profile record");
      cur = SolutionRecord{};
      cur.profile = Eigen::VectorXd::Zero(layout.dim());
      in_profile = true;
    } else if (key == "label") {
      cur.label = value;
    } else if (key == "residual") {
      cur.residual = parse_number(value, ln.number);
    } else if (key == "slack") {
      cur.slack = parse_number(value, ln.number);
    } else if (key == "coord") {
      if (!in_profile) fail_at(ln.number, "coord outside profile record");
      auto toks = split_ws(value);
      if (toks.size() != 3)
        fail_at(ln.number, "coord needs: <infoset> <value> <probability>");
      int c = resolve_coord(toks[0], toks[1], ln.number);
      cur.profile[c] = parse_number(toks[2], ln.number);
    } else if (key == "end") {
      if (!in_profile) fail_at(ln.number, "end outside profile record");
      out.push_back(cur);
      in_profile = false;
    } else {
      fail_at(ln.number, "unknown key '" + key + "'");
    }
  }
  if (in_profile) throw Error("unterminated profile record");
  return out;
}

}  // namespace gnet
