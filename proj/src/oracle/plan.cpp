#include "cavex/oracle/plan.hpp"

#include <fstream>
#include <sstream>

namespace cavex {

std::string serialize_plan(const AttackPlan& plan) {
  std::ostringstream out;
  for (const Action& a : plan.prefix) {
    switch (a.kind) {
      case ActionKind::AttackerAccess: out << "A " << a.operand << '\n'; break;
      case ActionKind::AttackerFlush: out << "F " << a.operand << '\n'; break;
      case ActionKind::VictimTrigger: out << "V\n"; break;
      case ActionKind::Guess:
        throw ConfigError("serialize_plan: guess actions do not belong in a prefix");
    }
  }
  for (const auto& [trace, secret] : plan.decode) {
    out << "DECODE ";
    if (trace.empty())
      out << '-';  // empty-trace marker
    else
      out << trace;
    out << " -> " << secret << '\n';
  }
  return out.str();
}

AttackPlan parse_plan(const std::string& text) {
  AttackPlan plan;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    const std::string where = "plan line " + std::to_string(line_no);
    if (tok == "A" || tok == "F") {
      std::uint64_t operand;
      if (!(ls >> operand)) throw ConfigError(where + ": missing address");
      plan.prefix.push_back({tok == "A" ? ActionKind::AttackerAccess : ActionKind::AttackerFlush,
                             operand});
    } else if (tok == "V") {
      plan.prefix.push_back({ActionKind::VictimTrigger, 0});
    } else if (tok == "DECODE") {
      std::string trace, arrow;
      std::uint64_t secret;
      if (!(ls >> trace >> arrow >> secret) || arrow != "->")
        throw ConfigError(where + ": expected 'DECODE <trace> -> <secret>'");
      if (trace == "-") trace.clear();
      for (char c : trace)
        if (c != 'n' && c != 'h' && c != 'l' && c != 'm')
          throw ConfigError(where + ": bad trace character '" + std::string(1, c) + "'");
      if (!plan.decode.emplace(trace, secret).second)
        throw ConfigError(where + ": duplicate trace in decode table");
    } else {
      throw ConfigError(where + ": unknown directive '" + tok + "'");
    }
  }
  return plan;
}

void save_plan(const std::string& path, const AttackPlan& plan) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_plan: cannot open " + path);
  out << serialize_plan(plan);
}

AttackPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_plan: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_plan(buf.str());
}

}  // namespace cavex
